use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

/// Provenance block embedded in every output document.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub arguments: BTreeMap<String, Value>,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub timestamp: String,
}

impl RunManifest {
    /// `args` must serialize to a JSON object; keys are sorted.
    pub fn new<A: Serialize>(command: &str, args: &A, seed: Option<u64>) -> Self {
        let arguments = match serde_json::to_value(args).expect("arguments serialize") {
            Value::Object(map) => map.into_iter().collect(),
            other => BTreeMap::from([("value".to_string(), other)]),
        };
        RunManifest {
            command: command.to_string(),
            arguments,
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }
}

/// `{"manifest": ..., "result": ...}`, pretty-printed.
pub fn document(manifest: &RunManifest, result: &Value) -> String {
    let doc = serde_json::json!({ "manifest": manifest, "result": result });
    serde_json::to_string_pretty(&doc).expect("document serializes")
}

pub fn write_file(path: &Path, text: &str) -> std::io::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)
}
