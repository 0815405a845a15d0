use std::path::PathBuf;
use std::process::{Command, Output};

fn channel(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "channels", name].iter().collect();
    p.display().to_string()
}

fn rpcap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rpcap")).args(args).output().expect("binary runs")
}

fn json_of(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn capacity_document_carries_manifest_and_estimate() {
    let ch = channel("dephasing.json");
    let out = rpcap(&["capacity", "--channel", &ch, "--scenario", "none", "--restarts", "4", "--seed", "7", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json_of(&out);
    assert_eq!(doc["manifest"]["command"], "capacity");
    assert_eq!(doc["manifest"]["seed"], 7);
    assert_eq!(doc["manifest"]["arguments"]["scenario"], "none");
    assert_eq!(doc["manifest"]["arguments"]["restarts"], 4);
    assert!(doc["manifest"]["arguments"].get("json").is_none());
    assert_eq!(doc["result"]["scenario"], "none");
    let v = doc["result"]["value_bits"].as_f64().unwrap();
    assert!((v - 1.0).abs() < 0.02, "{v}");
}

#[test]
fn out_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nested/baseline.json");
    let ch = channel("classical_xor.json");
    let out = rpcap(&["baseline", "--channel", &ch, "--out", path.to_str().unwrap(), "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let file: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(file, json_of(&out));
    assert!((file["result"]["shannon_strategy"].as_f64().unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn malformed_channel_exits_with_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"dim_in\": 2,").unwrap();
    let out = rpcap(&["capacity", "--channel", bad.to_str().unwrap(), "--scenario", "none"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("parse error"));

    // Kraus set that is not trace preserving
    std::fs::write(&bad, r#"{"name":"x","dim_in":1,"dim_out":1,"params":[{"prob":1.0,"kraus":[[[[0.5,0.0]]]]}]}"#)
        .unwrap();
    let out = rpcap(&["capacity", "--channel", bad.to_str().unwrap(), "--scenario", "none"]);
    assert_eq!(out.status.code(), Some(2));

    let out = rpcap(&["capacity", "--channel", "/nonexistent/channel.json", "--scenario", "none"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_with_input_error() {
    let ch = channel("identity.json");
    assert_eq!(rpcap(&["capacity", "--channel", &ch, "--scenario", "sideways"]).status.code(), Some(2));
    assert_eq!(rpcap(&["verify", "--suite", "everything"]).status.code(), Some(2));
    assert_eq!(rpcap(&["simulate", "--channel", &ch, "--scheme", "causal", "--n", "1"]).status.code(), Some(2));
    assert_eq!(rpcap(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn simulate_reports_superdense_coding_and_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let ch = channel("identity.json");
    let out = rpcap(&[
        "simulate",
        "--channel",
        &ch,
        "--scheme",
        "causal",
        "--n",
        "1,2",
        "--messages",
        "4",
        "--csv",
        csv.to_str().unwrap(),
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json_of(&out);
    let points = doc["result"]["points"].as_array().unwrap();
    assert_eq!(points.len(), 2);
    assert!(points[0]["max_error"].as_f64().unwrap() <= 1e-12);
    assert_eq!(points[0]["averaging"]["mode"], "exact");
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,rate,max_error,avg_error");
    assert!(lines[1].starts_with("1,2.000000000000,0.000000000000"));
    assert_eq!(lines.len(), 3);
}

#[test]
fn simulate_rate_sets_message_count() {
    let ch = channel("depolarizing.json");
    let out = rpcap(&["simulate", "--channel", &ch, "--scheme", "causal", "--n", "2", "--rate", "1.5", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let p = &json_of(&out)["result"]["points"][0];
    assert_eq!(p["message_count"], 8);
    assert!((p["avg_error"].as_f64().unwrap() - 0.875).abs() < 1e-9);
}

#[test]
fn simulate_noncausal_with_correcting_family() {
    let (ch, fam) = (channel("dephasing.json"), channel("dephasing_correcting_family.json"));
    let out = rpcap(&[
        "simulate",
        "--channel",
        &ch,
        "--family",
        &fam,
        "--scheme",
        "noncausal",
        "--n",
        "2",
        "--messages",
        "4",
        "--covering-rate",
        "0",
        "--covering-delta",
        "0.6",
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let p = &json_of(&out)["result"]["points"][0];
    assert!(p["max_error"].as_f64().unwrap() <= 1e-12);
    assert_eq!(p["covering_failures"], 0);
}

#[test]
fn oversized_blocklength_names_the_limit() {
    let ch = channel("identity.json");
    let out = rpcap(&["simulate", "--channel", &ch, "--scheme", "causal", "--n", "12", "--messages", "4"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("cap exceeded") && err.contains("4096"), "{err}");
}

#[test]
fn verify_suites_pass_and_faults_fail() {
    for (suite, extra) in
        [("algebra", vec![]), ("packing", vec!["--n", "2"]), ("covering", vec!["--n", "40", "--trials", "300"])]
    {
        let mut args = vec!["verify", "--suite", suite];
        args.extend(&extra);
        let out = rpcap(&args);
        assert_eq!(out.status.code(), Some(0), "{suite}: {}", String::from_utf8_lossy(&out.stdout));
        let text = String::from_utf8_lossy(&out.stdout);
        assert!(text.lines().all(|l| l.starts_with("PASS") || l.starts_with("measured alpha")), "{text}");

        args.push("--inject-fault");
        let out = rpcap(&args);
        assert_eq!(out.status.code(), Some(1), "{suite} with fault");
        assert!(String::from_utf8_lossy(&out.stderr).contains("first failing check"));
    }
}

#[test]
fn verify_packing_prints_measured_alpha() {
    let out = rpcap(&["verify", "--suite", "packing", "--n", "3", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json_of(&out);
    assert_eq!(doc["result"]["all_pass"], true);
    assert!(doc["result"]["extra"]["alpha_measured"].as_f64().unwrap() <= 0.1);
    assert_eq!(doc["result"]["checks"].as_array().unwrap().len(), 4);
}

#[test]
fn baseline_rejects_inconsistent_classical_channel() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"w": [[[0.5]], [[0.4]]], "q": [1.0]}"#).unwrap();
    assert_eq!(rpcap(&["baseline", "--channel", bad.to_str().unwrap()]).status.code(), Some(2));
    std::fs::write(&bad, r#"{"q": [1.0]}"#).unwrap();
    assert_eq!(rpcap(&["baseline", "--channel", bad.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn baseline_reports_both_values() {
    let ch = channel("classical_bsc.json");
    let out = rpcap(&["baseline", "--channel", &ch, "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let r = &json_of(&out)["result"];
    let oracle = 1.0 - (-(0.1f64 * 0.1f64.log2() + 0.9 * 0.9f64.log2()));
    assert!((r["shannon_strategy"].as_f64().unwrap() - oracle).abs() < 1e-4);
    assert!((r["gelfand_pinsker"].as_f64().unwrap() - oracle).abs() < 1e-4);
    assert_eq!(r["channel"], "bsc-0.1");
}
