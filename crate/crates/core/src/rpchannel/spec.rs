//! JSON channel specification files.
//!
//! ```json
//! {"name": "...", "dim_in": 2, "dim_out": 2,
//!  "params": [{"label": "0", "prob": 0.5, "kraus": [[[1.0, 0.0], [0.0, 0.0]], ...]}]}
//! ```
//!
//! Matrices are arrays of rows, entries are `[re, im]`. The canonical writer
//! keeps keys in the order above and prints doubles with 17 significant
//! digits so that `parse(write(ch)) == ch` bit for bit.

use super::{EncoderFamily, RandomParameterChannel};
use crate::error::{Error, Result};
use crate::qcore::{c, CMatrix, C64};
use crate::quantum::{KrausChannel, PureState};
use serde_json::Value;
use std::fmt::Write as _;
use std::path::Path;

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn field<'a>(obj: &'a Value, key: &str, ctx: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| parse_err(format!("{ctx}: missing field {key:?}")))
}

fn as_dim(v: &Value, ctx: &str) -> Result<usize> {
    match v.as_u64() {
        Some(d) if d > 0 => Ok(d as usize),
        _ => Err(parse_err(format!("{ctx}: expected a positive integer"))),
    }
}

fn as_f64(v: &Value, ctx: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| parse_err(format!("{ctx}: expected a number")))
}

fn parse_complex(v: &Value, ctx: &str) -> Result<C64> {
    match v.as_array().map(|a| a.as_slice()) {
        Some([re, im]) => Ok(c(as_f64(re, ctx)?, as_f64(im, ctx)?)),
        _ => Err(parse_err(format!("{ctx}: complex entries must be [re, im]"))),
    }
}

fn parse_matrix(v: &Value, rows: usize, cols: usize, ctx: &str) -> Result<CMatrix> {
    let row_vals = v.as_array().ok_or_else(|| parse_err(format!("{ctx}: matrix must be an array of rows")))?;
    if row_vals.len() != rows {
        return Err(Error::Validation(format!("{ctx}: has {} rows, expected {rows}", row_vals.len())));
    }
    let mut entries = Vec::with_capacity(rows * cols);
    for (i, r) in row_vals.iter().enumerate() {
        let r = r.as_array().ok_or_else(|| parse_err(format!("{ctx}: row {i} is not an array")))?;
        if r.len() != cols {
            return Err(Error::Validation(format!("{ctx}: row {i} has {} entries, expected {cols}", r.len())));
        }
        for e in r {
            entries.push(parse_complex(e, ctx)?);
        }
    }
    CMatrix::from_row_major(rows, cols, entries)
}

fn parse_kraus_list(v: &Value, din: usize, dout: usize, ctx: &str) -> Result<KrausChannel> {
    let list = v.as_array().ok_or_else(|| parse_err(format!("{ctx}: \"kraus\" must be an array")))?;
    let ops = list
        .iter()
        .enumerate()
        .map(|(k, m)| parse_matrix(m, dout, din, &format!("{ctx} Kraus operator {k}")))
        .collect::<Result<Vec<_>>>()?;
    KrausChannel::new_unchecked(din, dout, ops).map_err(|e| Error::Validation(format!("{ctx}: {e}")))
}

fn label_of(p: &Value, index: usize) -> Result<String> {
    match p.get("label") {
        None => Ok(index.to_string()),
        Some(Value::String(s)) => Ok(s.clone()),
        Some(Value::Number(n)) => Ok(n.to_string()),
        Some(_) => Err(parse_err(format!("parameter {index}: label must be a string"))),
    }
}

pub fn parse_spec(text: &str) -> Result<RandomParameterChannel> {
    let root: Value = serde_json::from_str(text).map_err(|e| parse_err(format!("channel spec: {e}")))?;
    let name = field(&root, "name", "channel spec")?
        .as_str()
        .ok_or_else(|| parse_err("channel spec: \"name\" must be a string"))?;
    let din = as_dim(field(&root, "dim_in", "channel spec")?, "dim_in")?;
    let dout = as_dim(field(&root, "dim_out", "channel spec")?, "dim_out")?;
    let params = field(&root, "params", "channel spec")?
        .as_array()
        .ok_or_else(|| parse_err("channel spec: \"params\" must be an array"))?;
    let mut labels = Vec::new();
    let mut probs = Vec::new();
    let mut branches = Vec::new();
    for (i, p) in params.iter().enumerate() {
        let label = label_of(p, i)?;
        let ctx = format!("branch s={label}");
        probs.push(as_f64(field(p, "prob", &ctx)?, &format!("{ctx} prob"))?);
        branches.push(parse_kraus_list(field(p, "kraus", &ctx)?, din, dout, &ctx)?);
        labels.push(label);
    }
    RandomParameterChannel::new(name, labels, probs, branches)
}

pub fn load_spec(path: impl AsRef<Path>) -> Result<RandomParameterChannel> {
    let text = std::fs::read_to_string(path.as_ref())?;
    parse_spec(&text)
}

fn fmt_f64(out: &mut String, x: f64) {
    // `{:.16e}` prints 17 significant digits.
    write!(out, "{x:.16e}").expect("writing to a String");
}

fn write_matrix(out: &mut String, m: &CMatrix) {
    out.push('[');
    for i in 0..m.rows() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push('[');
        for j in 0..m.cols() {
            if j > 0 {
                out.push_str(", ");
            }
            out.push('[');
            fmt_f64(out, m[(i, j)].re);
            out.push_str(", ");
            fmt_f64(out, m[(i, j)].im);
            out.push(']');
        }
        out.push(']');
    }
    out.push(']');
}

/// Canonical serialization of a channel specification.
pub fn to_canonical_json(rp: &RandomParameterChannel) -> String {
    let mut out = String::new();
    out.push_str("{\n");
    out.push_str(&format!("  \"name\": {},\n", Value::String(rp.name().to_string())));
    out.push_str(&format!("  \"dim_in\": {},\n  \"dim_out\": {},\n", rp.dim_in(), rp.dim_out()));
    out.push_str("  \"params\": [\n");
    for (i, ((label, p), b)) in rp.labels().iter().zip(rp.probs()).zip(rp.branches()).enumerate() {
        out.push_str(&format!("    {{\"label\": {}, \"prob\": ", Value::String(label.clone())));
        fmt_f64(&mut out, *p);
        out.push_str(", \"kraus\": [");
        for (k, op) in b.kraus().iter().enumerate() {
            if k > 0 {
                out.push_str(", ");
            }
            write_matrix(&mut out, op);
        }
        out.push_str("]}");
        out.push_str(if i + 1 < rp.num_params() { ",\n" } else { "\n" });
    }
    out.push_str("  ]\n}\n");
    out
}

pub fn save_spec(rp: &RandomParameterChannel, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path.as_ref(), to_canonical_json(rp))?;
    Ok(())
}

/// Encoder family file: `{"dim_in", "dim_out", "maps": [{"label", "kraus"}]}`,
/// one map per parameter value in channel order.
pub fn parse_family(text: &str) -> Result<EncoderFamily> {
    let root: Value = serde_json::from_str(text).map_err(|e| parse_err(format!("family spec: {e}")))?;
    let din = as_dim(field(&root, "dim_in", "family spec")?, "dim_in")?;
    let dout = as_dim(field(&root, "dim_out", "family spec")?, "dim_out")?;
    let maps = field(&root, "maps", "family spec")?
        .as_array()
        .ok_or_else(|| parse_err("family spec: \"maps\" must be an array"))?;
    let chans = maps
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let label = label_of(m, i)?;
            parse_kraus_list(field(m, "kraus", "family map")?, din, dout, &format!("encoder map s={label}"))
        })
        .collect::<Result<Vec<_>>>()?;
    EncoderFamily::new(chans)
}

pub fn load_family(path: impl AsRef<Path>) -> Result<EncoderFamily> {
    parse_family(&std::fs::read_to_string(path.as_ref())?)
}

/// Pure state file: `{"amplitudes": [[re, im], ...]}`.
pub fn parse_pure_state(text: &str) -> Result<PureState> {
    let root: Value = serde_json::from_str(text).map_err(|e| parse_err(format!("state spec: {e}")))?;
    let amps = field(&root, "amplitudes", "state spec")?
        .as_array()
        .ok_or_else(|| parse_err("state spec: \"amplitudes\" must be an array"))?
        .iter()
        .map(|v| parse_complex(v, "state spec"))
        .collect::<Result<Vec<_>>>()?;
    PureState::new(amps)
}

pub fn load_pure_state(path: impl AsRef<Path>) -> Result<PureState> {
    parse_pure_state(&std::fs::read_to_string(path.as_ref())?)
}
