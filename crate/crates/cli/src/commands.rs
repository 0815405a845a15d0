use std::path::PathBuf;

use clap::builder::PossibleValuesParser;
use clap::{ArgGroup, Args};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use rpcap_core::capacity::{
    classical_gelfand_pinsker, classical_shannon_strategy, maximize, ClassicalChannelWithState, CsiScenario,
    GelfandPinskerConfig, OptimizerConfig,
};
use rpcap_core::protosim::{simulate as run_scheme, DecoderKind, SimConfig, SimReport};
use rpcap_core::quantum::max_entangled;
use rpcap_core::rpchannel::{load_family, load_pure_state, load_spec, EncoderFamily};
use rpcap_core::Error;

use crate::manifest::{document, write_file, RunManifest};
use crate::verify::{run_suite, VerifyOptions, SUITES};
use crate::CliError;

type CmdResult = std::result::Result<(), CliError>;

#[derive(Args, Debug, Serialize)]
pub struct CapacityArgs {
    /// Channel specification (JSON).
    #[arg(long)]
    pub channel: PathBuf,
    /// none | causal | noncausal | decoder | both
    #[arg(long)]
    pub scenario: String,
    #[arg(long, default_value_t = 16)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Encoder input dimension (defaults to the channel input dimension).
    #[arg(long)]
    pub dim_k: Option<usize>,
    /// Reference dimension (defaults to the encoder input dimension).
    #[arg(long)]
    pub dim_ref: Option<usize>,
    /// Environment dimension of the encoder dilations.
    #[arg(long, default_value_t = 1)]
    pub dim_env: usize,
    #[arg(long, default_value_t = 400)]
    pub max_iters: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print the JSON document on stdout.
    #[arg(long)]
    #[serde(skip)]
    pub json: bool,
}

#[derive(Args, Debug, Serialize)]
#[command(group(ArgGroup::new("size").required(true).args(["messages", "rate"])))]
pub struct SimulateArgs {
    #[arg(long)]
    pub channel: PathBuf,
    /// causal | noncausal
    #[arg(long)]
    pub scheme: String,
    /// Encoder family (JSON); identity maps by default.
    #[arg(long)]
    pub family: Option<PathBuf>,
    /// Shared pure state on K ⊗ B (JSON); maximally entangled by default.
    #[arg(long)]
    pub xi: Option<PathBuf>,
    /// Blocklengths, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    #[arg(long)]
    pub messages: Option<usize>,
    /// Rate in bits per use; the message count is round(2^{nR}), at least 2.
    #[arg(long)]
    pub rate: Option<f64>,
    #[arg(long, default_value_t = rpcap_core::protosim::DEFAULT_DELTA)]
    pub delta: f64,
    /// projector | pgm
    #[arg(long, default_value = "projector")]
    pub decoder: String,
    #[arg(long, default_value_t = 0.2)]
    pub covering_rate: f64,
    #[arg(long, default_value_t = rpcap_core::protosim::DEFAULT_DELTA)]
    pub covering_delta: f64,
    #[arg(long, default_value_t = 4096)]
    pub mc_samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Plot-ready sweep table.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub json: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_parser = PossibleValuesParser::new(SUITES))]
    pub suite: String,
    /// Blocklength (packing: 3; covering: the smaller of n and 4n, default 100).
    #[arg(long)]
    pub n: Option<usize>,
    /// Monte Carlo trials per blocklength (covering).
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    /// Typicality slack (packing).
    #[arg(long, default_value_t = 0.2)]
    pub delta: f64,
    /// Allowed trace deficit (packing).
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Corrupt the suite's fixture; the suite must then fail.
    #[arg(long)]
    pub inject_fault: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub json: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct BaselineArgs {
    /// Classical channel: {"w": p[y][x][s], "q": [...]}.
    #[arg(long)]
    pub channel: PathBuf,
    /// Auxiliary alphabet size for the Gel'fand-Pinsker search (default |S|).
    #[arg(long)]
    pub u_size: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub json: bool,
}

/// Writes the document to `--out`, and either prints it (`--json`) or the
/// human summary.
fn emit(manifest: &RunManifest, result: &Value, out: &Option<PathBuf>, json: bool, summary: &str) -> CmdResult {
    let doc = document(manifest, result);
    if let Some(path) = out {
        write_file(path, &doc)?;
    }
    if json {
        println!("{doc}");
    } else {
        print!("{summary}");
    }
    Ok(())
}

pub fn capacity(args: &CapacityArgs) -> CmdResult {
    let scenario = CsiScenario::parse(&args.scenario)?;
    let rp = load_spec(&args.channel)?;
    let cfg = OptimizerConfig {
        dim_k: args.dim_k,
        dim_ref: args.dim_ref,
        dim_env: args.dim_env,
        restarts: args.restarts,
        max_iters: args.max_iters,
        seed: args.seed,
        ..OptimizerConfig::default()
    };
    let est = maximize(scenario, &rp, &cfg)?;
    let manifest = RunManifest::new("capacity", args, Some(args.seed));
    let summary = format!(
        "{} [{}]: {:.6} bits ({} restarts{})\n",
        rp.name(),
        scenario,
        est.value_bits,
        est.restart_values.len(),
        if est.converged { "" } else { ", not converged" }
    );
    let mut result = est.to_json();
    result["channel"] = json!(rp.name());
    emit(&manifest, &result, &args.out, args.json, &summary)
}

fn message_count(args: &SimulateArgs, n: usize) -> Result<usize, Error> {
    match (args.messages, args.rate) {
        (Some(m), _) => Ok(m),
        (None, Some(r)) if r.is_finite() && r >= 0.0 => {
            let m = (n as f64 * r).exp2().round();
            if m > usize::MAX as f64 / 2.0 {
                return Err(Error::CapExceeded(format!("rate {r} at n = {n} gives 2^{} messages", n as f64 * r)));
            }
            Ok((m as usize).max(2))
        }
        (None, Some(r)) => Err(Error::InvalidArgument(format!("rate must be finite and non-negative, got {r}"))),
        (None, None) => Err(Error::InvalidArgument("either --messages or --rate is required".into())),
    }
}

pub fn simulate(args: &SimulateArgs) -> CmdResult {
    let decoder = DecoderKind::parse(&args.decoder)?;
    let rp = load_spec(&args.channel)?;
    let fam = match &args.family {
        Some(p) => load_family(p)?,
        None => EncoderFamily::identity(rp.dim_in(), rp.num_params()),
    };
    let xi = match &args.xi {
        Some(p) => load_pure_state(p)?,
        None => max_entangled(fam.dim_k()),
    };
    let mut reports: Vec<SimReport> = Vec::with_capacity(args.n.len());
    for &n in &args.n {
        let mut cfg = SimConfig::new(n, message_count(args, n)?, args.seed);
        cfg.delta = args.delta;
        cfg.decoder = decoder;
        cfg.covering_rate = args.covering_rate;
        cfg.covering_delta = args.covering_delta;
        cfg.mc_samples = args.mc_samples;
        reports.push(run_scheme(&args.scheme, &rp, &fam, &xi, &cfg)?);
    }
    if let Some(path) = &args.csv {
        let mut text = String::from(SimReport::CSV_HEADER);
        text.push('\n');
        for r in &reports {
            text.push_str(&r.csv_row());
            text.push('\n');
        }
        write_file(path, &text)?;
    }
    let manifest = RunManifest::new("simulate", args, Some(args.seed));
    let mut summary = String::new();
    for r in &reports {
        summary.push_str(&format!(
            "{} n={} M={} rate={:.4}: max_error={:.6} avg_error={:.6}\n",
            r.scheme, r.n, r.message_count, r.rate, r.max_error, r.avg_error
        ));
    }
    let result = json!({
        "channel": rp.name(),
        "scheme": args.scheme,
        "points": reports,
    });
    emit(&manifest, &result, &args.out, args.json, &summary)
}

pub fn verify(args: &VerifyArgs) -> CmdResult {
    let opts = VerifyOptions {
        n: args.n,
        trials: args.trials,
        delta: args.delta,
        alpha: args.alpha,
        seed: args.seed,
        inject_fault: args.inject_fault,
    };
    let report = run_suite(&args.suite, &opts)?;
    let mut summary = String::new();
    for c in &report.checks {
        summary.push_str(&format!(
            "{} {}: measured {:.3e}, bound {:.3e} {}\n",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.measured,
            c.bound,
            c.detail
        ));
    }
    if let Some(alpha) = report.extra.get("alpha_measured") {
        summary.push_str(&format!("measured alpha {alpha}\n"));
    }
    let manifest = RunManifest::new("verify", args, Some(args.seed));
    let result = serde_json::to_value(&report).expect("report serializes");
    emit(&manifest, &result, &args.out, args.json, &summary)?;
    match report.first_failure {
        None => Ok(()),
        Some(name) => Err(CliError::VerificationFailed(name)),
    }
}

#[derive(Deserialize)]
struct ClassicalSpec {
    #[serde(default)]
    name: Option<String>,
    w: Vec<Vec<Vec<f64>>>,
    q: Vec<f64>,
}

pub fn baseline(args: &BaselineArgs) -> CmdResult {
    let text = std::fs::read_to_string(&args.channel)?;
    let spec: ClassicalSpec =
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("classical channel spec: {e}")))?;
    let ch = ClassicalChannelWithState::from_yxs(&spec.w, spec.q)?;
    let u_size = args.u_size.unwrap_or(ch.s_size());
    let shannon = classical_shannon_strategy(&ch)?;
    let gp = classical_gelfand_pinsker(&ch, &GelfandPinskerConfig::new(u_size))?;
    let name = spec.name.unwrap_or_else(|| args.channel.display().to_string());
    let manifest = RunManifest::new("baseline", args, None);
    let summary = format!("{name}: shannon_strategy={shannon:.6} gelfand_pinsker={gp:.6} (|U|={u_size})\n");
    let result = json!({
        "channel": name,
        "x_size": ch.x_size(),
        "y_size": ch.y_size(),
        "s_size": ch.s_size(),
        "u_size": u_size,
        "shannon_strategy": shannon,
        "gelfand_pinsker": gp,
    });
    emit(&manifest, &result, &args.out, args.json, &summary)
}
