//! Exact small-blocklength execution of the entanglement-assisted coding
//! schemes: random block-operator codebooks, the causal and the binned
//! non-causal encoders, square-root decoding and Born-rule error
//! probabilities averaged over the parameter sequence.
//!
//! Alice's encoding operators act on type-like blocks of the shared state
//! `ξ^{⊗n}` written in its Schmidt basis. Blocks group letters by Schmidt
//! coefficient, so `ξ^{⊗n}` is constant on every block and each block
//! operator can be moved to Bob's side.

mod codebook;
mod decoder;
mod encode;
mod layout;
mod measure;
mod packing;

pub use codebook::{BinnedCodebook, GammaCodebook};
pub use decoder::{DecoderGeometry, DecoderKind, TypicalStats};
pub use encode::{channel_apply_n, encode_causal, encode_noncausal, NoncausalCodebooks, NoncausalEncoding};
pub use layout::{u_of_gamma, BlockLayout, EntangledResource, GammaVector, SCHMIDT_CLASS_TOL};
pub use measure::{sqrt_measurement, Povm, POVM_PSD_TOL, POVM_SUM_TOL};
pub use packing::{
    packing_conditions_check, scheme_packing_check, scheme_packing_fixture, PackingBounds, PackingCondition,
    PackingFixture, PackingReport, SchemePacking, PACKING_TOL,
};

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::mtypes::{index_to_sequence, sample_sequence, DIM_CAP};
use crate::qcore::CMatrix;
use crate::quantum::{DensityOperator, PureState};
use crate::rng::stream;
use crate::rpchannel::{EncoderFamily, RandomParameterChannel};
use encode::{apply_letterwise, checked_power, grouped_dims};

pub const DEFAULT_DELTA: f64 = 0.2;
/// Parameter sequences are enumerated exactly up to this many.
pub const EXACT_AVERAGE_CAP: usize = 4096;

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub n: usize,
    pub num_messages: usize,
    /// Typicality slack of the decoder projectors.
    pub delta: f64,
    pub decoder: DecoderKind,
    /// Per-letter rate of each bin in the non-causal scheme.
    pub covering_rate: f64,
    pub covering_delta: f64,
    /// Joint pmf of parameter and auxiliary symbol, `p_sx[s][x]`. Defaults to
    /// the product of the parameter pmf and the Schmidt class pmf.
    pub p_sx: Option<Vec<Vec<f64>>>,
    /// Parameter sequences sampled when exact averaging is unaffordable.
    pub mc_samples: usize,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(n: usize, num_messages: usize, seed: u64) -> Self {
        SimConfig {
            n,
            num_messages,
            delta: DEFAULT_DELTA,
            decoder: DecoderKind::Projector,
            covering_rate: 0.2,
            covering_delta: DEFAULT_DELTA,
            p_sx: None,
            mc_samples: 4096,
            seed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum Averaging {
    Exact,
    MonteCarlo { samples: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimReport {
    pub scheme: String,
    pub n: usize,
    pub message_count: usize,
    /// `log2(M) / n`.
    pub rate: f64,
    pub decoder: DecoderKind,
    pub delta: f64,
    pub per_message_error: Vec<f64>,
    pub max_error: f64,
    pub avg_error: f64,
    /// Non-causal scheme only: `(m, s^n)` pairs whose bin had no typical sequence.
    pub covering_failures: Option<usize>,
    /// Non-causal scheme only: probability of a covering failure.
    pub covering_failure_rate: Option<f64>,
    pub averaging: Averaging,
    pub block_dims: Vec<usize>,
    pub seed: u64,
}

impl SimReport {
    pub const CSV_HEADER: &'static str = "n,rate,max_error,avg_error";

    fn assemble(
        job: &SimJob<'_>,
        scheme: &str,
        errors: Vec<f64>,
        averaging: Averaging,
        block_dims: Vec<usize>,
    ) -> Self {
        let per_message_error: Vec<f64> = errors.into_iter().map(|e| e.clamp(0.0, 1.0)).collect();
        let max_error = per_message_error.iter().copied().fold(0.0, f64::max);
        let avg_error = per_message_error.iter().sum::<f64>() / per_message_error.len() as f64;
        let cfg = job.cfg;
        SimReport {
            scheme: scheme.to_string(),
            n: cfg.n,
            message_count: cfg.num_messages,
            rate: (cfg.num_messages as f64).log2() / cfg.n as f64,
            decoder: cfg.decoder,
            delta: cfg.delta,
            per_message_error,
            max_error,
            avg_error: avg_error.min(max_error),
            covering_failures: None,
            covering_failure_rate: None,
            averaging,
            block_dims,
            seed: cfg.seed,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn csv_row(&self) -> String {
        format!("{},{:.12},{:.12},{:.12}", self.n, self.rate, self.max_error, self.avg_error)
    }
}

/// Everything a scheme needs for one run.
pub struct SimJob<'a> {
    pub rp: &'a RandomParameterChannel,
    pub fam: &'a EncoderFamily,
    pub resource: &'a EntangledResource,
    pub cfg: &'a SimConfig,
}

/// A coding scheme the simulator can execute.
pub trait CodingScheme: Send + Sync {
    fn name(&self) -> &'static str;
    fn run(&self, job: &SimJob<'_>) -> Result<SimReport>;
}

struct CausalScheme;
struct NoncausalScheme;

/// Coding schemes keyed by name.
pub struct SchemeRegistry {
    entries: BTreeMap<String, Box<dyn CodingScheme>>,
}

impl Default for SchemeRegistry {
    fn default() -> Self {
        let mut r = SchemeRegistry { entries: BTreeMap::new() };
        r.register(Box::new(CausalScheme));
        r.register(Box::new(NoncausalScheme));
        r
    }
}

impl SchemeRegistry {
    pub fn register(&mut self, scheme: Box<dyn CodingScheme>) {
        self.entries.insert(scheme.name().to_string(), scheme);
    }

    pub fn get(&self, name: &str) -> Result<&dyn CodingScheme> {
        self.entries
            .get(name)
            .map(|b| b.as_ref())
            .ok_or_else(|| invalid(format!("unknown scheme {name:?} (expected one of {})", self.names().join(", "))))
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.keys().map(String::as_str).collect()
    }
}

/// Runs `scheme` with the shared pure state `xi` on `K ⊗ B`.
pub fn simulate(
    scheme: &str,
    rp: &RandomParameterChannel,
    fam: &EncoderFamily,
    xi: &PureState,
    cfg: &SimConfig,
) -> Result<SimReport> {
    let registry = SchemeRegistry::default();
    let runner = registry.get(scheme)?;
    let resource = EntangledResource::new(xi, fam.dim_k())?;
    let job = SimJob { rp, fam, resource: &resource, cfg };
    job.validate()?;
    runner.run(&job)
}

impl SimJob<'_> {
    fn validate(&self) -> Result<()> {
        let cfg = self.cfg;
        if cfg.n == 0 {
            return Err(invalid("blocklength must be at least 1"));
        }
        if cfg.num_messages < 2 {
            return Err(invalid(format!("need at least 2 messages, got {}", cfg.num_messages)));
        }
        if !(cfg.delta >= 0.0) || !(cfg.covering_delta >= 0.0) {
            return Err(invalid("typicality slacks must be non-negative"));
        }
        self.fam.check_for(self.rp)?;
        if self.fam.dim_k() != self.resource.dim() {
            return Err(invalid("shared state and encoder family disagree on the key dimension"));
        }
        let db = self.resource.dim();
        for (name, d) in [("key", db), ("channel input", self.rp.dim_in()), ("channel output", self.rp.dim_out())] {
            let total = checked_power(d * db, cfg.n).ok();
            if total.is_none_or(|t| t > DIM_CAP) {
                return Err(Error::CapExceeded(format!(
                    "{name} system: ({d}x{db})^{} exceeds the dense cap of {DIM_CAP}",
                    cfg.n
                )));
            }
        }
        Ok(())
    }

    fn parameter_sequences(&self) -> (Vec<(Vec<usize>, f64)>, Averaging) {
        let (n, q) = (self.cfg.n, self.rp.probs());
        let count = (q.len() as u128).checked_pow(n as u32).filter(|c| *c <= EXACT_AVERAGE_CAP as u128);
        match count {
            Some(c) => {
                let seqs = (0..c as usize)
                    .map(|i| {
                        let sn = index_to_sequence(i, q.len(), n);
                        let w = sn.iter().map(|&s| q[s]).product::<f64>();
                        (sn, w)
                    })
                    .filter(|(_, w)| *w > 0.0)
                    .collect();
                (seqs, Averaging::Exact)
            }
            None => {
                let samples = self.cfg.mc_samples.max(1);
                let mut rng = stream(self.cfg.seed, "monte-carlo", 0);
                let w = 1.0 / samples as f64;
                let seqs = (0..samples).map(|_| (sample_sequence(&mut rng, q, n), w)).collect();
                (seqs, Averaging::MonteCarlo { samples })
            }
        }
    }

    fn povm(&self, geometry: &DecoderGeometry, bob_ops: &[CMatrix]) -> Result<Povm> {
        let signals = bob_ops.iter().map(|b| geometry.signal(b, self.cfg.decoder)).collect::<Result<Vec<_>>>()?;
        sqrt_measurement(&signals)
    }

    fn joint_pmf(&self) -> Result<Vec<Vec<f64>>> {
        let q = self.rp.probs();
        let Some(p) = &self.cfg.p_sx else {
            let px = self.resource.class_pmf();
            return Ok(q.iter().map(|qs| px.iter().map(|x| qs * x).collect()).collect());
        };
        let nx = p.first().map_or(0, Vec::len);
        if p.len() != q.len() || nx == 0 || p.iter().any(|r| r.len() != nx || r.iter().any(|v| !(*v >= 0.0))) {
            return Err(invalid(format!("joint pmf must be a non-negative {}x|X| table", q.len())));
        }
        for (s, (row, qs)) in p.iter().zip(q).enumerate() {
            let marginal: f64 = row.iter().sum();
            if (marginal - qs).abs() > 1e-9 {
                return Err(invalid(format!("joint pmf row {s} sums to {marginal}, parameter pmf has {qs}")));
            }
        }
        Ok(p.clone())
    }
}

impl CodingScheme for CausalScheme {
    fn name(&self) -> &'static str {
        "causal"
    }

    /// The parameter average is taken letter by letter: with the encoder
    /// and the channel both acting letterwise, averaging over `s^n ~ q^n`
    /// equals applying `M = Σ_s q(s) N^(s) ∘ F^(s)` to every letter.
    fn run(&self, job: &SimJob<'_>) -> Result<SimReport> {
        let (cfg, resource) = (job.cfg, job.resource);
        let n = cfg.n;
        let layout = resource.layout(n)?;
        let book = GammaCodebook::generate(&layout, cfg.num_messages, cfg.seed)?;
        let virtual_channel = job.rp.virtual_channel(job.fam)?;
        let geometry = DecoderGeometry::new(&virtual_channel, resource, n, cfg.delta)?;
        let units: Vec<CMatrix> = book.entries.iter().map(|g| u_of_gamma(g, &layout)).collect::<Result<_>>()?;
        let bob_ops: Vec<CMatrix> = units.iter().map(|u| resource.bob_operator(u, n)).collect();
        let povm = job.povm(&geometry, &bob_ops)?;

        let d = resource.dim();
        let dkn = checked_power(d, n)?;
        let v = resource.power_vector(n)?;
        let base = CMatrix::outer(&v, &v);
        let mut errors = Vec::with_capacity(cfg.num_messages);
        for (m, u) in units.iter().enumerate() {
            let key_op = resource.key_operator(u, n);
            let rho = crate::qcore::apply_local_kraus(&base, &[dkn, dkn], 0, std::slice::from_ref(&key_op))?;
            let maps = std::iter::repeat_n(virtual_channel.kraus(), n);
            let (out, _) = apply_letterwise(rho, grouped_dims(d, d, n), n, maps)?;
            errors.push(1.0 - povm.probability(m, &out)?);
        }
        Ok(SimReport::assemble(job, self.name(), errors, Averaging::Exact, layout.block_dims()))
    }
}

impl CodingScheme for NoncausalScheme {
    fn name(&self) -> &'static str {
        "noncausal"
    }

    fn run(&self, job: &SimJob<'_>) -> Result<SimReport> {
        let (cfg, resource) = (job.cfg, job.resource);
        let n = cfg.n;
        let p_sx = job.joint_pmf()?;
        let nx = p_sx[0].len();
        let p_x: Vec<f64> = (0..nx).map(|x| p_sx.iter().map(|row| row[x]).sum()).collect();
        let layout = resource.layout(n)?;
        let binned = BinnedCodebook::generate(cfg.num_messages, n, cfg.covering_rate, &p_x, cfg.seed)?;
        let gammas = GammaCodebook::generate(&layout, binned.num_codewords(), cfg.seed)?;
        let books = NoncausalCodebooks::new(binned, gammas)?;

        let virtual_channel = job.rp.virtual_channel(job.fam)?;
        let geometry = DecoderGeometry::new(&virtual_channel, resource, n, cfg.delta)?;
        let bob_ops: Vec<CMatrix> = books
            .gammas
            .entries
            .iter()
            .map(|g| u_of_gamma(g, &layout).map(|u| resource.bob_operator(&u, n)))
            .collect::<Result<_>>()?;
        let povm = job.povm(&geometry, &bob_ops)?;

        let (sequences, averaging) = job.parameter_sequences();
        let mut errors = Vec::with_capacity(cfg.num_messages);
        let mut failures = 0usize;
        let mut failure_weight = 0.0;
        for m in 0..cfg.num_messages {
            let mut err = 0.0;
            for (sn, w) in &sequences {
                let enc = encode_noncausal(m, &books, resource, job.fam, sn, &p_sx, cfg.covering_delta)?;
                if enc.covering_failed {
                    failures += 1;
                    failure_weight += w;
                }
                let out: DensityOperator = channel_apply_n(job.rp, sn, &enc.state)?;
                let mut success = 0.0;
                for ell in books.binned.bin_range(m) {
                    success += povm.probability(ell, out.matrix())?;
                }
                err += w * (1.0 - success.min(1.0));
            }
            errors.push(err);
        }
        let mut report = SimReport::assemble(job, self.name(), errors, averaging, layout.block_dims());
        report.covering_failures = Some(failures);
        report.covering_failure_rate = Some(failure_weight / cfg.num_messages as f64);
        Ok(report)
    }
}
