//! Verifier for the four packing conditions, and their evaluation on the
//! causal scheme's own code and codeword projectors.

use serde::Serialize;

use super::decoder::{DecoderGeometry, TypicalStats};
use super::layout::{u_of_gamma, EntangledResource, GammaVector};
use crate::error::{invalid, Error, Result};
use crate::mtypes::{Projector, DIM_CAP};
use crate::qcore::{eigenvalues_hermitian, psd_leq, trace_of_product, CMatrix};
use crate::rpchannel::{EncoderFamily, RandomParameterChannel};

/// Tolerance for the rank and operator-inequality conditions.
pub const PACKING_TOL: f64 = 1e-9;

/// Right-hand sides of the rank and sandwich conditions:
/// `Tr Π_x ≤ rank_bound` and `Π σ Π ⪯ sandwich_bound · Π`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PackingBounds {
    pub rank_bound: f64,
    pub sandwich_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PackingCondition {
    pub name: &'static str,
    pub measured: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PackingReport {
    pub conditions: Vec<PackingCondition>,
    pub alpha: f64,
    /// Largest trace deficit over both trace conditions.
    pub alpha_measured: f64,
    pub all_pass: bool,
}

/// Checks, for an ensemble `{p_x, ρ_x}` with average `σ`:
/// `Tr(Π ρ_x) ≥ 1 − α`, `Tr(Π_x ρ_x) ≥ 1 − α`, `Tr Π_x ≤ d` and
/// `Π σ Π ⪯ (1/D) Π`.
pub fn packing_conditions_check(
    code_proj: &Projector,
    codeword_projs: &[Projector],
    states: &[CMatrix],
    pmf: &[f64],
    bounds: PackingBounds,
    alpha: f64,
) -> Result<PackingReport> {
    let dim = code_proj.dim();
    if states.is_empty() || states.len() != codeword_projs.len() || states.len() != pmf.len() {
        return Err(invalid(format!(
            "{} states, {} codeword projectors and {} weights",
            states.len(),
            codeword_projs.len(),
            pmf.len()
        )));
    }
    if codeword_projs.iter().any(|p| p.dim() != dim) || states.iter().any(|s| s.rows() != dim || s.cols() != dim) {
        return Err(invalid(format!("all operators must be {dim}x{dim}")));
    }
    let pi = code_proj.matrix();
    let mut code_deficit = 0.0f64;
    let mut word_deficit = 0.0f64;
    let mut max_rank = 0.0f64;
    let mut sigma = CMatrix::zeros(dim, dim);
    for ((p, rho), w) in codeword_projs.iter().zip(states).zip(pmf) {
        code_deficit = code_deficit.max(1.0 - trace_of_product(pi, rho)?.re);
        word_deficit = word_deficit.max(1.0 - trace_of_product(p.matrix(), rho)?.re);
        max_rank = max_rank.max(p.matrix().trace().re);
        sigma = &sigma + &rho.scale_real(*w);
    }
    let sandwiched = pi.sandwich(&sigma).hermitian_part();
    let top = eigenvalues_hermitian(&sandwiched)?.last().copied().unwrap_or(0.0);
    let sandwich_ok = psd_leq(&sandwiched, &pi.scale_real(bounds.sandwich_bound), PACKING_TOL)?;
    let conditions = vec![
        PackingCondition { name: "code_subspace", measured: code_deficit, bound: alpha, pass: code_deficit <= alpha },
        PackingCondition {
            name: "codeword_subspace",
            measured: word_deficit,
            bound: alpha,
            pass: word_deficit <= alpha,
        },
        PackingCondition {
            name: "codeword_rank",
            measured: max_rank,
            bound: bounds.rank_bound,
            pass: max_rank <= bounds.rank_bound * (1.0 + PACKING_TOL),
        },
        PackingCondition { name: "sandwich", measured: top, bound: bounds.sandwich_bound, pass: sandwich_ok },
    ];
    let all_pass = conditions.iter().all(|c| c.pass);
    Ok(PackingReport { conditions, alpha, alpha_measured: code_deficit.max(word_deficit).max(0.0), all_pass })
}

#[derive(Clone, Debug, Serialize)]
pub struct SchemePacking {
    pub n: usize,
    pub delta: f64,
    pub codewords: usize,
    pub entropy_joint: f64,
    pub entropy_out: f64,
    pub entropy_bob: f64,
    pub report: PackingReport,
}

/// Every block label with zero sign bits, in mixed-radix order.
fn all_labels(block_dims: &[usize]) -> Result<Vec<GammaVector>> {
    let total = block_dims
        .iter()
        .try_fold(1usize, |acc, d| acc.checked_mul(d * d).filter(|t| *t <= DIM_CAP))
        .ok_or_else(|| Error::CapExceeded(format!("more than {DIM_CAP} block labels for blocks {block_dims:?}")))?;
    Ok((0..total)
        .map(|mut k| {
            let triples = block_dims
                .iter()
                .map(|&d| {
                    let ab = k % (d * d);
                    k /= d * d;
                    (ab / d, ab % d, 0u8)
                })
                .collect();
            GammaVector { triples }
        })
        .collect())
}

/// Inputs of the packing conditions for the causal construction.
#[derive(Clone, Debug)]
pub struct PackingFixture {
    pub code_projector: Projector,
    pub codeword_projectors: Vec<Projector>,
    pub states: Vec<CMatrix>,
    pub pmf: Vec<f64>,
    pub bounds: PackingBounds,
    pub joint_stats: TypicalStats,
    pub out_stats: TypicalStats,
    pub bob_stats: TypicalStats,
}

/// Builds the causal construction: codeword states
/// `(1 ⊗ B_γ) ω^{⊗n} (1 ⊗ B_γ)†` for every block label `γ` (uniform), code
/// projector `Π^δ(ω_B')^{⊗n} ⊗ Π^δ(ω_B)^{⊗n}` and codeword projectors
/// `(1 ⊗ B_γ) Π^δ(ω) (1 ⊗ B_γ)†`.
///
/// The bounds follow from the typicality constants `c`:
/// `d = 2^{n(H(B'B) + c δ)}` and `D = 2^{n(H(B') + H(B)) − n(c' + c'')δ}`.
pub fn scheme_packing_fixture(
    rp: &RandomParameterChannel,
    fam: &EncoderFamily,
    resource: &EntangledResource,
    n: usize,
    delta: f64,
) -> Result<PackingFixture> {
    let geometry = DecoderGeometry::new(&rp.virtual_channel(fam)?, resource, n, delta)?;
    let layout = resource.layout(n)?;
    let labels = all_labels(&layout.block_dims())?;
    let mut states = Vec::with_capacity(labels.len());
    let mut projs = Vec::with_capacity(labels.len());
    for g in &labels {
        let b = resource.bob_operator(&u_of_gamma(g, &layout)?, n);
        states.push(geometry.codeword_state(&b)?);
        projs.push(Projector::new(geometry.codeword_projector(&b)?.hermitian_part())?);
    }
    let (j, o, b) = (geometry.joint_stats, geometry.out_stats, geometry.bob_stats);
    let nf = n as f64;
    let bounds = PackingBounds {
        rank_bound: 2f64.powf(nf * (j.entropy + j.constant * delta)),
        sandwich_bound: 2f64.powf(-(nf * (o.entropy + b.entropy) - nf * (o.constant + b.constant) * delta)),
    };
    Ok(PackingFixture {
        code_projector: geometry.code_projector,
        codeword_projectors: projs,
        pmf: vec![1.0 / labels.len() as f64; labels.len()],
        states,
        bounds,
        joint_stats: j,
        out_stats: o,
        bob_stats: b,
    })
}

impl PackingFixture {
    pub fn check(&self, alpha: f64) -> Result<PackingReport> {
        packing_conditions_check(
            &self.code_projector,
            &self.codeword_projectors,
            &self.states,
            &self.pmf,
            self.bounds,
            alpha,
        )
    }
}

/// Evaluates the packing conditions on [`scheme_packing_fixture`].
pub fn scheme_packing_check(
    rp: &RandomParameterChannel,
    fam: &EncoderFamily,
    resource: &EntangledResource,
    n: usize,
    delta: f64,
    alpha: f64,
) -> Result<SchemePacking> {
    let fixture = scheme_packing_fixture(rp, fam, resource, n, delta)?;
    let report = fixture.check(alpha)?;
    Ok(SchemePacking {
        n,
        delta,
        codewords: fixture.states.len(),
        entropy_joint: fixture.joint_stats.entropy,
        entropy_out: fixture.out_stats.entropy,
        entropy_bob: fixture.bob_stats.entropy,
        report,
    })
}
