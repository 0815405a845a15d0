//! Invariant suites behind `rpcap verify`.

use serde::Serialize;
use serde_json::{json, Value};

use rpcap_core::mtypes::{covering_monte_carlo, enumerate_types, type_projector, typical_projector};
use rpcap_core::protosim::{scheme_packing_fixture, u_of_gamma, EntangledResource, GammaVector};
use rpcap_core::qcore::{tensor_power, tensor_product, CMatrix};
use rpcap_core::quantum::random::{haar_unitary, random_density};
use rpcap_core::quantum::{heisenberg_weyl, max_entangled, mutual_info, ricochet_check};
use rpcap_core::rng::stream;
use rpcap_core::rpchannel::library::dephasing_flip;
use rpcap_core::rpchannel::EncoderFamily;
use rpcap_core::{Error, Result};

pub const TWIRL_TOL: f64 = 1e-10;
pub const RICOCHET_TOL: f64 = 1e-12;
pub const MAX_ENTANGLED_TOL: f64 = 1e-9;
pub const PROJECTOR_TOL: f64 = 1e-10;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub bound: f64,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn at_most(name: &str, measured: f64, bound: f64, detail: impl Into<String>) -> Self {
        Check { name: name.to_string(), measured, bound, pass: measured <= bound, detail: detail.into() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<Check>,
    pub all_pass: bool,
    pub first_failure: Option<String>,
    pub extra: Value,
}

impl SuiteReport {
    fn new(suite: &str, checks: Vec<Check>, extra: Value) -> Self {
        let first_failure = checks.iter().find(|c| !c.pass).map(|c| c.name.clone());
        SuiteReport { suite: suite.to_string(), all_pass: first_failure.is_none(), checks, first_failure, extra }
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub n: Option<usize>,
    pub trials: usize,
    pub delta: f64,
    pub alpha: f64,
    pub seed: u64,
    pub inject_fault: bool,
}

pub const SUITES: [&str; 3] = ["algebra", "packing", "covering"];

pub fn run_suite(suite: &str, opts: &VerifyOptions) -> Result<SuiteReport> {
    match suite {
        "algebra" => algebra(opts),
        "packing" => packing(opts),
        "covering" => covering(opts),
        other => {
            Err(Error::InvalidArgument(format!("unknown suite {other:?} (expected algebra, packing or covering)")))
        }
    }
}

/// `(1/|S|) Σ_{(a,b) ∈ S} Σ(a,b) ρ Σ(a,b)†` over the given operator labels.
pub fn hw_average(rho: &CMatrix, dim: usize, labels: &[(usize, usize)]) -> Result<CMatrix> {
    let mut acc = CMatrix::zeros(dim, dim);
    for &(a, b) in labels {
        acc = &acc + &heisenberg_weyl(dim, a, b)?.sandwich(rho);
    }
    Ok(acc.scale_real(1.0 / labels.len() as f64))
}

fn algebra(opts: &VerifyOptions) -> Result<SuiteReport> {
    let mut checks = Vec::new();

    let mut worst = 0.0f64;
    for d in 2..=5 {
        let phi = max_entangled(d).density();
        worst = worst.max((mutual_info(&phi, d, d)? - 2.0 * (d as f64).log2()).abs());
    }
    checks.push(Check::at_most("max_entangled_mutual_info", worst, MAX_ENTANGLED_TOL, "D = 2..5"));

    let mut rng = stream(opts.seed, "verify", 0);
    let mut worst = 0.0f64;
    for d in [2, 3, 5] {
        let mut labels: Vec<_> = (0..d).flat_map(|a| (0..d).map(move |b| (a, b))).collect();
        if opts.inject_fault {
            // a corrupted operator set: Σ(0,1) replaced by the identity
            labels[1] = (0, 0);
        }
        let pi = CMatrix::identity(d).scale_real(1.0 / d as f64);
        for _ in 0..10 {
            let rho = random_density(&mut rng, d, d);
            worst = worst.max(hw_average(rho.matrix(), d, &labels)?.max_abs_diff(&pi));
        }
    }
    checks.push(Check::at_most("twirl", worst, TWIRL_TOL, "10 random states per D in {2,3,5}"));

    let mut rng = stream(opts.seed, "verify", 1);
    let mut worst = 0.0f64;
    for k in 0..20 {
        let d = 2 + k % 3;
        worst = worst.max(ricochet_check(&haar_unitary(&mut rng, d), d)?);
    }
    checks.push(Check::at_most("ricochet_haar", worst, RICOCHET_TOL, "20 Haar unitaries, D = 2..4"));

    let mut rng = stream(opts.seed, "verify", 2);
    let resource = EntangledResource::maximally_entangled(2);
    let mut worst = 0.0f64;
    for k in 0..20 {
        let n = 1 + k % 3;
        let layout = resource.layout(n)?;
        let u = u_of_gamma(&GammaVector::random(&mut rng, &layout), &layout)?;
        worst = worst.max(block_ricochet_residual(&resource, &u, n)?);
    }
    checks.push(Check::at_most("ricochet_block", worst, RICOCHET_TOL, "20 block operators, n = 1..3"));

    let mut rng = stream(opts.seed, "verify", 3);
    let mut worst_idem = 0.0f64;
    let mut worst_comm = 0.0f64;
    let mut rank_ok = true;
    for d in [2, 3] {
        let rho = random_density(&mut rng, d, d);
        let n = 3;
        let t = typical_projector(&rho, n, 0.2)?;
        let p = t.projector.matrix();
        let power = tensor_power(rho.matrix(), n);
        worst_idem = worst_idem.max((p * p).max_abs_diff(p));
        worst_comm = worst_comm.max((p * &power).max_abs_diff(&(&power * p)));
        let rank_bound = 2f64.powf(n as f64 * (t.entropy + t.constant * t.delta));
        rank_ok &= t.projector.rank() as f64 <= rank_bound * (1.0 + 1e-12);
    }
    checks.push(Check::at_most("typical_idempotent", worst_idem, PROJECTOR_TOL, "n = 3, D in {2,3}"));
    checks.push(Check::at_most("typical_commutes", worst_comm, PROJECTOR_TOL, "[Π, ρ^n] at n = 3"));
    checks.push(Check {
        name: "typical_rank".into(),
        measured: if rank_ok { 0.0 } else { 1.0 },
        bound: 0.0,
        pass: rank_ok,
        detail: "rank ≤ 2^{n(H + cδ)}".into(),
    });

    let (n, d) = (3, 3);
    let projs = enumerate_types(n, d)
        .iter()
        .map(|t| type_projector(t, d, n).map(|p| p.matrix().clone()))
        .collect::<Result<Vec<_>>>()?;
    let total = projs.iter().fold(CMatrix::zeros(27, 27), |acc, p| &acc + p);
    let mut worst = total.max_abs_diff(&CMatrix::identity(27));
    for (i, a) in projs.iter().enumerate() {
        for b in &projs[i + 1..] {
            worst = worst.max((a * b).max_abs_diff(&CMatrix::zeros(27, 27)));
        }
    }
    checks.push(Check::at_most("type_resolution", worst, PROJECTOR_TOL, "type projectors, n = 3, D = 3"));

    Ok(SuiteReport::new("algebra", checks, json!({ "inject_fault": opts.inject_fault })))
}

/// `‖(K ⊗ 1)|Φ_n⟩ − (1 ⊗ B)|Φ_n⟩‖` with `K`, `B` the two sides of `u`.
pub fn block_ricochet_residual(resource: &EntangledResource, u: &CMatrix, n: usize) -> Result<f64> {
    let v = resource.power_vector(n)?;
    let side = resource.dim().pow(n as u32);
    let id = CMatrix::identity(side);
    let left = tensor_product(&resource.key_operator(u, n), &id).apply(&v);
    let right = tensor_product(&id, &resource.bob_operator(u, n)).apply(&v);
    Ok(left.iter().zip(&right).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt())
}

fn packing(opts: &VerifyOptions) -> Result<SuiteReport> {
    let n = opts.n.unwrap_or(3);
    let rp = dephasing_flip(0.5);
    let fam = EncoderFamily::identity(2, rp.num_params());
    let resource = EntangledResource::maximally_entangled(2);
    let mut fixture = scheme_packing_fixture(&rp, &fam, &resource, n, opts.delta)?;
    if opts.inject_fault {
        // corrupted fixture: code projector replaced by its complement
        let dim = fixture.code_projector.dim();
        let complement = &CMatrix::identity(dim) - fixture.code_projector.matrix();
        fixture.code_projector = rpcap_core::mtypes::Projector::new(complement)?;
    }
    let report = fixture.check(opts.alpha)?;
    let checks = report
        .conditions
        .iter()
        .map(|c| Check {
            name: c.name.to_string(),
            measured: c.measured,
            bound: c.bound,
            pass: c.pass,
            detail: String::new(),
        })
        .collect();
    let extra = json!({
        "channel": rp.name(),
        "n": n,
        "delta": opts.delta,
        "alpha": opts.alpha,
        "alpha_measured": report.alpha_measured,
        "codewords": fixture.states.len(),
        "inject_fault": opts.inject_fault,
    });
    Ok(SuiteReport::new("packing", checks, extra))
}

/// Doubly symmetric binary source with crossover `eps`.
pub fn doubly_symmetric(eps: f64) -> Vec<Vec<f64>> {
    vec![vec![0.5 * (1.0 - eps), 0.5 * eps], vec![0.5 * eps, 0.5 * (1.0 - eps)]]
}

fn h2(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
    }
}

pub const COVERING_CROSSOVER: f64 = 0.1;
pub const COVERING_DELTA: f64 = 0.05;
pub const COVERING_MARGIN: f64 = 0.2;

fn covering(opts: &VerifyOptions) -> Result<SuiteReport> {
    let n = opts.n.unwrap_or(100);
    let p_sx = doubly_symmetric(COVERING_CROSSOVER);
    let info = 1.0 - h2(COVERING_CROSSOVER);
    // an undersized codebook when faulted
    let rate = if opts.inject_fault { info - COVERING_MARGIN } else { info + COVERING_MARGIN };
    let small = covering_monte_carlo(&p_sx, rate, n, COVERING_DELTA, opts.trials, opts.seed)?;
    let large = covering_monte_carlo(&p_sx, rate, 4 * n, COVERING_DELTA, opts.trials, opts.seed)?;
    let checks = vec![
        Check {
            name: "covering_small_below_half".into(),
            measured: small.fail_prob_hat,
            bound: 0.5,
            pass: small.fail_prob_hat < 0.5,
            detail: format!("n = {n}"),
        },
        Check {
            name: "covering_large_below_half".into(),
            measured: large.fail_prob_hat,
            bound: 0.5,
            pass: large.fail_prob_hat < 0.5,
            detail: format!("n = {}", 4 * n),
        },
        Check {
            name: "covering_decay".into(),
            measured: large.fail_prob_hat,
            bound: small.fail_prob_hat,
            pass: large.fail_prob_hat < small.fail_prob_hat,
            detail: format!("failure at n = {} below n = {n}", 4 * n),
        },
    ];
    let extra = json!({
        "rate": rate,
        "mutual_information": info,
        "delta": COVERING_DELTA,
        "trials": opts.trials,
        "small": { "n": n, "estimate": small },
        "large": { "n": 4 * n, "estimate": large },
        "inject_fault": opts.inject_fault,
    });
    Ok(SuiteReport::new("covering", checks, extra))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(fault: bool) -> VerifyOptions {
        VerifyOptions { n: None, trials: 200, delta: 0.2, alpha: 0.1, seed: 1, inject_fault: fault }
    }

    fn hw_twirl(rho: &CMatrix, dim: usize) -> Result<CMatrix> {
        let labels: Vec<_> = (0..dim).flat_map(|a| (0..dim).map(move |b| (a, b))).collect();
        hw_average(rho, dim, &labels)
    }

    #[test]
    fn twirl_of_pure_state_is_maximally_mixed() {
        let rho = CMatrix::diag_real(&[1.0, 0.0, 0.0]);
        let t = hw_twirl(&rho, 3).unwrap();
        assert!(t.max_abs_diff(&CMatrix::identity(3).scale_real(1.0 / 3.0)) < 1e-12);
    }

    #[test]
    fn algebra_passes_and_fault_is_detected() {
        let good = run_suite("algebra", &opts(false)).unwrap();
        assert!(good.all_pass, "{:?}", good.checks);
        let bad = run_suite("algebra", &opts(true)).unwrap();
        assert_eq!(bad.first_failure.as_deref(), Some("twirl"));
    }

    #[test]
    fn packing_fault_breaks_code_subspace() {
        let bad = run_suite("packing", &VerifyOptions { n: Some(2), ..opts(true) }).unwrap();
        assert_eq!(bad.first_failure.as_deref(), Some("code_subspace"));
    }

    #[test]
    fn unknown_suite_is_rejected() {
        assert!(matches!(run_suite("nope", &opts(false)), Err(Error::InvalidArgument(_))));
    }
}
