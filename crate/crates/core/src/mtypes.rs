//! Method of types, typical projectors and the covering experiment.

use crate::error::{invalid, Error, Result};
use crate::qcore::{c, eig_hermitian, CMatrix, C64, CLIP_TOL};
use crate::quantum::DensityOperator;
use num_bigint::BigUint;
use rand::Rng;
use serde::Serialize;

/// Largest Hilbert-space dimension for which projectors are built densely.
pub const DIM_CAP: usize = 4096;

/// Eigenvalues closer than this are treated as one eigenvalue class.
const DEGENERACY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeVector {
    n: usize,
    counts: Vec<usize>,
}

impl TypeVector {
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        if counts.is_empty() {
            return Err(invalid("type over an empty alphabet"));
        }
        Ok(TypeVector { n: counts.iter().sum(), counts })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn alphabet_size(&self) -> usize {
        self.counts.len()
    }

    pub fn empirical(&self) -> Vec<f64> {
        self.counts.iter().map(|&k| k as f64 / self.n as f64).collect()
    }

    /// Shannon entropy (bits) of the empirical distribution.
    pub fn entropy(&self) -> f64 {
        self.empirical().iter().filter(|p| **p > 0.0).map(|p| -p * p.log2()).sum()
    }
}

/// Type of a sequence over `alphabet`.
pub fn type_of<T: PartialEq + std::fmt::Debug>(seq: &[T], alphabet: &[T]) -> Result<TypeVector> {
    let mut counts = vec![0; alphabet.len()];
    for x in seq {
        let i = alphabet
            .iter()
            .position(|a| a == x)
            .ok_or_else(|| invalid(format!("symbol {x:?} is not in the alphabet")))?;
        counts[i] += 1;
    }
    TypeVector::new(counts)
}

/// Type of a sequence of symbol indices `0..alphabet_size`.
pub fn type_of_indices(seq: &[usize], alphabet_size: usize) -> Result<TypeVector> {
    let alphabet: Vec<usize> = (0..alphabet_size).collect();
    type_of(seq, &alphabet)
}

/// Exact multinomial coefficient `n! / Π counts!`.
pub fn type_class_size_big(t: &TypeVector) -> BigUint {
    let mut acc = BigUint::from(1u32);
    let mut remaining = t.n;
    for &k in &t.counts {
        // C(remaining, k), built incrementally so that every division is exact.
        let mut binom = BigUint::from(1u32);
        for i in 0..k {
            binom *= BigUint::from(remaining - i);
            binom /= BigUint::from(i + 1);
        }
        acc *= binom;
        remaining -= k;
    }
    acc
}

/// Type class size as a machine integer; errors if it does not fit.
pub fn type_class_size(t: &TypeVector) -> Result<u128> {
    let big = type_class_size_big(t);
    u128::try_from(&big).map_err(|_| {
        Error::CapExceeded(format!("type class of length {} exceeds 128 bits; use the big-integer variant", t.n))
    })
}

/// All types of length `n` over `k` symbols, lexicographic on count vectors.
pub fn enumerate_types(n: usize, k: usize) -> Vec<TypeVector> {
    fn rec(left: usize, slots: usize, cur: &mut Vec<usize>, out: &mut Vec<TypeVector>) {
        if slots == 1 {
            cur.push(left);
            out.push(TypeVector { n: cur.iter().sum(), counts: cur.clone() });
            cur.pop();
            return;
        }
        for c in 0..=left {
            cur.push(c);
            rec(left - c, slots - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k > 0 {
        rec(n, k, &mut Vec::new(), &mut out);
    }
    out
}

/// Digits of `index` in base `k`, most significant first (length `n`).
pub fn index_to_sequence(mut index: usize, k: usize, n: usize) -> Vec<usize> {
    let mut seq = vec![0; n];
    for slot in seq.iter_mut().rev() {
        *slot = index % k;
        index /= k;
    }
    seq
}

pub fn sequence_to_index(seq: &[usize], k: usize) -> usize {
    seq.iter().fold(0, |acc, &x| acc * k + x)
}

fn check_cap(k: usize, n: usize) -> Result<usize> {
    let total = (k as u128).checked_pow(n as u32).filter(|d| *d <= DIM_CAP as u128);
    total
        .map(|d| d as usize)
        .ok_or_else(|| Error::CapExceeded(format!("dimension {k}^{n} exceeds the dense cap of {DIM_CAP}")))
}

/// Product-basis indices of the sequences in type class `t`, ascending
/// (equivalently, lexicographic order of the sequences).
pub fn type_class_indices(t: &TypeVector) -> Result<Vec<usize>> {
    let k = t.alphabet_size();
    let total = check_cap(k, t.n)?;
    Ok((0..total)
        .filter(|&i| {
            let mut counts = vec![0; k];
            for x in index_to_sequence(i, k, t.n) {
                counts[x] += 1;
            }
            counts == t.counts
        })
        .collect())
}

fn typical_counts(counts: &[usize], n: usize, pmf: &[f64], delta: f64) -> bool {
    counts.iter().zip(pmf).all(|(&k, &p)| if p > 0.0 { (k as f64 / n as f64 - p).abs() <= delta } else { k == 0 })
}

/// δ-typicality of a single sequence of symbol indices.
pub fn is_typical(seq: &[usize], pmf: &[f64], delta: f64) -> Result<bool> {
    let t = type_of_indices(seq, pmf.len())?;
    Ok(typical_counts(&t.counts, t.n, pmf, delta))
}

/// Joint δ-typicality of `(s^n, x^n)` with respect to `p_sx[s][x]`.
pub fn is_jointly_typical(sn: &[usize], xn: &[usize], p_sx: &[Vec<f64>], delta: f64) -> Result<bool> {
    if sn.len() != xn.len() {
        return Err(invalid(format!("sequence lengths differ: {} vs {}", sn.len(), xn.len())));
    }
    let ns = p_sx.len();
    let nx = p_sx.first().map_or(0, Vec::len);
    let mut counts = vec![0usize; ns * nx];
    for (&s, &x) in sn.iter().zip(xn) {
        if s >= ns || x >= nx {
            return Err(invalid(format!("pair ({s},{x}) outside the {ns}x{nx} alphabet")));
        }
        counts[s * nx + x] += 1;
    }
    let flat: Vec<f64> = p_sx.iter().flatten().copied().collect();
    Ok(typical_counts(&counts, sn.len(), &flat, delta))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Projector {
    matrix: CMatrix,
}

impl Projector {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() || !matrix.is_hermitian(1e-9) {
            return Err(Error::Validation("projector must be square and Hermitian".into()));
        }
        let r = (&matrix * &matrix).max_abs_diff(&matrix);
        if r > 1e-9 {
            return Err(Error::Validation(format!("projector is not idempotent (residual {r:.1e})")));
        }
        Ok(Projector { matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Projector { matrix: CMatrix::identity(dim) }
    }

    /// Span of the given orthonormal vectors.
    pub fn from_orthonormal(dim: usize, vectors: &[Vec<C64>]) -> Self {
        let mut m = CMatrix::zeros(dim, dim);
        for v in vectors {
            for i in 0..dim {
                if v[i] == c(0.0, 0.0) {
                    continue;
                }
                for j in 0..dim {
                    m[(i, j)] += v[i] * v[j].conj();
                }
            }
        }
        Projector { matrix: m }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        self.matrix.trace().re.round() as usize
    }
}

/// Projector onto the span of product basis states whose sequences lie in type class `t`.
pub fn type_projector(t: &TypeVector, dim: usize, n: usize) -> Result<Projector> {
    if t.alphabet_size() != dim || t.n != n {
        return Err(invalid(format!("type {:?} does not match dim {dim}, n {n}", t.counts)));
    }
    let total = check_cap(dim, n)?;
    let diag: Vec<f64> = (0..total).map(|_| 0.0).collect();
    let mut d = diag;
    for i in type_class_indices(t)? {
        d[i] = 1.0;
    }
    Ok(Projector { matrix: CMatrix::diag_real(&d) })
}

#[derive(Clone, Debug)]
pub struct TypicalProjector {
    pub projector: Projector,
    /// Instance constant in `2^{-n(H ± cδ)}`: `Σ −log2 λ` over distinct non-zero eigenvalues.
    pub constant: f64,
    pub entropy: f64,
    pub delta: f64,
    pub n: usize,
    /// Product eigenbasis indices (of the single-letter eigenvectors) kept.
    pub kept: Vec<usize>,
}

/// δ-typical projector of `ρ^{⊗n}`.
///
/// Eigenvalues are grouped into classes of equal value; a product eigenvector
/// is kept when its sequence of classes is δ-typical for the class
/// distribution `multiplicity × eigenvalue`. For non-degenerate spectra this
/// is the usual eigenvalue-sequence typicality, and degenerate eigenvectors
/// are never split arbitrarily.
pub fn typical_projector(rho: &DensityOperator, n: usize, delta: f64) -> Result<TypicalProjector> {
    let d = rho.dim();
    let total = check_cap(d, n)?;
    let spec = eig_hermitian(rho.matrix())?;
    // Class of each eigenvector, with class values in descending order.
    let mut class_of = vec![0usize; d];
    let mut class_vals: Vec<f64> = Vec::new();
    let mut class_mult: Vec<usize> = Vec::new();
    for i in (0..d).rev() {
        let lam = spec.eigenvalues[i].max(0.0);
        let lam = if lam <= CLIP_TOL { 0.0 } else { lam };
        match class_vals.iter().position(|&v| (v - lam).abs() <= DEGENERACY_TOL) {
            Some(k) => {
                class_of[i] = k;
                class_mult[k] += 1;
            }
            None => {
                class_of[i] = class_vals.len();
                class_vals.push(lam);
                class_mult.push(1);
            }
        }
    }
    let class_pmf: Vec<f64> = class_vals.iter().zip(&class_mult).map(|(v, m)| v * *m as f64).collect();
    let constant: f64 = class_vals.iter().filter(|v| **v > 0.0).map(|v| -v.log2()).sum();
    let entropy = crate::quantum::entropy_of_matrix(rho.matrix())?;

    let mut kept = Vec::new();
    let mut counts = vec![0usize; class_vals.len()];
    for idx in 0..total {
        counts.iter_mut().for_each(|c| *c = 0);
        for x in index_to_sequence(idx, d, n) {
            counts[class_of[x]] += 1;
        }
        if typical_counts(&counts, n, &class_pmf, delta) {
            kept.push(idx);
        }
    }
    let vectors: Vec<Vec<C64>> = kept
        .iter()
        .map(|&idx| {
            index_to_sequence(idx, d, n)
                .iter()
                .fold(vec![c(1.0, 0.0)], |acc, &x| crate::qcore::kron_vec(&acc, &spec.vector(x)))
        })
        .collect();
    Ok(TypicalProjector { projector: Projector::from_orthonormal(total, &vectors), constant, entropy, delta, n, kept })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoveringEstimate {
    pub fail_prob_hat: f64,
    pub stderr: f64,
    pub trials: usize,
    pub failures: usize,
    pub log2_codewords: usize,
    /// True when the codeword search was replaced by its exact conditional
    /// failure probability (too many codewords to sample one by one).
    pub exact_conditional: bool,
}

/// Codebooks up to this size are sampled codeword by codeword.
pub const EXPLICIT_CODEBOOK_CAP: usize = 4096;

fn sample_index<R: Rng + ?Sized>(rng: &mut R, pmf: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in pmf.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    pmf.iter().rposition(|p| *p > 0.0).unwrap_or(pmf.len() - 1)
}

/// Draws an i.i.d. sequence from `pmf`.
pub fn sample_sequence<R: Rng + ?Sized>(rng: &mut R, pmf: &[f64], n: usize) -> Vec<usize> {
    (0..n).map(|_| sample_index(rng, pmf)).collect()
}

/// Probability that `X^n ~ p_X^n` is jointly typical with a fixed `s^n`
/// whose per-symbol counts are `s_counts`. Positions with different `s` are
/// independent, and the typicality constraints separate by `s`.
fn joint_typical_prob(s_counts: &[usize], n: usize, p_sx: &[Vec<f64>], p_x: &[f64], delta: f64) -> f64 {
    let nx = p_x.len();
    let mut total = 1.0;
    for (s, &ns) in s_counts.iter().enumerate() {
        let mut row_prob = 0.0;
        for t in enumerate_types(ns, nx) {
            let ok = t.counts.iter().zip(&p_sx[s]).all(|(&k, &p)| {
                if p > 0.0 {
                    (k as f64 / n as f64 - p).abs() <= delta
                } else {
                    k == 0
                }
            });
            if !ok {
                continue;
            }
            // log multinomial probability
            let mut lp = ln_factorial(ns);
            for (&k, &px) in t.counts.iter().zip(p_x) {
                lp -= ln_factorial(k);
                if k > 0 {
                    lp += if px > 0.0 { k as f64 * px.ln() } else { f64::NEG_INFINITY };
                }
            }
            row_prob += lp.exp();
        }
        // Rows whose pmf is identically zero must not occur at all.
        if p_sx[s].iter().all(|p| *p == 0.0) && ns > 0 {
            return 0.0;
        }
        total *= row_prob.min(1.0);
    }
    total
}

fn ln_factorial(k: usize) -> f64 {
    (1..=k).map(|i| (i as f64).ln()).sum()
}

/// Monte Carlo estimate of the covering failure probability: no codeword
/// among `2^{⌈n·rate⌉}` i.i.d. `p_X` sequences is jointly typical with
/// `S^n ~ q^n`.
pub fn covering_monte_carlo(
    p_sx: &[Vec<f64>],
    rate: f64,
    n: usize,
    delta: f64,
    trials: usize,
    seed: u64,
) -> Result<CoveringEstimate> {
    if !(rate > 0.0) || trials == 0 || n == 0 {
        return Err(invalid("covering experiment needs rate > 0, n ≥ 1 and trials ≥ 1"));
    }
    let ns = p_sx.len();
    let nx = p_sx.first().map_or(0, Vec::len);
    if ns == 0 || nx == 0 || p_sx.iter().any(|r| r.len() != nx) {
        return Err(invalid("joint pmf must be a non-empty rectangular table"));
    }
    let total: f64 = p_sx.iter().flatten().sum();
    if (total - 1.0).abs() > 1e-9 || p_sx.iter().flatten().any(|p| *p < 0.0) {
        return Err(Error::Validation(format!("joint pmf sums to {total}")));
    }
    let q: Vec<f64> = p_sx.iter().map(|r| r.iter().sum()).collect();
    let p_x: Vec<f64> = (0..nx).map(|x| p_sx.iter().map(|r| r[x]).sum()).collect();
    let k = (n as f64 * rate).ceil() as usize;
    let explicit = k < usize::BITS as usize && (1usize << k) <= EXPLICIT_CODEBOOK_CAP;

    let mut failures = 0;
    for t in 0..trials as u64 {
        let mut s_rng = crate::rng::stream(seed, "monte-carlo", 2 * t);
        let mut c_rng = crate::rng::stream(seed, "monte-carlo", 2 * t + 1);
        let sn = sample_sequence(&mut s_rng, &q, n);
        let failed = if explicit {
            let mut found = false;
            for _ in 0..(1usize << k) {
                let xn = sample_sequence(&mut c_rng, &p_x, n);
                if is_jointly_typical(&sn, &xn, p_sx, delta)? {
                    found = true;
                    break;
                }
            }
            !found
        } else {
            let s_counts = type_of_indices(&sn, ns)?.counts;
            let p = joint_typical_prob(&s_counts, n, p_sx, &p_x, delta);
            let u: f64 = c_rng.random();
            if p <= 0.0 {
                true
            } else if p >= 1.0 {
                false
            } else {
                // (1 − p)^{2^k} computed in log space.
                let log_neg_log_fail = k as f64 * std::f64::consts::LN_2 + (-(-p).ln_1p()).ln();
                let ln_fail = -log_neg_log_fail.exp();
                u.ln() < ln_fail
            }
        };
        if failed {
            failures += 1;
        }
    }
    let p_hat = failures as f64 / trials as f64;
    Ok(CoveringEstimate {
        fail_prob_hat: p_hat,
        stderr: (p_hat * (1.0 - p_hat) / trials as f64).sqrt(),
        trials,
        failures,
        log2_codewords: k,
        exact_conditional: !explicit,
    })
}
