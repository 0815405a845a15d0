//! Quantum states, channels and isometries.
//!
//! Validated constructors (`new`) enforce the physical invariants: density
//! operators are Hermitian, unit-trace and PSD; Kraus sets are complete;
//! isometries satisfy `V†V = 1`. Operations that are guaranteed to preserve
//! those invariants return values without re-validating.

mod info;
mod ops;
pub mod random;

pub use info::{cond_mutual_info, entropy_of_matrix, mutual_info, mutual_info_matrix, vn_entropy};
pub use ops::{
    apply_channel, heisenberg_weyl, isometric_extension, max_entangled, polar_isometry, purify, ricochet_check,
    schmidt, Purification,
};

use crate::error::{invalid, Error, Result};
use crate::qcore::{c, eig_hermitian, eigenvalues_hermitian, partial_trace, CMatrix, C64, NEG_EIG_TOL};

pub const STATE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: CMatrix,
}

impl DensityOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(invalid("density operator must be square"));
        }
        if !matrix.is_hermitian(STATE_TOL) {
            return Err(Error::Validation("density operator is not Hermitian within 1e-9".into()));
        }
        let tr = matrix.trace().re;
        if (tr - 1.0).abs() > STATE_TOL {
            return Err(Error::Validation(format!("density operator trace is {tr}, expected 1")));
        }
        let min = eigenvalues_hermitian(&matrix)?[0];
        if min < -NEG_EIG_TOL {
            return Err(Error::Validation(format!("density operator has eigenvalue {min:e} < -1e-8")));
        }
        Ok(DensityOperator { matrix })
    }

    /// Wraps a matrix already known to be a state (output of a CPTP map).
    pub(crate) fn from_matrix_unchecked(matrix: CMatrix) -> Self {
        DensityOperator { matrix }
    }

    pub fn from_pure(psi: &PureState) -> Self {
        DensityOperator { matrix: CMatrix::outer(&psi.amplitudes, &psi.amplitudes) }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityOperator { matrix: CMatrix::identity(dim).scale_real(1.0 / dim as f64) }
    }

    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        Self::new(CMatrix::diag_real(probs))
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn partial_trace(&self, dims: &[usize], keep: &[usize]) -> Result<DensityOperator> {
        Ok(DensityOperator { matrix: partial_trace(&self.matrix, dims, keep)? })
    }

    pub fn tensor(&self, other: &DensityOperator) -> DensityOperator {
        DensityOperator { matrix: crate::qcore::tensor_product(&self.matrix, &other.matrix) }
    }

    /// Convex combination `Σ w_k ρ_k` of states with equal dimension.
    pub fn mixture(weights: &[f64], states: &[DensityOperator]) -> Result<DensityOperator> {
        if weights.len() != states.len() || states.is_empty() {
            return Err(invalid("mixture needs one weight per state"));
        }
        let d = states[0].dim();
        let mut acc = CMatrix::zeros(d, d);
        for (w, s) in weights.iter().zip(states) {
            if s.dim() != d {
                return Err(invalid("mixture components differ in dimension"));
            }
            acc = &acc + &s.matrix.scale_real(*w);
        }
        DensityOperator::new(acc)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: Vec<C64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(invalid("pure state needs at least one amplitude"));
        }
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if !norm.is_finite() || (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::Validation(format!("pure state squared norm is {norm}, expected 1")));
        }
        Ok(PureState { amplitudes })
    }

    /// Rescales a non-zero vector to unit norm.
    pub fn normalized(mut amplitudes: Vec<C64>) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Numeric("cannot normalize a zero or non-finite vector".into()));
        }
        for z in amplitudes.iter_mut() {
            *z /= norm;
        }
        Ok(PureState { amplitudes })
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = vec![c(0.0, 0.0); dim];
        v[k] = c(1.0, 0.0);
        PureState { amplitudes: v }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn density(&self) -> DensityOperator {
        DensityOperator::from_pure(self)
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        PureState { amplitudes: crate::qcore::kron_vec(&self.amplitudes, &other.amplitudes) }
    }

    /// `|⟨self|other⟩|²`; pure states are compared up to global phase.
    pub fn fidelity(&self, other: &PureState) -> f64 {
        assert_eq!(self.dim(), other.dim());
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum::<C64>().norm_sqr()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<CMatrix>,
}

impl KrausChannel {
    pub const COMPLETENESS_TOL: f64 = 1e-9;

    pub fn new(dim_in: usize, dim_out: usize, kraus: Vec<CMatrix>) -> Result<Self> {
        let ch = Self::new_unchecked(dim_in, dim_out, kraus)?;
        let r = ch.completeness_residual();
        if r > Self::COMPLETENESS_TOL {
            return Err(Error::Validation(format!("Kraus completeness residual {r:.1e}")));
        }
        Ok(ch)
    }

    /// Checks shapes but not completeness.
    pub(crate) fn new_unchecked(dim_in: usize, dim_out: usize, kraus: Vec<CMatrix>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(invalid("channel needs at least one Kraus operator"));
        }
        for (k, op) in kraus.iter().enumerate() {
            if op.rows() != dim_out || op.cols() != dim_in {
                return Err(invalid(format!(
                    "Kraus operator {k} is {}x{}, expected {dim_out}x{dim_in}",
                    op.rows(),
                    op.cols()
                )));
            }
        }
        Ok(KrausChannel { dim_in, dim_out, kraus })
    }

    /// Largest entry of `Σ K†K − 1`.
    pub fn completeness_residual(&self) -> f64 {
        let mut acc = CMatrix::zeros(self.dim_in, self.dim_in);
        for k in &self.kraus {
            acc = &acc + &(&k.adjoint() * k);
        }
        acc.max_abs_diff(&CMatrix::identity(self.dim_in))
    }

    pub fn identity(dim: usize) -> Self {
        KrausChannel { dim_in: dim, dim_out: dim, kraus: vec![CMatrix::identity(dim)] }
    }

    /// Conjugation by a single operator (unitary or isometry); not validated.
    pub fn from_operator(op: CMatrix) -> Self {
        KrausChannel { dim_in: op.cols(), dim_out: op.rows(), kraus: vec![op] }
    }

    pub fn unitary(u: CMatrix) -> Result<Self> {
        let (din, dout) = (u.cols(), u.rows());
        Self::new(din, dout, vec![u])
    }

    /// The replacer channel `ρ ↦ Tr(ρ)·σ`.
    pub fn replacer(dim_in: usize, sigma: &DensityOperator) -> Result<Self> {
        let spec = eig_hermitian(sigma.matrix())?;
        let dout = sigma.dim();
        let mut kraus = Vec::new();
        for (i, &lam) in spec.eigenvalues.iter().enumerate() {
            if lam <= 0.0 {
                continue;
            }
            let v = spec.vector(i);
            for j in 0..dim_in {
                let mut k = CMatrix::zeros(dout, dim_in);
                for (r, z) in v.iter().enumerate() {
                    k[(r, j)] = z * lam.sqrt();
                }
                kraus.push(k);
            }
        }
        Self::new(dim_in, dout, kraus)
    }

    pub fn completely_depolarizing(dim: usize) -> Self {
        Self::replacer(dim, &DensityOperator::maximally_mixed(dim)).expect("valid replacer")
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    /// `Σ K ρ K†` on a raw matrix acting on the whole input space.
    pub fn apply_matrix(&self, rho: &CMatrix) -> CMatrix {
        let mut acc = CMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            acc = &acc + &k.sandwich(rho);
        }
        acc
    }

    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        if rho.dim() != self.dim_in {
            return Err(invalid(format!("channel input dim {} vs state dim {}", self.dim_in, rho.dim())));
        }
        Ok(DensityOperator::from_matrix_unchecked(self.apply_matrix(rho.matrix())))
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn after(&self, first: &KrausChannel) -> Result<KrausChannel> {
        if first.dim_out != self.dim_in {
            return Err(invalid("composition dimension mismatch"));
        }
        let kraus = self.kraus.iter().flat_map(|a| first.kraus.iter().map(move |b| a * b)).collect();
        Ok(KrausChannel { dim_in: first.dim_in, dim_out: self.dim_out, kraus })
    }

    /// Every Kraus operator multiplied by `√w`.
    pub(crate) fn weighted_kraus(&self, w: f64) -> impl Iterator<Item = CMatrix> + '_ {
        let s = w.sqrt();
        self.kraus.iter().map(move |k| k.scale_real(s))
    }

    /// True when the channel has a single Kraus operator that is an isometry.
    pub fn is_isometric(&self, tol: f64) -> bool {
        self.kraus.len() == 1 && self.completeness_residual() <= tol
    }

    /// Pads the Kraus list with zero operators up to `count` entries.
    pub fn padded(&self, count: usize) -> KrausChannel {
        let mut kraus = self.kraus.clone();
        while kraus.len() < count {
            kraus.push(CMatrix::zeros(self.dim_out, self.dim_in));
        }
        KrausChannel { dim_in: self.dim_in, dim_out: self.dim_out, kraus }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Isometry {
    matrix: CMatrix,
}

impl Isometry {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.rows() < matrix.cols() {
            return Err(invalid("isometry needs dim_out >= dim_in"));
        }
        let gram = &matrix.adjoint() * &matrix;
        let r = gram.max_abs_diff(&CMatrix::identity(matrix.cols()));
        if r > STATE_TOL {
            return Err(Error::Validation(format!("V†V deviates from identity by {r:.1e}")));
        }
        Ok(Isometry { matrix })
    }

    pub fn dim_in(&self) -> usize {
        self.matrix.cols()
    }

    pub fn dim_out(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn to_channel(&self) -> KrausChannel {
        KrausChannel::from_operator(self.matrix.clone())
    }
}

/// Classical–quantum state `Σ_s q(s) |s⟩⟨s| ⊗ ρ_s`.
#[derive(Clone, Debug)]
pub struct CqState {
    pub labels: Vec<String>,
    pub probs: Vec<f64>,
    pub blocks: Vec<DensityOperator>,
}

impl CqState {
    pub fn new(labels: Vec<String>, probs: Vec<f64>, blocks: Vec<DensityOperator>) -> Result<Self> {
        if labels.len() != probs.len() || probs.len() != blocks.len() || blocks.is_empty() {
            return Err(invalid("cq-state needs equal numbers of labels, probabilities and blocks"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > STATE_TOL || probs.iter().any(|&p| p < 0.0) {
            return Err(Error::Validation(format!("cq-state probabilities sum to {total}")));
        }
        let d = blocks[0].dim();
        if blocks.iter().any(|b| b.dim() != d) {
            return Err(invalid("cq-state blocks differ in dimension"));
        }
        Ok(CqState { labels, probs, blocks })
    }

    /// Unlabelled convenience constructor; labels are `0, 1, …`.
    pub fn from_blocks(probs: Vec<f64>, blocks: Vec<DensityOperator>) -> Result<Self> {
        let labels = (0..probs.len()).map(|i| i.to_string()).collect();
        Self::new(labels, probs, blocks)
    }

    pub fn block_dim(&self) -> usize {
        self.blocks[0].dim()
    }

    /// The quantum marginal `Σ_s q(s) ρ_s`.
    pub fn average(&self) -> DensityOperator {
        let d = self.block_dim();
        let mut acc = CMatrix::zeros(d, d);
        for (p, b) in self.probs.iter().zip(&self.blocks) {
            acc = &acc + &b.matrix().scale_real(*p);
        }
        DensityOperator::from_matrix_unchecked(acc)
    }
}

#[derive(Clone, Debug)]
pub struct SchmidtDecomposition {
    /// Non-zero Schmidt coefficients `√p_x`, descending.
    pub coefficients: Vec<f64>,
    pub left_basis: Vec<Vec<C64>>,
    pub right_basis: Vec<Vec<C64>>,
}

impl SchmidtDecomposition {
    pub fn rank(&self) -> usize {
        self.coefficients.len()
    }

    /// `Σ_x √p_x |x⟩|ψ_x⟩`.
    pub fn reconstruct(&self) -> Vec<C64> {
        let da = self.left_basis[0].len();
        let db = self.right_basis[0].len();
        let mut v = vec![c(0.0, 0.0); da * db];
        for ((s, l), r) in self.coefficients.iter().zip(&self.left_basis).zip(&self.right_basis) {
            for (i, a) in l.iter().enumerate() {
                for (j, b) in r.iter().enumerate() {
                    v[i * db + j] += a * b * *s;
                }
            }
        }
        v
    }

    /// Unitary whose first columns are the left Schmidt vectors, completed
    /// to an orthonormal basis of the left factor.
    pub fn left_unitary(&self) -> CMatrix {
        complete_basis(&self.left_basis)
    }

    pub fn right_unitary(&self) -> CMatrix {
        complete_basis(&self.right_basis)
    }
}

/// Completes orthonormal vectors to a unitary (vectors become the leading
/// columns) by Gram–Schmidt against the computational basis.
pub(crate) fn complete_basis(vectors: &[Vec<C64>]) -> CMatrix {
    let d = vectors[0].len();
    let mut basis: Vec<Vec<C64>> = vectors.to_vec();
    for k in 0..d {
        if basis.len() == d {
            break;
        }
        let mut v = vec![c(0.0, 0.0); d];
        v[k] = c(1.0, 0.0);
        for b in &basis {
            let overlap: C64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= overlap * bi;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            basis.push(v.into_iter().map(|z| z / norm).collect());
        }
    }
    let mut u = CMatrix::zeros(d, d);
    for (j, b) in basis.iter().enumerate() {
        for (i, z) in b.iter().enumerate() {
            u[(i, j)] = *z;
        }
    }
    u
}
