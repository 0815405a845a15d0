//! POVMs and the square-root measurement.

use crate::error::{invalid, Error, Result};
use crate::qcore::{eigenvalues_hermitian, spectral_function, trace_of_product, CMatrix, SpectralFn, CLIP_TOL};

/// Element positivity tolerance.
pub const POVM_PSD_TOL: f64 = 1e-9;
/// Completeness tolerance for `Σ Λ = I`.
pub const POVM_SUM_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct Povm {
    dim: usize,
    elements: Vec<CMatrix>,
}

impl Povm {
    pub fn new(elements: Vec<CMatrix>) -> Result<Self> {
        let dim = elements.first().ok_or_else(|| invalid("a POVM needs at least one element"))?.rows();
        let mut sum = CMatrix::zeros(dim, dim);
        for (k, e) in elements.iter().enumerate() {
            if e.rows() != dim || e.cols() != dim {
                return Err(invalid(format!("POVM element {k} is {}x{}, expected {dim}x{dim}", e.rows(), e.cols())));
            }
            if !e.is_hermitian(POVM_PSD_TOL) {
                return Err(Error::Validation(format!("POVM element {k} is not Hermitian")));
            }
            let min = eigenvalues_hermitian(e)?[0];
            if min < -POVM_PSD_TOL {
                return Err(Error::Validation(format!("POVM element {k} has eigenvalue {min:e}")));
            }
            sum = &sum + e;
        }
        let r = sum.max_abs_diff(&CMatrix::identity(dim));
        if r > POVM_SUM_TOL {
            return Err(Error::Validation(format!("POVM elements sum to identity only within {r:.1e}")));
        }
        Ok(Povm { dim, elements })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Born-rule probability `Tr(Λ_k ρ)`, clamped to `[0, 1]`.
    pub fn probability(&self, k: usize, rho: &CMatrix) -> Result<f64> {
        let e = self.elements.get(k).ok_or_else(|| invalid(format!("outcome {k} out of range")))?;
        Ok(trace_of_product(e, rho)?.re.clamp(0.0, 1.0))
    }
}

/// `Λ_m = T^{-1/2} S_m T^{-1/2}` with `T = Σ S_m`, the inverse square root
/// taken on the support of `T`. The completion `I − Σ Λ_m` is appended as the
/// last element; it is an erasure outcome that never decodes to a message.
pub fn sqrt_measurement(signals: &[CMatrix]) -> Result<Povm> {
    let dim = signals.first().ok_or_else(|| invalid("square-root measurement needs signals"))?.rows();
    let mut total = CMatrix::zeros(dim, dim);
    for (k, s) in signals.iter().enumerate() {
        if s.rows() != dim || s.cols() != dim {
            return Err(invalid(format!("signal {k} is {}x{}, expected {dim}x{dim}", s.rows(), s.cols())));
        }
        total = &total + s;
    }
    if total.trace().re <= CLIP_TOL {
        return Err(Error::Domain("square-root measurement of all-zero signals".into()));
    }
    let inv_sqrt = spectral_function(&total, SpectralFn::InvSqrtSupport, CLIP_TOL)?;
    let mut elements: Vec<CMatrix> = signals.iter().map(|s| inv_sqrt.sandwich(s).hermitian_part()).collect();
    let mut completion = CMatrix::identity(dim);
    for e in &elements {
        completion = &completion - e;
    }
    elements.push(completion.hermitian_part());
    Povm::new(elements)
}
