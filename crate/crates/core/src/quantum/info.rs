use super::{CqState, DensityOperator};
use crate::error::{invalid, Result};
use crate::qcore::{eigenvalues_hermitian, partial_trace, CMatrix};

/// Eigenvalues at or below this contribute nothing to an entropy.
const ENTROPY_EIG_CUTOFF: f64 = 1e-12;

/// Von Neumann entropy (bits) of a Hermitian matrix, clamped to `[0, log2 d]`.
pub fn entropy_of_matrix(m: &CMatrix) -> Result<f64> {
    let eigs = eigenvalues_hermitian(m)?;
    let h: f64 = eigs.iter().filter(|&&l| l > ENTROPY_EIG_CUTOFF).map(|&l| -l * l.log2()).sum();
    Ok(h.clamp(0.0, (m.rows() as f64).log2()))
}

pub fn vn_entropy(rho: &DensityOperator) -> Result<f64> {
    entropy_of_matrix(rho.matrix())
}

/// `I(A;B) = H(A) + H(B) − H(AB)` of a bipartite matrix on `A ⊗ B`.
pub fn mutual_info_matrix(rho_ab: &CMatrix, dim_a: usize, dim_b: usize) -> Result<f64> {
    if rho_ab.rows() != dim_a * dim_b {
        return Err(invalid(format!("mutual information: state dim {} is not {dim_a}x{dim_b}", rho_ab.rows())));
    }
    let dims = [dim_a, dim_b];
    let ha = entropy_of_matrix(&partial_trace(rho_ab, &dims, &[0])?)?;
    let hb = entropy_of_matrix(&partial_trace(rho_ab, &dims, &[1])?)?;
    let hab = entropy_of_matrix(rho_ab)?;
    Ok((ha + hb - hab).max(0.0))
}

pub fn mutual_info(rho_ab: &DensityOperator, dim_a: usize, dim_b: usize) -> Result<f64> {
    mutual_info_matrix(rho_ab.matrix(), dim_a, dim_b)
}

/// `I(A;B|S) = Σ_s q(s) I(A;B)_{ρ_s}` for a cq-state whose blocks live on `A ⊗ B`.
pub fn cond_mutual_info(cq: &CqState, dim_a: usize, dim_b: usize) -> Result<f64> {
    let mut total = 0.0;
    for (p, block) in cq.probs.iter().zip(&cq.blocks) {
        if *p > 0.0 {
            total += p * mutual_info(block, dim_a, dim_b)?;
        }
    }
    Ok(total)
}
