//! Encoders for both schemes and the letterwise channel.
//!
//! States live on `X_1 … X_n ⊗ B_1 … B_n`: all of Alice's letters first,
//! then all of Bob's halves of the shared pairs.

use super::codebook::{BinnedCodebook, GammaCodebook};
use super::layout::{u_of_gamma, EntangledResource};
use crate::error::{invalid, Error, Result};
use crate::mtypes::DIM_CAP;
use crate::qcore::{apply_local_kraus, tensor_all, CMatrix};
use crate::quantum::DensityOperator;
use crate::rpchannel::{EncoderFamily, RandomParameterChannel};

pub(crate) fn checked_power(d: usize, n: usize) -> Result<usize> {
    (d as u128)
        .checked_pow(n as u32)
        .filter(|t| *t <= DIM_CAP as u128)
        .map(|t| t as usize)
        .ok_or_else(|| Error::CapExceeded(format!("dimension {d}^{n} exceeds the dense cap of {DIM_CAP}")))
}

/// Dims of `n` letters of `x` followed by `n` letters of `b`.
pub(crate) fn grouped_dims(x: usize, b: usize, n: usize) -> Vec<usize> {
    let mut d = vec![x; n];
    d.extend(std::iter::repeat_n(b, n));
    d
}

fn check_state_cap(x: usize, b: usize, n: usize) -> Result<()> {
    let total = checked_power(x, n)?.checked_mul(checked_power(b, n)?);
    match total {
        Some(t) if t <= DIM_CAP => Ok(()),
        _ => Err(Error::CapExceeded(format!("state on ({x}x{b})^{n} exceeds the dense cap of {DIM_CAP}"))),
    }
}

fn check_sequence(sn: &[usize], n: usize, num_params: usize) -> Result<()> {
    if sn.len() != n {
        return Err(invalid(format!("parameter sequence has length {}, expected {n}", sn.len())));
    }
    if let Some(&s) = sn.iter().find(|&&s| s >= num_params) {
        return Err(invalid(format!("parameter index {s} out of range 0..{num_params}")));
    }
    Ok(())
}

/// Applies a per-letter Kraus map to each of the first `n` factors.
pub(crate) fn apply_letterwise<'a>(
    mut rho: CMatrix,
    mut dims: Vec<usize>,
    n: usize,
    maps: impl Iterator<Item = &'a [CMatrix]>,
) -> Result<(CMatrix, Vec<usize>)> {
    for (i, kraus) in maps.enumerate().take(n) {
        rho = apply_local_kraus(&rho, &dims, i, kraus)?;
        dims[i] = kraus[0].rows();
    }
    Ok((rho, dims))
}

/// `(U_K ⊗ 1) ξ^{⊗n}` as a density matrix, `U_K` acting on all key letters.
fn rotated_resource(resource: &EntangledResource, u_key: &CMatrix, n: usize) -> Result<CMatrix> {
    let v = resource.power_vector(n)?;
    let dk = checked_power(resource.dim(), n)?;
    let rho = CMatrix::outer(&v, &v);
    apply_local_kraus(&rho, &[dk, dk], 0, std::slice::from_ref(u_key))
}

/// Causal encoding of message `m`: the block operator on the key half of
/// `ξ^{⊗n}` first, then `F^(s_i)` on letter `i`.
pub fn encode_causal(
    m: usize,
    codebook: &GammaCodebook,
    resource: &EntangledResource,
    fam: &EncoderFamily,
    sn: &[usize],
) -> Result<DensityOperator> {
    let n = codebook.n;
    let layout = resource.layout(n)?;
    codebook.check_for(&layout)?;
    let g =
        codebook.entries.get(m).ok_or_else(|| invalid(format!("message {m} out of range 0..{}", codebook.len())))?;
    if fam.dim_k() != resource.dim() {
        return Err(invalid(format!(
            "family input dim {} differs from the shared state's {}",
            fam.dim_k(),
            resource.dim()
        )));
    }
    check_sequence(sn, n, fam.len())?;
    let d = resource.dim();
    check_state_cap(d.max(fam.dim_a()), d, n)?;
    let u_key = resource.key_operator(&u_of_gamma(g, &layout)?, n);
    let rho = rotated_resource(resource, &u_key, n)?;
    let (rho, _) = apply_letterwise(rho, grouped_dims(d, d, n), n, sn.iter().map(|&s| fam.maps()[s].kraus()))?;
    Ok(DensityOperator::from_matrix_unchecked(rho))
}

/// Both codebooks of the non-causal scheme: codeword `ℓ` carries sequence
/// `ℓ` of the binned book and block label `ℓ` of the label book.
#[derive(Clone, Debug)]
pub struct NoncausalCodebooks {
    pub binned: BinnedCodebook,
    pub gammas: GammaCodebook,
}

impl NoncausalCodebooks {
    pub fn new(binned: BinnedCodebook, gammas: GammaCodebook) -> Result<Self> {
        if gammas.len() != binned.num_codewords() || gammas.n != binned.n {
            return Err(invalid(format!(
                "{} block labels for {} binned codewords",
                gammas.len(),
                binned.num_codewords()
            )));
        }
        Ok(NoncausalCodebooks { binned, gammas })
    }
}

#[derive(Clone, Debug)]
pub struct NoncausalEncoding {
    pub ell: usize,
    pub covering_failed: bool,
    pub state: DensityOperator,
}

/// Non-causal encoding of message `m`: choose `ℓ` in bin `m` by joint
/// typicality with `s^n`, apply `F^(s_i)` letterwise, then the block
/// operator transported to `A^n`:
/// `U_A = F U_K F† + (1 − F F†)` with `F = ⊗_i F^(s_i)`.
/// The family must consist of isometries.
pub fn encode_noncausal(
    m: usize,
    books: &NoncausalCodebooks,
    resource: &EntangledResource,
    fam: &EncoderFamily,
    sn: &[usize],
    p_sx: &[Vec<f64>],
    delta: f64,
) -> Result<NoncausalEncoding> {
    let n = books.gammas.n;
    let layout = resource.layout(n)?;
    books.gammas.check_for(&layout)?;
    if fam.dim_k() != resource.dim() {
        return Err(invalid(format!(
            "family input dim {} differs from the shared state's {}",
            fam.dim_k(),
            resource.dim()
        )));
    }
    let isos = fam.isometry_matrices().map_err(|_| invalid("the non-causal encoder needs an isometric family"))?;
    check_sequence(sn, n, fam.len())?;
    let d = resource.dim();
    let da = fam.dim_a();
    check_state_cap(d.max(da), d, n)?;
    let (ell, covering_failed) = books.binned.select(m, sn, p_sx, delta)?;

    let v = resource.power_vector(n)?;
    let rho = CMatrix::outer(&v, &v);
    let (rho, dims) = apply_letterwise(rho, grouped_dims(d, d, n), n, sn.iter().map(|&s| fam.maps()[s].kraus()))?;

    let f = tensor_all(sn.iter().map(|&s| isos[s]));
    let u_key = resource.key_operator(&u_of_gamma(&books.gammas.entries[ell], &layout)?, n);
    let dan = f.rows();
    let u_a = &(&f.sandwich(&u_key) + &CMatrix::identity(dan)) - &(&f * &f.adjoint());
    let db = checked_power(d, n)?;
    debug_assert_eq!(dims.iter().product::<usize>(), dan * db);
    let rho = apply_local_kraus(&rho, &[dan, db], 0, std::slice::from_ref(&u_a))?;
    Ok(NoncausalEncoding { ell, covering_failed, state: DensityOperator::from_matrix_unchecked(rho) })
}

/// `N^(s_i)` on letter `i` of the `A^n` half of a state on `A^n ⊗ B^n`.
pub fn channel_apply_n(rp: &RandomParameterChannel, sn: &[usize], state: &DensityOperator) -> Result<DensityOperator> {
    let n = sn.len();
    if n == 0 {
        return Err(invalid("empty parameter sequence"));
    }
    check_sequence(sn, n, rp.num_params())?;
    let dan = checked_power(rp.dim_in(), n)?;
    if state.dim() % dan != 0 {
        return Err(invalid(format!("state dim {} is not a multiple of {}^{n}", state.dim(), rp.dim_in())));
    }
    let rest = state.dim() / dan;
    let db = (rest as f64).powf(1.0 / n as f64).round() as usize;
    if checked_power(db, n).ok() != Some(rest) {
        return Err(invalid(format!("state dim {} does not factor as ({}·b)^{n}", state.dim(), rp.dim_in())));
    }
    let (rho, _) = apply_letterwise(
        state.matrix().clone(),
        grouped_dims(rp.dim_in(), db, n),
        n,
        sn.iter().map(|&s| rp.branches()[s].kraus()),
    )?;
    Ok(DensityOperator::from_matrix_unchecked(rho))
}
