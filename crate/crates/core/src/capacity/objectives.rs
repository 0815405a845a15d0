//! Single-letter capacity objectives for each side-information scenario.
//!
//! Every objective accepts a (possibly mixed) input state; the optimizer only
//! ever passes pure states, the mixed case exists for the purification
//! property checks. Subsystem dimensions are inferred from the channel and the
//! encoder family.

use crate::error::{invalid, Result};
use crate::qcore::{apply_local_kraus, partial_trace, permute_subsystems, CMatrix};
use crate::quantum::{entropy_of_matrix, mutual_info_matrix, DensityOperator, KrausChannel};
use crate::rpchannel::{EncoderFamily, RandomParameterChannel};
use serde::Serialize;

/// Applies a Kraus list to factor `target` of a bipartite matrix.
pub(crate) fn apply_local(rho: &CMatrix, dims: [usize; 2], target: usize, kraus: &[CMatrix]) -> CMatrix {
    apply_local_kraus(rho, &dims, target, kraus).expect("caller checked the factor dimensions")
}

fn split_dim(total: usize, known: usize, what: &str) -> Result<usize> {
    if known == 0 || total % known != 0 {
        return Err(invalid(format!("{what}: state dim {total} is not a multiple of {known}")));
    }
    Ok(total / known)
}

/// `I(A;B)` of `(1 ⊗ N)(φ)` for `φ` on `A ⊗ A'`.
pub fn objective_no_csi(phi: &DensityOperator, channel: &KrausChannel) -> Result<f64> {
    let da = split_dim(phi.dim(), channel.dim_in(), "no-CSI objective")?;
    let out = apply_local(phi.matrix(), [da, channel.dim_in()], 1, channel.kraus());
    mutual_info_matrix(&out, da, channel.dim_out())
}

/// `Σ_s q(s) I(A;B)` of `(1 ⊗ N^(s))(φ)`.
pub fn objective_decoder(phi: &DensityOperator, rp: &RandomParameterChannel) -> Result<f64> {
    let din = rp.dim_in();
    let da = split_dim(phi.dim(), din, "decoder-CSI objective")?;
    let mut total = 0.0;
    for (p, b) in rp.probs().iter().zip(rp.branches()) {
        if *p > 0.0 {
            let out = apply_local(phi.matrix(), [da, din], 1, b.kraus());
            total += p * mutual_info_matrix(&out, da, rp.dim_out())?;
        }
    }
    Ok(total)
}

/// `I(R;B)` of `ω_RB = Σ_s q(s) (N^(s) ∘ F^(s) ⊗ 1_R)(θ)`, `θ` on `K ⊗ R`.
pub fn objective_causal(theta: &DensityOperator, family: &EncoderFamily, rp: &RandomParameterChannel) -> Result<f64> {
    family.check_for(rp)?;
    let dk = family.dim_k();
    let dr = split_dim(theta.dim(), dk, "causal objective")?;
    let db = rp.dim_out();
    let mut omega = CMatrix::zeros(db * dr, db * dr);
    for ((p, b), f) in rp.probs().iter().zip(rp.branches()).zip(family.maps()) {
        if *p <= 0.0 {
            continue;
        }
        let composed = b.after(f)?;
        let out = apply_local(theta.matrix(), [dk, dr], 0, composed.kraus());
        omega = &omega + &out.scale_real(*p);
    }
    mutual_info_matrix(&omega, db, dr)
}

/// The same quantity evaluated as the no-CSI objective of the virtual
/// channel `M` on `θ` reordered to `R ⊗ K`.
pub fn objective_causal_via_virtual(
    theta: &DensityOperator,
    family: &EncoderFamily,
    rp: &RandomParameterChannel,
) -> Result<f64> {
    let m = rp.virtual_channel(family)?;
    let dk = family.dim_k();
    let dr = split_dim(theta.dim(), dk, "causal objective")?;
    let swapped = permute_subsystems(theta.matrix(), &[dk, dr], &[1, 0])?;
    objective_no_csi(&DensityOperator::from_matrix_unchecked(swapped), &m)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NoncausalValue {
    pub i_ab: f64,
    pub i_as: f64,
    pub value: f64,
}

/// Per-parameter states `ω^s_AB` for `θ` on `K ⊗ A'`, encoder `F^(s): K → A`
/// on the first factor and channel `N^(s)` on the second.
fn noncausal_branch_states(
    theta: &DensityOperator,
    family: &EncoderFamily,
    rp: &RandomParameterChannel,
) -> Result<Vec<CMatrix>> {
    if family.len() != rp.num_params() {
        return Err(invalid(format!(
            "encoder family has {} maps but the channel has {} parameter values",
            family.len(),
            rp.num_params()
        )));
    }
    let dk = family.dim_k();
    let din = rp.dim_in();
    if theta.dim() != dk * din {
        return Err(invalid(format!("non-causal objective: state dim {} is not {dk}x{din}", theta.dim())));
    }
    let da = family.dim_a();
    rp.branches()
        .iter()
        .zip(family.maps())
        .map(|(b, f)| {
            let encoded = apply_local(theta.matrix(), [dk, din], 0, f.kraus());
            Ok(apply_local(&encoded, [da, din], 1, b.kraus()))
        })
        .collect()
}

/// `I(A;B) − I(A;S)` for the state `Σ_s q(s)|s⟩⟨s| ⊗ ω^s_AB`.
pub fn objective_noncausal(
    theta: &DensityOperator,
    family: &EncoderFamily,
    rp: &RandomParameterChannel,
) -> Result<NoncausalValue> {
    let branches = noncausal_branch_states(theta, family, rp)?;
    let (da, db) = (family.dim_a(), rp.dim_out());
    let mut avg = CMatrix::zeros(da * db, da * db);
    let mut cond_entropy_a = 0.0;
    for (p, w) in rp.probs().iter().zip(&branches) {
        if *p <= 0.0 {
            continue;
        }
        avg = &avg + &w.scale_real(*p);
        cond_entropy_a += p * entropy_of_matrix(&partial_trace(w, &[da, db], &[0])?)?;
    }
    let i_ab = mutual_info_matrix(&avg, da, db)?;
    let h_a = entropy_of_matrix(&partial_trace(&avg, &[da, db], &[0])?)?;
    let i_as = (h_a - cond_entropy_a).max(0.0);
    Ok(NoncausalValue { i_ab, i_as, value: i_ab - i_as })
}

/// `I(A;B|S) = Σ_s q(s) I(A;B)_{ω^s}` with the non-causal state.
pub fn objective_both(theta: &DensityOperator, family: &EncoderFamily, rp: &RandomParameterChannel) -> Result<f64> {
    let branches = noncausal_branch_states(theta, family, rp)?;
    let (da, db) = (family.dim_a(), rp.dim_out());
    let mut total = 0.0;
    for (p, w) in rp.probs().iter().zip(&branches) {
        if *p > 0.0 {
            total += p * mutual_info_matrix(w, da, db)?;
        }
    }
    Ok(total)
}
