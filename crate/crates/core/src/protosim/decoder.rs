//! Decoder geometry shared by the simulator and the packing verifier:
//! the letter state `ω = (M ⊗ 1)(ξ)`, its `n`-fold typical projectors and
//! the per-codeword projectors, all on `B'^n ⊗ B^n` in grouped order.

use serde::Serialize;

use super::layout::{grouping_permutation, EntangledResource};
use crate::error::{invalid, Result};
use crate::mtypes::{typical_projector, Projector, TypicalProjector};
use crate::qcore::{apply_local_kraus, permute_subsystems, tensor_power, tensor_product, CMatrix};
use crate::quantum::{DensityOperator, KrausChannel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecoderKind {
    /// Signals `Π Π_γ Π` from typical projectors.
    Projector,
    /// Signals are the codeword states themselves (pretty-good measurement).
    Pgm,
}

impl DecoderKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "projector" => Ok(DecoderKind::Projector),
            "pgm" => Ok(DecoderKind::Pgm),
            other => Err(invalid(format!("unknown decoder {other:?} (expected projector or pgm)"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DecoderKind::Projector => "projector",
            DecoderKind::Pgm => "pgm",
        }
    }
}

/// Entropy and typicality constant of one typical projector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TypicalStats {
    pub entropy: f64,
    pub constant: f64,
    pub rank: usize,
}

impl TypicalStats {
    fn of(t: &TypicalProjector) -> Self {
        TypicalStats { entropy: t.entropy, constant: t.constant, rank: t.projector.rank() }
    }
}

#[derive(Clone, Debug)]
pub struct DecoderGeometry {
    pub n: usize,
    pub delta: f64,
    pub dim_out: usize,
    pub dim_b: usize,
    /// Single-letter `ω` on `B' ⊗ B`.
    pub omega: DensityOperator,
    /// `Π^δ(ω_B')^{⊗n} ⊗ Π^δ(ω_B)^{⊗n}`.
    pub code_projector: Projector,
    /// `Π^δ(ω)` on `(B'B)^n`, regrouped.
    pub joint_projector: CMatrix,
    /// `ω^{⊗n}`, regrouped.
    pub omega_power: CMatrix,
    pub joint_stats: TypicalStats,
    pub out_stats: TypicalStats,
    pub bob_stats: TypicalStats,
}

impl DecoderGeometry {
    pub fn new(virtual_channel: &KrausChannel, resource: &EntangledResource, n: usize, delta: f64) -> Result<Self> {
        if virtual_channel.dim_in() != resource.dim() {
            return Err(invalid(format!(
                "virtual channel input dim {} differs from the shared state's {}",
                virtual_channel.dim_in(),
                resource.dim()
            )));
        }
        let (dk, dout) = (resource.dim(), virtual_channel.dim_out());
        let xi = resource.state().density();
        let omega = apply_local_kraus(xi.matrix(), &[dk, dk], 0, virtual_channel.kraus())?;
        let omega = DensityOperator::from_matrix_unchecked(omega);
        let omega_out = omega.partial_trace(&[dout, dk], &[0])?;
        let omega_b = omega.partial_trace(&[dout, dk], &[1])?;

        let joint = typical_projector(&omega, n, delta)?;
        let out = typical_projector(&omega_out, n, delta)?;
        let bob = typical_projector(&omega_b, n, delta)?;

        let interleaved: Vec<usize> = (0..n).flat_map(|_| [dout, dk]).collect();
        let perm = grouping_permutation(n);
        let joint_projector = permute_subsystems(joint.projector.matrix(), &interleaved, &perm)?;
        let omega_power = permute_subsystems(&tensor_power(omega.matrix(), n), &interleaved, &perm)?;
        let code_projector = Projector::new(tensor_product(out.projector.matrix(), bob.projector.matrix()))?;
        Ok(DecoderGeometry {
            n,
            delta,
            dim_out: dout,
            dim_b: dk,
            omega,
            code_projector,
            joint_projector,
            omega_power,
            joint_stats: TypicalStats::of(&joint),
            out_stats: TypicalStats::of(&out),
            bob_stats: TypicalStats::of(&bob),
        })
    }

    fn bob_dims(&self) -> [usize; 2] {
        [self.dim_out.pow(self.n as u32), self.dim_b.pow(self.n as u32)]
    }

    /// `(1 ⊗ B) X (1 ⊗ B)†` with `B` acting on `B^n`.
    pub fn conjugate_bob(&self, x: &CMatrix, bob_op: &CMatrix) -> Result<CMatrix> {
        apply_local_kraus(x, &self.bob_dims(), 1, std::slice::from_ref(bob_op))
    }

    /// `Π_γ = (1 ⊗ B_γ) Π^δ(ω) (1 ⊗ B_γ)†`.
    pub fn codeword_projector(&self, bob_op: &CMatrix) -> Result<CMatrix> {
        self.conjugate_bob(&self.joint_projector, bob_op)
    }

    /// `(1 ⊗ B_γ) ω^{⊗n} (1 ⊗ B_γ)†`: the codeword state through the virtual channel.
    pub fn codeword_state(&self, bob_op: &CMatrix) -> Result<CMatrix> {
        self.conjugate_bob(&self.omega_power, bob_op)
    }

    pub fn signal(&self, bob_op: &CMatrix, kind: DecoderKind) -> Result<CMatrix> {
        match kind {
            DecoderKind::Projector => {
                let p = self.code_projector.matrix();
                Ok(p.sandwich(&self.codeword_projector(bob_op)?).hermitian_part())
            }
            DecoderKind::Pgm => self.codeword_state(bob_op),
        }
    }
}
