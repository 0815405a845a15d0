//! Random states, unitaries and channels for tests and optimizer seeds.

use super::{DensityOperator, KrausChannel, PureState};
use crate::qcore::{c, partial_trace, CMatrix, C64};
use rand::Rng;
use rand_distr::StandardNormal;

/// Matrix of i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    let mut m = CMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            m[(i, j)] = c(re, im) * std::f64::consts::FRAC_1_SQRT_2;
        }
    }
    m
}

/// Haar-distributed unitary (QR of a Ginibre matrix with phase correction).
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    random_isometry(rng, dim, dim)
}

/// Haar-random isometry `C^dim_in → C^dim_out`.
pub fn random_isometry<R: Rng + ?Sized>(rng: &mut R, dim_out: usize, dim_in: usize) -> CMatrix {
    assert!(dim_out >= dim_in);
    let g = ginibre(rng, dim_out, dim_in);
    let qr = g.na().clone().qr();
    let q = qr.q();
    let r = qr.r();
    let mut out = CMatrix::zeros(dim_out, dim_in);
    for j in 0..dim_in {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..dim_out {
            out[(i, j)] = q[(i, j)] * phase;
        }
    }
    out
}

pub fn random_pure_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> PureState {
    let g = ginibre(rng, dim, 1);
    PureState::normalized(g.col(0)).expect("Gaussian vector is non-zero")
}

/// Random state of the given rank (partial trace of a random pure state).
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> DensityOperator {
    let psi = random_pure_state(rng, dim * rank);
    let rho = partial_trace(&psi.density().into_matrix(), &[dim, rank], &[0]).expect("dims match");
    DensityOperator::from_matrix_unchecked(rho.hermitian_part())
}

/// Random channel with `num_kraus` operators, from a Haar isometry into `B ⊗ E`.
pub fn random_channel<R: Rng + ?Sized>(rng: &mut R, dim_in: usize, dim_out: usize, num_kraus: usize) -> KrausChannel {
    let v = random_isometry(rng, dim_out * num_kraus, dim_in);
    let kraus = (0..num_kraus)
        .map(|j| {
            let rows: Vec<usize> = (0..dim_out).map(|a| a * num_kraus + j).collect();
            let cols: Vec<usize> = (0..dim_in).collect();
            v.select(&rows, &cols)
        })
        .collect();
    KrausChannel::new(dim_in, dim_out, kraus).expect("isometry gives a complete Kraus set")
}
