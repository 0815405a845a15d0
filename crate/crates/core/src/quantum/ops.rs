use super::{DensityOperator, Isometry, KrausChannel, PureState, SchmidtDecomposition};
use crate::error::{invalid, Error, Result};
use crate::qcore::{c, eig_hermitian, embed_operator, spectral_function, CMatrix, SpectralFn, C64, CLIP_TOL};
use std::f64::consts::PI;

/// Applies `channel` to subsystem `target` of a state on `dims`.
pub fn apply_channel(
    channel: &KrausChannel,
    rho: &DensityOperator,
    dims: &[usize],
    target: usize,
) -> Result<DensityOperator> {
    if target >= dims.len() {
        return Err(invalid(format!("target subsystem {target} out of range")));
    }
    if dims.iter().product::<usize>() != rho.dim() {
        return Err(invalid("subsystem dims do not match the state"));
    }
    if dims[target] != channel.dim_in() {
        return Err(invalid(format!(
            "channel input dim {} does not match subsystem dim {}",
            channel.dim_in(),
            dims[target]
        )));
    }
    let mut out_dims = dims.to_vec();
    out_dims[target] = channel.dim_out();
    let n_out: usize = out_dims.iter().product();
    let mut acc = CMatrix::zeros(n_out, n_out);
    for k in channel.kraus() {
        let e = embed_operator(k, dims, target);
        acc = &acc + &e.sandwich(rho.matrix());
    }
    Ok(DensityOperator::from_matrix_unchecked(acc))
}

#[derive(Clone, Debug)]
pub struct Purification {
    /// Pure state on `A ⊗ J`.
    pub state: PureState,
    pub dim_a: usize,
    pub dim_ref: usize,
}

/// `|ψ⟩ = Σ_k √λ_k |v_k⟩ ⊗ |k⟩` over the support of `rho`.
pub fn purify(rho: &DensityOperator) -> Result<Purification> {
    let spec = eig_hermitian(rho.matrix())?;
    let d = rho.dim();
    let support: Vec<usize> = (0..d).rev().filter(|&i| spec.eigenvalues[i] > CLIP_TOL).collect();
    if support.is_empty() {
        return Err(Error::Numeric("state has empty support".into()));
    }
    let r = support.len();
    let mut amps = vec![c(0.0, 0.0); d * r];
    for (k, &i) in support.iter().enumerate() {
        let s = spec.eigenvalues[i].sqrt();
        for (a, z) in spec.vector(i).iter().enumerate() {
            amps[a * r + k] = z * s;
        }
    }
    Ok(Purification { state: PureState::normalized(amps)?, dim_a: d, dim_ref: r })
}

/// Stinespring isometry `V = Σ_j K_j ⊗ |j⟩` into `B ⊗ E`, `E` indexing the
/// Kraus operators.
pub fn isometric_extension(channel: &KrausChannel) -> Result<Isometry> {
    let e = channel.kraus().len();
    let (din, dout) = (channel.dim_in(), channel.dim_out());
    let mut v = CMatrix::zeros(dout * e, din);
    for (j, k) in channel.kraus().iter().enumerate() {
        for a in 0..dout {
            for i in 0..din {
                v[(a * e + j, i)] = k[(a, i)];
            }
        }
    }
    Isometry::new(v)
}

/// Heisenberg–Weyl operator `X(a) Z(b)` on `C^dim`.
pub fn heisenberg_weyl(dim: usize, a: usize, b: usize) -> Result<CMatrix> {
    if dim == 0 || a >= dim || b >= dim {
        return Err(Error::Domain(format!("Heisenberg-Weyl indices ({a},{b}) outside Z_{dim}")));
    }
    let mut m = CMatrix::zeros(dim, dim);
    for j in 0..dim {
        let phase = 2.0 * PI * ((b * j) % dim) as f64 / dim as f64;
        m[((a + j) % dim, j)] = C64::from_polar(1.0, phase);
    }
    Ok(m)
}

/// `|Φ⟩ = d^{-1/2} Σ_i |i⟩|i⟩`.
pub fn max_entangled(dim: usize) -> PureState {
    let mut v = vec![c(0.0, 0.0); dim * dim];
    let amp = 1.0 / (dim as f64).sqrt();
    for i in 0..dim {
        v[i * dim + i] = c(amp, 0.0);
    }
    PureState::normalized(v).expect("non-zero vector")
}

/// Schmidt decomposition of a pure state on `A ⊗ B`, dropping zero coefficients.
pub fn schmidt(psi: &PureState, dim_a: usize, dim_b: usize) -> Result<SchmidtDecomposition> {
    if psi.dim() != dim_a * dim_b {
        return Err(invalid(format!("state dim {} is not {dim_a}x{dim_b}", psi.dim())));
    }
    let coeff = CMatrix::from_row_major(dim_a, dim_b, psi.amplitudes().to_vec())?;
    let svd = coeff.na().clone().svd(true, true);
    let u = svd.u.ok_or_else(|| Error::Numeric("SVD did not return U".into()))?;
    let v_t = svd.v_t.ok_or_else(|| Error::Numeric("SVD did not return V".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&x, &y| svd.singular_values[y].total_cmp(&svd.singular_values[x]));
    let mut out = SchmidtDecomposition { coefficients: vec![], left_basis: vec![], right_basis: vec![] };
    for k in order {
        let s = svd.singular_values[k];
        if s * s <= 1e-12 {
            continue;
        }
        out.coefficients.push(s);
        out.left_basis.push((0..dim_a).map(|i| u[(i, k)]).collect());
        out.right_basis.push((0..dim_b).map(|j| v_t[(k, j)]).collect());
    }
    Ok(out)
}

/// `‖(U ⊗ 1)|Φ⟩ − (1 ⊗ U^T)|Φ⟩‖` for a square `U`; zero up to rounding.
pub fn ricochet_check(u: &CMatrix, dim: usize) -> Result<f64> {
    if u.rows() != dim || u.cols() != dim {
        return Err(invalid("ricochet check needs a dim x dim operator"));
    }
    let phi = max_entangled(dim);
    let id = CMatrix::identity(dim);
    let left = crate::qcore::tensor_product(u, &id).apply(phi.amplitudes());
    let right = crate::qcore::tensor_product(&id, &u.transpose()).apply(phi.amplitudes());
    Ok(left.iter().zip(&right).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt())
}

/// Nearest isometry `G (G†G)^{-1/2}` to a full-column-rank matrix.
pub fn polar_isometry(g: &CMatrix) -> Result<CMatrix> {
    let gram = &g.adjoint() * g;
    let eigs = crate::qcore::eigenvalues_hermitian(&gram)?;
    if eigs[0] <= 1e-14 * eigs[eigs.len() - 1].max(1.0) {
        return Err(Error::Numeric("polar retraction of a rank-deficient matrix".into()));
    }
    let inv_sqrt = spectral_function(&gram, SpectralFn::InvSqrtSupport, CLIP_TOL)?;
    Ok(g * &inv_sqrt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{partial_trace, tensor_product};
    use crate::quantum::{mutual_info, random, vn_entropy};
    use approx::assert_abs_diff_eq;

    fn pauli() -> [CMatrix; 4] {
        [
            CMatrix::identity(2),
            CMatrix::from_real(&[&[0.0, 1.0], &[1.0, 0.0]]),
            CMatrix::from_row_major(2, 2, vec![c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]).unwrap(),
            CMatrix::from_real(&[&[1.0, 0.0], &[0.0, -1.0]]),
        ]
    }

    #[test]
    fn depolarizing_on_half_of_bell() {
        let p: f64 = 0.3;
        let [i, x, y, z] = pauli();
        let k = vec![
            i.scale_real((1.0 - 3.0 * p / 4.0).sqrt()),
            x.scale_real((p / 4.0).sqrt()),
            y.scale_real((p / 4.0).sqrt()),
            z.scale_real((p / 4.0).sqrt()),
        ];
        let ch = KrausChannel::new(2, 2, k).unwrap();
        let out = apply_channel(&ch, &max_entangled(2).density(), &[2, 2], 1).unwrap();
        let phi = max_entangled(2).density();
        let expect = &phi.matrix().scale_real(1.0 - p) + &CMatrix::identity(4).scale_real(p / 4.0);
        assert!(out.matrix().max_abs_diff(&expect) < 1e-12);
    }

    #[test]
    fn apply_channel_rejects_mismatch() {
        let ch = KrausChannel::identity(3);
        assert!(apply_channel(&ch, &max_entangled(2).density(), &[2, 2], 1).is_err());
    }

    #[test]
    fn heisenberg_weyl_examples() {
        let [i, x, _, z] = pauli();
        assert!(heisenberg_weyl(2, 0, 0).unwrap().max_abs_diff(&i) < 1e-15);
        assert!(heisenberg_weyl(2, 1, 0).unwrap().max_abs_diff(&x) < 1e-15);
        assert!(heisenberg_weyl(2, 0, 1).unwrap().max_abs_diff(&z) < 1e-15);
        assert!(heisenberg_weyl(2, 1, 1).unwrap().max_abs_diff(&(&x * &z)) < 1e-15);
        assert!(matches!(heisenberg_weyl(2, 2, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn heisenberg_weyl_orthogonality() {
        for d in [2, 3, 4] {
            for (a, b) in (0..d).flat_map(|a| (0..d).map(move |b| (a, b))) {
                let u = heisenberg_weyl(d, a, b).unwrap();
                for (a2, b2) in (0..d).flat_map(|a| (0..d).map(move |b| (a, b))) {
                    let v = heisenberg_weyl(d, a2, b2).unwrap();
                    let tr = (&u.adjoint() * &v).trace().norm();
                    let expect = if (a, b) == (a2, b2) { d as f64 } else { 0.0 };
                    assert_abs_diff_eq!(tr, expect, epsilon = 1e-10);
                }
            }
        }
    }

    #[test]
    fn heisenberg_weyl_images_of_phi_are_orthonormal() {
        let d = 3;
        let phi = max_entangled(d);
        let id = CMatrix::identity(d);
        let vecs: Vec<Vec<C64>> = (0..d * d)
            .map(|k| tensor_product(&heisenberg_weyl(d, k / d, k % d).unwrap(), &id).apply(phi.amplitudes()))
            .collect();
        for (i, u) in vecs.iter().enumerate() {
            for (j, v) in vecs.iter().enumerate() {
                let ip: C64 = u.iter().zip(v).map(|(a, b)| a.conj() * b).sum();
                assert_abs_diff_eq!(ip.norm(), if i == j { 1.0 } else { 0.0 }, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn ricochet_holds_for_random_unitaries() {
        let mut rng = crate::rng::stream(7, "test", 0);
        for d in [2, 3, 5] {
            let u = random::haar_unitary(&mut rng, d);
            assert!(ricochet_check(&u, d).unwrap() < 1e-10);
        }
    }

    #[test]
    fn schmidt_examples() {
        let s = schmidt(&max_entangled(2), 2, 2).unwrap();
        assert_eq!(s.rank(), 2);
        for &x in &s.coefficients {
            assert_abs_diff_eq!(x, 0.5f64.sqrt(), epsilon = 1e-12);
        }
        let prod = PureState::basis(2, 0).tensor(&PureState::basis(3, 2));
        let s = schmidt(&prod, 2, 3).unwrap();
        assert_eq!(s.coefficients.len(), 1);
        assert_abs_diff_eq!(s.coefficients[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn schmidt_reconstructs_random_states() {
        let mut rng = crate::rng::stream(11, "test", 0);
        for (da, db) in [(2, 2), (2, 3), (4, 3)] {
            let psi = random::random_pure_state(&mut rng, da * db);
            let s = schmidt(&psi, da, db).unwrap();
            let sum: f64 = s.coefficients.iter().map(|x| x * x).sum();
            assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-10);
            assert!(s.coefficients.windows(2).all(|w| w[0] >= w[1]));
            let back = s.reconstruct();
            let err: f64 = back.iter().zip(psi.amplitudes()).map(|(a, b)| (a - b).norm_sqr()).sum();
            assert!(err < 1e-20);
            let wl = s.left_unitary();
            assert!((&wl.adjoint() * &wl).max_abs_diff(&CMatrix::identity(da)) < 1e-10);
            let wr = s.right_unitary();
            assert!((&wr.adjoint() * &wr).max_abs_diff(&CMatrix::identity(db)) < 1e-10);
        }
    }

    #[test]
    fn purification_recovers_state() {
        let mut rng = crate::rng::stream(3, "test", 0);
        for rank in [1, 2, 3] {
            let rho = random::random_density(&mut rng, 3, rank);
            let p = purify(&rho).unwrap();
            assert_eq!(p.dim_ref, rank);
            let back = partial_trace(&p.state.density().into_matrix(), &[3, p.dim_ref], &[0]).unwrap();
            assert!(back.max_abs_diff(rho.matrix()) < 1e-10);
        }
        let pure = PureState::basis(2, 1);
        let p = purify(&pure.density()).unwrap();
        assert_eq!(p.dim_ref, 1);
        assert_abs_diff_eq!(p.state.fidelity(&pure), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn isometric_extension_reproduces_channel() {
        let mut rng = crate::rng::stream(5, "test", 0);
        let ch = random::random_channel(&mut rng, 2, 3, 3);
        let v = isometric_extension(&ch).unwrap();
        let rho = random::random_density(&mut rng, 2, 2);
        let full = v.matrix().sandwich(rho.matrix());
        let reduced = partial_trace(&full, &[3, 3], &[0]).unwrap();
        assert!(reduced.max_abs_diff(ch.apply(&rho).unwrap().matrix()) < 1e-12);
    }

    #[test]
    fn channel_output_is_a_state_and_entropies_bounded() {
        let mut rng = crate::rng::stream(9, "test", 0);
        for _ in 0..5 {
            let ch = random::random_channel(&mut rng, 2, 2, 2);
            let rho = random::random_density(&mut rng, 4, 4);
            let out = apply_channel(&ch, &rho, &[2, 2], 1).unwrap();
            assert!(DensityOperator::new(out.matrix().clone()).is_ok());
            let h = vn_entropy(&out).unwrap();
            assert!((0.0..=2.0 + 1e-12).contains(&h));
            let i = mutual_info(&out, 2, 2).unwrap();
            assert!((0.0..=2.0 + 1e-9).contains(&i));
        }
    }

    #[test]
    fn polar_isometry_is_isometric() {
        let mut rng = crate::rng::stream(13, "test", 0);
        let g = random::ginibre(&mut rng, 6, 2);
        let v = polar_isometry(&g).unwrap();
        assert!(Isometry::new(v).is_ok());
    }
}
