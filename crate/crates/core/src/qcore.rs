//! Dense complex-matrix foundation.
//!
//! [`CMatrix`] wraps a `nalgebra` dynamic matrix; the public surface exposes
//! row-major construction and access only. Everything here is a pure function
//! over immutable values.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

pub type C64 = Complex64;

/// Default tolerance below which eigenvalues are treated as zero.
pub const CLIP_TOL: f64 = 1e-10;

/// Negative eigenvalues above this are considered rounding noise.
pub const NEG_EIG_TOL: f64 = 1e-8;

pub const fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub const ZERO: C64 = c(0.0, 0.0);
pub const ONE: C64 = c(1.0, 0.0);

#[derive(Clone, PartialEq)]
pub struct CMatrix(DMatrix<C64>);

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows(), self.cols())?;
        for i in 0..self.rows() {
            write!(f, "  ")?;
            for j in 0..self.cols() {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.0[idx]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, idx: (usize, usize)) -> &mut C64 {
        &mut self.0[idx]
    }
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix(DMatrix::zeros(rows, cols))
    }

    pub fn identity(dim: usize) -> Self {
        CMatrix(DMatrix::identity(dim, dim))
    }

    /// Builds a matrix from row-major entries, rejecting non-finite values.
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(invalid("matrix dimensions must be positive"));
        }
        if entries.len() != rows * cols {
            return Err(invalid(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(invalid("matrix entries must be finite"));
        }
        Ok(CMatrix(DMatrix::from_row_slice(rows, cols, &entries)))
    }

    /// Convenience for literal test matrices with real entries.
    pub fn from_real(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let cc = rows[0].len();
        let entries = rows.iter().flat_map(|row| row.iter().map(|&x| c(x, 0.0))).collect();
        Self::from_row_major(r, cc, entries).expect("literal matrix")
    }

    pub fn diag(values: &[C64]) -> Self {
        CMatrix(DMatrix::from_diagonal(&DVector::from_row_slice(values)))
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let v: Vec<C64> = values.iter().map(|&x| c(x, 0.0)).collect();
        Self::diag(&v)
    }

    /// `|v⟩⟨w|` for column vectors `v`, `w`.
    pub fn outer(v: &[C64], w: &[C64]) -> Self {
        let mut m = DMatrix::zeros(v.len(), w.len());
        for (i, a) in v.iter().enumerate() {
            for (j, b) in w.iter().enumerate() {
                m[(i, j)] = a * b.conj();
            }
        }
        CMatrix(m)
    }

    /// The column vector as an `n × 1` matrix.
    pub fn column(v: &[C64]) -> Self {
        CMatrix(DMatrix::from_column_slice(v.len(), 1, v))
    }

    pub(crate) fn na(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn to_row_major(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn row(&self, i: usize) -> Vec<C64> {
        (0..self.cols()).map(|j| self.0[(i, j)]).collect()
    }

    pub fn col(&self, j: usize) -> Vec<C64> {
        self.0.column(j).iter().copied().collect()
    }

    pub fn adjoint(&self) -> Self {
        CMatrix(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        CMatrix(self.0.transpose())
    }

    pub fn conj(&self) -> Self {
        CMatrix(self.0.map(|z| z.conj()))
    }

    pub fn scale(&self, s: C64) -> Self {
        CMatrix(&self.0 * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        CMatrix(self.0.map(|z| z * s))
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    /// `self · v` for a column vector `v`.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let x = DVector::from_column_slice(v);
        (&self.0 * x).iter().copied().collect()
    }

    /// `A ρ A†`.
    pub fn sandwich(&self, rho: &CMatrix) -> CMatrix {
        CMatrix(&self.0 * &rho.0 * self.0.adjoint())
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!((self.rows(), self.cols()), (other.rows(), other.cols()));
        self.0.iter().zip(other.0.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.max_abs_diff(&self.adjoint()) <= tol
    }

    pub fn hermitian_part(&self) -> Self {
        CMatrix((&self.0 + self.0.adjoint()) * c(0.5, 0.0))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Extracts the sub-matrix with the given row and column indices.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut m = DMatrix::zeros(rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                m[(a, b)] = self.0[(i, j)];
            }
        }
        CMatrix(m)
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        CMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        CMatrix(&self.0 - &rhs.0)
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        CMatrix(&self.0 * &rhs.0)
    }
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `eigenvalues`.
    pub eigenvectors: CMatrix,
}

impl Spectrum {
    pub fn reconstruct(&self) -> CMatrix {
        let d = CMatrix::diag_real(&self.eigenvalues);
        &(&self.eigenvectors * &d) * &self.eigenvectors.adjoint()
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.eigenvectors.col(k)
    }
}

pub fn tensor_product(a: &CMatrix, b: &CMatrix) -> CMatrix {
    CMatrix(a.0.kronecker(&b.0))
}

/// Tensor product of an ordered list of factors.
pub fn tensor_all<'a>(factors: impl IntoIterator<Item = &'a CMatrix>) -> CMatrix {
    let mut it = factors.into_iter();
    let first = it.next().expect("at least one factor").clone();
    it.fold(first, |acc, f| tensor_product(&acc, f))
}

pub fn tensor_power(a: &CMatrix, n: usize) -> CMatrix {
    if n == 0 {
        return CMatrix::identity(1);
    }
    let mut out = a.clone();
    for _ in 1..n {
        out = tensor_product(&out, a);
    }
    out
}

pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x * y);
        }
    }
    out
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Offsets of every multi-index over `subsystems` (row-major over that
/// subset) into the full index space described by `dims`.
fn offsets(dims: &[usize], subsystems: &[usize]) -> Vec<usize> {
    let st = strides(dims);
    let mut out = vec![0usize];
    for &k in subsystems {
        let mut next = Vec::with_capacity(out.len() * dims[k]);
        for &base in &out {
            for d in 0..dims[k] {
                next.push(base + d * st[k]);
            }
        }
        out = next;
    }
    out
}

fn check_dims(m: &CMatrix, dims: &[usize]) -> Result<()> {
    if !m.is_square() {
        return Err(invalid(format!("matrix is {}x{}, expected square", m.rows(), m.cols())));
    }
    if dims.is_empty() || dims.iter().any(|&d| d == 0) {
        return Err(invalid("subsystem dimensions must be positive"));
    }
    let total: usize = dims.iter().product();
    if total != m.rows() {
        return Err(invalid(format!("subsystem dims {dims:?} multiply to {total}, matrix dimension is {}", m.rows())));
    }
    Ok(())
}

/// Traces out every subsystem not listed in `keep`. Kept subsystems stay in
/// their original relative order.
pub fn partial_trace(m: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    check_dims(m, dims)?;
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.iter().any(|&k| k >= dims.len()) {
        return Err(invalid(format!("keep set {keep:?} out of range for {} subsystems", dims.len())));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
    let kept_off = offsets(dims, &keep);
    let traced_off = offsets(dims, &traced);
    let d = kept_off.len();
    let mut out = DMatrix::zeros(d, d);
    for (i, &ri) in kept_off.iter().enumerate() {
        for (j, &cj) in kept_off.iter().enumerate() {
            let mut acc = ZERO;
            for &t in &traced_off {
                acc += m.0[(ri + t, cj + t)];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(CMatrix(out))
}

/// Index map for a subsystem permutation: new subsystem `j` is old
/// subsystem `perm[j]`. Entry `i` is the old flat index of new flat index `i`.
fn permutation_index_map(dims: &[usize], perm: &[usize]) -> Result<Vec<usize>> {
    let mut seen = vec![false; dims.len()];
    if perm.len() != dims.len() {
        return Err(invalid("permutation length must match number of subsystems"));
    }
    for &p in perm {
        if p >= dims.len() || seen[p] {
            return Err(invalid(format!("{perm:?} is not a permutation")));
        }
        seen[p] = true;
    }
    Ok(offsets(dims, perm))
}

/// Reorders the tensor factors of a square matrix.
pub fn permute_subsystems(m: &CMatrix, dims: &[usize], perm: &[usize]) -> Result<CMatrix> {
    check_dims(m, dims)?;
    let map = permutation_index_map(dims, perm)?;
    let d = map.len();
    let mut out = DMatrix::zeros(d, d);
    for (i, &oi) in map.iter().enumerate() {
        for (j, &oj) in map.iter().enumerate() {
            out[(i, j)] = m.0[(oi, oj)];
        }
    }
    Ok(CMatrix(out))
}

/// Reorders the tensor factors of a state vector.
pub fn permute_vector(v: &[C64], dims: &[usize], perm: &[usize]) -> Result<Vec<C64>> {
    let total: usize = dims.iter().product();
    if total != v.len() {
        return Err(invalid("vector length does not match subsystem dims"));
    }
    let map = permutation_index_map(dims, perm)?;
    Ok(map.iter().map(|&o| v[o]).collect())
}

/// Embeds `op` (acting on subsystem `target`) into the full space as
/// `1 ⊗ … ⊗ op ⊗ … ⊗ 1`. `op` may be rectangular.
pub fn embed_operator(op: &CMatrix, dims: &[usize], target: usize) -> CMatrix {
    let left: usize = dims[..target].iter().product();
    let right: usize = dims[target + 1..].iter().product();
    let mut out = op.clone();
    if left > 1 {
        out = tensor_product(&CMatrix::identity(left), &out);
    }
    if right > 1 {
        out = tensor_product(&out, &CMatrix::identity(right));
    }
    out
}

/// `Σ_k (1 ⊗ K_k ⊗ 1) m (1 ⊗ K_k ⊗ 1)†` with the Kraus operators acting on
/// subsystem `target`, without forming the embedded operators. The output
/// dims equal `dims` with `dims[target]` replaced by the Kraus row count.
pub fn apply_local_kraus(m: &CMatrix, dims: &[usize], target: usize, kraus: &[CMatrix]) -> Result<CMatrix> {
    check_dims(m, dims)?;
    if target >= dims.len() || kraus.is_empty() {
        return Err(invalid("local Kraus map needs a valid target and at least one operator"));
    }
    let din = dims[target];
    let dout = kraus[0].rows();
    if kraus.iter().any(|k| k.cols() != din || k.rows() != dout) {
        return Err(invalid(format!("Kraus operators do not act on a {din}-dimensional factor")));
    }
    let left: usize = dims[..target].iter().product();
    let right: usize = dims[target + 1..].iter().product();
    let d_old = m.rows();
    let d_new = left * dout * right;
    let mut out = DMatrix::<C64>::zeros(d_new, d_new);
    let mut half = DMatrix::<C64>::zeros(d_new, d_old);
    for k in kraus {
        // half = E m
        half.fill(ZERO);
        for l in 0..left {
            for r in 0..right {
                for a2 in 0..dout {
                    let row = (l * dout + a2) * right + r;
                    for a in 0..din {
                        let coef = k.0[(a2, a)];
                        if coef == ZERO {
                            continue;
                        }
                        let src = (l * din + a) * right + r;
                        for col in 0..d_old {
                            half[(row, col)] += coef * m.0[(src, col)];
                        }
                    }
                }
            }
        }
        // out += half E†
        for l in 0..left {
            for r in 0..right {
                for b2 in 0..dout {
                    let col = (l * dout + b2) * right + r;
                    for b in 0..din {
                        let coef = k.0[(b2, b)].conj();
                        if coef == ZERO {
                            continue;
                        }
                        let src = (l * din + b) * right + r;
                        for row in 0..d_new {
                            out[(row, col)] += half[(row, src)] * coef;
                        }
                    }
                }
            }
        }
    }
    Ok(CMatrix(out))
}

pub fn eig_hermitian(h: &CMatrix) -> Result<Spectrum> {
    if !h.is_square() {
        return Err(invalid(format!("eigendecomposition needs a square matrix, got {}x{}", h.rows(), h.cols())));
    }
    if !h.is_finite() {
        return Err(Error::Numeric("non-finite entries in Hermitian input".into()));
    }
    let sym = h.hermitian_part();
    let n = sym.rows();
    let eig = SymmetricEigen::new(sym.0);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vecs = DMatrix::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        vecs.set_column(new, &eig.eigenvectors.column(old));
    }
    Ok(Spectrum { eigenvalues, eigenvectors: CMatrix(vecs) })
}

/// Eigenvalues only, ascending.
pub fn eigenvalues_hermitian(h: &CMatrix) -> Result<Vec<f64>> {
    if !h.is_square() {
        return Err(invalid("eigenvalues need a square matrix"));
    }
    let sym = h.hermitian_part();
    let mut ev: Vec<f64> = sym.0.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectralFn {
    Log2,
    Sqrt,
    /// `x^{-1/2}` on the support, `0` on the kernel.
    InvSqrtSupport,
}

/// Applies a scalar function to the spectrum of a Hermitian matrix.
///
/// Eigenvalues within `clip_tol` of zero are treated as exactly zero; zero
/// maps to zero under every tag (support convention for `Log2`).
pub fn spectral_function(h: &CMatrix, f: SpectralFn, clip_tol: f64) -> Result<CMatrix> {
    if clip_tol < 0.0 {
        return Err(invalid("clip tolerance must be non-negative"));
    }
    let spec = eig_hermitian(h)?;
    let mapped = spec
        .eigenvalues
        .iter()
        .map(|&x| {
            if x.abs() <= clip_tol {
                return Ok(0.0);
            }
            match f {
                SpectralFn::Sqrt | SpectralFn::Log2 if x < 0.0 => {
                    Err(Error::Domain(format!("eigenvalue {x:e} is below -{clip_tol:e}")))
                }
                SpectralFn::Sqrt => Ok(x.sqrt()),
                SpectralFn::Log2 => Ok(x.log2()),
                SpectralFn::InvSqrtSupport if x < 0.0 => {
                    Err(Error::Domain(format!("eigenvalue {x:e} is below -{clip_tol:e}")))
                }
                SpectralFn::InvSqrtSupport => Ok(1.0 / x.sqrt()),
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(Spectrum { eigenvalues: mapped, eigenvectors: spec.eigenvectors }.reconstruct())
}

/// `Tr(a b)` without forming the product.
pub fn trace_of_product(a: &CMatrix, b: &CMatrix) -> Result<C64> {
    if a.cols() != b.rows() || a.rows() != b.cols() {
        return Err(invalid(format!("trace of a {}x{} times {}x{} product", a.rows(), a.cols(), b.rows(), b.cols())));
    }
    let bt = b.0.transpose();
    Ok(a.0.iter().zip(bt.iter()).map(|(x, y)| x * y).sum())
}

pub fn trace_distance(rho: &CMatrix, sigma: &CMatrix) -> Result<f64> {
    if rho.rows() != sigma.rows() || rho.cols() != sigma.cols() {
        return Err(invalid(format!(
            "trace distance between {}x{} and {}x{}",
            rho.rows(),
            rho.cols(),
            sigma.rows(),
            sigma.cols()
        )));
    }
    let ev = eigenvalues_hermitian(&(rho - sigma))?;
    Ok(0.5 * ev.iter().map(|x| x.abs()).sum::<f64>())
}

/// `a ⪯ b` up to `tol`: the smallest eigenvalue of `b − a` is at least `−tol`.
pub fn psd_leq(a: &CMatrix, b: &CMatrix, tol: f64) -> Result<bool> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(invalid("operator comparison needs equal dimensions"));
    }
    let ev = eigenvalues_hermitian(&(b - a))?;
    Ok(ev.first().copied().unwrap_or(0.0) >= -tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pauli_x() -> CMatrix {
        CMatrix::from_real(&[&[0.0, 1.0], &[1.0, 0.0]])
    }
    fn pauli_z() -> CMatrix {
        CMatrix::from_real(&[&[1.0, 0.0], &[0.0, -1.0]])
    }

    fn random_hermitian(rng: &mut impl Rng, d: usize) -> CMatrix {
        let mut m = CMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
        }
        m.hermitian_part()
    }

    fn random_state(rng: &mut impl Rng, d: usize) -> CMatrix {
        let mut g = CMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                g[(i, j)] = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
        }
        let p = &g * &g.adjoint();
        let t = p.trace().re;
        p.scale_real(1.0 / t)
    }

    /// Literal four-index partial trace over the second factor.
    fn brute_trace_b(m: &CMatrix, da: usize, db: usize) -> CMatrix {
        let mut out = CMatrix::zeros(da, da);
        for i in 0..da {
            for j in 0..da {
                let mut acc = ZERO;
                for k in 0..db {
                    acc += m[(i * db + k, j * db + k)];
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    #[test]
    fn tensor_product_examples() {
        let i2 = CMatrix::identity(2);
        assert_eq!(tensor_product(&i2, &i2), CMatrix::identity(4));

        let p0 = CMatrix::diag_real(&[1.0, 0.0]);
        let p1 = CMatrix::diag_real(&[0.0, 1.0]);
        let t = tensor_product(&p0, &p1);
        for i in 0..4 {
            for j in 0..4 {
                let expected = if (i, j) == (1, 1) { 1.0 } else { 0.0 };
                assert_eq!(t[(i, j)], c(expected, 0.0));
            }
        }

        // X ⊗ Z = [[0, Z], [Z, 0]]
        let xz = tensor_product(&pauli_x(), &pauli_z());
        let expected = CMatrix::from_real(&[
            &[0.0, 0.0, 1.0, 0.0],
            &[0.0, 0.0, 0.0, -1.0],
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, -1.0, 0.0, 0.0],
        ]);
        assert_eq!(xz, expected);
    }

    #[test]
    fn partial_trace_of_bell_state_is_maximally_mixed() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let phi = vec![c(s, 0.0), ZERO, ZERO, c(s, 0.0)];
        let rho = CMatrix::outer(&phi, &phi);
        let ra = partial_trace(&rho, &[2, 2], &[0]).unwrap();
        assert!(ra.max_abs_diff(&CMatrix::diag_real(&[0.5, 0.5])) < 1e-15);
    }

    #[test]
    fn partial_trace_product_and_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = random_state(&mut rng, 2);
        let sigma = random_hermitian(&mut rng, 3);
        let prod = tensor_product(&rho, &sigma);
        let got = partial_trace(&prod, &[2, 3], &[0]).unwrap();
        assert!(got.max_abs_diff(&rho.scale(sigma.trace())) < 1e-12);

        let h = random_hermitian(&mut rng, 4);
        let got = partial_trace(&h, &[2, 2], &[0]).unwrap();
        assert!(got.max_abs_diff(&brute_trace_b(&h, 2, 2)) < 1e-12);
    }

    #[test]
    fn partial_trace_rejects_bad_dims() {
        let m = CMatrix::identity(4);
        assert!(matches!(partial_trace(&m, &[2, 3], &[0]), Err(Error::InvalidArgument(_))));
        assert!(partial_trace(&CMatrix::zeros(2, 3), &[2], &[0]).is_err());
    }

    #[test]
    fn partial_trace_composes() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let m = random_hermitian(&mut rng, 8);
            let step = partial_trace(&m, &[2, 2, 2], &[0, 1]).unwrap();
            let step = partial_trace(&step, &[2, 2], &[0]).unwrap();
            let once = partial_trace(&m, &[2, 2, 2], &[0]).unwrap();
            assert!(step.max_abs_diff(&once) < 1e-12);
        }
    }

    #[test]
    fn permutation_swaps_factors() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_hermitian(&mut rng, 2);
        let b = random_hermitian(&mut rng, 3);
        let ab = tensor_product(&a, &b);
        let ba = permute_subsystems(&ab, &[2, 3], &[1, 0]).unwrap();
        assert!(ba.max_abs_diff(&tensor_product(&b, &a)) < 1e-14);
        let v = vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0), c(5.0, 0.0), c(6.0, 0.0)];
        let w = permute_vector(&v, &[2, 3], &[1, 0]).unwrap();
        assert_eq!(w.iter().map(|z| z.re).collect::<Vec<_>>(), vec![1.0, 4.0, 2.0, 5.0, 3.0, 6.0]);
    }

    #[test]
    fn eigen_examples() {
        let s = eig_hermitian(&pauli_z()).unwrap();
        assert!((s.eigenvalues[0] + 1.0).abs() < 1e-14 && (s.eigenvalues[1] - 1.0).abs() < 1e-14);
        let s = eig_hermitian(&CMatrix::diag_real(&[0.5, 0.5])).unwrap();
        assert!(s.eigenvalues.iter().all(|x| (x - 0.5).abs() < 1e-15));
        let s = eig_hermitian(&CMatrix::from_real(&[&[1.0, 1.0], &[1.0, 1.0]])).unwrap();
        assert!(s.eigenvalues[0].abs() < 1e-14 && (s.eigenvalues[1] - 2.0).abs() < 1e-14);
        assert!(eig_hermitian(&CMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn eigen_reconstruction_up_to_dim_64() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for d in [1, 2, 5, 16, 64] {
            let h = random_hermitian(&mut rng, d);
            let s = eig_hermitian(&h).unwrap();
            assert!(s.reconstruct().max_abs_diff(&h) < 1e-9, "d={d}");
            let gram = &s.eigenvectors.adjoint() * &s.eigenvectors;
            assert!(gram.max_abs_diff(&CMatrix::identity(d)) < 1e-10);
            assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn spectral_function_examples() {
        let r = spectral_function(&CMatrix::diag_real(&[4.0, 9.0]), SpectralFn::Sqrt, CLIP_TOL).unwrap();
        assert!(r.max_abs_diff(&CMatrix::diag_real(&[2.0, 3.0])) < 1e-14);
        let r = spectral_function(&CMatrix::diag_real(&[4.0, 0.0]), SpectralFn::InvSqrtSupport, CLIP_TOL).unwrap();
        assert!(r.max_abs_diff(&CMatrix::diag_real(&[0.5, 0.0])) < 1e-14);
        let r = spectral_function(&CMatrix::diag_real(&[0.5, 0.5]), SpectralFn::Log2, CLIP_TOL).unwrap();
        assert!(r.max_abs_diff(&CMatrix::diag_real(&[-1.0, -1.0])) < 1e-14);
        let neg = CMatrix::diag_real(&[-0.1, 1.0]);
        assert!(matches!(spectral_function(&neg, SpectralFn::Sqrt, CLIP_TOL), Err(Error::Domain(_))));
        assert!(matches!(spectral_function(&neg, SpectralFn::Log2, CLIP_TOL), Err(Error::Domain(_))));
        // tiny negative eigenvalues are clipped
        let tiny = CMatrix::diag_real(&[-1e-12, 1.0]);
        assert!(spectral_function(&tiny, SpectralFn::Sqrt, CLIP_TOL).is_ok());
    }

    #[test]
    fn sqrt_squares_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in [2, 3, 6] {
            let rho = random_state(&mut rng, d);
            let r = spectral_function(&rho, SpectralFn::Sqrt, CLIP_TOL).unwrap();
            assert!((&r * &r).max_abs_diff(&rho) < 1e-8);
        }
    }

    #[test]
    fn trace_distance_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let rho = random_state(&mut rng, 3);
        assert!(trace_distance(&rho, &rho).unwrap().abs() < 1e-14);
        let p0 = CMatrix::diag_real(&[1.0, 0.0]);
        let p1 = CMatrix::diag_real(&[0.0, 1.0]);
        assert!((trace_distance(&p0, &p1).unwrap() - 1.0).abs() < 1e-14);
        let (p, q) = (0.3, 0.75);
        let d = trace_distance(&CMatrix::diag_real(&[p, 1.0 - p]), &CMatrix::diag_real(&[q, 1.0 - q])).unwrap();
        assert!((d - (p - q).abs()).abs() < 1e-14);
        assert!(trace_distance(&p0, &CMatrix::identity(3)).is_err());
    }

    #[test]
    fn trace_distance_triangle_inequality() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let a = random_state(&mut rng, 3);
            let b = random_state(&mut rng, 3);
            let cc = random_state(&mut rng, 3);
            let ab = trace_distance(&a, &b).unwrap();
            let bc = trace_distance(&b, &cc).unwrap();
            let ac = trace_distance(&a, &cc).unwrap();
            assert!(ac <= ab + bc + 1e-10);
            assert!((ab - trace_distance(&b, &a).unwrap()).abs() < 1e-12);
            assert!(ab <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn psd_order_examples() {
        let i = CMatrix::identity(2);
        assert!(psd_leq(&CMatrix::zeros(2, 2), &i, 0.0).unwrap());
        assert!(!psd_leq(&i.scale_real(2.0), &i, 0.0).unwrap());
        let a = CMatrix::diag_real(&[0.5, 0.5]);
        let b = CMatrix::diag_real(&[0.6, 0.4]);
        assert!(!psd_leq(&a, &b, 1e-12).unwrap());
    }

    #[test]
    fn local_kraus_matches_embedded_sandwich() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let dims = [2, 3, 2];
        let rho = random_state(&mut rng, 12);
        let kraus: Vec<CMatrix> = (0..2)
            .map(|_| {
                let entries = (0..12).map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
                CMatrix::from_row_major(4, 3, entries).unwrap()
            })
            .collect();
        let fast = apply_local_kraus(&rho, &dims, 1, &kraus).unwrap();
        let mut slow = CMatrix::zeros(16, 16);
        for k in &kraus {
            slow = &slow + &embed_operator(k, &dims, 1).sandwich(&rho);
        }
        assert!(fast.max_abs_diff(&slow) < 1e-13);
        assert!(apply_local_kraus(&rho, &dims, 0, &kraus).is_err());
    }
}
