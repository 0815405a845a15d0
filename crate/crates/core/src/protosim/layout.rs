//! Block layouts of `dim^n`, block Heisenberg–Weyl operators and the shared
//! entangled resource expressed in its Schmidt bases.

use std::collections::HashMap;

use rand::Rng;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::mtypes::{enumerate_types, index_to_sequence, Projector, DIM_CAP};
use crate::qcore::{kron_vec, permute_vector, tensor_power, CMatrix, C64};
use crate::quantum::{heisenberg_weyl, schmidt, PureState};

/// Schmidt coefficients closer than this share a block class.
pub const SCHMIDT_CLASS_TOL: f64 = 1e-9;

/// Partition of the product basis of `(C^dim)^{⊗n}` into blocks.
///
/// Symbols are grouped into classes; a block collects every sequence whose
/// class counts equal a given type. Blocks are ordered lexicographically on
/// those count vectors and list their sequences in ascending index order.
/// With one class per symbol the blocks are exactly the type classes.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockLayout {
    n: usize,
    dim: usize,
    blocks: Vec<Vec<usize>>,
}

impl BlockLayout {
    /// One block per type class of length-`n` sequences over `dim` symbols.
    pub fn types(n: usize, dim: usize) -> Result<Self> {
        let class_of: Vec<usize> = (0..dim).collect();
        Self::from_classes(n, &class_of)
    }

    /// Blocks from a symbol-to-class map; classes must be `0..k` with none empty.
    pub fn from_classes(n: usize, class_of: &[usize]) -> Result<Self> {
        let dim = class_of.len();
        if n == 0 || dim == 0 {
            return Err(invalid("layout needs n ≥ 1 and dim ≥ 1"));
        }
        let total = (dim as u128)
            .checked_pow(n as u32)
            .filter(|t| *t <= DIM_CAP as u128)
            .ok_or_else(|| Error::CapExceeded(format!("dimension {dim}^{n} exceeds the dense cap of {DIM_CAP}")))?
            as usize;
        let k = class_of.iter().max().map_or(0, |m| m + 1);
        if (0..k).any(|cl| !class_of.contains(&cl)) {
            return Err(invalid("symbol classes must be numbered 0..k without gaps"));
        }
        let types = enumerate_types(n, k);
        let position: HashMap<Vec<usize>, usize> =
            types.iter().enumerate().map(|(i, t)| (t.counts().to_vec(), i)).collect();
        let mut blocks = vec![Vec::new(); types.len()];
        let mut counts = vec![0usize; k];
        for idx in 0..total {
            counts.iter_mut().for_each(|x| *x = 0);
            for x in index_to_sequence(idx, dim, n) {
                counts[class_of[x]] += 1;
            }
            blocks[position[&counts]].push(idx);
        }
        Ok(BlockLayout { n, dim, blocks })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn total_dim(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, t: usize) -> &[usize] {
        &self.blocks[t]
    }

    pub fn block_dims(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }

    /// Diagonal projector onto block `t`.
    pub fn block_projector(&self, t: usize) -> Projector {
        let mut d = vec![0.0; self.total_dim()];
        for &i in &self.blocks[t] {
            d[i] = 1.0;
        }
        Projector::new(CMatrix::diag_real(&d)).expect("diagonal 0/1 matrix")
    }

    /// Number of block operators distinct up to a global sign, saturating.
    pub fn distinct_operators(&self) -> u128 {
        let signs = 1u128.checked_shl(self.blocks.len().saturating_sub(1) as u32).unwrap_or(u128::MAX);
        self.blocks.iter().map(|b| (b.len() as u128).saturating_mul(b.len() as u128)).fold(signs, u128::saturating_mul)
    }
}

/// One Heisenberg–Weyl label `(a, b)` and sign bit `c` per block.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct GammaVector {
    pub triples: Vec<(usize, usize, u8)>,
}

impl GammaVector {
    /// All blocks `(0, 0, 0)`: the identity operator.
    pub fn zero(layout: &BlockLayout) -> Self {
        GammaVector { triples: vec![(0, 0, 0); layout.num_blocks()] }
    }

    /// Uniform draw of every triple.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, layout: &BlockLayout) -> Self {
        let triples = layout
            .blocks
            .iter()
            .map(|b| (rng.random_range(0..b.len()), rng.random_range(0..b.len()), rng.random_range(0..2u8)))
            .collect();
        GammaVector { triples }
    }

    /// Representative of `{γ, −γ}` whose first sign bit is zero.
    pub fn canonical(&self) -> Self {
        let flip = self.triples.first().is_some_and(|t| t.2 == 1);
        let triples = self.triples.iter().map(|&(a, b, c)| (a, b, if flip { c ^ 1 } else { c })).collect();
        GammaVector { triples }
    }

    pub fn check_for(&self, layout: &BlockLayout) -> Result<()> {
        if self.triples.len() != layout.num_blocks() {
            return Err(invalid(format!(
                "gamma vector has {} triples, layout has {} blocks",
                self.triples.len(),
                layout.num_blocks()
            )));
        }
        for (t, (&(a, b, c), block)) in self.triples.iter().zip(&layout.blocks).enumerate() {
            if a >= block.len() || b >= block.len() || c > 1 {
                return Err(invalid(format!("triple ({a},{b},{c}) invalid for block {t} of size {}", block.len())));
            }
        }
        Ok(())
    }
}

/// Direct sum over blocks of `(−1)^c Σ(a, b)`, each written in the block's
/// ascending sequence basis.
pub fn u_of_gamma(g: &GammaVector, layout: &BlockLayout) -> Result<CMatrix> {
    g.check_for(layout)?;
    let total = layout.total_dim();
    let mut u = CMatrix::zeros(total, total);
    for (&(a, b, c), block) in g.triples.iter().zip(&layout.blocks) {
        let v = heisenberg_weyl(block.len(), a, b)?;
        let sign = if c == 1 { -1.0 } else { 1.0 };
        for (i, &gi) in block.iter().enumerate() {
            for (j, &gj) in block.iter().enumerate() {
                u[(gi, gj)] = v[(i, j)] * sign;
            }
        }
    }
    Ok(u)
}

/// A pure state on `K ⊗ B` (equal local dimensions) with its Schmidt bases
/// completed to unitaries `W_K`, `W_B`, so that
/// `|ξ⟩ = (W_K ⊗ W_B) Σ_x √p_x |x⟩|x⟩`.
#[derive(Clone, Debug)]
pub struct EntangledResource {
    state: PureState,
    dim: usize,
    /// `√p_x` for every basis index, zero-padded, descending.
    coefficients: Vec<f64>,
    w_key: CMatrix,
    w_bob: CMatrix,
    class_of: Vec<usize>,
}

impl EntangledResource {
    pub fn new(state: &PureState, dim: usize) -> Result<Self> {
        if dim == 0 || state.dim() != dim * dim {
            return Err(invalid(format!("shared state has dimension {}, expected {dim}x{dim}", state.dim())));
        }
        let sd = schmidt(state, dim, dim)?;
        let mut coefficients = sd.coefficients.clone();
        coefficients.resize(dim, 0.0);
        let mut class_vals: Vec<f64> = Vec::new();
        let class_of = coefficients
            .iter()
            .map(|&s| match class_vals.iter().position(|&v| (v - s).abs() <= SCHMIDT_CLASS_TOL) {
                Some(k) => k,
                None => {
                    class_vals.push(s);
                    class_vals.len() - 1
                }
            })
            .collect();
        Ok(EntangledResource {
            state: state.clone(),
            dim,
            coefficients,
            w_key: sd.left_unitary(),
            w_bob: sd.right_unitary(),
            class_of,
        })
    }

    pub fn maximally_entangled(dim: usize) -> Self {
        Self::new(&crate::quantum::max_entangled(dim), dim).expect("valid maximally entangled state")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn state(&self) -> &PureState {
        &self.state
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Class index of every Schmidt basis symbol (equal coefficients share one).
    pub fn class_of(&self) -> &[usize] {
        &self.class_of
    }

    pub fn num_classes(&self) -> usize {
        self.class_of.iter().max().map_or(0, |m| m + 1)
    }

    /// Probability of each Schmidt class.
    pub fn class_pmf(&self) -> Vec<f64> {
        let mut p = vec![0.0; self.num_classes()];
        for (s, &cl) in self.coefficients.iter().zip(&self.class_of) {
            p[cl] += s * s;
        }
        p
    }

    /// Blocks on which `ξ^{⊗n}` has constant Schmidt coefficient.
    pub fn layout(&self, n: usize) -> Result<BlockLayout> {
        BlockLayout::from_classes(n, &self.class_of)
    }

    /// `W_K^{⊗n} U W_K^{⊗n†}`: the block operator on Alice's half.
    pub fn key_operator(&self, u: &CMatrix, n: usize) -> CMatrix {
        tensor_power(&self.w_key, n).sandwich(u)
    }

    /// `W_B^{⊗n} U^T W_B^{⊗n†}`: the operator on Bob's half with the same
    /// action on `ξ^{⊗n}`.
    pub fn bob_operator(&self, u: &CMatrix, n: usize) -> CMatrix {
        tensor_power(&self.w_bob, n).sandwich(&u.transpose())
    }

    /// `ξ^{⊗n}` with all key systems first, then all of Bob's systems.
    pub fn power_vector(&self, n: usize) -> Result<Vec<C64>> {
        let mut v = vec![crate::qcore::ONE];
        for _ in 0..n {
            v = kron_vec(&v, self.state.amplitudes());
        }
        permute_vector(&v, &vec![self.dim; 2 * n], &grouping_permutation(n))
    }
}

/// Permutation taking `n` interleaved pairs `(X_1 Y_1 X_2 Y_2 …)` to
/// `(X_1 … X_n Y_1 … Y_n)`.
pub(crate) fn grouping_permutation(n: usize) -> Vec<usize> {
    (0..n).map(|i| 2 * i).chain((0..n).map(|i| 2 * i + 1)).collect()
}
