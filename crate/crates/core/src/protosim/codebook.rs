//! Random codebooks: block-operator labels per codeword and the binned
//! classical sequences used for covering.

use std::collections::HashSet;

use serde::Serialize;

use super::layout::{BlockLayout, GammaVector};
use crate::error::{invalid, Error, Result};
use crate::mtypes::{is_jointly_typical, sample_sequence, EXPLICIT_CODEBOOK_CAP};
use crate::rng::stream;

/// One block-operator label per codeword, pairwise distinct up to a global
/// sign so that no two codewords produce the same state.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GammaCodebook {
    pub n: usize,
    pub dim: usize,
    pub block_dims: Vec<usize>,
    pub entries: Vec<GammaVector>,
    pub seed: u64,
}

impl GammaCodebook {
    pub fn generate(layout: &BlockLayout, count: usize, seed: u64) -> Result<Self> {
        if count == 0 {
            return Err(invalid("codebook needs at least one codeword"));
        }
        let available = layout.distinct_operators();
        if count as u128 > available {
            return Err(invalid(format!(
                "{count} codewords requested but the layout {:?} only has {available} distinct operators",
                layout.block_dims()
            )));
        }
        let mut rng = stream(seed, "codebook", 0);
        let mut seen = HashSet::new();
        let mut entries = Vec::with_capacity(count);
        while entries.len() < count {
            let g = GammaVector::random(&mut rng, layout);
            if seen.insert(g.canonical()) {
                entries.push(g);
            }
        }
        Ok(GammaCodebook { n: layout.n(), dim: layout.dim(), block_dims: layout.block_dims(), entries, seed })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn check_for(&self, layout: &BlockLayout) -> Result<()> {
        if self.n != layout.n() || self.dim != layout.dim() || self.block_dims != layout.block_dims() {
            return Err(invalid(format!(
                "codebook built for n={}, dim={}, blocks {:?}; layout has n={}, dim={}, blocks {:?}",
                self.n,
                self.dim,
                self.block_dims,
                layout.n(),
                layout.dim(),
                layout.block_dims()
            )));
        }
        Ok(())
    }
}

/// Messages index bins; each bin holds `2^{⌈n(R̃−R)⌉}` i.i.d. sequences.
/// Codeword `ℓ = m · bin_size + j` is entry `j` of bin `m`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BinnedCodebook {
    pub n: usize,
    pub bins: Vec<Vec<Vec<usize>>>,
    pub rate: f64,
    pub rate_tilde: f64,
    pub p_x: Vec<f64>,
    pub seed: u64,
}

impl BinnedCodebook {
    /// `covering_rate` is `R̃ − R`, the per-letter rate spent on each bin.
    pub fn generate(num_messages: usize, n: usize, covering_rate: f64, p_x: &[f64], seed: u64) -> Result<Self> {
        if num_messages == 0 || n == 0 {
            return Err(invalid("binned codebook needs at least one message and n ≥ 1"));
        }
        if !(covering_rate >= 0.0) || !covering_rate.is_finite() {
            return Err(invalid(format!("covering rate must be finite and non-negative, got {covering_rate}")));
        }
        let total: f64 = p_x.iter().sum();
        if p_x.is_empty() || p_x.iter().any(|p| !(*p >= 0.0)) || (total - 1.0).abs() > 1e-9 {
            return Err(invalid("source pmf must be non-negative and sum to 1"));
        }
        let exponent = (n as f64 * covering_rate - 1e-12).ceil().max(0.0);
        let bin_size = 2f64.powf(exponent);
        if bin_size * num_messages as f64 > EXPLICIT_CODEBOOK_CAP as f64 {
            return Err(Error::CapExceeded(format!(
                "{num_messages} bins of {bin_size} sequences exceed {EXPLICIT_CODEBOOK_CAP} codewords"
            )));
        }
        let bin_size = bin_size as usize;
        let mut rng = stream(seed, "codebook", 1);
        let bins =
            (0..num_messages).map(|_| (0..bin_size).map(|_| sample_sequence(&mut rng, p_x, n)).collect()).collect();
        let rate = (num_messages as f64).log2() / n as f64;
        Ok(BinnedCodebook { n, bins, rate, rate_tilde: rate + exponent / n as f64, p_x: p_x.to_vec(), seed })
    }

    pub fn num_messages(&self) -> usize {
        self.bins.len()
    }

    pub fn bin_size(&self) -> usize {
        self.bins[0].len()
    }

    pub fn num_codewords(&self) -> usize {
        self.num_messages() * self.bin_size()
    }

    /// Global indices of bin `m`.
    pub fn bin_range(&self, m: usize) -> std::ops::Range<usize> {
        m * self.bin_size()..(m + 1) * self.bin_size()
    }

    /// The smallest `ℓ` in bin `m` whose sequence is jointly typical with
    /// `s^n`, or the first index of the bin with the failure flag set.
    pub fn select(&self, m: usize, sn: &[usize], p_sx: &[Vec<f64>], delta: f64) -> Result<(usize, bool)> {
        if m >= self.num_messages() {
            return Err(invalid(format!("message {m} out of range 0..{}", self.num_messages())));
        }
        if sn.len() != self.n {
            return Err(invalid(format!("parameter sequence has length {}, expected {}", sn.len(), self.n)));
        }
        if p_sx.first().map_or(0, Vec::len) != self.p_x.len() {
            return Err(invalid("joint pmf alphabet does not match the codebook source"));
        }
        for (j, xn) in self.bins[m].iter().enumerate() {
            if is_jointly_typical(sn, xn, p_sx, delta)? {
                return Ok((m * self.bin_size() + j, false));
            }
        }
        Ok((m * self.bin_size(), true))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mtypes::covering_monte_carlo;

    #[test]
    fn gamma_codebook_is_reproducible_and_distinct() {
        let layout = BlockLayout::types(2, 2).unwrap();
        let a = GammaCodebook::generate(&layout, 10, 3).unwrap();
        let b = GammaCodebook::generate(&layout, 10, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 10);
        let set: HashSet<_> = a.entries.iter().map(GammaVector::canonical).collect();
        assert_eq!(set.len(), 10);
        assert_ne!(a, GammaCodebook::generate(&layout, 10, 4).unwrap());
    }

    #[test]
    fn gamma_codebook_rejects_too_many_codewords() {
        // blocks 1,2,1: 1·4·1 labels times 4 sign classes
        let layout = BlockLayout::types(2, 2).unwrap();
        assert_eq!(layout.distinct_operators(), 16);
        assert!(GammaCodebook::generate(&layout, 16, 0).is_ok());
        assert!(GammaCodebook::generate(&layout, 17, 0).is_err());
    }

    #[test]
    fn bins_have_equal_size() {
        let book = BinnedCodebook::generate(4, 5, 0.3, &[0.5, 0.5], 1).unwrap();
        assert_eq!(book.bin_size(), 4);
        assert!(book.bins.iter().all(|b| b.len() == 4 && b.iter().all(|x| x.len() == 5)));
        assert!((book.rate - 0.4).abs() < 1e-12);
        assert!((book.rate_tilde - 0.8).abs() < 1e-12);
        assert_eq!(book.bin_range(2), 8..12);
        assert!(BinnedCodebook::generate(4, 5, 0.3, &[0.5, 0.6], 1).is_err());
    }

    #[test]
    fn degenerate_parameter_selects_first_codeword() {
        let book = BinnedCodebook::generate(2, 4, 0.5, &[1.0], 9).unwrap();
        let p_sx = vec![vec![1.0]];
        assert_eq!(book.select(1, &[0, 0, 0, 0], &p_sx, 0.0).unwrap(), (4, false));
    }

    #[test]
    fn zero_probability_pairs_are_skipped() {
        let mut book = BinnedCodebook::generate(1, 2, 1.0, &[0.5, 0.5], 2).unwrap();
        book.bins[0] = vec![vec![1, 1], vec![1, 0], vec![0, 0], vec![0, 1]];
        // pair (s=0, x=1) is impossible
        let p_sx = vec![vec![0.5, 0.0], vec![0.25, 0.25]];
        assert_eq!(book.select(0, &[0, 1], &p_sx, 1.0).unwrap(), (2, false));
        assert_eq!(book.select(0, &[1, 0], &p_sx, 1.0).unwrap(), (1, false));
        assert_eq!(book.select(0, &[1, 1], &p_sx, 1.0).unwrap(), (0, false));
    }

    #[test]
    fn covering_failure_rate_matches_monte_carlo() {
        // doubly symmetric source, covering rate I(X;S) + 0.2
        let eps: f64 = 0.1;
        let p_sx = vec![vec![0.5 * (1.0 - eps), 0.5 * eps], vec![0.5 * eps, 0.5 * (1.0 - eps)]];
        let h = -(eps * eps.log2() + (1.0 - eps) * (1.0 - eps).log2());
        let rate = 1.0 - h + 0.2;
        let (n, delta, trials) = (8, 0.1, 200u64);
        let mut failures = 0usize;
        for seed in 0..trials {
            let book = BinnedCodebook::generate(1, n, rate, &[0.5, 0.5], seed).unwrap();
            let sn = sample_sequence(&mut stream(seed, "parameters", 0), &[0.5, 0.5], n);
            if book.select(0, &sn, &p_sx, delta).unwrap().1 {
                failures += 1;
            }
        }
        let ours = failures as f64 / trials as f64;
        let reference = covering_monte_carlo(&p_sx, rate, n, delta, 20_000, 5).unwrap();
        let se = (reference.fail_prob_hat * (1.0 - reference.fail_prob_hat) / trials as f64).sqrt();
        assert!(
            (ours - reference.fail_prob_hat).abs() <= 3.0 * se + 3.0 * reference.stderr,
            "binned {ours} vs reference {} (se {se})",
            reference.fail_prob_hat
        );
    }
}
