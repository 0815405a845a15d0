//! Channels driven by an i.i.d. classical parameter `S ~ q(s)`.

pub mod library;
mod spec;

pub use spec::{
    load_family, load_pure_state, load_spec, parse_family, parse_pure_state, parse_spec, save_spec, to_canonical_json,
};

use crate::error::{invalid, Error, Result};
use crate::qcore::CMatrix;
use crate::quantum::KrausChannel;

pub const PROB_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct RandomParameterChannel {
    name: String,
    labels: Vec<String>,
    probs: Vec<f64>,
    branches: Vec<KrausChannel>,
}

impl RandomParameterChannel {
    pub fn new(
        name: impl Into<String>,
        labels: Vec<String>,
        probs: Vec<f64>,
        branches: Vec<KrausChannel>,
    ) -> Result<Self> {
        if branches.is_empty() {
            return Err(Error::Validation("channel needs at least one parameter value".into()));
        }
        if labels.len() != branches.len() || probs.len() != branches.len() {
            return Err(Error::Validation(format!(
                "{} labels, {} probabilities and {} branches",
                labels.len(),
                probs.len(),
                branches.len()
            )));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::Validation(format!("duplicate parameter label {l:?}")));
            }
        }
        if let Some((l, p)) = labels.iter().zip(&probs).find(|(_, p)| !p.is_finite() || **p < 0.0) {
            return Err(Error::Validation(format!("parameter s={l} has invalid probability {p}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::Validation(format!("parameter probabilities sum to {total}, expected 1")));
        }
        let (din, dout) = (branches[0].dim_in(), branches[0].dim_out());
        for (l, b) in labels.iter().zip(&branches) {
            if b.dim_in() != din || b.dim_out() != dout {
                return Err(Error::Validation(format!(
                    "branch s={l} maps {}->{}, expected {din}->{dout}",
                    b.dim_in(),
                    b.dim_out()
                )));
            }
            let r = b.completeness_residual();
            if r > KrausChannel::COMPLETENESS_TOL {
                return Err(Error::Validation(format!("branch s={l} Kraus completeness residual {r:.1e}")));
            }
        }
        Ok(RandomParameterChannel { name: name.into(), labels, probs, branches })
    }

    /// Labels default to `0, 1, …`.
    pub fn unlabelled(name: impl Into<String>, probs: Vec<f64>, branches: Vec<KrausChannel>) -> Result<Self> {
        let labels = (0..branches.len()).map(|i| i.to_string()).collect();
        Self::new(name, labels, probs, branches)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn branches(&self) -> &[KrausChannel] {
        &self.branches
    }

    pub fn num_params(&self) -> usize {
        self.branches.len()
    }

    pub fn dim_in(&self) -> usize {
        self.branches[0].dim_in()
    }

    pub fn dim_out(&self) -> usize {
        self.branches[0].dim_out()
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| invalid(format!("unknown parameter symbol {label:?}")))
    }

    /// The branch `N^(s)` for parameter symbol `s`.
    pub fn projected(&self, label: &str) -> Result<&KrausChannel> {
        Ok(&self.branches[self.index_of(label)?])
    }

    /// `Σ_s q(s) N^(s)`, Kraus set `{√q(s) K}`.
    pub fn average_channel(&self) -> KrausChannel {
        let kraus: Vec<CMatrix> = self
            .probs
            .iter()
            .zip(&self.branches)
            .filter(|(p, _)| **p > 0.0)
            .flat_map(|(p, b)| b.weighted_kraus(*p))
            .collect();
        KrausChannel::new_unchecked(self.dim_in(), self.dim_out(), kraus).expect("shapes checked")
    }

    /// `M = Σ_s q(s) N^(s) ∘ F^(s)`.
    pub fn virtual_channel(&self, family: &EncoderFamily) -> Result<KrausChannel> {
        family.check_for(self)?;
        let mut kraus = Vec::new();
        for ((p, b), f) in self.probs.iter().zip(&self.branches).zip(&family.maps) {
            if *p <= 0.0 {
                continue;
            }
            let composed = b.after(f)?;
            kraus.extend(composed.weighted_kraus(*p));
        }
        KrausChannel::new_unchecked(family.dim_k, self.dim_out(), kraus)
    }

    /// Replaces the parameter pmf, keeping the branches.
    pub fn with_probs(&self, probs: Vec<f64>) -> Result<Self> {
        Self::new(self.name.clone(), self.labels.clone(), probs, self.branches.clone())
    }
}

/// One encoding map `F^(s): K → A` per parameter value.
#[derive(Clone, Debug, PartialEq)]
pub struct EncoderFamily {
    dim_k: usize,
    dim_a: usize,
    maps: Vec<KrausChannel>,
    isometric: bool,
}

impl EncoderFamily {
    pub fn new(maps: Vec<KrausChannel>) -> Result<Self> {
        let first = maps.first().ok_or_else(|| invalid("encoder family needs at least one map"))?;
        let (dim_k, dim_a) = (first.dim_in(), first.dim_out());
        for (s, m) in maps.iter().enumerate() {
            if m.dim_in() != dim_k || m.dim_out() != dim_a {
                return Err(invalid(format!("encoder map {s} has shape {}->{}", m.dim_in(), m.dim_out())));
            }
            let r = m.completeness_residual();
            if r > KrausChannel::COMPLETENESS_TOL {
                return Err(Error::Validation(format!("encoder map {s} completeness residual {r:.1e}")));
            }
        }
        let isometric = maps.iter().all(|m| m.kraus().len() == 1);
        Ok(EncoderFamily { dim_k, dim_a, maps, isometric })
    }

    /// Family of isometries given as `dim_a × dim_k` matrices.
    pub fn isometries(ops: Vec<CMatrix>) -> Result<Self> {
        for (s, v) in ops.iter().enumerate() {
            crate::quantum::Isometry::new(v.clone()).map_err(|e| Error::Validation(format!("encoder map {s}: {e}")))?;
        }
        Self::new(ops.into_iter().map(KrausChannel::from_operator).collect())
    }

    /// Isometries produced internally (already orthonormalized); no validation.
    pub(crate) fn isometries_unchecked(ops: Vec<CMatrix>) -> Self {
        let (dim_k, dim_a) = (ops[0].cols(), ops[0].rows());
        EncoderFamily {
            dim_k,
            dim_a,
            maps: ops.into_iter().map(KrausChannel::from_operator).collect(),
            isometric: true,
        }
    }

    pub fn identity(dim: usize, num_params: usize) -> Self {
        Self::constant(KrausChannel::identity(dim), num_params)
    }

    pub fn constant(map: KrausChannel, num_params: usize) -> Self {
        let isometric = map.kraus().len() == 1;
        EncoderFamily { dim_k: map.dim_in(), dim_a: map.dim_out(), maps: vec![map; num_params], isometric }
    }

    pub fn dim_k(&self) -> usize {
        self.dim_k
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn maps(&self) -> &[KrausChannel] {
        &self.maps
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    /// True when every map is a single-Kraus isometry.
    pub fn is_isometric(&self) -> bool {
        self.isometric
    }

    /// The isometry matrices of an isometric family.
    pub fn isometry_matrices(&self) -> Result<Vec<&CMatrix>> {
        if !self.isometric {
            return Err(Error::Validation("encoder family is not isometric".into()));
        }
        Ok(self.maps.iter().map(|m| &m.kraus()[0]).collect())
    }

    /// Replaces every map by its Stinespring isometry into `A ⊗ E`, padding
    /// Kraus lists with zero operators so all maps share one environment.
    pub fn isometric_extension(&self) -> Result<EncoderFamily> {
        let e = self.maps.iter().map(|m| m.kraus().len()).max().unwrap_or(1);
        let ops = self
            .maps
            .iter()
            .map(|m| crate::quantum::isometric_extension(&m.padded(e)).map(|v| v.matrix().clone()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::isometries_unchecked(ops))
    }

    pub(crate) fn check_for(&self, rp: &RandomParameterChannel) -> Result<()> {
        if self.maps.len() != rp.num_params() {
            return Err(invalid(format!(
                "encoder family has {} maps but the channel has {} parameter values",
                self.maps.len(),
                rp.num_params()
            )));
        }
        if self.dim_a != rp.dim_in() {
            return Err(invalid(format!(
                "encoder output dim {} does not match channel input dim {}",
                self.dim_a,
                rp.dim_in()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::library::*;
    use super::*;
    use crate::quantum::{random, DensityOperator, PureState};

    fn plus() -> DensityOperator {
        PureState::normalized(vec![crate::qcore::c(1.0, 0.0), crate::qcore::c(1.0, 0.0)]).unwrap().density()
    }

    #[test]
    fn projected_examples() {
        let rp = dephasing_flip(0.5);
        assert_eq!(rp.projected("1").unwrap(), &KrausChannel::unitary(pauli_z()).unwrap());
        let st = stuck_at(0.5);
        assert_eq!(st.projected("2").unwrap(), &KrausChannel::identity(2));
        assert!(rp.projected("7").is_err());
        let single = RandomParameterChannel::unlabelled("id", vec![1.0], vec![KrausChannel::identity(3)]).unwrap();
        assert_eq!(single.projected("0").unwrap(), &KrausChannel::identity(3));
    }

    #[test]
    fn average_channel_examples() {
        let avg = dephasing_flip(0.5).average_channel();
        assert!(avg.completeness_residual() < 1e-12);
        let out = avg.apply(&plus()).unwrap();
        assert!(out.matrix().max_abs_diff(&CMatrix::identity(2).scale_real(0.5)) < 1e-12);

        let avg = stuck_at(1.0).average_channel();
        let mut rng = crate::rng::stream(1, "test", 0);
        let rho = random::random_density(&mut rng, 2, 2);
        let out = avg.apply(&rho).unwrap();
        assert!(out.matrix().max_abs_diff(&CMatrix::identity(2).scale_real(0.5)) < 1e-12);
    }

    #[test]
    fn state_independent_average_equals_branch() {
        let mut rng = crate::rng::stream(2, "test", 0);
        let ch = random::random_channel(&mut rng, 2, 2, 2);
        let rp = RandomParameterChannel::unlabelled("same", vec![0.3, 0.7], vec![ch.clone(), ch.clone()]).unwrap();
        let avg = rp.average_channel();
        for _ in 0..10 {
            let rho = random::random_density(&mut rng, 2, 2);
            let a = avg.apply(&rho).unwrap();
            let b = ch.apply(&rho).unwrap();
            assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-12);
        }
    }

    #[test]
    fn virtual_channel_examples() {
        let rp = dephasing_flip(0.5);
        let m = rp.virtual_channel(&EncoderFamily::identity(2, 2)).unwrap();
        let avg = rp.average_channel();
        let mut rng = crate::rng::stream(3, "test", 0);
        for _ in 0..10 {
            let rho = random::random_density(&mut rng, 2, 2);
            let a = m.apply(&rho).unwrap();
            let b = avg.apply(&rho).unwrap();
            assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-12);
        }

        let fam = EncoderFamily::isometries(vec![CMatrix::identity(2), pauli_z()]).unwrap();
        let m = rp.virtual_channel(&fam).unwrap();
        assert!(m.completeness_residual() < 1e-12);
        let rho = random::random_density(&mut rng, 2, 2);
        assert!(m.apply(&rho).unwrap().matrix().max_abs_diff(rho.matrix()) < 1e-12);

        let dep = RandomParameterChannel::unlabelled(
            "dep",
            vec![0.5, 0.5],
            vec![KrausChannel::completely_depolarizing(2), KrausChannel::completely_depolarizing(2)],
        )
        .unwrap();
        let fam =
            EncoderFamily::new(vec![random::random_channel(&mut rng, 2, 2, 2), KrausChannel::identity(2)]).unwrap();
        let m = dep.virtual_channel(&fam).unwrap();
        let out = m.apply(&rho).unwrap();
        assert!(out.matrix().max_abs_diff(&CMatrix::identity(2).scale_real(0.5)) < 1e-12);
    }

    #[test]
    fn virtual_channel_rejects_mismatch() {
        let rp = dephasing_flip(0.5);
        assert!(rp.virtual_channel(&EncoderFamily::identity(3, 2)).is_err());
        assert!(rp.virtual_channel(&EncoderFamily::identity(2, 3)).is_err());
    }

    #[test]
    fn validation_names_the_failure() {
        let bad = RandomParameterChannel::unlabelled(
            "bad",
            vec![0.5, 0.4],
            vec![KrausChannel::identity(2), KrausChannel::identity(2)],
        );
        assert!(bad.unwrap_err().to_string().contains("sum to"));
        let incomplete = KrausChannel::new_unchecked(2, 2, vec![CMatrix::identity(2).scale_real(0.9)]).unwrap();
        let bad =
            RandomParameterChannel::unlabelled("bad", vec![0.5, 0.5], vec![KrausChannel::identity(2), incomplete]);
        assert!(bad.unwrap_err().to_string().contains("branch s=1 Kraus completeness residual"));
    }

    #[test]
    fn extension_of_family_is_isometric() {
        let mut rng = crate::rng::stream(4, "test", 0);
        let fam =
            EncoderFamily::new(vec![random::random_channel(&mut rng, 2, 2, 3), KrausChannel::identity(2)]).unwrap();
        assert!(!fam.is_isometric());
        let ext = fam.isometric_extension().unwrap();
        assert!(ext.is_isometric());
        assert_eq!(ext.dim_a(), 6);
        for v in ext.isometry_matrices().unwrap() {
            assert!(crate::quantum::Isometry::new(v.clone()).is_ok());
        }
    }
}
