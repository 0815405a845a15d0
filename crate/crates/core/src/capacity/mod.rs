//! Capacity objectives, their name-keyed registry, the multi-start
//! optimizer and the classical state-dependent baselines.

pub mod classical;
mod objectives;
mod optimize;

pub use classical::{
    blahut_arimoto, classical_gelfand_pinsker, classical_shannon_strategy, ClassicalChannelWithState,
    GelfandPinskerConfig,
};
pub use objectives::{
    objective_both, objective_causal, objective_causal_via_virtual, objective_decoder, objective_no_csi,
    objective_noncausal, NoncausalValue,
};
pub use optimize::{maximize, maximize_with, CapacityEstimate, OptimizerConfig};

use crate::error::{invalid, Error, Result};
use crate::quantum::DensityOperator;
use crate::rpchannel::{EncoderFamily, RandomParameterChannel};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CsiScenario {
    None,
    EncoderCausal,
    EncoderNoncausal,
    Decoder,
    BothNoncausal,
}

impl CsiScenario {
    pub const ALL: [CsiScenario; 5] = [
        CsiScenario::None,
        CsiScenario::EncoderCausal,
        CsiScenario::EncoderNoncausal,
        CsiScenario::Decoder,
        CsiScenario::BothNoncausal,
    ];

    /// Short name used on the command line.
    pub fn name(self) -> &'static str {
        match self {
            CsiScenario::None => "none",
            CsiScenario::EncoderCausal => "causal",
            CsiScenario::EncoderNoncausal => "noncausal",
            CsiScenario::Decoder => "decoder",
            CsiScenario::BothNoncausal => "both",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "none" => Ok(CsiScenario::None),
            "causal" | "encoder_causal" => Ok(CsiScenario::EncoderCausal),
            "noncausal" | "encoder_noncausal" => Ok(CsiScenario::EncoderNoncausal),
            "decoder" => Ok(CsiScenario::Decoder),
            "both" | "both_noncausal" => Ok(CsiScenario::BothNoncausal),
            other => {
                Err(invalid(format!("unknown scenario {other:?} (expected none, causal, noncausal, decoder or both)")))
            }
        }
    }
}

impl fmt::Display for CsiScenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Shape of the per-parameter encoder isometries searched by the optimizer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FamilyShape {
    pub dim_k: usize,
    pub dim_a: usize,
    /// Environment traced out after the isometry; 1 means pure isometries.
    pub dim_env: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchSpace {
    /// Bipartite input state dimensions.
    pub state_dims: [usize; 2],
    pub family: Option<FamilyShape>,
}

/// A capacity formula: a search space and an objective over it.
pub trait ScenarioObjective: Send + Sync {
    fn scenario(&self) -> CsiScenario;

    fn search_space(&self, rp: &RandomParameterChannel, cfg: &OptimizerConfig) -> Result<SearchSpace>;

    fn evaluate(
        &self,
        state: &DensityOperator,
        family: Option<&EncoderFamily>,
        rp: &RandomParameterChannel,
    ) -> Result<f64>;
}

fn need_family(family: Option<&EncoderFamily>) -> Result<&EncoderFamily> {
    family.ok_or_else(|| invalid("this scenario needs an encoder family"))
}

struct NoCsi;
struct Causal;
struct Noncausal;
struct DecoderOnly;
struct Both;

impl ScenarioObjective for NoCsi {
    fn scenario(&self) -> CsiScenario {
        CsiScenario::None
    }
    fn search_space(&self, rp: &RandomParameterChannel, cfg: &OptimizerConfig) -> Result<SearchSpace> {
        Ok(SearchSpace { state_dims: [cfg.ref_dim(rp), rp.dim_in()], family: None })
    }
    fn evaluate(&self, state: &DensityOperator, _: Option<&EncoderFamily>, rp: &RandomParameterChannel) -> Result<f64> {
        objective_no_csi(state, &rp.average_channel())
    }
}

impl ScenarioObjective for DecoderOnly {
    fn scenario(&self) -> CsiScenario {
        CsiScenario::Decoder
    }
    fn search_space(&self, rp: &RandomParameterChannel, cfg: &OptimizerConfig) -> Result<SearchSpace> {
        Ok(SearchSpace { state_dims: [cfg.ref_dim(rp), rp.dim_in()], family: None })
    }
    fn evaluate(&self, state: &DensityOperator, _: Option<&EncoderFamily>, rp: &RandomParameterChannel) -> Result<f64> {
        objective_decoder(state, rp)
    }
}

impl ScenarioObjective for Causal {
    fn scenario(&self) -> CsiScenario {
        CsiScenario::EncoderCausal
    }
    fn search_space(&self, rp: &RandomParameterChannel, cfg: &OptimizerConfig) -> Result<SearchSpace> {
        let dim_k = cfg.key_dim(rp);
        let shape = FamilyShape { dim_k, dim_a: rp.dim_in(), dim_env: cfg.dim_env };
        if shape.dim_a * shape.dim_env < dim_k {
            return Err(invalid(format!(
                "encoder isometry {dim_k} -> {}x{} is impossible; raise the environment dimension",
                shape.dim_a, shape.dim_env
            )));
        }
        Ok(SearchSpace { state_dims: [dim_k, cfg.ref_dim(rp)], family: Some(shape) })
    }
    fn evaluate(
        &self,
        state: &DensityOperator,
        family: Option<&EncoderFamily>,
        rp: &RandomParameterChannel,
    ) -> Result<f64> {
        objective_causal(state, need_family(family)?, rp)
    }
}

fn noncausal_space(rp: &RandomParameterChannel, cfg: &OptimizerConfig) -> Result<SearchSpace> {
    let dim_k = cfg.key_dim(rp);
    let dim_a = cfg.ref_dim(rp);
    if dim_a < dim_k {
        return Err(invalid(format!(
            "encoder isometry {dim_k} -> {dim_a} is impossible; raise the reference dimension"
        )));
    }
    Ok(SearchSpace { state_dims: [dim_k, rp.dim_in()], family: Some(FamilyShape { dim_k, dim_a, dim_env: 1 }) })
}

impl ScenarioObjective for Noncausal {
    fn scenario(&self) -> CsiScenario {
        CsiScenario::EncoderNoncausal
    }
    fn search_space(&self, rp: &RandomParameterChannel, cfg: &OptimizerConfig) -> Result<SearchSpace> {
        noncausal_space(rp, cfg)
    }
    fn evaluate(
        &self,
        state: &DensityOperator,
        family: Option<&EncoderFamily>,
        rp: &RandomParameterChannel,
    ) -> Result<f64> {
        Ok(objective_noncausal(state, need_family(family)?, rp)?.value)
    }
}

impl ScenarioObjective for Both {
    fn scenario(&self) -> CsiScenario {
        CsiScenario::BothNoncausal
    }
    fn search_space(&self, rp: &RandomParameterChannel, cfg: &OptimizerConfig) -> Result<SearchSpace> {
        noncausal_space(rp, cfg)
    }
    fn evaluate(
        &self,
        state: &DensityOperator,
        family: Option<&EncoderFamily>,
        rp: &RandomParameterChannel,
    ) -> Result<f64> {
        objective_both(state, need_family(family)?, rp)
    }
}

/// Scenario objectives keyed by name.
pub struct ScenarioRegistry {
    entries: BTreeMap<String, Box<dyn ScenarioObjective>>,
}

impl Default for ScenarioRegistry {
    fn default() -> Self {
        let mut r = ScenarioRegistry { entries: BTreeMap::new() };
        r.register(Box::new(NoCsi));
        r.register(Box::new(Causal));
        r.register(Box::new(Noncausal));
        r.register(Box::new(DecoderOnly));
        r.register(Box::new(Both));
        r
    }
}

impl ScenarioRegistry {
    pub fn register(&mut self, objective: Box<dyn ScenarioObjective>) {
        self.entries.insert(objective.scenario().name().to_string(), objective);
    }

    /// Looks up by short name or alias.
    pub fn get(&self, name: &str) -> Result<&dyn ScenarioObjective> {
        let key = CsiScenario::parse(name)?.name();
        self.entries
            .get(key)
            .map(|b| b.as_ref())
            .ok_or_else(|| Error::InvalidArgument(format!("scenario {key:?} is not registered")))
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.keys().map(String::as_str).collect()
    }
}

/// Quantum capacity from the corresponding entanglement-assisted classical
/// capacity (teleportation halves it).
pub fn quantum_capacity_from_classical(bits: f64) -> Result<f64> {
    if !(bits >= 0.0) {
        return Err(Error::Domain(format!("capacity must be non-negative, got {bits}")));
    }
    Ok(bits / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_names_round_trip() {
        for s in CsiScenario::ALL {
            assert_eq!(CsiScenario::parse(s.name()).unwrap(), s);
        }
        assert_eq!(CsiScenario::parse("encoder_causal").unwrap(), CsiScenario::EncoderCausal);
        assert_eq!(CsiScenario::parse("both_noncausal").unwrap(), CsiScenario::BothNoncausal);
        assert!(CsiScenario::parse("sideways").is_err());
    }

    #[test]
    fn registry_resolves_every_scenario() {
        let reg = ScenarioRegistry::default();
        assert_eq!(reg.names().len(), 5);
        for s in CsiScenario::ALL {
            assert_eq!(reg.get(s.name()).unwrap().scenario(), s);
        }
    }

    #[test]
    fn quantum_capacity_examples() {
        assert_eq!(quantum_capacity_from_classical(2.0).unwrap(), 1.0);
        assert_eq!(quantum_capacity_from_classical(0.0).unwrap(), 0.0);
        assert_eq!(quantum_capacity_from_classical(1.5).unwrap(), 0.75);
        assert!(quantum_capacity_from_classical(-0.1).is_err());
    }
}
