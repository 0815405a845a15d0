//! Multi-start finite-difference ascent over pure states and per-parameter
//! encoder isometries.

use super::{
    objective_noncausal, CsiScenario, FamilyShape, NoncausalValue, ScenarioObjective, ScenarioRegistry, SearchSpace,
};
use crate::error::{invalid, Result};
use crate::qcore::{c, CMatrix, C64};
use crate::quantum::{polar_isometry, KrausChannel, PureState};
use crate::rpchannel::{EncoderFamily, RandomParameterChannel};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde_json::{json, Value};

const FD_STEP: f64 = 1e-5;
const STALL_WINDOW: usize = 25;
const TIE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerConfig {
    /// Encoder input dimension; defaults to the channel input dimension.
    pub dim_k: Option<usize>,
    /// Reference (or retained encoder output) dimension; defaults to `dim_k`.
    pub dim_ref: Option<usize>,
    /// Environment of the causal encoder dilations.
    pub dim_env: usize,
    pub restarts: usize,
    pub max_iters: usize,
    pub step_init: f64,
    pub tol: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            dim_k: None,
            dim_ref: None,
            dim_env: 1,
            restarts: 16,
            max_iters: 400,
            step_init: 0.1,
            tol: 1e-7,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn key_dim(&self, rp: &RandomParameterChannel) -> usize {
        self.dim_k.unwrap_or(rp.dim_in())
    }

    pub fn ref_dim(&self, rp: &RandomParameterChannel) -> usize {
        self.dim_ref.unwrap_or(self.key_dim(rp))
    }

    fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(invalid("restarts must be at least 1"));
        }
        if self.max_iters == 0 || self.dim_env == 0 || self.dim_k == Some(0) || self.dim_ref == Some(0) {
            return Err(invalid("optimizer dimensions and iteration budget must be positive"));
        }
        if !(self.step_init > 0.0) || !(self.tol > 0.0) {
            return Err(invalid("step_init and tol must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct CapacityEstimate {
    pub scenario: CsiScenario,
    pub value_bits: f64,
    pub best_state: PureState,
    pub state_dims: [usize; 2],
    pub best_family: Option<EncoderFamily>,
    pub restart_values: Vec<f64>,
    pub restart_iterations: Vec<usize>,
    pub converged: bool,
    pub seed: u64,
    pub noncausal_terms: Option<NoncausalValue>,
}

fn complex_array(v: &[C64]) -> Value {
    Value::Array(v.iter().map(|z| json!([z.re, z.im])).collect())
}

fn matrix_json(m: &CMatrix) -> Value {
    Value::Array((0..m.rows()).map(|i| complex_array(&m.row(i))).collect())
}

impl CapacityEstimate {
    pub fn to_json(&self) -> Value {
        let family = self.best_family.as_ref().map(|f| {
            json!({
                "dim_in": f.dim_k(),
                "dim_out": f.dim_a(),
                "maps": f.maps().iter().map(|m| json!({
                    "kraus": m.kraus().iter().map(matrix_json).collect::<Vec<_>>()
                })).collect::<Vec<_>>(),
            })
        });
        json!({
            "scenario": self.scenario.name(),
            "value_bits": self.value_bits,
            "restart_values": self.restart_values,
            "restart_iterations": self.restart_iterations,
            "converged": self.converged,
            "seed": self.seed,
            "state_dims": self.state_dims,
            "best_state": complex_array(self.best_state.amplitudes()),
            "best_family": family,
            "noncausal_terms": self.noncausal_terms,
        })
    }
}

/// Maps the flat real parameter vector to a state and a family.
struct Layout {
    space: SearchSpace,
    num_maps: usize,
}

impl Layout {
    fn state_len(&self) -> usize {
        2 * self.space.state_dims[0] * self.space.state_dims[1]
    }

    fn iso_shape(&self) -> Option<(usize, usize)> {
        self.space.family.map(|f| (f.dim_a * f.dim_env, f.dim_k))
    }

    fn len(&self) -> usize {
        self.state_len() + self.iso_shape().map_or(0, |(r, k)| 2 * r * k * self.num_maps)
    }

    fn iso_chunks(&self) -> impl Iterator<Item = std::ops::Range<usize>> + '_ {
        let (r, k) = self.iso_shape().unwrap_or((0, 0));
        let size = 2 * r * k;
        let start = self.state_len();
        let count = if self.space.family.is_some() { self.num_maps } else { 0 };
        (0..count).map(move |i| start + i * size..start + (i + 1) * size)
    }

    fn to_matrix(chunk: &[f64], rows: usize, cols: usize) -> CMatrix {
        let entries = chunk.chunks(2).map(|p| c(p[0], p[1])).collect();
        CMatrix::from_row_major(rows, cols, entries).expect("finite parameters")
    }

    /// Normalizes the state block and orthonormalizes each isometry block in place.
    fn retract(&self, x: &mut [f64]) -> Result<()> {
        let n = self.state_len();
        let norm = x[..n].iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(crate::Error::Numeric("state parameters collapsed to zero".into()));
        }
        x[..n].iter_mut().for_each(|v| *v /= norm);
        if let Some((r, k)) = self.iso_shape() {
            for range in self.iso_chunks().collect::<Vec<_>>() {
                let v = polar_isometry(&Self::to_matrix(&x[range.clone()], r, k))?;
                for (slot, z) in x[range].chunks_mut(2).zip(v.to_row_major()) {
                    slot[0] = z.re;
                    slot[1] = z.im;
                }
            }
        }
        Ok(())
    }

    fn state(&self, x: &[f64]) -> PureState {
        let amps = x[..self.state_len()].chunks(2).map(|p| c(p[0], p[1])).collect();
        PureState::normalized(amps).expect("retracted state is normalized")
    }

    fn family(&self, x: &[f64]) -> Result<Option<EncoderFamily>> {
        let Some(FamilyShape { dim_k, dim_a, dim_env }) = self.space.family else {
            return Ok(None);
        };
        let rows = dim_a * dim_env;
        let isos: Vec<CMatrix> = self.iso_chunks().map(|r| Self::to_matrix(&x[r], rows, dim_k)).collect();
        if dim_env == 1 {
            return Ok(Some(EncoderFamily::isometries_unchecked(isos)));
        }
        let cols: Vec<usize> = (0..dim_k).collect();
        let maps = isos
            .iter()
            .map(|v| {
                let kraus = (0..dim_env)
                    .map(|j| v.select(&(0..dim_a).map(|a| a * dim_env + j).collect::<Vec<_>>(), &cols))
                    .collect();
                KrausChannel::new_unchecked(dim_k, dim_a, kraus)
            })
            .collect::<Result<Vec<_>>>()?;
        EncoderFamily::new(maps).map(Some)
    }
}

struct Searcher<'a> {
    objective: &'a dyn ScenarioObjective,
    rp: &'a RandomParameterChannel,
    layout: Layout,
}

struct RestartResult {
    value: f64,
    params: Vec<f64>,
    iterations: usize,
    converged: bool,
}

impl Searcher<'_> {
    fn eval_retracted(&self, x: &[f64]) -> Result<f64> {
        let state = self.layout.state(x).density();
        let family = self.layout.family(x)?;
        self.objective.evaluate(&state, family.as_ref(), self.rp)
    }

    fn eval(&self, x: &[f64]) -> Result<f64> {
        let mut y = x.to_vec();
        self.layout.retract(&mut y)?;
        self.eval_retracted(&y)
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut g = vec![0.0; x.len()];
        let mut y = x.to_vec();
        for i in 0..x.len() {
            y[i] = x[i] + FD_STEP;
            let up = self.eval(&y)?;
            y[i] = x[i] - FD_STEP;
            let down = self.eval(&y)?;
            y[i] = x[i];
            g[i] = (up - down) / (2.0 * FD_STEP);
        }
        Ok(g)
    }

    fn run(&self, cfg: &OptimizerConfig, restart: usize) -> Result<RestartResult> {
        let mut rng = crate::rng::stream(cfg.seed, "optimizer", restart as u64);
        let mut x: Vec<f64> = (0..self.layout.len()).map(|_| rng.sample(StandardNormal)).collect();
        self.layout.retract(&mut x)?;
        let mut f = self.eval_retracted(&x)?;
        let mut step = cfg.step_init;
        let mut history = vec![f];
        let mut converged = false;
        let mut iterations = 0;
        while iterations < cfg.max_iters {
            iterations += 1;
            let g = self.gradient(&x)?;
            let gnorm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            if gnorm < 1e-12 {
                converged = true;
                break;
            }
            let mut y: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a + step * b / gnorm).collect();
            self.layout.retract(&mut y)?;
            let fy = self.eval_retracted(&y)?;
            if fy > f {
                x = y;
                f = fy;
                step *= 1.2;
            } else {
                step *= 0.5;
            }
            history.push(f);
            let len = history.len();
            if (len > STALL_WINDOW && f - history[len - 1 - STALL_WINDOW] < cfg.tol) || step < 1e-10 {
                converged = true;
                break;
            }
        }
        Ok(RestartResult { value: f, params: x, iterations, converged })
    }
}

pub fn maximize(scenario: CsiScenario, rp: &RandomParameterChannel, cfg: &OptimizerConfig) -> Result<CapacityEstimate> {
    let registry = ScenarioRegistry::default();
    maximize_with(registry.get(scenario.name())?, rp, cfg)
}

/// Runs `cfg.restarts` independent searches (in parallel) and keeps the best,
/// preferring the lowest restart index among values within 1e-9.
pub fn maximize_with(
    objective: &dyn ScenarioObjective,
    rp: &RandomParameterChannel,
    cfg: &OptimizerConfig,
) -> Result<CapacityEstimate> {
    cfg.validate()?;
    let space = objective.search_space(rp, cfg)?;
    let searcher = Searcher { objective, rp, layout: Layout { space, num_maps: rp.num_params() } };
    let results = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| searcher.run(cfg, r))
        .collect::<Vec<Result<RestartResult>>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let mut best = 0;
    for (i, r) in results.iter().enumerate() {
        if r.value > results[best].value + TIE_TOL {
            best = i;
        }
    }
    let winner = &results[best];
    let best_state = searcher.layout.state(&winner.params);
    let mut best_family = searcher.layout.family(&winner.params)?;
    let mut value = winner.value;

    // Using one parameter value's encoder for every parameter value is always
    // feasible; keep it if it scores higher.
    if let Some(fam) = best_family.clone() {
        let theta = best_state.density();
        for m in fam.maps() {
            let constant = EncoderFamily::constant(m.clone(), fam.len());
            let v = objective.evaluate(&theta, Some(&constant), rp)?;
            if v > value + TIE_TOL {
                value = v;
                best_family = Some(constant);
            }
        }
    }

    let noncausal_terms = match (objective.scenario(), &best_family) {
        (CsiScenario::EncoderNoncausal, Some(f)) => Some(objective_noncausal(&best_state.density(), f, rp)?),
        _ => None,
    };
    Ok(CapacityEstimate {
        scenario: objective.scenario(),
        value_bits: value,
        best_state,
        state_dims: space.state_dims,
        best_family,
        restart_values: results.iter().map(|r| r.value).collect(),
        restart_iterations: results.iter().map(|r| r.iterations).collect(),
        converged: winner.converged,
        seed: cfg.seed,
        noncausal_terms,
    })
}
