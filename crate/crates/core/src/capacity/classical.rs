//! Classical channels with a random state known at the encoder.

use crate::error::{invalid, Error, Result};

const PMF_TOL: f64 = 1e-12;

/// `w(y | x, s)` with state pmf `q(s)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalChannelWithState {
    x_size: usize,
    y_size: usize,
    s_size: usize,
    /// Flat `[x][s][y]`.
    w: Vec<f64>,
    q: Vec<f64>,
}

fn check_pmf(p: &[f64], what: &str) -> Result<()> {
    if p.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::Validation(format!("{what} has a negative or non-finite entry")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > PMF_TOL {
        return Err(Error::Validation(format!("{what} sums to {total}, expected 1")));
    }
    Ok(())
}

impl ClassicalChannelWithState {
    /// `w[x][s][y]`.
    pub fn new(w: Vec<Vec<Vec<f64>>>, q: Vec<f64>) -> Result<Self> {
        let x_size = w.len();
        let s_size = q.len();
        if x_size == 0 || s_size == 0 {
            return Err(invalid("classical channel needs non-empty input and state alphabets"));
        }
        let y_size = w[0].first().map_or(0, Vec::len);
        if y_size == 0 {
            return Err(invalid("classical channel needs a non-empty output alphabet"));
        }
        check_pmf(&q, "state pmf q")?;
        let mut flat = Vec::with_capacity(x_size * s_size * y_size);
        for (x, per_s) in w.iter().enumerate() {
            if per_s.len() != s_size {
                return Err(invalid(format!("w[{x}] has {} state rows, expected {s_size}", per_s.len())));
            }
            for (s, row) in per_s.iter().enumerate() {
                if row.len() != y_size {
                    return Err(invalid(format!("w[{x}][{s}] has {} outputs, expected {y_size}", row.len())));
                }
                check_pmf(row, &format!("w(.|x={x},s={s})"))?;
                flat.extend_from_slice(row);
            }
        }
        Ok(ClassicalChannelWithState { x_size, y_size, s_size, w: flat, q })
    }

    /// From a table indexed `p[y][x][s]`.
    pub fn from_yxs(p: &[Vec<Vec<f64>>], q: Vec<f64>) -> Result<Self> {
        let y_size = p.len();
        let x_size = p.first().map_or(0, Vec::len);
        let s_size = q.len();
        let mut w = vec![vec![vec![0.0; y_size]; s_size]; x_size];
        for (y, per_x) in p.iter().enumerate() {
            if per_x.len() != x_size {
                return Err(invalid(format!("p[{y}] has {} inputs, expected {x_size}", per_x.len())));
            }
            for (x, per_s) in per_x.iter().enumerate() {
                if per_s.len() != s_size {
                    return Err(invalid(format!("p[{y}][{x}] has {} states, expected {s_size}", per_s.len())));
                }
                for (s, v) in per_s.iter().enumerate() {
                    w[x][s][y] = *v;
                }
            }
        }
        Self::new(w, q)
    }

    /// A state-independent channel `w[x][y]` with `s_size` equiprobable states.
    pub fn state_free(w: Vec<Vec<f64>>, s_size: usize) -> Result<Self> {
        let nested = w.into_iter().map(|row| vec![row; s_size]).collect();
        Self::new(nested, vec![1.0 / s_size as f64; s_size])
    }

    pub fn x_size(&self) -> usize {
        self.x_size
    }

    pub fn y_size(&self) -> usize {
        self.y_size
    }

    pub fn s_size(&self) -> usize {
        self.s_size
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn prob(&self, y: usize, x: usize, s: usize) -> f64 {
        self.w[(x * self.s_size + s) * self.y_size + y]
    }
}

/// Capacity (bits) of the DMC `w[x][y]`, iterated until the standard upper
/// and lower bounds agree to `tol`; returns the lower (achieved) bound.
pub fn blahut_arimoto(w: &[Vec<f64>], tol: f64) -> f64 {
    let nx = w.len();
    let ny = w[0].len();
    let mut p = vec![1.0 / nx as f64; nx];
    let mut lower = 0.0;
    for _ in 0..200_000 {
        let mut out = vec![0.0; ny];
        for (px, row) in p.iter().zip(w) {
            for (o, wy) in out.iter_mut().zip(row) {
                *o += px * wy;
            }
        }
        let d: Vec<f64> = w
            .iter()
            .map(|row| row.iter().zip(&out).filter(|(wy, _)| **wy > 0.0).map(|(wy, o)| wy * (wy / o).log2()).sum())
            .collect();
        let z: f64 = p.iter().zip(&d).map(|(px, dx)| px * dx.exp2()).sum();
        lower = z.log2();
        let upper = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if upper - lower < tol {
            break;
        }
        for (px, dx) in p.iter_mut().zip(&d) {
            *px *= dx.exp2() / z;
        }
    }
    lower.max(0.0)
}

/// Maximum number of strategies `t: S → X` that will be enumerated.
pub const STRATEGY_CAP: usize = 4096;

/// Causal-CSI capacity: capacity of the DMC from strategies `t: S → X` to `Y`.
pub fn classical_shannon_strategy(ch: &ClassicalChannelWithState) -> Result<f64> {
    let count = (ch.x_size as u128).checked_pow(ch.s_size as u32).filter(|c| *c <= STRATEGY_CAP as u128);
    let Some(count) = count else {
        return Err(Error::CapExceeded(format!(
            "{}^{} strategies exceed the cap of {STRATEGY_CAP}",
            ch.x_size, ch.s_size
        )));
    };
    let mut dmc = Vec::with_capacity(count as usize);
    for t in 0..count as usize {
        let mut row = vec![0.0; ch.y_size];
        let mut code = t;
        for s in 0..ch.s_size {
            let x = code % ch.x_size;
            code /= ch.x_size;
            for (y, r) in row.iter_mut().enumerate() {
                *r += ch.q[s] * ch.prob(y, x, s);
            }
        }
        dmc.push(row);
    }
    Ok(blahut_arimoto(&dmc, 1e-9))
}

#[derive(Clone, Debug, PartialEq)]
pub struct GelfandPinskerConfig {
    pub u_size: usize,
    /// Number of `p(u|s)` grid points evaluated per deterministic map.
    pub grid_budget: usize,
    /// Maximum number of maps `f: U × S → X`.
    pub max_maps: usize,
    /// Grid winners refined by local search.
    pub refine_top: usize,
}

impl GelfandPinskerConfig {
    pub fn new(u_size: usize) -> Self {
        GelfandPinskerConfig { u_size, grid_budget: 20_000, max_maps: 4096, refine_top: 8 }
    }
}

fn entropy(p: &[f64]) -> f64 {
    p.iter().filter(|v| **v > 0.0).map(|v| -v * v.log2()).sum()
}

/// `I(U;Y) − I(U;S)` for `p(u|s)` given as `cond[s][u]` and `x = f[u][s]`.
fn gp_value(ch: &ClassicalChannelWithState, cond: &[Vec<f64>], f: &[usize], u_size: usize) -> f64 {
    let (ns, ny) = (ch.s_size, ch.y_size);
    let mut p_u = vec![0.0; u_size];
    let mut p_y = vec![0.0; ny];
    let mut p_uy = vec![0.0; u_size * ny];
    let mut h_u_given_s = 0.0;
    for s in 0..ns {
        let qs = ch.q[s];
        h_u_given_s += qs * entropy(&cond[s]);
        for u in 0..u_size {
            let pus = qs * cond[s][u];
            if pus <= 0.0 {
                continue;
            }
            p_u[u] += pus;
            let x = f[u * ns + s];
            for y in 0..ny {
                let v = pus * ch.prob(y, x, s);
                p_uy[u * ny + y] += v;
                p_y[y] += v;
            }
        }
    }
    // I(U;Y) − I(U;S) = H(Y) − H(UY) + H(U|S)
    entropy(&p_y) - entropy(&p_uy) + h_u_given_s
}

/// All points of the simplex over `k` symbols with denominators `r`.
fn simplex_grid(k: usize, r: usize) -> Vec<Vec<f64>> {
    fn rec(k: usize, left: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if k == 1 {
            cur.push(left);
            out.push(cur.iter().map(|c| *c as f64 / r as f64).collect());
            cur.pop();
            return;
        }
        for c in 0..=left {
            cur.push(c);
            rec(k - 1, left - c, r, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(k, r, r, &mut Vec::new(), &mut out);
    out
}

fn refine(ch: &ClassicalChannelWithState, cond: &mut [Vec<f64>], f: &[usize], u_size: usize, start: f64) -> f64 {
    let mut best = gp_value(ch, cond, f, u_size);
    let mut eps = start;
    while eps > 1e-7 {
        let mut improved = false;
        for s in 0..cond.len() {
            for from in 0..u_size {
                for to in 0..u_size {
                    if from == to || cond[s][from] <= 0.0 {
                        continue;
                    }
                    let moved = eps.min(cond[s][from]);
                    cond[s][from] -= moved;
                    cond[s][to] += moved;
                    let v = gp_value(ch, cond, f, u_size);
                    if v > best + 1e-13 {
                        best = v;
                        improved = true;
                    } else {
                        cond[s][from] += moved;
                        cond[s][to] -= moved;
                    }
                }
            }
        }
        if !improved {
            eps /= 2.0;
        }
    }
    best
}

/// Non-causal CSI value `max I(U;Y) − I(U;S)` over `p(u|s)` and deterministic
/// `x = f(u, s)`: every map is enumerated, `p(u|s)` is scanned on a grid and
/// the best grid points are refined by pattern search. A lower bound on the
/// capacity at this auxiliary alphabet size.
pub fn classical_gelfand_pinsker(ch: &ClassicalChannelWithState, cfg: &GelfandPinskerConfig) -> Result<f64> {
    if cfg.u_size == 0 {
        return Err(invalid("auxiliary alphabet size must be at least 1"));
    }
    let slots = cfg.u_size * ch.s_size;
    let num_maps = (ch.x_size as u128).checked_pow(slots as u32).filter(|c| *c <= cfg.max_maps as u128);
    let Some(num_maps) = num_maps else {
        return Err(Error::CapExceeded(format!(
            "{}^({}x{}) encoder maps exceed the cap of {}",
            ch.x_size, cfg.u_size, ch.s_size, cfg.max_maps
        )));
    };

    let mut r = 1;
    let per_s = |r: usize| simplex_grid(cfg.u_size, r).len() as f64;
    while per_s(r + 1).powi(ch.s_size as i32) <= cfg.grid_budget as f64 {
        r += 1;
    }
    let grid = simplex_grid(cfg.u_size, r);

    let mut candidates: Vec<(f64, Vec<usize>, Vec<usize>)> = Vec::new();
    let mut f = vec![0usize; slots];
    let mut idx = vec![0usize; ch.s_size];
    for m in 0..num_maps as usize {
        let mut code = m;
        for slot in f.iter_mut() {
            *slot = code % ch.x_size;
            code /= ch.x_size;
        }
        idx.iter_mut().for_each(|i| *i = 0);
        let mut best = (f64::NEG_INFINITY, idx.clone());
        loop {
            let cond: Vec<Vec<f64>> = idx.iter().map(|&i| grid[i].clone()).collect();
            let v = gp_value(ch, &cond, &f, cfg.u_size);
            if v > best.0 + 1e-13 {
                best = (v, idx.clone());
            }
            let mut k = 0;
            while k < idx.len() {
                idx[k] += 1;
                if idx[k] < grid.len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == idx.len() {
                break;
            }
        }
        candidates.push((best.0, f.clone(), best.1));
    }
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut value = candidates[0].0;
    for (_, f, idx) in candidates.iter().take(cfg.refine_top.max(1)) {
        let mut cond: Vec<Vec<f64>> = idx.iter().map(|&i| grid[i].clone()).collect();
        value = value.max(refine(ch, &mut cond, f, cfg.u_size, 1.0 / r as f64));
    }
    Ok(value.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn h2(p: f64) -> f64 {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }

    fn bsc(p: f64) -> Vec<Vec<f64>> {
        vec![vec![1.0 - p, p], vec![p, 1.0 - p]]
    }

    #[test]
    fn blahut_arimoto_examples() {
        assert_abs_diff_eq!(blahut_arimoto(&bsc(0.0), 1e-12), 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(blahut_arimoto(&bsc(0.1), 1e-12), 1.0 - h2(0.1), epsilon = 1e-9);
        assert_abs_diff_eq!(blahut_arimoto(&bsc(0.5), 1e-12), 0.0, epsilon = 1e-9);
        // Z channel with crossover ½: log2(5/4).
        let z = vec![vec![1.0, 0.0], vec![0.5, 0.5]];
        assert_abs_diff_eq!(blahut_arimoto(&z, 1e-12), (1.25f64).log2(), epsilon = 1e-8);
    }

    #[test]
    fn shannon_strategy_examples() {
        let noiseless = ClassicalChannelWithState::state_free(bsc(0.0), 2).unwrap();
        assert_abs_diff_eq!(classical_shannon_strategy(&noiseless).unwrap(), 1.0, epsilon = 1e-6);
        let xor = ClassicalChannelWithState::new(
            (0..2)
                .map(|x| (0..2).map(|s| if x ^ s == 0 { vec![1.0, 0.0] } else { vec![0.0, 1.0] }).collect())
                .collect(),
            vec![0.5, 0.5],
        )
        .unwrap();
        assert_abs_diff_eq!(classical_shannon_strategy(&xor).unwrap(), 1.0, epsilon = 1e-6);
        let useless = ClassicalChannelWithState::state_free(vec![vec![0.3, 0.7], vec![0.3, 0.7]], 2).unwrap();
        assert_abs_diff_eq!(classical_shannon_strategy(&useless).unwrap(), 0.0, epsilon = 1e-6);
    }

    #[test]
    fn strategy_cap() {
        let big = ClassicalChannelWithState::state_free(vec![vec![1.0]; 5], 6).unwrap();
        assert!(matches!(classical_shannon_strategy(&big), Err(Error::CapExceeded(_))));
    }

    #[test]
    fn gelfand_pinsker_state_free_matches_dmc() {
        let ch = ClassicalChannelWithState::state_free(bsc(0.1), 2).unwrap();
        let v = classical_gelfand_pinsker(&ch, &GelfandPinskerConfig::new(2)).unwrap();
        assert_abs_diff_eq!(v, 1.0 - h2(0.1), epsilon = 1e-4);
    }

    #[test]
    fn validation() {
        assert!(ClassicalChannelWithState::new(vec![vec![vec![0.5, 0.4]]], vec![1.0]).is_err());
        assert!(ClassicalChannelWithState::new(vec![vec![vec![0.5, 0.5]]], vec![0.9]).is_err());
    }

    #[test]
    fn simplex_grid_counts() {
        assert_eq!(simplex_grid(2, 4).len(), 5);
        assert_eq!(simplex_grid(3, 2).len(), 6);
        for p in simplex_grid(3, 5) {
            assert_abs_diff_eq!(p.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        }
    }
}
