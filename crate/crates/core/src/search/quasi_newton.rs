//! Multi-start BFGS ascent with central-difference gradients.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{rng, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuasiNewtonConfig {
    /// Random starts drawn uniformly from `init_range` in every coordinate.
    pub restarts: usize,
    pub init_range: [f64; 2],
    /// Relative finite-difference step, scaled by `1 + |x_i|`.
    pub gradient_step: f64,
    /// Gradient-norm stopping threshold.
    pub tolerance: f64,
    pub max_iters: usize,
    pub rng_seed: u64,
}

impl Default for QuasiNewtonConfig {
    fn default() -> Self {
        Self {
            restarts: 10,
            init_range: [-50.0, 50.0],
            gradient_step: 1e-4,
            tolerance: 1e-8,
            max_iters: 200,
            rng_seed: 0,
        }
    }
}

impl QuasiNewtonConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::config("qn.restarts", "must be >= 1"));
        }
        let [lo, hi] = self.init_range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::config("qn.init_range", "must be a nonempty finite interval"));
        }
        if !(self.gradient_step > 0.0) {
            return Err(Error::config("qn.gradient_step", "must be positive"));
        }
        if !(self.tolerance >= 0.0) {
            return Err(Error::config("qn.tolerance", "must be nonnegative"));
        }
        Ok(())
    }

    pub fn with_seed(&self, rng_seed: u64) -> Self {
        Self {
            rng_seed,
            ..self.clone()
        }
    }
}

/// One BFGS run.
#[derive(Debug, Clone, PartialEq)]
pub struct QnRun {
    pub x: Vec<f64>,
    pub value: f64,
    pub start_value: f64,
    pub iterations: usize,
    pub gradient_norm: f64,
    /// Objective after every accepted step, starting with the initial value.
    pub trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QnOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub runs: Vec<QnRun>,
}

fn checked<F: FnMut(&[f64]) -> f64>(f: &mut F, x: &[f64]) -> Result<f64> {
    let v = f(x);
    if !v.is_finite() {
        return Err(Error::ObjectiveNonFinite {
            at: format!("{x:?}"),
        });
    }
    Ok(v)
}

fn gradient<F: FnMut(&[f64]) -> f64>(f: &mut F, x: &[f64], rel_step: f64) -> Result<Vec<f64>> {
    let mut probe = x.to_vec();
    let mut g = vec![0.0; x.len()];
    for i in 0..x.len() {
        let h = rel_step * (1.0 + x[i].abs());
        probe[i] = x[i] + h;
        let up = checked(f, &probe)?;
        probe[i] = x[i] - h;
        let down = checked(f, &probe)?;
        probe[i] = x[i];
        g[i] = (up - down) / (2.0 * h);
    }
    Ok(g)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// BFGS ascent from `x0`.
///
/// Steps come from a backtracking Armijo search and are accepted only when
/// the objective strictly increases. Trial points with non-finite values are
/// treated as failed steps; the start point and gradient probes must be finite.
pub fn bfgs_ascent<F: FnMut(&[f64]) -> f64>(
    objective: &mut F,
    x0: Vec<f64>,
    cfg: &QuasiNewtonConfig,
) -> Result<QnRun> {
    let n = x0.len();
    let mut x = x0;
    let mut f = checked(objective, &x)?;
    let start_value = f;
    let mut trace = vec![f];
    let mut g = gradient(objective, &x, cfg.gradient_step)?;
    // Inverse Hessian of -f, row-major.
    let mut h = identity(n);
    let mut iterations = 0;
    let mut fresh = true;

    while iterations < cfg.max_iters && norm(&g) > cfg.tolerance {
        iterations += 1;
        let mut d = mat_vec(&h, &g);
        let mut slope = dot(&g, &d);
        if !(slope > 0.0) {
            h = identity(n);
            d = g.clone();
            slope = dot(&g, &d);
            fresh = true;
        }
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + alpha * di).collect();
            let v = objective(&trial);
            if v.is_finite() && v > f && v >= f + 1e-4 * alpha * slope {
                accepted = Some((trial, v));
                break;
            }
            alpha *= 0.5;
        }
        let Some((x_new, f_new)) = accepted else {
            if fresh {
                break;
            }
            // Retry once along the plain gradient before giving up.
            h = identity(n);
            fresh = true;
            continue;
        };
        let g_new = gradient(objective, &x_new, cfg.gradient_step)?;
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        // Gradient difference of -f.
        let y: Vec<f64> = g.iter().zip(&g_new).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * norm(&s) * norm(&y) {
            if fresh {
                let scale = sy / dot(&y, &y);
                for v in h.iter_mut() {
                    *v *= scale;
                }
            }
            bfgs_update(&mut h, &s, &y, sy);
            fresh = false;
        }
        x = x_new;
        f = f_new;
        g = g_new;
        trace.push(f);
    }

    Ok(QnRun {
        gradient_norm: norm(&g),
        x,
        value: f,
        start_value,
        iterations,
        trace,
    })
}

fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

fn mat_vec(m: &[f64], v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..n).map(|i| dot(&m[i * n..(i + 1) * n], v)).collect()
}

/// `H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T`.
fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    let hy = mat_vec(h, y);
    let yhy = dot(y, &hy);
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
        }
    }
}

/// Best of BFGS runs from every point in `seeded_starts` followed by
/// `cfg.restarts` uniform random starts.
pub fn quasi_newton_maximize<F: FnMut(&[f64]) -> f64>(
    mut objective: F,
    dim: usize,
    cfg: &QuasiNewtonConfig,
    seeded_starts: &[Vec<f64>],
) -> Result<QnOutcome> {
    cfg.validate()?;
    if let Some(bad) = seeded_starts.iter().find(|s| s.len() != dim) {
        return Err(Error::DimensionMismatch(format!(
            "start point of dimension {} for a {dim}-dimensional problem",
            bad.len()
        )));
    }
    let mut rng = rng::seeded(cfg.rng_seed);
    let [lo, hi] = cfg.init_range;
    let mut starts: Vec<Vec<f64>> = seeded_starts.to_vec();
    for _ in 0..cfg.restarts {
        starts.push((0..dim).map(|_| rng.random_range(lo..hi)).collect());
    }
    let mut runs = Vec::with_capacity(starts.len());
    for s in starts {
        runs.push(bfgs_ascent(&mut objective, s, cfg)?);
    }
    let best = runs
        .iter()
        .enumerate()
        .fold(0, |b, (i, r)| if r.value > runs[b].value { i } else { b });
    Ok(QnOutcome {
        x: runs[best].x.clone(),
        value: runs[best].value,
        runs,
    })
}
