//! Spectral projected gradient minimization with a nonmonotone line search.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::SpgError;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpgConfig {
    pub max_iterations: usize,
    pub step_min: f64,
    pub step_max: f64,
    /// Number of past objective values the line search compares against.
    pub memory: usize,
    pub sufficient_decrease: f64,
    /// Stop once the projected gradient's infinity norm is at most this.
    pub tolerance: f64,
    pub max_backtracks: usize,
}

impl Default for SpgConfig {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            step_min: 1e-10,
            step_max: 1e10,
            memory: 10,
            sufficient_decrease: 1e-4,
            tolerance: 1e-5,
            max_backtracks: 30,
        }
    }
}

impl SpgConfig {
    pub fn validate(&self) -> Result<(), SpgError> {
        if !(self.step_min > 0.0 && self.step_min < self.step_max) {
            return Err(SpgError::InvalidConfig("need 0 < step_min < step_max"));
        }
        if self.memory == 0 {
            return Err(SpgError::InvalidConfig("memory must be at least 1"));
        }
        if !(self.sufficient_decrease > 0.0 && self.sufficient_decrease < 1.0) {
            return Err(SpgError::InvalidConfig("sufficient_decrease must lie in (0, 1)"));
        }
        if !(self.tolerance > 0.0) {
            return Err(SpgError::InvalidConfig("tolerance must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SpgStatus {
    Converged,
    MaxIterations,
    /// Every backtracking trial at this iteration was non-finite or failed
    /// the acceptance test; the best point so far is returned.
    NonFiniteObjective { iteration: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpgResult {
    pub point: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub status: SpgStatus,
    pub projected_gradient_norm: f64,
    /// Objective at the start and after every accepted step.
    pub trace: Vec<f64>,
}

impl SpgResult {
    pub fn converged(&self) -> bool {
        self.status == SpgStatus::Converged
    }
}

/// Projection onto the nonnegative orthant.
pub fn project_nonnegative(x: &mut [f64]) {
    for v in x {
        if !(*v > 0.0) {
            *v = 0.0;
        }
    }
}

fn inf_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, &v| m.max(v.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `out = P(x - step * g) - x`.
fn projected_direction(x: &[f64], g: &[f64], step: f64, project: &impl Fn(&mut [f64]), out: &mut [f64]) {
    for ((o, &xi), &gi) in out.iter_mut().zip(x).zip(g) {
        *o = xi - step * gi;
    }
    project(out);
    for (o, &xi) in out.iter_mut().zip(x) {
        *o -= xi;
    }
}

/// Minimizes `objective` over the set defined by `project`.
///
/// `objective(x, grad)` returns `f(x)` and writes the gradient, or `None`
/// where `f` is undefined or infinite.
pub fn spg_minimize<F, P>(mut objective: F, project: P, x0: &[f64], config: &SpgConfig) -> Result<SpgResult, SpgError>
where
    F: FnMut(&[f64], &mut [f64]) -> Option<f64>,
    P: Fn(&mut [f64]),
{
    config.validate()?;
    let n = x0.len();
    let mut x = x0.to_vec();
    project(&mut x);
    let mut g = vec![0.0; n];
    let mut f = match objective(&x, &mut g) {
        Some(v) if v.is_finite() => v,
        _ => return Err(SpgError::NonFiniteStart),
    };
    let mut trace = vec![f];
    let mut history = vec![f];
    let mut best = (x.clone(), f);

    let mut d = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut g_trial = vec![0.0; n];

    projected_direction(&x, &g, 1.0, &project, &mut d);
    let mut pg_norm = inf_norm(&d);
    let mut step = if pg_norm > 0.0 { (1.0 / pg_norm).clamp(config.step_min, config.step_max) } else { 1.0 };
    let mut iterations = 0;
    let mut status = SpgStatus::MaxIterations;

    while iterations < config.max_iterations {
        if pg_norm <= config.tolerance {
            status = SpgStatus::Converged;
            break;
        }
        projected_direction(&x, &g, step, &project, &mut d);
        let slope = dot(&g, &d);
        let reference = history.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=config.max_backtracks {
            for ((t, &xi), &di) in trial.iter_mut().zip(&x).zip(&d) {
                *t = xi + lambda * di;
            }
            project(&mut trial);
            if let Some(ft) = objective(&trial, &mut g_trial) {
                if ft.is_finite() && ft <= reference + config.sufficient_decrease * lambda * slope {
                    accepted = Some(ft);
                    break;
                }
            }
            lambda *= 0.5;
        }
        let Some(f_new) = accepted else {
            status = SpgStatus::NonFiniteObjective { iteration: iterations };
            break;
        };
        iterations += 1;

        let mut ss = 0.0;
        let mut sy = 0.0;
        for i in 0..n {
            let s = trial[i] - x[i];
            let y = g_trial[i] - g[i];
            ss += s * s;
            sy += s * y;
        }
        core::mem::swap(&mut x, &mut trial);
        core::mem::swap(&mut g, &mut g_trial);
        f = f_new;
        step = if sy > 0.0 { (ss / sy).clamp(config.step_min, config.step_max) } else { config.step_max };

        trace.push(f);
        if history.len() == config.memory {
            history.remove(0);
        }
        history.push(f);
        if f < best.1 {
            best = (x.clone(), f);
        }
        projected_direction(&x, &g, 1.0, &project, &mut d);
        pg_norm = inf_norm(&d);
    }
    if pg_norm <= config.tolerance && status == SpgStatus::MaxIterations {
        status = SpgStatus::Converged;
    }

    // The nonmonotone search may end above the best iterate.
    let (point, objective_value) = if best.1 < f {
        let (p, v) = best;
        // Recompute the projected gradient norm at the returned point.
        let mut gb = vec![0.0; n];
        if objective(&p, &mut gb).is_some() {
            projected_direction(&p, &gb, 1.0, &project, &mut d);
            pg_norm = inf_norm(&d);
        }
        (p, v)
    } else {
        (x, f)
    };
    Ok(SpgResult { point, objective: objective_value, iterations, status, projected_gradient_norm: pg_norm, trace })
}
