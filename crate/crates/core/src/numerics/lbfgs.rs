//! Limited-memory BFGS with a strong-Wolfe line search.

use std::collections::VecDeque;

use super::ObjectiveEvaluation;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LbfgsConfig {
    /// Number of curvature pairs kept.
    pub memory: usize,
    pub max_iter: usize,
    /// Stop once the gradient's Euclidean norm falls to this value.
    pub grad_tol: f64,
    /// Also stop once an iteration lowers the value by less than this
    /// fraction of max(|f|, 1).
    pub rel_tol: f64,
    /// Sufficient-decrease constant.
    pub c1: f64,
    /// Curvature constant.
    pub c2: f64,
    pub max_line_search: usize,
}

impl Default for LbfgsConfig {
    fn default() -> Self {
        Self {
            memory: 10,
            max_iter: 100,
            grad_tol: 1e-5,
            rel_tol: 1e-10,
            c1: 1e-4,
            c2: 0.9,
            max_line_search: 40,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    /// True when the gradient or relative tolerance was met.
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

struct Evaluator<F> {
    objective: F,
    evaluations: usize,
}

impl<F: FnMut(&[f64]) -> ObjectiveEvaluation> Evaluator<F> {
    fn eval(&mut self, x: &[f64]) -> Result<ObjectiveEvaluation> {
        self.evaluations += 1;
        let ev = (self.objective)(x);
        if ev.gradient.len() != x.len() {
            return Err(Error::numerical(format!(
                "gradient has length {} for {} parameters",
                ev.gradient.len(),
                x.len()
            )));
        }
        if !ev.value.is_finite() || ev.gradient.iter().any(|g| !g.is_finite()) {
            return Err(Error::numerical(format!(
                "objective not finite (value {}) after {} evaluations",
                ev.value, self.evaluations
            )));
        }
        Ok(ev)
    }
}

/// Point along the search ray.
struct Probe {
    step: f64,
    value: f64,
    slope: f64,
    eval: ObjectiveEvaluation,
}

/// Minimize `objective` from `x0`.
///
/// The returned value never exceeds the value at `x0`. A line search that
/// cannot make progress ends the run early with `converged == false`.
pub fn minimize<F>(objective: F, x0: &[f64], config: &LbfgsConfig) -> Result<Minimum>
where
    F: FnMut(&[f64]) -> ObjectiveEvaluation,
{
    let mut ev = Evaluator {
        objective,
        evaluations: 0,
    };
    let mut x = x0.to_vec();
    let mut current = ev.eval(&x)?;
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(config.memory);
    let mut iterations = 0;

    loop {
        let grad_norm = norm(&current.gradient);
        if grad_norm <= config.grad_tol {
            return Ok(Minimum {
                x,
                value: current.value,
                grad_norm,
                iterations,
                converged: true,
            });
        }
        if iterations >= config.max_iter {
            return Ok(Minimum {
                x,
                value: current.value,
                grad_norm,
                iterations,
                converged: false,
            });
        }

        let mut direction = two_loop(&current.gradient, &history);
        let mut slope = dot(&direction, &current.gradient);
        if !(slope < 0.0) {
            // Curvature memory produced an ascent direction; restart.
            history.clear();
            direction = current.gradient.iter().map(|g| -g).collect();
            slope = -grad_norm * grad_norm;
        }
        let initial_step = if history.is_empty() {
            (1.0 / grad_norm).min(1.0)
        } else {
            1.0
        };

        let probe = match line_search(&mut ev, &x, &direction, &current, slope, initial_step, config)? {
            Some(p) => p,
            None => {
                return Ok(Minimum {
                    x,
                    value: current.value,
                    grad_norm,
                    iterations,
                    converged: false,
                })
            }
        };

        let s: Vec<f64> = direction.iter().map(|d| d * probe.step).collect();
        let y: Vec<f64> = probe
            .eval
            .gradient
            .iter()
            .zip(&current.gradient)
            .map(|(a, b)| a - b)
            .collect();
        let sy = dot(&s, &y);
        for (xi, si) in x.iter_mut().zip(&s) {
            *xi += si;
        }
        let decrease = current.value - probe.eval.value;
        current = probe.eval;
        iterations += 1;
        if decrease <= config.rel_tol * current.value.abs().max(1.0) {
            let grad_norm = norm(&current.gradient);
            return Ok(Minimum {
                x,
                value: current.value,
                grad_norm,
                iterations,
                converged: true,
            });
        }
        if sy > 1e-12 * norm(&s) * norm(&y) && sy > 0.0 {
            if history.len() == config.memory {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
    }
}

/// H·(−g) by the standard two-loop recursion.
fn two_loop(gradient: &[f64], history: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q: Vec<f64> = gradient.iter().map(|g| -g).collect();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, rho) in history.iter().rev() {
        let a = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = history.back() {
        let gamma = dot(s, y) / dot(y, y);
        for qi in q.iter_mut() {
            *qi *= gamma;
        }
    }
    for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
        let b = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (a - b) * si;
        }
    }
    q
}

fn probe_at<F: FnMut(&[f64]) -> ObjectiveEvaluation>(
    ev: &mut Evaluator<F>,
    x: &[f64],
    direction: &[f64],
    step: f64,
) -> Result<Probe> {
    let point: Vec<f64> = x.iter().zip(direction).map(|(a, d)| a + step * d).collect();
    let eval = ev.eval(&point)?;
    Ok(Probe {
        step,
        value: eval.value,
        slope: dot(&eval.gradient, direction),
        eval,
    })
}

/// Minimizer of the cubic interpolating two probes, clamped into the
/// interior of their bracket; falls back to bisection.
fn interpolate(lo: &Probe, hi: &Probe) -> f64 {
    let (a, b) = (lo.step, hi.step);
    let d1 = lo.slope + hi.slope - 3.0 * (lo.value - hi.value) / (a - b);
    let disc = d1 * d1 - lo.slope * hi.slope;
    let mid = 0.5 * (a + b);
    if disc < 0.0 {
        return mid;
    }
    let d2 = (b - a).signum() * disc.sqrt();
    let t = b - (b - a) * (hi.slope + d2 - d1) / (hi.slope - lo.slope + 2.0 * d2);
    let (left, right) = if a < b { (a, b) } else { (b, a) };
    let margin = 0.1 * (right - left);
    if t.is_finite() && t > left + margin && t < right - margin {
        t
    } else {
        mid
    }
}

fn line_search<F: FnMut(&[f64]) -> ObjectiveEvaluation>(
    ev: &mut Evaluator<F>,
    x: &[f64],
    direction: &[f64],
    start: &ObjectiveEvaluation,
    slope0: f64,
    initial_step: f64,
    config: &LbfgsConfig,
) -> Result<Option<Probe>> {
    let f0 = start.value;
    let origin = Probe {
        step: 0.0,
        value: f0,
        slope: slope0,
        eval: start.clone(),
    };
    let sufficient = |p: &Probe| p.value <= f0 + config.c1 * p.step * slope0;
    let curvature = |p: &Probe| p.slope.abs() <= -config.c2 * slope0;

    let mut prev = origin;
    let mut step = initial_step;
    for i in 0..config.max_line_search {
        let probe = probe_at(ev, x, direction, step)?;
        if !sufficient(&probe) || (i > 0 && probe.value >= prev.value) {
            return zoom(ev, x, direction, f0, slope0, prev, probe, config);
        }
        if curvature(&probe) {
            return Ok(Some(probe));
        }
        if probe.slope >= 0.0 {
            return zoom(ev, x, direction, f0, slope0, probe, prev, config);
        }
        prev = probe;
        step *= 2.0;
    }
    Ok(accept_if_decreased(prev, f0))
}

#[allow(clippy::too_many_arguments)]
fn zoom<F: FnMut(&[f64]) -> ObjectiveEvaluation>(
    ev: &mut Evaluator<F>,
    x: &[f64],
    direction: &[f64],
    f0: f64,
    slope0: f64,
    mut lo: Probe,
    mut hi: Probe,
    config: &LbfgsConfig,
) -> Result<Option<Probe>> {
    for _ in 0..config.max_line_search {
        if (hi.step - lo.step).abs() <= f64::EPSILON * lo.step.abs().max(1e-300) {
            break;
        }
        let step = interpolate(&lo, &hi);
        let probe = probe_at(ev, x, direction, step)?;
        if probe.value > f0 + config.c1 * step * slope0 || probe.value >= lo.value {
            hi = probe;
        } else {
            if probe.slope.abs() <= -config.c2 * slope0 {
                return Ok(Some(probe));
            }
            if probe.slope * (hi.step - lo.step) >= 0.0 {
                hi = lo;
            }
            lo = probe;
        }
    }
    Ok(accept_if_decreased(lo, f0))
}

fn accept_if_decreased(p: Probe, f0: f64) -> Option<Probe> {
    (p.step > 0.0 && p.value < f0).then_some(p)
}
