//! Special functions, stable reductions and the unconstrained minimizer
//! used by the classification M-step.

mod gradcheck;
mod lbfgs;
mod special;

pub use gradcheck::check_gradient;
pub use lbfgs::{minimize, LbfgsConfig, Minimum};
pub use special::{digamma, log_gamma, try_digamma, try_log_gamma};

/// Objective value with its gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveEvaluation {
    pub value: f64,
    pub gradient: Vec<f64>,
}

/// Smallest probability admitted before taking a log.
pub const PROB_FLOOR: f64 = 1e-300;

/// log Σ exp(vᵢ), shifted by the maximum. Empty input gives −∞.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = values.iter().map(|&v| (v - max).exp()).sum();
    max + sum.ln()
}

/// Replace `values` with softmax(values), computed in the log domain.
pub fn softmax_in_place(values: &mut [f64]) {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in values.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in values.iter_mut() {
        *v /= sum;
    }
}

/// E[log x] under Dirichlet(params): Ψ(pᵢ) − Ψ(Σp).
pub fn dirichlet_expected_log(params: &[f64]) -> Vec<f64> {
    let total = digamma(params.iter().sum());
    params.iter().map(|&p| digamma(p) - total).collect()
}

/// E_q[log Dir(x | prior)] − E_q[log q(x)] for q = Dirichlet(`params`) and a
/// symmetric Dirichlet prior; `expected_log` must be
/// [`dirichlet_expected_log`] of `params`.
pub fn dirichlet_elbo_term(prior: f64, params: &[f64], expected_log: &[f64]) -> f64 {
    let n = params.len() as f64;
    let total: f64 = params.iter().sum();
    let mut value = log_gamma(n * prior) - n * log_gamma(prior) - log_gamma(total);
    for (&p, &e) in params.iter().zip(expected_log) {
        value += log_gamma(p) + (prior - p) * e;
    }
    value
}

/// Index of the maximum; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}
