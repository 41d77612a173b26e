//! Configuration and bookkeeping shared by the batch and stochastic fitters
//! of both models.

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::numerics::LbfgsConfig;

/// Per-document coordinate-ascent loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerConfig {
    pub max_iter: usize,
    /// Converged when the largest absolute change of any local parameter
    /// in a sweep falls below this.
    pub tol: f64,
}

impl Default for InnerConfig {
    fn default() -> Self {
        Self { max_iter: 50, tol: 1e-5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EngineConfig {
    pub inner: InnerConfig,
    /// Used by the classification η step.
    pub lbfgs: LbfgsConfig,
    pub exec: Execution,
}

/// Batch variational EM.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchConfig {
    pub max_iter: usize,
    /// Stop when |ΔELBO| / |ELBO| drops below this.
    pub tol: f64,
    pub seed: u64,
    pub engine: EngineConfig,
}

impl Default for BatchConfig {
    fn default() -> Self {
        Self {
            max_iter: 100,
            tol: 1e-5,
            seed: 0,
            engine: EngineConfig::default(),
        }
    }
}

/// Stochastic variational inference with ρ_t = (t + delay)^(−κ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SviConfig {
    pub kappa: f64,
    pub delay: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Relative ELBO change between epochs that stops the run; 0 runs every epoch.
    pub tol: f64,
    pub seed: u64,
    pub engine: EngineConfig,
}

impl Default for SviConfig {
    fn default() -> Self {
        Self {
            kappa: 0.6,
            delay: 1.0,
            batch_size: 500,
            max_epochs: 50,
            tol: 0.0,
            seed: 0,
            engine: EngineConfig::default(),
        }
    }
}

impl SviConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.5 && self.kappa <= 1.0) {
            return Err(Error::invalid(format!("kappa {} outside (0.5, 1]", self.kappa)));
        }
        if !(self.delay >= 0.0) {
            return Err(Error::invalid(format!("delay {} is negative", self.delay)));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch size must be positive"));
        }
        Ok(())
    }

    /// ρ_t for step t (1-based).
    pub fn step_size(&self, t: u64) -> f64 {
        (t as f64 + self.delay).powf(-self.kappa)
    }
}

/// One ELBO evaluation during fitting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    /// EM iteration or SVI epoch; 0 is the initial state.
    pub iteration: usize,
    /// Cumulative number of per-document local inferences.
    pub doc_visits: u64,
    pub elbo: f64,
}

pub fn trace_csv(trace: &[TracePoint]) -> String {
    let mut out = String::from("iteration,doc_visits,elbo\n");
    for p in trace {
        out.push_str(&format!("{},{},{:?}\n", p.iteration, p.doc_visits, p.elbo));
    }
    out
}

pub(crate) fn check_elbo(elbo: f64, iteration: usize) -> Result<f64> {
    if elbo.is_finite() {
        Ok(elbo)
    } else {
        Err(Error::numerical(format!("ELBO is {elbo} at iteration {iteration}")))
    }
}

pub(crate) fn relative_change(prev: f64, next: f64) -> f64 {
    (next - prev).abs() / prev.abs().max(f64::MIN_POSITIVE)
}
