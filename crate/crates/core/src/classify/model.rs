use ndarray::{Array2, Array3, ArrayView1};

use crate::error::{Error, Result};
use crate::numerics::dirichlet_expected_log;
use crate::topics::expected_log_beta;

/// Symmetric Dirichlet concentrations for θ (α), β (τ) and the confusion
/// rows π (ω). Held fixed while fitting.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Hyperparameters {
    pub alpha: f64,
    pub tau: f64,
    pub omega: f64,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            tau: 0.1,
            omega: 1.0,
        }
    }
}

impl Hyperparameters {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("tau", self.tau), ("omega", self.omega)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Fitted multi-annotator classification model.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationModel {
    pub hyper: Hyperparameters,
    /// C×K softmax coefficients, one row per class.
    pub eta: Array2<f64>,
    /// K×V Dirichlet parameters of q(β).
    pub zeta: Array2<f64>,
    /// R×C×C Dirichlet parameters of q(π); `xi[[r, c, l]]` weighs annotator
    /// r answering l when the true class is c.
    pub xi: Array3<f64>,
    /// External id of each dense annotator index.
    pub annotator_ids: Vec<u64>,
}

impl ClassificationModel {
    pub fn num_topics(&self) -> usize {
        self.zeta.nrows()
    }

    pub fn num_classes(&self) -> usize {
        self.eta.nrows()
    }

    pub fn vocab_size(&self) -> usize {
        self.zeta.ncols()
    }

    pub fn num_annotators(&self) -> usize {
        self.xi.shape()[0]
    }

    pub fn globals(&self) -> ClassGlobals {
        ClassGlobals {
            elog_beta: expected_log_beta(&self.zeta),
            elog_pi: expected_log_pi_all(&self.xi),
            eta: self.eta.clone(),
            alpha: self.hyper.alpha,
        }
    }

    /// Row-normalized ξ: the posterior-mean confusion matrices.
    pub fn confusion_means(&self) -> Array3<f64> {
        let mut out = self.xi.clone();
        for mut row in out.lanes_mut(ndarray::Axis(2)) {
            let s = row.sum();
            row.mapv_inplace(|v| v / s);
        }
        out
    }
}

/// Local variational parameters of one training document.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassDocState {
    pub gamma: Vec<f64>,
    /// One row per token occurrence.
    pub phi: Array2<f64>,
    pub lambda: Vec<f64>,
}

/// What the E-step reads from the global parameters.
///
/// Built from a model, or from point values of log β and log π when the
/// globals are frozen (the evidence oracle compares against this).
#[derive(Debug, Clone, PartialEq)]
pub struct ClassGlobals {
    pub elog_beta: Array2<f64>,
    pub elog_pi: Array3<f64>,
    pub eta: Array2<f64>,
    pub alpha: f64,
}

impl ClassGlobals {
    pub fn from_point(log_beta: Array2<f64>, log_pi: Array3<f64>, eta: Array2<f64>, alpha: f64) -> Self {
        Self {
            elog_beta: log_beta,
            elog_pi: log_pi,
            eta,
            alpha,
        }
    }

    pub fn num_topics(&self) -> usize {
        self.elog_beta.nrows()
    }

    pub fn num_classes(&self) -> usize {
        self.eta.nrows()
    }
}

/// E[log π] for one Dirichlet row of ξ.
pub fn expected_log_pi(xi_row: &[f64]) -> Vec<f64> {
    dirichlet_expected_log(xi_row)
}

pub fn expected_log_pi_all(xi: &Array3<f64>) -> Array3<f64> {
    let mut out = Array3::zeros(xi.raw_dim());
    for (mut dst, src) in out.lanes_mut(ndarray::Axis(2)).into_iter().zip(xi.lanes(ndarray::Axis(2))) {
        let e = expected_log_pi(&src.to_vec());
        dst.assign(&ArrayView1::from(&e));
    }
    out
}
