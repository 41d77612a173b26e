use ndarray::Array2;

use crate::classify::Hyperparameters;
use crate::topics::expected_log_beta;

/// Which closed forms the m and v updates use.
///
/// `Derived` solves the stationary conditions of the ELBO: the precision sum
/// in the m update runs over the document's own annotators and
/// v = (σ⁻² + Σ pʳ)⁻¹. `Printed` keeps the published forms (sum over every
/// annotator in the m denominator, v = σ² + Σ 1/pʳ) for comparison; it does
/// not maximize the bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UpdateForm {
    #[default]
    Derived,
    Printed,
}

/// Fitted multi-annotator regression model.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionModel {
    /// Only α and τ are used.
    pub hyper: Hyperparameters,
    pub eta: Vec<f64>,
    pub bias: Vec<f64>,
    pub precision: Vec<f64>,
    pub sigma2: f64,
    /// K×V Dirichlet parameters of q(β).
    pub zeta: Array2<f64>,
    pub annotator_ids: Vec<u64>,
}

impl RegressionModel {
    pub fn num_topics(&self) -> usize {
        self.zeta.nrows()
    }

    pub fn vocab_size(&self) -> usize {
        self.zeta.ncols()
    }

    pub fn num_annotators(&self) -> usize {
        self.bias.len()
    }

    pub fn globals(&self, form: UpdateForm) -> RegGlobals {
        RegGlobals {
            elog_beta: expected_log_beta(&self.zeta),
            eta: self.eta.clone(),
            bias: self.bias.clone(),
            precision: self.precision.clone(),
            sigma2: self.sigma2,
            alpha: self.hyper.alpha,
            form,
        }
    }
}

/// Local variational parameters of one training document; q(x) = N(m, v).
#[derive(Debug, Clone, PartialEq)]
pub struct RegDocState {
    pub gamma: Vec<f64>,
    pub phi: Array2<f64>,
    pub m: f64,
    pub v: f64,
}

/// What the E-step reads from the global parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct RegGlobals {
    pub elog_beta: Array2<f64>,
    pub eta: Vec<f64>,
    pub bias: Vec<f64>,
    pub precision: Vec<f64>,
    pub sigma2: f64,
    pub alpha: f64,
    pub form: UpdateForm,
}

impl RegGlobals {
    pub fn num_topics(&self) -> usize {
        self.elog_beta.nrows()
    }
}
