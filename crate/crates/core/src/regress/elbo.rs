use std::f64::consts::PI;

use super::mstep::expected_outer;
use super::model::{RegDocState, RegGlobals, RegressionModel, UpdateForm};
use crate::corpus::{Corpus, Document, RealAnnotations};
use crate::exec::{map_range, Execution};
use crate::topics::{doc_lda_elbo, mean_assignment, topics_elbo};

/// E_q[log N(x | ηᵀz̄, σ²)] + Σ_{r∈R_d} E_q[log N(yʳ | x + bʳ, 1/pʳ)] + H[q(x)].
pub fn doc_target_elbo(answers: &[(usize, f64)], state: &RegDocState, globals: &RegGlobals) -> f64 {
    let eta = &globals.eta;
    let phi_bar = mean_assignment(&state.phi);
    let mean: f64 = eta.iter().zip(&phi_bar).map(|(e, p)| e * p).sum();
    let outer = expected_outer(&state.phi);
    let mut second = 0.0;
    for (i, ei) in eta.iter().enumerate() {
        for (j, ej) in eta.iter().enumerate() {
            second += ei * outer[[i, j]] * ej;
        }
    }
    let (m, v, s2) = (state.m, state.v, globals.sigma2);
    let mut value = -0.5 * (2.0 * PI * s2).ln() - (m * m + v - 2.0 * m * mean + second) / (2.0 * s2);
    for &(r, y) in answers {
        let p = globals.precision[r];
        let resid = y - m - globals.bias[r];
        value += 0.5 * (p / (2.0 * PI)).ln() - 0.5 * p * (resid * resid + v);
    }
    value + 0.5 * (2.0 * PI * std::f64::consts::E * v).ln()
}

/// All ELBO terms involving one document's local parameters.
pub fn doc_elbo_r(doc: &Document, answers: &[(usize, f64)], state: &RegDocState, globals: &RegGlobals) -> f64 {
    doc_lda_elbo(doc, &state.phi, &state.gamma, &globals.elog_beta, globals.alpha) + doc_target_elbo(answers, state, globals)
}

/// Full evidence lower bound of the regression model.
pub fn elbo_r(model: &RegressionModel, states: &[RegDocState], corpus: &Corpus, ann: &RealAnnotations, exec: Execution) -> f64 {
    let globals = model.globals(UpdateForm::Derived);
    let docs = corpus.documents();
    let parts = map_range(exec, states.len(), |d| doc_elbo_r(&docs[d], ann.doc(d), &states[d], &globals));
    parts.iter().sum::<f64>() + topics_elbo(&model.zeta, &globals.elog_beta, model.hyper.tau)
}
