use super::estep::SoftmaxBoundWorkspace;
use super::model::{ClassDocState, ClassGlobals, ClassificationModel};
use crate::corpus::{ClassAnnotations, Corpus, Document};
use crate::exec::{map_range, Execution};
use crate::numerics::{dirichlet_elbo_term, log_sum_exp, PROB_FLOOR};
use crate::topics::{doc_lda_elbo, mean_assignment, topics_elbo};

/// Jensen bound on E[log p(c | z̄, η)] plus the annotator likelihood and the
/// entropy of q(c).
pub fn doc_label_elbo(labels: &[(usize, usize)], state: &ClassDocState, globals: &ClassGlobals) -> f64 {
    let phi_bar = mean_assignment(&state.phi);
    let ws = SoftmaxBoundWorkspace::new(&globals.eta, &state.phi);
    let mut value = -log_sum_exp(&ws.log_b());
    for (l, &lam) in state.lambda.iter().enumerate() {
        if lam <= 0.0 {
            continue;
        }
        let mut inner: f64 = globals.eta.row(l).iter().zip(&phi_bar).map(|(e, p)| e * p).sum();
        for &(r, y) in labels {
            inner += globals.elog_pi[[r, l, y]];
        }
        value += lam * (inner - lam.max(PROB_FLOOR).ln());
    }
    value
}

/// Every term of the ELBO that involves this document's local parameters.
/// With point-valued globals this is a lower bound on log p(w, y | β, π, η).
pub fn doc_elbo(doc: &Document, labels: &[(usize, usize)], state: &ClassDocState, globals: &ClassGlobals) -> f64 {
    doc_lda_elbo(doc, &state.phi, &state.gamma, &globals.elog_beta, globals.alpha) + doc_label_elbo(labels, state, globals)
}

/// Σ_{r,c} [E log p(πʳ_c | ω) − E log q(πʳ_c | ξʳ_c)].
pub fn confusion_elbo(model: &ClassificationModel, globals: &ClassGlobals) -> f64 {
    let mut value = 0.0;
    for r in 0..model.num_annotators() {
        for c in 0..model.num_classes() {
            let xi = model.xi.slice(ndarray::s![r, c, ..]).to_vec();
            let e = globals.elog_pi.slice(ndarray::s![r, c, ..]).to_vec();
            value += dirichlet_elbo_term(model.hyper.omega, &xi, &e);
        }
    }
    value
}

/// Full evidence lower bound of the classification model.
pub fn elbo(model: &ClassificationModel, states: &[ClassDocState], corpus: &Corpus, ann: &ClassAnnotations, exec: Execution) -> f64 {
    let globals = model.globals();
    elbo_with(model, &globals, states, corpus, ann, exec)
}

pub(crate) fn elbo_with(
    model: &ClassificationModel,
    globals: &ClassGlobals,
    states: &[ClassDocState],
    corpus: &Corpus,
    ann: &ClassAnnotations,
    exec: Execution,
) -> f64 {
    let docs = corpus.documents();
    let parts = map_range(exec, states.len(), |d| doc_elbo(&docs[d], ann.doc(d), &states[d], globals));
    let local: f64 = parts.iter().sum();
    local + topics_elbo(&model.zeta, &globals.elog_beta, model.hyper.tau) + confusion_elbo(model, globals)
}
