use ndarray::Array2;

use super::model::ClassificationModel;
use crate::corpus::{Corpus, Document};
use crate::error::Result;
use crate::exec::{map_range, Execution};
use crate::fit::InnerConfig;
use crate::numerics::argmax;
use crate::topics::{expected_log_beta, infer_unsupervised, mean_assignment};

/// Class with the largest η_cᵀφ̄ (ties to the lowest index) and the score
/// vector η φ̄.
pub fn classify_mean_assignment(eta: &Array2<f64>, phi_bar: &[f64]) -> (usize, Vec<f64>) {
    let scores: Vec<f64> = eta
        .rows()
        .into_iter()
        .map(|row| row.iter().zip(phi_bar).map(|(e, p)| e * p).sum())
        .collect();
    (argmax(&scores), scores)
}

/// Held-out posterior (γ, φ) without labels.
pub fn infer_heldout(doc: &Document, model: &ClassificationModel, inner: &InnerConfig) -> Result<(Vec<f64>, Array2<f64>)> {
    infer_unsupervised(doc, &expected_log_beta(&model.zeta), model.hyper.alpha, inner)
}

pub fn predict_class(doc: &Document, model: &ClassificationModel, inner: &InnerConfig) -> Result<(usize, Vec<f64>)> {
    let (_, phi) = infer_heldout(doc, model, inner)?;
    Ok(classify_mean_assignment(&model.eta, &mean_assignment(&phi)))
}

/// Predictions for every document, in corpus order.
pub fn predict_classes(corpus: &Corpus, model: &ClassificationModel, inner: &InnerConfig, exec: Execution) -> Result<Vec<(usize, Vec<f64>)>> {
    let elog_beta = expected_log_beta(&model.zeta);
    let docs = corpus.documents();
    map_range(exec, docs.len(), |d| {
        let (_, phi) = infer_unsupervised(&docs[d], &elog_beta, model.hyper.alpha, inner)?;
        Ok(classify_mean_assignment(&model.eta, &mean_assignment(&phi)))
    })
    .into_iter()
    .collect()
}
