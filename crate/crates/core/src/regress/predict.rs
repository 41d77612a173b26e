use super::model::RegressionModel;
use crate::corpus::{Corpus, Document};
use crate::error::Result;
use crate::exec::{map_range, Execution};
use crate::fit::InnerConfig;
use crate::topics::{expected_log_beta, infer_unsupervised, mean_assignment};

/// x* = ηᵀφ̄ with φ inferred without answers.
pub fn predict_target(doc: &Document, model: &RegressionModel, inner: &InnerConfig) -> Result<f64> {
    let (_, phi) = infer_unsupervised(doc, &expected_log_beta(&model.zeta), model.hyper.alpha, inner)?;
    Ok(model.eta.iter().zip(mean_assignment(&phi)).map(|(e, p)| e * p).sum())
}

pub fn predict_targets(corpus: &Corpus, model: &RegressionModel, inner: &InnerConfig, exec: Execution) -> Result<Vec<f64>> {
    let elog_beta = expected_log_beta(&model.zeta);
    let docs = corpus.documents();
    map_range(exec, docs.len(), |d| {
        let (_, phi) = infer_unsupervised(&docs[d], &elog_beta, model.hyper.alpha, inner)?;
        Ok(model.eta.iter().zip(mean_assignment(&phi)).map(|(e, p)| e * p).sum())
    })
    .into_iter()
    .collect()
}
