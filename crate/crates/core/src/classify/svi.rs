use rand::seq::SliceRandom;

use super::elbo::elbo_with;
use super::estep::estep_document;
use super::eta::update_eta;
use super::fit::{confusion_statistics, initialize, ClassFit};
use super::model::{ClassDocState, ClassificationModel, Hyperparameters};
use crate::corpus::{ClassAnnotations, Corpus};
use crate::error::Result;
use crate::exec::try_for_each_mut;
use crate::fit::{check_elbo, relative_change, EngineConfig, SviConfig, TracePoint};
use crate::rng::stream;
use crate::topics::topic_counts;

/// Natural-gradient step on ζ and ξ from the states of the documents in
/// `batch` (sorted), as if each batch document were seen D/|B| times.
///
/// ξ rows move only for annotators who labeled a document in the batch.
pub fn svi_global_step(
    model: &mut ClassificationModel,
    corpus: &Corpus,
    ann: &ClassAnnotations,
    states: &[ClassDocState],
    batch: &[usize],
    rho: f64,
) {
    let scale = corpus.len() as f64 / batch.len() as f64;
    let tau = model.hyper.tau;
    let counts = topic_counts(corpus, model.num_topics(), batch.iter().map(|&d| (d, &states[d].phi)));
    model.zeta.zip_mut_with(&counts, |z, &s| *z = (1.0 - rho) * *z + rho * (tau + scale * s));

    let mut in_batch = vec![false; corpus.len()];
    for &d in batch {
        in_batch[d] = true;
    }
    let omega = model.hyper.omega;
    let (stats, present) = confusion_statistics(ann, states, |d| in_batch[d]);
    for (r, &seen) in present.iter().enumerate() {
        if !seen {
            continue;
        }
        let mut row = model.xi.slice_mut(ndarray::s![r, .., ..]);
        row.zip_mut_with(&stats.slice(ndarray::s![r, .., ..]), |x, &s| {
            *x = (1.0 - rho) * *x + rho * (omega + scale * s)
        });
    }
}

fn local_step(
    model: &ClassificationModel,
    corpus: &Corpus,
    ann: &ClassAnnotations,
    states: &mut [ClassDocState],
    batch: &[usize],
    engine: &EngineConfig,
) -> Result<()> {
    let globals = model.globals();
    let docs = corpus.documents();
    let mut local: Vec<ClassDocState> = batch.iter().map(|&d| states[d].clone()).collect();
    try_for_each_mut(engine.exec, &mut local, |i, state| {
        let d = batch[i];
        estep_document(&docs[d], ann.doc(d), &globals, state, &engine.inner).map(|_| ())
    })?;
    for (&d, s) in batch.iter().zip(local) {
        states[d] = s;
    }
    Ok(())
}

/// Stochastic variational inference. Each epoch visits every document once
/// in random mini-batches; η is refit from the stored states at the end of
/// the epoch, when the ELBO is also recorded.
pub fn fit_svi(corpus: &Corpus, ann: &ClassAnnotations, num_topics: usize, hyper: Hyperparameters, cfg: &SviConfig) -> Result<ClassFit> {
    cfg.validate()?;
    let (mut model, mut states) = initialize(corpus, ann, num_topics, hyper, cfg.seed)?;
    let exec = cfg.engine.exec;
    let mut rng = stream(cfg.seed, "svi");
    let mut prev = check_elbo(elbo_with(&model, &model.globals(), &states, corpus, ann, exec), 0)?;
    let mut trace = vec![TracePoint {
        iteration: 0,
        doc_visits: 0,
        elbo: prev,
    }];
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    let mut t = 0u64;
    let mut visits = 0u64;
    for epoch in 1..=cfg.max_epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(cfg.batch_size) {
            let mut batch = chunk.to_vec();
            batch.sort_unstable();
            t += 1;
            local_step(&model, corpus, ann, &mut states, &batch, &cfg.engine)?;
            svi_global_step(&mut model, corpus, ann, &states, &batch, cfg.step_size(t));
            visits += batch.len() as u64;
        }
        model.eta = update_eta(&model.eta, &states, &cfg.engine.lbfgs, exec)?;
        let value = check_elbo(elbo_with(&model, &model.globals(), &states, corpus, ann, exec), epoch)?;
        trace.push(TracePoint {
            iteration: epoch,
            doc_visits: visits,
            elbo: value,
        });
        if cfg.tol > 0.0 && relative_change(prev, value) < cfg.tol {
            break;
        }
        prev = value;
    }
    Ok(ClassFit { model, states, trace })
}
