use rand::seq::SliceRandom;

use super::elbo::elbo_r;
use super::estep::estep_document_r;
use super::model::{RegDocState, RegressionModel, UpdateForm};
use super::mstep::{solve_eta, update_annotators};
use crate::classify::Hyperparameters;
use crate::corpus::{mean_answer, Corpus, RealAnnotations};
use crate::error::{Error, Result};
use crate::exec::try_for_each_mut;
use crate::fit::{check_elbo, relative_change, BatchConfig, EngineConfig, SviConfig, TracePoint};
use crate::rng::stream;
use crate::topics::{jittered_phi, random_zeta, topic_counts, update_gamma, zeta_from_counts};

#[derive(Debug, Clone)]
pub struct RegFit {
    pub model: RegressionModel,
    pub states: Vec<RegDocState>,
    pub trace: Vec<TracePoint>,
}

/// Starting model and states: b = 0, p = 1, m = mean answer, v = σ², and η
/// solved from the initial states.
pub fn initialize_r(
    corpus: &Corpus,
    ann: &RealAnnotations,
    num_topics: usize,
    hyper: Hyperparameters,
    sigma2: f64,
    seed: u64,
) -> Result<(RegressionModel, Vec<RegDocState>)> {
    hyper.validate()?;
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::invalid(format!("sigma2 must be positive, got {sigma2}")));
    }
    if num_topics == 0 {
        return Err(Error::invalid("number of topics must be positive"));
    }
    if ann.num_docs() != corpus.len() {
        return Err(Error::invalid(format!(
            "annotations cover {} documents, corpus has {}",
            ann.num_docs(),
            corpus.len()
        )));
    }
    let means = mean_answer(ann)?;
    let mut rng = stream(seed, "init");
    let states: Vec<RegDocState> = corpus
        .documents()
        .iter()
        .zip(&means)
        .map(|(doc, &m)| {
            let phi = jittered_phi(doc.len(), num_topics, &mut rng);
            RegDocState {
                gamma: update_gamma(&phi, hyper.alpha),
                phi,
                m,
                v: sigma2,
            }
        })
        .collect();
    let zeta = random_zeta(corpus, num_topics, hyper.tau, &mut rng);
    let r = ann.num_annotators();
    let model = RegressionModel {
        hyper,
        eta: solve_eta(&states, crate::exec::Execution::Sequential)?,
        bias: vec![0.0; r],
        precision: vec![1.0; r],
        sigma2,
        zeta,
        annotator_ids: ann.external_ids().to_vec(),
    };
    Ok((model, states))
}

fn local_step(
    model: &RegressionModel,
    corpus: &Corpus,
    ann: &RealAnnotations,
    states: &mut [RegDocState],
    batch: Option<&[usize]>,
    engine: &EngineConfig,
    form: UpdateForm,
) -> Result<()> {
    let globals = model.globals(form);
    let docs = corpus.documents();
    match batch {
        None => try_for_each_mut(engine.exec, states, |d, s| {
            estep_document_r(&docs[d], ann.doc(d), &globals, s, &engine.inner).map(|_| ())
        }),
        Some(batch) => {
            let mut local: Vec<RegDocState> = batch.iter().map(|&d| states[d].clone()).collect();
            try_for_each_mut(engine.exec, &mut local, |i, s| {
                let d = batch[i];
                estep_document_r(&docs[d], ann.doc(d), &globals, s, &engine.inner).map(|_| ())
            })?;
            for (&d, s) in batch.iter().zip(local) {
                states[d] = s;
            }
            Ok(())
        }
    }
}

/// η, then every bᵣ and pᵣ, from the current states.
fn supervised_m_step(model: &mut RegressionModel, ann: &RealAnnotations, states: &[RegDocState], engine: &EngineConfig) -> Result<()> {
    model.eta = solve_eta(states, engine.exec)?;
    update_annotators(ann, states, &mut model.bias, &mut model.precision)
}

/// Full M-step: η, b, p, then ζ.
pub fn m_step_r(model: &mut RegressionModel, corpus: &Corpus, ann: &RealAnnotations, states: &[RegDocState], engine: &EngineConfig) -> Result<()> {
    supervised_m_step(model, ann, states, engine)?;
    let counts = topic_counts(corpus, model.num_topics(), states.iter().map(|s| &s.phi).enumerate());
    model.zeta = zeta_from_counts(&counts, model.hyper.tau);
    Ok(())
}

/// Batch variational EM for the regression model.
pub fn fit_batch_r(
    corpus: &Corpus,
    ann: &RealAnnotations,
    num_topics: usize,
    hyper: Hyperparameters,
    sigma2: f64,
    cfg: &BatchConfig,
    form: UpdateForm,
) -> Result<RegFit> {
    let (mut model, mut states) = initialize_r(corpus, ann, num_topics, hyper, sigma2, cfg.seed)?;
    let exec = cfg.engine.exec;
    let mut prev = check_elbo(elbo_r(&model, &states, corpus, ann, exec), 0)?;
    let mut trace = vec![TracePoint {
        iteration: 0,
        doc_visits: 0,
        elbo: prev,
    }];
    for it in 1..=cfg.max_iter {
        local_step(&model, corpus, ann, &mut states, None, &cfg.engine, form)?;
        m_step_r(&mut model, corpus, ann, &states, &cfg.engine)?;
        let value = check_elbo(elbo_r(&model, &states, corpus, ann, exec), it)?;
        trace.push(TracePoint {
            iteration: it,
            doc_visits: (it * corpus.len()) as u64,
            elbo: value,
        });
        if relative_change(prev, value) < cfg.tol {
            break;
        }
        prev = value;
    }
    Ok(RegFit { model, states, trace })
}

/// ζ ← (1 − ρ)ζ + ρ(τ + (D/|B|) Σ_{d∈B} Σₙ wₙφₙ).
pub fn svi_global_step_r(model: &mut RegressionModel, corpus: &Corpus, states: &[RegDocState], batch: &[usize], rho: f64) {
    let scale = corpus.len() as f64 / batch.len() as f64;
    let tau = model.hyper.tau;
    let counts = topic_counts(corpus, model.num_topics(), batch.iter().map(|&d| (d, &states[d].phi)));
    model.zeta.zip_mut_with(&counts, |z, &s| *z = (1.0 - rho) * *z + rho * (tau + scale * s));
}

/// Stochastic variational inference for the regression model; η, b and p
/// are refit from the stored states once per epoch.
pub fn fit_svi_r(
    corpus: &Corpus,
    ann: &RealAnnotations,
    num_topics: usize,
    hyper: Hyperparameters,
    sigma2: f64,
    cfg: &SviConfig,
    form: UpdateForm,
) -> Result<RegFit> {
    cfg.validate()?;
    let (mut model, mut states) = initialize_r(corpus, ann, num_topics, hyper, sigma2, cfg.seed)?;
    let exec = cfg.engine.exec;
    let mut rng = stream(cfg.seed, "svi");
    let mut prev = check_elbo(elbo_r(&model, &states, corpus, ann, exec), 0)?;
    let mut trace = vec![TracePoint {
        iteration: 0,
        doc_visits: 0,
        elbo: prev,
    }];
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    let (mut t, mut visits) = (0u64, 0u64);
    for epoch in 1..=cfg.max_epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(cfg.batch_size) {
            let mut batch = chunk.to_vec();
            batch.sort_unstable();
            t += 1;
            local_step(&model, corpus, ann, &mut states, Some(&batch), &cfg.engine, form)?;
            svi_global_step_r(&mut model, corpus, &states, &batch, cfg.step_size(t));
            visits += batch.len() as u64;
        }
        supervised_m_step(&mut model, ann, &states, &cfg.engine)?;
        let value = check_elbo(elbo_r(&model, &states, corpus, ann, exec), epoch)?;
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
    Ok(RegFit { model, states, trace })
}
