use ndarray::Array3;

use super::elbo::elbo_with;
use super::estep::estep_document;
use super::eta::update_eta;
use super::model::{ClassDocState, ClassificationModel, Hyperparameters};
use crate::corpus::{ClassAnnotations, Corpus};
use crate::error::{Error, Result};
use crate::exec::try_for_each_mut;
use crate::fit::{check_elbo, relative_change, BatchConfig, EngineConfig, TracePoint};
use crate::rng::stream;
use crate::topics::{jittered_phi, random_zeta, topic_counts, update_gamma, zeta_from_counts};

/// Result of fitting: the model, the final per-document states and the ELBO
/// after every iteration (entry 0 is the initial state).
#[derive(Debug, Clone)]
pub struct ClassFit {
    pub model: ClassificationModel,
    pub states: Vec<ClassDocState>,
    pub trace: Vec<TracePoint>,
}

pub(crate) fn validate_inputs(corpus: &Corpus, ann: &ClassAnnotations, num_topics: usize, hyper: &Hyperparameters) -> Result<()> {
    hyper.validate()?;
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
    if let Some(d) = ann.first_unlabeled() {
        return Err(Error::invalid(format!("training document {d} has no annotations")));
    }
    Ok(())
}

/// Σ_{d∈D_r} λ_cᵈ [yᵈʳ = l] over the documents accepted by `include`, summed
/// in document order. Also reports which annotators had any such document.
pub fn confusion_statistics(
    ann: &ClassAnnotations,
    states: &[ClassDocState],
    include: impl Fn(usize) -> bool,
) -> (Array3<f64>, Vec<bool>) {
    let c = ann.num_classes();
    let mut stats = Array3::zeros((ann.num_annotators(), c, c));
    let mut present = vec![false; ann.num_annotators()];
    for (r, seen) in present.iter_mut().enumerate() {
        for &(d, y) in ann.annotator(r) {
            if !include(d) {
                continue;
            }
            *seen = true;
            for (cls, &lam) in states[d].lambda.iter().enumerate() {
                stats[[r, cls, y]] += lam;
            }
        }
    }
    (stats, present)
}

/// ξʳ_{c,l} = ω + Σ_{d∈D_r} λ_cᵈ yₗᵈʳ.
pub fn update_xi(ann: &ClassAnnotations, states: &[ClassDocState], omega: f64) -> Array3<f64> {
    confusion_statistics(ann, states, |_| true).0.mapv(|s| omega + s)
}

/// λ from each document's votes with add-one smoothing.
fn vote_lambda(labels: &[(usize, usize)], num_classes: usize) -> Vec<f64> {
    let mut counts = vec![1.0; num_classes];
    for &(_, y) in labels {
        counts[y] += 1.0;
    }
    let total: f64 = counts.iter().sum();
    counts.iter().map(|c| c / total).collect()
}

/// Starting model and document states.
pub fn initialize(
    corpus: &Corpus,
    ann: &ClassAnnotations,
    num_topics: usize,
    hyper: Hyperparameters,
    seed: u64,
) -> Result<(ClassificationModel, Vec<ClassDocState>)> {
    validate_inputs(corpus, ann, num_topics, &hyper)?;
    let mut rng = stream(seed, "init");
    let states: Vec<ClassDocState> = corpus
        .documents()
        .iter()
        .enumerate()
        .map(|(d, doc)| {
            let phi = jittered_phi(doc.len(), num_topics, &mut rng);
            ClassDocState {
                gamma: update_gamma(&phi, hyper.alpha),
                phi,
                lambda: vote_lambda(ann.doc(d), ann.num_classes()),
            }
        })
        .collect();
    let zeta = random_zeta(corpus, num_topics, hyper.tau, &mut rng);
    let model = ClassificationModel {
        hyper,
        eta: ndarray::Array2::zeros((ann.num_classes(), num_topics)),
        zeta,
        xi: update_xi(ann, &states, hyper.omega),
        annotator_ids: ann.external_ids().to_vec(),
    };
    Ok((model, states))
}

/// Runs the local loop on the listed documents against the current globals.
pub fn run_estep(
    model: &ClassificationModel,
    corpus: &Corpus,
    ann: &ClassAnnotations,
    states: &mut [ClassDocState],
    engine: &EngineConfig,
) -> Result<()> {
    let globals = model.globals();
    let docs = corpus.documents();
    try_for_each_mut(engine.exec, states, |d, state| {
        estep_document(&docs[d], ann.doc(d), &globals, state, &engine.inner).map(|_| ())
    })
}

/// M-step for ζ, ξ and η given every document's state.
pub fn m_step(model: &mut ClassificationModel, corpus: &Corpus, ann: &ClassAnnotations, states: &[ClassDocState], engine: &EngineConfig) -> Result<()> {
    let counts = topic_counts(corpus, model.num_topics(), states.iter().map(|s| &s.phi).enumerate());
    model.zeta = zeta_from_counts(&counts, model.hyper.tau);
    model.xi = update_xi(ann, states, model.hyper.omega);
    model.eta = update_eta(&model.eta, states, &engine.lbfgs, engine.exec)?;
    Ok(())
}

/// Batch variational EM.
pub fn fit_batch(corpus: &Corpus, ann: &ClassAnnotations, num_topics: usize, hyper: Hyperparameters, cfg: &BatchConfig) -> Result<ClassFit> {
    let (mut model, mut states) = initialize(corpus, ann, num_topics, hyper, cfg.seed)?;
    let exec = cfg.engine.exec;
    let mut prev = check_elbo(elbo_with(&model, &model.globals(), &states, corpus, ann, exec), 0)?;
    let mut trace = vec![TracePoint {
        iteration: 0,
        doc_visits: 0,
        elbo: prev,
    }];
    for it in 1..=cfg.max_iter {
        run_estep(&model, corpus, ann, &mut states, &cfg.engine)?;
        m_step(&mut model, corpus, ann, &states, &cfg.engine)?;
        let value = check_elbo(elbo_with(&model, &model.globals(), &states, corpus, ann, exec), it)?;
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
    Ok(ClassFit { model, states, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Annotation, Annotations, Document, Vocabulary};
    use approx::assert_relative_eq;

    fn one_doc_state(lambda: Vec<f64>) -> ClassDocState {
        ClassDocState {
            gamma: vec![1.0],
            phi: ndarray::Array2::from_elem((1, 1), 1.0),
            lambda,
        }
    }

    #[test]
    fn xi_direct_substitution() {
        let ann = ClassAnnotations::new(
            2,
            Annotations::new(1, 2, vec![Annotation { doc: 0, annotator: 0, value: 1 }]).unwrap(),
        )
        .unwrap();
        let xi = update_xi(&ann, &[one_doc_state(vec![0.3, 0.7])], 1.0);
        assert_relative_eq!(xi[[0, 0, 0]], 1.0);
        assert_relative_eq!(xi[[0, 0, 1]], 1.3);
        assert_relative_eq!(xi[[0, 1, 0]], 1.0);
        assert_relative_eq!(xi[[0, 1, 1]], 1.7);
        // Annotator 1 never answered.
        assert!(xi.slice(ndarray::s![1, .., ..]).iter().all(|&v| v == 1.0));
        let mass: f64 = xi.slice(ndarray::s![0, .., ..]).iter().map(|v| v - 1.0).sum();
        assert_relative_eq!(mass, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn batch_fit_is_deterministic_and_monotone() {
        let docs = vec![
            Document::from_tokens(&[0, 0, 1, 2]).unwrap(),
            Document::from_tokens(&[3, 4, 4]).unwrap(),
            Document::from_tokens(&[0, 1, 1]).unwrap(),
            Document::from_tokens(&[3, 3, 4, 2]).unwrap(),
        ];
        let corpus = Corpus::new(Vocabulary::synthetic(5), docs).unwrap();
        let recs = vec![
            Annotation { doc: 0, annotator: 0, value: 0 },
            Annotation { doc: 1, annotator: 0, value: 1 },
            Annotation { doc: 2, annotator: 1, value: 0 },
            Annotation { doc: 3, annotator: 1, value: 1 },
            Annotation { doc: 3, annotator: 0, value: 1 },
        ];
        let ann = ClassAnnotations::new(2, Annotations::new(4, 2, recs).unwrap()).unwrap();
        let cfg = BatchConfig { max_iter: 15, tol: 0.0, ..Default::default() };
        let a = fit_batch(&corpus, &ann, 2, Hyperparameters::default(), &cfg).unwrap();
        let b = fit_batch(&corpus, &ann, 2, Hyperparameters::default(), &cfg).unwrap();
        assert_eq!(a.model, b.model);
        for w in a.trace.windows(2) {
            assert!(w[1].elbo >= w[0].elbo - 1e-6 * w[0].elbo.abs(), "{:?}", a.trace);
        }
        for s in &a.states {
            assert_relative_eq!(s.lambda.iter().sum::<f64>(), 1.0, epsilon = 1e-9);
            for row in s.phi.rows() {
                assert_relative_eq!(row.sum(), 1.0, epsilon = 1e-9);
            }
            assert!(s.gamma.iter().all(|&g| g >= 0.1));
        }
        assert!(a.model.xi.iter().all(|&x| x >= 1.0));
        assert!(a.model.zeta.iter().all(|&z| z >= 0.1));
    }

    #[test]
    fn rejects_unlabeled_documents() {
        let corpus = Corpus::new(Vocabulary::synthetic(2), vec![Document::from_tokens(&[0]).unwrap(), Document::from_tokens(&[1]).unwrap()]).unwrap();
        let ann = ClassAnnotations::new(2, Annotations::new(2, 1, vec![Annotation { doc: 0, annotator: 0, value: 0 }]).unwrap()).unwrap();
        assert!(initialize(&corpus, &ann, 2, Hyperparameters::default(), 0).is_err());
    }
}
