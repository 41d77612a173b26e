//! Synthetic scenarios shared by the acceptance runs.

use maslda::classify::Hyperparameters;
use maslda::corpus::{ClassAnnotations, RealAnnotations};
use maslda::simulate::{
    generate_synthetic_corpus, heterogeneous_confusion_profile, heterogeneous_gaussian_profile, simulate_confusion_annotators,
    simulate_gaussian_annotators, Assignment, ConfusionAnnotatorSpec, GaussianAnnotatorSpec, Response, SyntheticConfig, SyntheticCorpus,
};
use ndarray::Array2;

pub const TOPICS: usize = 5;
pub const CLASSES: usize = 4;
pub const TARGET_SIGMA2: f64 = 0.25;

/// Topic k drives class k mod C with weight 12, so every class is common.
pub fn class_eta() -> Array2<f64> {
    Array2::from_shape_fn((CLASSES, TOPICS), |(c, k)| if k % CLASSES == c { 12.0 } else { 0.0 })
}

/// Hyperparameters for classification fits on these scenarios: α = 1 from
/// the {0.01, 0.1, 1, 10} grid, defaults otherwise.
pub fn class_hyper() -> Hyperparameters {
    Hyperparameters {
        alpha: 1.0,
        ..Default::default()
    }
}

pub fn target_eta() -> Vec<f64> {
    vec![-2.0, -1.0, 0.0, 1.0, 2.0]
}

pub fn corpus_config(num_docs: usize, vocab_size: usize, doc_length: usize) -> SyntheticConfig {
    SyntheticConfig {
        num_topics: TOPICS,
        vocab_size,
        num_docs,
        doc_length,
        alpha: 0.3,
        topic_concentration: 0.05,
    }
}

pub struct ClassScenario {
    pub data: SyntheticCorpus,
    pub annotations: ClassAnnotations,
    pub specs: Vec<ConfusionAnnotatorSpec>,
}

/// Five annotators at the heterogeneous accuracy profile, three per document.
pub fn class_scenario(cfg: &SyntheticConfig, seed: u64) -> ClassScenario {
    let data = generate_synthetic_corpus(cfg, &Response::Classes { eta: class_eta() }, seed).expect("corpus");
    let specs = heterogeneous_confusion_profile(CLASSES).expect("profile");
    let annotations = simulate_confusion_annotators(&data.labels, &specs, Assignment::PerDocument(3), seed).expect("annotators");
    ClassScenario { data, annotations, specs }
}

pub struct RegScenario {
    pub data: SyntheticCorpus,
    pub annotations: RealAnnotations,
    pub specs: Vec<GaussianAnnotatorSpec>,
}

/// Five annotators at the heterogeneous (bias, precision) profile, each
/// answering every document.
pub fn reg_scenario(cfg: &SyntheticConfig, seed: u64) -> RegScenario {
    let response = Response::Target {
        eta: target_eta(),
        sigma2: TARGET_SIGMA2,
    };
    let data = generate_synthetic_corpus(cfg, &response, seed).expect("corpus");
    let specs = heterogeneous_gaussian_profile();
    let annotations = simulate_gaussian_annotators(&data.targets, &specs, Assignment::All, seed).expect("annotators");
    RegScenario { data, annotations, specs }
}

/// Maximizer of a unimodal `f` on [lo, hi] by golden-section search.
pub fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - g * (hi - lo);
    let mut b = lo + g * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    while hi - lo > 1e-10 * (1.0 + lo.abs() + hi.abs()) {
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + g * (hi - lo);
            fb = f(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - g * (hi - lo);
            fa = f(a);
        }
    }
    0.5 * (lo + hi)
}
