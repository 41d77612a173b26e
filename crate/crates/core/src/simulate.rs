//! Seeded generators for annotator answers and for synthetic corpora with
//! known topics and responses.

use ndarray::Array2;
use rand::distr::weighted::WeightedIndex;
use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_distr::{Distribution, Gamma, Normal};

use crate::corpus::{Annotation, Annotations, ClassAnnotations, Corpus, Document, RealAnnotations, Vocabulary};
use crate::error::{Error, Result};
use crate::numerics::softmax_in_place;
use crate::rng::stream;

/// Expected accuracies of the five heterogeneous classification annotators.
pub const PROFILE_ACCURACIES: [f64; 5] = [0.737, 0.468, 0.284, 0.278, 0.260];

/// (bias, precision) of the five heterogeneous regression annotators.
pub const PROFILE_BIAS_PRECISION: [(f64, f64); 5] = [(0.1, 10.0), (-0.3, 3.0), (-2.5, 10.0), (0.1, 0.5), (1.0, 0.25)];

/// An annotator answering through a row-stochastic confusion matrix:
/// `confusion[[c, l]]` is the probability of answering l when the truth is c.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ConfusionAnnotatorSpec {
    pub confusion: Vec<Vec<f64>>,
}

impl ConfusionAnnotatorSpec {
    pub fn new(confusion: Vec<Vec<f64>>) -> Result<Self> {
        let spec = Self { confusion };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let c = self.confusion.len();
        if c < 2 {
            return Err(Error::invalid("confusion matrix needs at least 2 classes"));
        }
        for (i, row) in self.confusion.iter().enumerate() {
            if row.len() != c {
                return Err(Error::invalid(format!("confusion row {i} has {} entries, expected {c}", row.len())));
            }
            if row.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
                return Err(Error::invalid(format!("confusion row {i} has a negative or non-finite entry")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-12 {
                return Err(Error::invalid(format!("confusion row {i} sums to {s}")));
            }
        }
        Ok(())
    }

    /// Diagonal `accuracy`, the rest of each row split evenly.
    pub fn from_accuracy(accuracy: f64, num_classes: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&accuracy) {
            return Err(Error::invalid(format!("accuracy {accuracy} outside [0, 1]")));
        }
        let off = (1.0 - accuracy) / (num_classes as f64 - 1.0);
        let confusion = (0..num_classes)
            .map(|c| {
                let mut row: Vec<f64> = (0..num_classes).map(|l| if l == c { accuracy } else { off }).collect();
                // Absorb rounding so the row sums to one.
                let s: f64 = row.iter().sum();
                row[c] += 1.0 - s;
                row
            })
            .collect();
        Self::new(confusion)
    }

    pub fn identity(num_classes: usize) -> Self {
        Self::from_accuracy(1.0, num_classes).expect("valid")
    }

    pub fn num_classes(&self) -> usize {
        self.confusion.len()
    }

    pub fn expected_accuracy(&self, class_freq: &[f64]) -> f64 {
        class_freq.iter().enumerate().map(|(c, f)| f * self.confusion[c][c]).sum()
    }
}

/// An annotator answering x + b + ε with ε ~ N(0, 1/p).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GaussianAnnotatorSpec {
    pub bias: f64,
    pub precision: f64,
}

impl GaussianAnnotatorSpec {
    pub fn new(bias: f64, precision: f64) -> Result<Self> {
        let s = Self { bias, precision };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.bias.is_finite() || !(self.precision > 0.0 && self.precision.is_finite()) {
            return Err(Error::invalid(format!(
                "invalid annotator (bias {}, precision {})",
                self.bias, self.precision
            )));
        }
        Ok(())
    }
}

pub fn heterogeneous_confusion_profile(num_classes: usize) -> Result<Vec<ConfusionAnnotatorSpec>> {
    PROFILE_ACCURACIES
        .iter()
        .map(|&a| ConfusionAnnotatorSpec::from_accuracy(a, num_classes))
        .collect()
}

pub fn heterogeneous_gaussian_profile() -> Vec<GaussianAnnotatorSpec> {
    PROFILE_BIAS_PRECISION
        .iter()
        .map(|&(bias, precision)| GaussianAnnotatorSpec { bias, precision })
        .collect()
}

/// Which annotators label which documents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Assignment {
    /// Every annotator labels every document.
    All,
    /// Each document gets exactly one annotator: documents are shuffled and
    /// dealt round-robin.
    Partition,
    /// Each document gets this many distinct annotators chosen uniformly.
    PerDocument(usize),
}

/// Annotators assigned to each document, in increasing order.
pub fn assign_annotators(num_docs: usize, num_annotators: usize, assignment: Assignment, seed: u64) -> Result<Vec<Vec<usize>>> {
    if num_annotators == 0 {
        return Err(Error::invalid("no annotators"));
    }
    let mut rng = stream(seed, "assignment");
    Ok(match assignment {
        Assignment::All => vec![(0..num_annotators).collect(); num_docs],
        Assignment::Partition => {
            let mut order: Vec<usize> = (0..num_docs).collect();
            order.shuffle(&mut rng);
            let mut out = vec![Vec::new(); num_docs];
            for (i, d) in order.into_iter().enumerate() {
                out[d].push(i % num_annotators);
            }
            out
        }
        Assignment::PerDocument(k) => {
            if k == 0 || k > num_annotators {
                return Err(Error::invalid(format!("cannot assign {k} of {num_annotators} annotators per document")));
            }
            (0..num_docs)
                .map(|_| {
                    let mut v = index::sample(&mut rng, num_annotators, k).into_vec();
                    v.sort_unstable();
                    v
                })
                .collect()
        }
    })
}

/// Draws yʳ ~ Mult(πʳ_{c,·}) for every assigned (document, annotator).
/// Each annotator draws from its own stream, in document order.
pub fn simulate_confusion_annotators(
    truth: &[usize],
    specs: &[ConfusionAnnotatorSpec],
    assignment: Assignment,
    seed: u64,
) -> Result<ClassAnnotations> {
    let c = specs.first().ok_or_else(|| Error::invalid("no annotators"))?.num_classes();
    for s in specs {
        s.validate()?;
        if s.num_classes() != c {
            return Err(Error::invalid("annotators disagree on the number of classes"));
        }
    }
    if let Some(&t) = truth.iter().find(|&&t| t >= c) {
        return Err(Error::invalid(format!("true label {t} out of range (C={c})")));
    }
    let plan = assign_annotators(truth.len(), specs.len(), assignment, seed)?;
    let rows: Vec<Vec<WeightedIndex<f64>>> = specs
        .iter()
        .map(|s| s.confusion.iter().map(|row| WeightedIndex::new(row).expect("validated row")).collect())
        .collect();
    let mut rngs: Vec<_> = (0..specs.len()).map(|r| stream(seed, &format!("annotator-{r}"))).collect();
    let mut records = Vec::new();
    for (d, who) in plan.iter().enumerate() {
        for &r in who {
            let value = rows[r][truth[d]].sample(&mut rngs[r]);
            records.push(Annotation { doc: d, annotator: r, value });
        }
    }
    ClassAnnotations::new(c, Annotations::new(truth.len(), specs.len(), records)?)
}

/// Draws yʳ ~ N(x + bʳ, 1/pʳ) for every assigned (document, annotator).
pub fn simulate_gaussian_annotators(
    truth: &[f64],
    specs: &[GaussianAnnotatorSpec],
    assignment: Assignment,
    seed: u64,
) -> Result<RealAnnotations> {
    if specs.is_empty() {
        return Err(Error::invalid("no annotators"));
    }
    for s in specs {
        s.validate()?;
    }
    let plan = assign_annotators(truth.len(), specs.len(), assignment, seed)?;
    let noise: Vec<Normal<f64>> = specs
        .iter()
        .map(|s| Normal::new(0.0, s.precision.recip().sqrt()).expect("validated"))
        .collect();
    let mut rngs: Vec<_> = (0..specs.len()).map(|r| stream(seed, &format!("annotator-{r}"))).collect();
    let mut records = Vec::new();
    for (d, who) in plan.iter().enumerate() {
        for &r in who {
            let value = truth[d] + specs[r].bias + noise[r].sample(&mut rngs[r]);
            records.push(Annotation { doc: d, annotator: r, value });
        }
    }
    Annotations::new(truth.len(), specs.len(), records)
}

/// Shape of a synthetic corpus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticConfig {
    pub num_topics: usize,
    pub vocab_size: usize,
    pub num_docs: usize,
    pub doc_length: usize,
    /// Dirichlet concentration of each document's θ.
    pub alpha: f64,
    /// Dirichlet concentration of each topic's β.
    pub topic_concentration: f64,
}

/// How the response of each document is generated from its z̄.
#[derive(Debug, Clone, PartialEq)]
pub enum Response {
    /// c ~ softmax(η z̄), η is C×K.
    Classes { eta: Array2<f64> },
    /// x ~ N(ηᵀz̄, σ²).
    Target { eta: Vec<f64>, sigma2: f64 },
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub corpus: Corpus,
    /// K×V generating topics.
    pub beta: Array2<f64>,
    /// Empirical topic proportions z̄ of each document.
    pub zbar: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub targets: Vec<f64>,
}

fn sample_dirichlet<R: Rng>(concentration: f64, dim: usize, rng: &mut R) -> Vec<f64> {
    let gamma = Gamma::new(concentration, 1.0).expect("positive concentration");
    loop {
        let mut v: Vec<f64> = (0..dim).map(|_| gamma.sample(rng)).collect();
        let s: f64 = v.iter().sum();
        if s > 0.0 && s.is_finite() {
            v.iter_mut().for_each(|x| *x /= s);
            return v;
        }
    }
}

/// Samples topics, documents and responses from the generative process.
pub fn generate_synthetic_corpus(cfg: &SyntheticConfig, response: &Response, seed: u64) -> Result<SyntheticCorpus> {
    let k = cfg.num_topics;
    if k == 0 || cfg.vocab_size == 0 || cfg.num_docs == 0 || cfg.doc_length == 0 {
        return Err(Error::invalid("synthetic corpus dimensions must be positive"));
    }
    if !(cfg.alpha > 0.0 && cfg.topic_concentration > 0.0) {
        return Err(Error::invalid("Dirichlet concentrations must be positive"));
    }
    match response {
        Response::Classes { eta } if eta.ncols() != k || eta.nrows() < 2 => {
            return Err(Error::invalid("class η must be C×K with C ≥ 2"))
        }
        Response::Target { eta, sigma2 } if eta.len() != k || !(*sigma2 > 0.0) => {
            return Err(Error::invalid("target η must have K entries and σ² > 0"))
        }
        _ => {}
    }

    let mut topic_rng = stream(seed, "synthetic-topics");
    let mut beta = Array2::zeros((k, cfg.vocab_size));
    for mut row in beta.rows_mut() {
        let b = sample_dirichlet(cfg.topic_concentration, cfg.vocab_size, &mut topic_rng);
        row.assign(&ndarray::ArrayView1::from(&b));
    }
    let word_dists: Vec<WeightedIndex<f64>> = beta
        .rows()
        .into_iter()
        .map(|r| WeightedIndex::new(r.iter().copied()).map_err(|e| Error::numerical(format!("topic distribution: {e}"))))
        .collect::<Result<_>>()?;

    let mut doc_rng = stream(seed, "synthetic-docs");
    let mut docs = Vec::with_capacity(cfg.num_docs);
    let mut zbar = Vec::with_capacity(cfg.num_docs);
    for _ in 0..cfg.num_docs {
        let theta = sample_dirichlet(cfg.alpha, k, &mut doc_rng);
        let topic_dist = WeightedIndex::new(&theta).map_err(|e| Error::numerical(format!("θ: {e}")))?;
        let mut counts = vec![0.0; k];
        let mut tokens = Vec::with_capacity(cfg.doc_length);
        for _ in 0..cfg.doc_length {
            let z = topic_dist.sample(&mut doc_rng);
            counts[z] += 1.0;
            tokens.push(word_dists[z].sample(&mut doc_rng) as u32);
        }
        docs.push(Document::from_tokens(&tokens)?);
        zbar.push(counts.iter().map(|c| c / cfg.doc_length as f64).collect::<Vec<f64>>());
    }
    let corpus = Corpus::new(Vocabulary::synthetic(cfg.vocab_size), docs)?;

    let mut resp_rng = stream(seed, "synthetic-response");
    let (mut labels, mut targets) = (Vec::new(), Vec::new());
    match response {
        Response::Classes { eta } => {
            for z in &zbar {
                let mut logits: Vec<f64> = eta.rows().into_iter().map(|r| r.iter().zip(z).map(|(e, p)| e * p).sum()).collect();
                softmax_in_place(&mut logits);
                labels.push(WeightedIndex::new(&logits).expect("softmax").sample(&mut resp_rng));
            }
        }
        Response::Target { eta, sigma2 } => {
            let noise = Normal::new(0.0, sigma2.sqrt()).expect("positive variance");
            for z in &zbar {
                let mean: f64 = eta.iter().zip(z).map(|(e, p)| e * p).sum();
                targets.push(mean + noise.sample(&mut resp_rng));
            }
        }
    }
    Ok(SyntheticCorpus {
        corpus,
        beta,
        zbar,
        labels,
        targets,
    })
}
