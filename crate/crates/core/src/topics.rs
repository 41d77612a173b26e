//! Pieces shared by both supervised models: the LDA part of the
//! variational posterior (γ, φ, ζ), its ELBO terms, and held-out inference.
//!
//! φ is stored with one row per token occurrence, in the order produced by
//! [`Document::tokens`].

use ndarray::{Array2, ArrayView1};
use rand::Rng;

use crate::corpus::{Corpus, Document};
use crate::error::{Error, Result};
use crate::fit::InnerConfig;
use crate::numerics::{dirichlet_elbo_term, dirichlet_expected_log, digamma, softmax_in_place, PROB_FLOOR};

/// E[log β] for each topic row of ζ.
pub fn expected_log_beta(zeta: &Array2<f64>) -> Array2<f64> {
    let mut out = Array2::zeros(zeta.raw_dim());
    for (k, row) in zeta.rows().into_iter().enumerate() {
        let e = dirichlet_expected_log(row.as_slice().expect("standard layout"));
        out.row_mut(k).assign(&ArrayView1::from(&e));
    }
    out
}

/// γᵢ = α + Σₙ φₙ,ᵢ.
pub fn update_gamma(phi: &Array2<f64>, alpha: f64) -> Vec<f64> {
    let mut gamma = vec![alpha; phi.ncols()];
    for row in phi.rows() {
        for (g, &p) in gamma.iter_mut().zip(row) {
            *g += p;
        }
    }
    gamma
}

/// φ̄ = (1/N) Σₙ φₙ.
pub fn mean_assignment(phi: &Array2<f64>) -> Vec<f64> {
    let mut bar = vec![0.0; phi.ncols()];
    for row in phi.rows() {
        for (b, &p) in bar.iter_mut().zip(row) {
            *b += p;
        }
    }
    let n = phi.nrows() as f64;
    bar.iter_mut().for_each(|b| *b /= n);
    bar
}

/// Adds Σₙ wₙ,ⱼ φₙ,ᵢ of one document into `counts` (K×V).
pub fn add_topic_counts(counts: &mut Array2<f64>, doc: &Document, phi: &Array2<f64>) {
    for (row, term) in phi.rows().into_iter().zip(doc.tokens()) {
        for (k, &p) in row.iter().enumerate() {
            counts[[k, term]] += p;
        }
    }
}

/// Topic-word sufficient statistics of the listed documents, summed in the
/// order given.
pub fn topic_counts<'a>(
    corpus: &Corpus,
    num_topics: usize,
    docs: impl IntoIterator<Item = (usize, &'a Array2<f64>)>,
) -> Array2<f64> {
    let mut counts = Array2::zeros((num_topics, corpus.vocab_size()));
    for (d, phi) in docs {
        add_topic_counts(&mut counts, &corpus.documents()[d], phi);
    }
    counts
}

/// ζ = τ + counts.
pub fn zeta_from_counts(counts: &Array2<f64>, tau: f64) -> Array2<f64> {
    counts.mapv(|c| tau + c)
}

/// Σ_k [E log p(β_k | τ) − E log q(β_k | ζ_k)].
pub fn topics_elbo(zeta: &Array2<f64>, elog_beta: &Array2<f64>, tau: f64) -> f64 {
    zeta.rows()
        .into_iter()
        .zip(elog_beta.rows())
        .map(|(z, e)| dirichlet_elbo_term(tau, z.as_slice().unwrap(), e.as_slice().unwrap()))
        .sum()
}

/// LDA part of one document's ELBO: the θ and z terms, the word likelihood
/// under E[log β], and the entropies of q(θ) and q(z).
pub fn doc_lda_elbo(doc: &Document, phi: &Array2<f64>, gamma: &[f64], elog_beta: &Array2<f64>, alpha: f64) -> f64 {
    let elog_theta = dirichlet_expected_log(gamma);
    let mut value = dirichlet_elbo_term(alpha, gamma, &elog_theta);
    for (row, term) in phi.rows().into_iter().zip(doc.tokens()) {
        for (i, &p) in row.iter().enumerate() {
            if p > 0.0 {
                value += p * (elog_theta[i] + elog_beta[[i, term]] - p.max(PROB_FLOOR).ln());
            }
        }
    }
    value
}

/// Uniform φ with multiplicative jitter (1 + 0.01u), rows renormalized.
pub fn jittered_phi<R: Rng>(num_tokens: usize, num_topics: usize, rng: &mut R) -> Array2<f64> {
    let mut phi = Array2::from_shape_fn((num_tokens, num_topics), |_| 1.0 + 0.01 * rng.random::<f64>());
    for mut row in phi.rows_mut() {
        let s = row.sum();
        row.mapv_inplace(|p| p / s);
    }
    phi
}

/// ζ = τ + u·s with u ~ U[0,1) and s = max(1, total tokens / (K·V)).
pub fn random_zeta<R: Rng>(corpus: &Corpus, num_topics: usize, tau: f64, rng: &mut R) -> Array2<f64> {
    let scale = (corpus.total_tokens() as f64 / (num_topics * corpus.vocab_size()) as f64).max(1.0);
    Array2::from_shape_fn((num_topics, corpus.vocab_size()), |_| tau + scale * rng.random::<f64>())
}

pub(crate) fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Normalizes `exponent` into a probability row, or reports where it blew up.
pub(crate) fn normalize_row(exponent: &mut [f64], what: impl FnOnce() -> String) -> Result<()> {
    if exponent.iter().any(|e| !e.is_finite()) {
        return Err(Error::numerical(format!("non-finite φ exponent at {}", what())));
    }
    softmax_in_place(exponent);
    Ok(())
}

/// Unsupervised posterior of a document given the topics: alternates
/// γ = α + Σφ and φₙ,ᵢ ∝ exp(Ψ(γᵢ) + E[log β_{i,wₙ}]) from uniform φ.
pub fn infer_unsupervised(doc: &Document, elog_beta: &Array2<f64>, alpha: f64, inner: &InnerConfig) -> Result<(Vec<f64>, Array2<f64>)> {
    let k = elog_beta.nrows();
    let phi = Array2::from_elem((doc.len(), k), 1.0 / k as f64);
    let gamma = update_gamma(&phi, alpha);
    infer_unsupervised_from(doc, elog_beta, alpha, inner, gamma, phi)
}

pub(crate) fn infer_unsupervised_from(
    doc: &Document,
    elog_beta: &Array2<f64>,
    alpha: f64,
    inner: &InnerConfig,
    mut gamma: Vec<f64>,
    mut phi: Array2<f64>,
) -> Result<(Vec<f64>, Array2<f64>)> {
    let k = elog_beta.nrows();
    let mut exponent = vec![0.0; k];
    for _ in 0..inner.max_iter {
        let dig: Vec<f64> = gamma.iter().map(|&g| digamma(g)).collect();
        let mut change: f64 = 0.0;
        for (n, term) in doc.tokens().enumerate() {
            for i in 0..k {
                exponent[i] = dig[i] + elog_beta[[i, term]];
            }
            normalize_row(&mut exponent, || format!("token {n} (term {term})"))?;
            let mut row = phi.row_mut(n);
            for (p, &e) in row.iter_mut().zip(&exponent) {
                change = change.max((*p - e).abs());
                *p = e;
            }
        }
        let new_gamma = update_gamma(&phi, alpha);
        change = change.max(max_abs_diff(&gamma, &new_gamma));
        gamma = new_gamma;
        if change < inner.tol {
            break;
        }
    }
    Ok((gamma, phi))
}
