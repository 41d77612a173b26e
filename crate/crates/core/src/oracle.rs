//! Exact document evidence by enumerating every topic assignment, for
//! checking the variational bounds on tiny instances.
//!
//! θ is integrated out analytically (Dirichlet-multinomial), the global
//! parameters are point values and x is integrated in closed form for the
//! regression model.

use ndarray::{Array2, Array3};

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::numerics::{argmax, log_gamma, log_sum_exp};

/// Largest number of (assignment, class) terms an enumeration may visit.
pub const ENUMERATION_LIMIT: f64 = 1e6;

/// Streaming log Σ exp.
struct LogSum {
    max: f64,
    sum: f64,
}

impl LogSum {
    fn new() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }

    fn add(&mut self, v: f64) {
        if v == f64::NEG_INFINITY {
            return;
        }
        if v > self.max {
            self.sum = self.sum * (self.max - v).exp() + 1.0;
            self.max = v;
        } else {
            self.sum += (v - self.max).exp();
        }
    }

    fn value(&self) -> f64 {
        if self.sum == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }
}

/// Calls `visit(z̄, log p(z | α) + Σₙ log β_{zₙ,wₙ})` for every z ∈ K^N.
fn enumerate(doc: &Document, log_beta: &Array2<f64>, alpha: f64, per_z: f64, mut visit: impl FnMut(&[f64], f64)) -> Result<()> {
    let k = log_beta.nrows();
    let terms: Vec<usize> = doc.tokens().collect();
    let n = terms.len();
    let size = (k as f64).powi(n as i32) * per_z;
    if size > ENUMERATION_LIMIT {
        return Err(Error::Budget {
            size,
            limit: ENUMERATION_LIMIT,
        });
    }
    if let Some(&t) = terms.iter().find(|&&t| t >= log_beta.ncols()) {
        return Err(Error::invalid(format!("term {t} outside the topic matrix")));
    }
    let kf = k as f64;
    let base = log_gamma(kf * alpha) - log_gamma(kf * alpha + n as f64) - kf * log_gamma(alpha);
    let mut z = vec![0usize; n];
    let mut counts = vec![0.0; k];
    let mut zbar = vec![0.0; k];
    loop {
        counts.iter_mut().for_each(|c| *c = 0.0);
        let mut words = 0.0;
        for (&zi, &t) in z.iter().zip(&terms) {
            counts[zi] += 1.0;
            words += log_beta[[zi, t]];
        }
        let prior: f64 = base + counts.iter().map(|&c| log_gamma(alpha + c)).sum::<f64>();
        for (b, c) in zbar.iter_mut().zip(&counts) {
            *b = c / n as f64;
        }
        visit(&zbar, prior + words);

        // Odometer increment.
        let mut pos = 0;
        loop {
            if pos == n {
                return Ok(());
            }
            z[pos] += 1;
            if z[pos] < k {
                break;
            }
            z[pos] = 0;
            pos += 1;
        }
    }
}

fn class_log_softmax(eta: &Array2<f64>, zbar: &[f64]) -> Vec<f64> {
    let logits: Vec<f64> = eta.rows().into_iter().map(|r| r.iter().zip(zbar).map(|(e, z)| e * z).sum()).collect();
    let lse = log_sum_exp(&logits);
    logits.iter().map(|l| l - lse).collect()
}

/// log p(w, y | β, π, η, α) for one classification document.
pub fn exact_log_evidence_class(
    doc: &Document,
    labels: &[(usize, usize)],
    log_beta: &Array2<f64>,
    log_pi: &Array3<f64>,
    eta: &Array2<f64>,
    alpha: f64,
) -> Result<f64> {
    let c = eta.nrows();
    let annot: Vec<f64> = (0..c).map(|cls| labels.iter().map(|&(r, y)| log_pi[[r, cls, y]]).sum()).collect();
    let mut total = LogSum::new();
    let mut per_class = vec![0.0; c];
    enumerate(doc, log_beta, alpha, c as f64, |zbar, base| {
        let ls = class_log_softmax(eta, zbar);
        for cls in 0..c {
            per_class[cls] = ls[cls] + annot[cls];
        }
        total.add(base + log_sum_exp(&per_class));
    })?;
    Ok(total.value())
}

/// log p(w, y | β, η, σ², b, p, α) for one regression document, with the
/// latent target integrated analytically.
#[allow(clippy::too_many_arguments)]
pub fn exact_log_evidence_reg(
    doc: &Document,
    answers: &[(usize, f64)],
    log_beta: &Array2<f64>,
    eta: &[f64],
    sigma2: f64,
    bias: &[f64],
    precision: &[f64],
    alpha: f64,
) -> Result<f64> {
    use std::f64::consts::PI;
    let total_p: f64 = 1.0 / sigma2 + answers.iter().map(|&(r, _)| precision[r]).sum::<f64>();
    let mut fixed = 0.5 * (1.0 / (2.0 * PI * sigma2)).ln() + 0.5 * (2.0 * PI / total_p).ln();
    let mut lin = 0.0;
    let mut sq = 0.0;
    for &(r, y) in answers {
        let p = precision[r];
        let t = y - bias[r];
        fixed += 0.5 * (p / (2.0 * PI)).ln();
        lin += p * t;
        sq += p * t * t;
    }
    let mut total = LogSum::new();
    enumerate(doc, log_beta, alpha, 1.0, |zbar, base| {
        let mu: f64 = eta.iter().zip(zbar).map(|(e, z)| e * z).sum();
        let b = mu / sigma2 + lin;
        let gauss = fixed - 0.5 * (mu * mu / sigma2 + sq) + 0.5 * b * b / total_p;
        total.add(base + gauss);
    })?;
    Ok(total.value())
}

/// argmax_c p(c | w, β, η, α) by enumeration; ties go to the lowest class.
pub fn exact_map_class(doc: &Document, log_beta: &Array2<f64>, eta: &Array2<f64>, alpha: f64) -> Result<usize> {
    let c = eta.nrows();
    let mut per_class: Vec<LogSum> = (0..c).map(|_| LogSum::new()).collect();
    enumerate(doc, log_beta, alpha, c as f64, |zbar, base| {
        for (acc, l) in per_class.iter_mut().zip(class_log_softmax(eta, zbar)) {
            acc.add(base + l);
        }
    })?;
    let scores: Vec<f64> = per_class.iter().map(LogSum::value).collect();
    Ok(argmax(&scores))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::array;

    #[test]
    fn lda_evidence_without_labels_matches_closed_form() {
        // K = 1: p(w) = Πₙ βᵥ and the prior is exactly 1.
        let doc = Document::from_tokens(&[0, 1, 1]).unwrap();
        let log_beta = array![[0.2f64.ln(), 0.8f64.ln()]];
        let eta = array![[0.0], [0.0]];
        let v = exact_log_evidence_class(&doc, &[], &log_beta, &Array3::zeros((0, 2, 2)), &eta, 0.5).unwrap();
        assert_relative_eq!(v, 0.2f64.ln() + 2.0 * 0.8f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn two_topic_sum_matches_hand_enumeration() {
        let doc = Document::from_tokens(&[0, 1]).unwrap();
        let beta = array![[0.7, 0.3], [0.1, 0.9]];
        let alpha = 0.5;
        let v = exact_log_evidence_class(&doc, &[], &beta.mapv(f64::ln), &Array3::zeros((0, 2, 2)), &Array2::zeros((2, 2)), alpha).unwrap();
        // Polya: same-topic pair 0.5·1.5/(1·2) = 0.375, split pair 0.25/2 = 0.125.
        let p: f64 = 0.375 * 0.7 * 0.3 + 0.125 * 0.7 * 0.9 + 0.125 * 0.1 * 0.3 + 0.375 * 0.1 * 0.9;
        assert_relative_eq!(v, p.ln(), epsilon = 1e-12);
    }

    #[test]
    fn single_annotator_single_topic_is_gaussian_convolution() {
        let doc = Document::from_tokens(&[1]).unwrap();
        let log_beta = array![[0.25f64.ln(), 0.75f64.ln()]];
        let (eta, b, p, s2, y) = (1.3, -0.4, 2.0, 0.7, 0.5);
        let v = exact_log_evidence_reg(&doc, &[(0, y)], &log_beta, &[eta], s2, &[b], &[p], 1.0).unwrap();
        let var: f64 = s2 + 1.0 / p;
        let gauss = -0.5 * (2.0 * std::f64::consts::PI * var).ln() - (y - eta - b) * (y - eta - b) / (2.0 * var);
        assert_relative_eq!(v, gauss + 0.75f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn word_order_does_not_matter_and_budget_enforced() {
        let log_beta = array![[0.5f64.ln(), 0.3f64.ln(), 0.2f64.ln()], [0.1f64.ln(), 0.2f64.ln(), 0.7f64.ln()]];
        let eta = array![[1.0, -1.0], [0.0, 0.5]];
        let pi = Array3::from_shape_fn((1, 2, 2), |(_, c, l)| if c == l { 0.8f64.ln() } else { 0.2f64.ln() });
        let a = Document::from_tokens(&[0, 2, 2, 1]).unwrap();
        let b = Document::from_tokens(&[2, 1, 0, 2]).unwrap();
        let va = exact_log_evidence_class(&a, &[(0, 1)], &log_beta, &pi, &eta, 0.3).unwrap();
        let vb = exact_log_evidence_class(&b, &[(0, 1)], &log_beta, &pi, &eta, 0.3).unwrap();
        assert_relative_eq!(va, vb, epsilon = 1e-12);
        let long = Document::from_tokens(&[0; 20]).unwrap();
        assert!(matches!(exact_map_class(&long, &log_beta, &eta, 0.3), Err(Error::Budget { .. })));
    }

    #[test]
    fn symmetric_eta_ties_to_class_zero() {
        let doc = Document::from_tokens(&[0, 1]).unwrap();
        let log_beta = Array2::from_elem((2, 2), 0.5f64.ln());
        assert_eq!(exact_map_class(&doc, &log_beta, &Array2::zeros((3, 2)), 1.0).unwrap(), 0);
    }
}
