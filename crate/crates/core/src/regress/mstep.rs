use nalgebra::{DMatrix, DVector};
use ndarray::Array2;

use super::model::RegDocState;
use crate::corpus::RealAnnotations;
use crate::error::{Error, Result};
use crate::exec::{map_range, Execution};
use crate::topics::mean_assignment;

pub const MIN_PRECISION: f64 = 1e-6;
pub const MAX_PRECISION: f64 = 1e6;

/// E_q[z̄ z̄ᵀ] = (Σₙ Σ_{j≠n} φₙφⱼᵀ + Σₙ diag φₙ) / N².
pub fn expected_outer(phi: &Array2<f64>) -> Array2<f64> {
    let k = phi.ncols();
    let n = phi.nrows() as f64;
    let sum = phi.sum_axis(ndarray::Axis(0));
    let mut out = Array2::zeros((k, k));
    for i in 0..k {
        for j in 0..k {
            out[[i, j]] = sum[i] * sum[j];
        }
    }
    for row in phi.rows() {
        for i in 0..k {
            out[[i, i]] += row[i];
            for j in 0..k {
                out[[i, j]] -= row[i] * row[j];
            }
        }
    }
    out / (n * n)
}

/// η = (Σ_d E[z̄z̄ᵀ])⁻¹ Σ_d φ̄ m, by Cholesky. If the system is not
/// numerically positive definite a ridge of 1e-8·trace/K is added.
pub fn solve_eta(states: &[RegDocState], exec: Execution) -> Result<Vec<f64>> {
    let k = states
        .first()
        .map(|s| s.phi.ncols())
        .ok_or_else(|| Error::invalid("no documents"))?;
    let parts = map_range(exec, states.len(), |d| {
        let s = &states[d];
        let rhs: Vec<f64> = mean_assignment(&s.phi).iter().map(|p| p * s.m).collect();
        (expected_outer(&s.phi), rhs)
    });
    let mut a = Array2::<f64>::zeros((k, k));
    let mut b = vec![0.0; k];
    for (outer, rhs) in parts {
        a += &outer;
        for (x, y) in b.iter_mut().zip(rhs) {
            *x += y;
        }
    }
    let a = DMatrix::from_fn(k, k, |i, j| 0.5 * (a[[i, j]] + a[[j, i]]));
    let b = DVector::from_vec(b);
    if let Some(chol) = a.clone().cholesky() {
        let x = chol.solve(&b);
        if x.iter().all(|v| v.is_finite()) {
            return Ok(x.iter().copied().collect());
        }
    }
    let ridge = 1e-8 * a.trace() / k as f64;
    let mut regular = a;
    for i in 0..k {
        regular[(i, i)] += ridge.max(f64::MIN_POSITIVE);
    }
    let chol = regular
        .cholesky()
        .ok_or_else(|| Error::numerical("η system is singular even with ridge"))?;
    Ok(chol.solve(&b).iter().copied().collect())
}

/// bʳ = mean over D_r of (yᵈʳ − mᵈ).
pub fn estimate_bias(answers: &[(usize, f64)], m: impl Fn(usize) -> f64) -> Result<f64> {
    if answers.is_empty() {
        return Err(Error::invalid("annotator without answers"));
    }
    let total: f64 = answers.iter().map(|&(d, y)| y - m(d)).sum();
    Ok(total / answers.len() as f64)
}

/// pʳ = 1 / mean over D_r of (vᵈ + (yᵈʳ − mᵈ − bʳ)²), clamped to
/// [1e-6, 1e6].
pub fn estimate_precision(answers: &[(usize, f64)], m: impl Fn(usize) -> f64, v: impl Fn(usize) -> f64, bias: f64) -> Result<f64> {
    if answers.is_empty() {
        return Err(Error::invalid("annotator without answers"));
    }
    let total: f64 = answers
        .iter()
        .map(|&(d, y)| {
            let r = y - m(d) - bias;
            v(d) + r * r
        })
        .sum();
    let p = answers.len() as f64 / total;
    Ok(if p.is_nan() { MAX_PRECISION } else { p.clamp(MIN_PRECISION, MAX_PRECISION) })
}

/// Bias and precision of every annotator. Annotators with no answers keep
/// their current values; with a single answer only the bias moves.
pub fn update_annotators(ann: &RealAnnotations, states: &[RegDocState], bias: &mut [f64], precision: &mut [f64]) -> Result<()> {
    for r in 0..ann.num_annotators() {
        let answers = ann.annotator(r);
        if answers.is_empty() {
            continue;
        }
        bias[r] = estimate_bias(answers, |d| states[d].m)?;
        if answers.len() >= 2 {
            precision[r] = estimate_precision(answers, |d| states[d].m, |d| states[d].v, bias[r])?;
        }
    }
    Ok(())
}
