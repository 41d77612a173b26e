use ndarray::{Array2, ArrayView2};

use super::model::ClassDocState;
use crate::error::Result;
use crate::exec::{map_range, Execution};
use crate::numerics::{log_sum_exp, minimize, LbfgsConfig, ObjectiveEvaluation};
use crate::topics::mean_assignment;

/// One document's contribution to 𝓛_[η] and its gradient (C×K, row-major).
fn document_term(eta: &ArrayView2<'_, f64>, state: &ClassDocState) -> (f64, Vec<f64>) {
    let (c, k) = eta.dim();
    let phi = &state.phi;
    let n = phi.nrows() as f64;
    let exp_eta = eta.mapv(|e| (e / n).exp());
    let phi_bar = mean_assignment(phi);

    // u_{n,l} and log b_l.
    let mut u = Array2::zeros((phi.nrows(), c));
    let mut log_b = vec![0.0; c];
    for (row, mut out) in phi.rows().into_iter().zip(u.rows_mut()) {
        for l in 0..c {
            out[l] = row.iter().zip(exp_eta.row(l)).map(|(p, e)| p * e).sum::<f64>();
            log_b[l] += out[l].ln();
        }
    }
    let lse = log_sum_exp(&log_b);

    let mut value = -lse;
    let mut grad = vec![0.0; c * k];
    for l in 0..c {
        let lambda = state.lambda[l];
        let s = (log_b[l] - lse).exp();
        let g = &mut grad[l * k..(l + 1) * k];
        for i in 0..k {
            value += lambda * eta[[l, i]] * phi_bar[i];
            g[i] = lambda * phi_bar[i];
        }
        let scale: Vec<f64> = exp_eta.row(l).iter().map(|e| s * e / n).collect();
        for (row, ul) in phi.rows().into_iter().zip(u.column(l)) {
            let w = 1.0 / ul;
            for i in 0..k {
                g[i] -= w * row[i] * scale[i];
            }
        }
    }
    (value, grad)
}

/// 𝓛_[η] = Σ_d (Σ_l λ_l η_lᵀφ̄ − log Σ_l b_l) and its gradient, with
/// log b_l = Σₙ log φₙᵀ exp(η_l / N). Documents are reduced in order.
pub fn eta_objective_grad(eta: &Array2<f64>, states: &[ClassDocState], exec: Execution) -> ObjectiveEvaluation {
    let view = eta.view();
    let parts = map_range(exec, states.len(), |d| document_term(&view, &states[d]));
    let mut value = 0.0;
    let mut gradient = vec![0.0; eta.len()];
    for (v, g) in parts {
        value += v;
        for (a, b) in gradient.iter_mut().zip(g) {
            *a += b;
        }
    }
    ObjectiveEvaluation { value, gradient }
}

/// Maximizes 𝓛_[η] by L-BFGS on its negation, warm-started at `eta`.
pub fn update_eta(eta: &Array2<f64>, states: &[ClassDocState], lbfgs: &LbfgsConfig, exec: Execution) -> Result<Array2<f64>> {
    let dim = eta.raw_dim();
    let x0: Vec<f64> = eta.iter().copied().collect();
    let best = minimize(
        |x| {
            let e = Array2::from_shape_vec(dim, x.to_vec()).expect("shape");
            let ev = eta_objective_grad(&e, states, exec);
            ObjectiveEvaluation {
                value: -ev.value,
                gradient: ev.gradient.iter().map(|g| -g).collect(),
            }
        },
        &x0,
        lbfgs,
    )?;
    Ok(Array2::from_shape_vec(dim, best.x).expect("shape"))
}
