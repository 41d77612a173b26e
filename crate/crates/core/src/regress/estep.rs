use ndarray::Array2;

use super::model::{RegDocState, RegGlobals, UpdateForm};
use crate::corpus::Document;
use crate::error::Result;
use crate::fit::InnerConfig;
use crate::numerics::digamma;
use crate::topics::{max_abs_diff, mean_assignment, normalize_row, update_gamma};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// mᵈ = (σ⁻² ηᵀφ̄ + Σ_{r∈R_d} pʳ(yʳ − bʳ)) / (σ⁻² + Σ pʳ).
///
/// Under [`UpdateForm::Printed`] the denominator sums pʳ over every
/// annotator instead of only those who answered.
pub fn update_m(
    phi_bar: &[f64],
    eta: &[f64],
    sigma2: f64,
    answers: &[(usize, f64)],
    bias: &[f64],
    precision: &[f64],
    form: UpdateForm,
) -> f64 {
    let prior = 1.0 / sigma2;
    let mut num = prior * dot(eta, phi_bar);
    let mut den = prior;
    for &(r, y) in answers {
        num += precision[r] * (y - bias[r]);
    }
    match form {
        UpdateForm::Derived => den += answers.iter().map(|&(r, _)| precision[r]).sum::<f64>(),
        UpdateForm::Printed => den += precision.iter().sum::<f64>(),
    }
    num / den
}

/// vᵈ = (σ⁻² + Σ_{r∈R_d} pʳ)⁻¹, or σ² + Σ 1/pʳ under [`UpdateForm::Printed`].
pub fn update_v(sigma2: f64, precisions: impl IntoIterator<Item = f64>, form: UpdateForm) -> f64 {
    match form {
        UpdateForm::Derived => 1.0 / (1.0 / sigma2 + precisions.into_iter().sum::<f64>()),
        UpdateForm::Printed => sigma2 + precisions.into_iter().map(|p| 1.0 / p).sum::<f64>(),
    }
}

/// Per-sweep constants of the φ update.
pub struct RegPhiContext<'a> {
    pub digamma_gamma: &'a [f64],
    pub elog_beta: &'a Array2<f64>,
    pub eta: &'a [f64],
    pub m: f64,
    pub sigma2: f64,
    pub num_tokens: f64,
}

/// φₙ,ᵢ ∝ exp(Ψ(γᵢ) + E[log β_{i,w}] + (m/(Nσ²))ηᵢ − (2(ηᵀφ₋ₙ)ηᵢ + ηᵢ²)/(2N²σ²)).
///
/// `phi_sum` holds Σⱼ φⱼ over all words and is kept current. Returns the
/// largest change in the row.
pub fn update_phi_word_r(
    n: usize,
    term: usize,
    phi: &mut Array2<f64>,
    phi_sum: &mut [f64],
    ctx: &RegPhiContext<'_>,
    exponent: &mut [f64],
) -> Result<f64> {
    let row = phi.row(n);
    let rest: f64 = ctx
        .eta
        .iter()
        .zip(phi_sum.iter())
        .zip(row.iter())
        .map(|((e, s), p)| e * (s - p))
        .sum();
    let lin = ctx.m / (ctx.num_tokens * ctx.sigma2);
    let quad = 2.0 * ctx.num_tokens * ctx.num_tokens * ctx.sigma2;
    for (i, e) in exponent.iter_mut().enumerate() {
        let eta = ctx.eta[i];
        *e = ctx.digamma_gamma[i] + ctx.elog_beta[[i, term]] + lin * eta - (2.0 * rest * eta + eta * eta) / quad;
    }
    normalize_row(exponent, || format!("word {n} (term {term})"))?;
    let mut change: f64 = 0.0;
    for ((p, s), &e) in phi.row_mut(n).iter_mut().zip(phi_sum.iter_mut()).zip(exponent.iter()) {
        change = change.max((*p - e).abs());
        *s += e - *p;
        *p = e;
    }
    Ok(change)
}

/// Coordinate ascent over φ, γ, m and v for one document.
pub fn estep_document_r(
    doc: &Document,
    answers: &[(usize, f64)],
    globals: &RegGlobals,
    state: &mut RegDocState,
    inner: &InnerConfig,
) -> Result<usize> {
    let k = globals.num_topics();
    let mut exponent = vec![0.0; k];
    let terms: Vec<usize> = doc.tokens().collect();
    let v = update_v(globals.sigma2, answers.iter().map(|&(r, _)| globals.precision[r]), globals.form);

    for sweep in 1..=inner.max_iter {
        let digamma_gamma: Vec<f64> = state.gamma.iter().map(|&g| digamma(g)).collect();
        let mut phi_sum = vec![0.0; k];
        for row in state.phi.rows() {
            for (s, p) in phi_sum.iter_mut().zip(row) {
                *s += p;
            }
        }
        let ctx = RegPhiContext {
            digamma_gamma: &digamma_gamma,
            elog_beta: &globals.elog_beta,
            eta: &globals.eta,
            m: state.m,
            sigma2: globals.sigma2,
            num_tokens: doc.len() as f64,
        };
        let mut change: f64 = 0.0;
        for (n, &term) in terms.iter().enumerate() {
            change = change.max(update_phi_word_r(n, term, &mut state.phi, &mut phi_sum, &ctx, &mut exponent)?);
        }
        let gamma = update_gamma(&state.phi, globals.alpha);
        change = change.max(max_abs_diff(&gamma, &state.gamma));
        state.gamma = gamma;
        let m = update_m(
            &mean_assignment(&state.phi),
            &globals.eta,
            globals.sigma2,
            answers,
            &globals.bias,
            &globals.precision,
            globals.form,
        );
        change = change.max((m - state.m).abs()).max((v - state.v).abs());
        state.m = m;
        state.v = v;
        if change < inner.tol {
            return Ok(sweep);
        }
    }
    Ok(inner.max_iter)
}
