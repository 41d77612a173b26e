use ndarray::{Array2, Array3};

use super::model::{ClassDocState, ClassGlobals};
use crate::corpus::Document;
use crate::error::Result;
use crate::fit::InnerConfig;
use crate::numerics::{digamma, softmax_in_place};
use crate::topics::{max_abs_diff, mean_assignment, normalize_row, update_gamma};

/// Below this a per-token factor triggers a full recomputation of the
/// running products instead of an incremental divide-out.
const FACTOR_FLOOR: f64 = 1e-250;
const SAFE_LOW: f64 = 1e-150;
const SAFE_HIGH: f64 = 1e150;

/// λ_l ∝ exp(η_lᵀφ̄ + Σ_{r∈R_d} E[log π^r_{l,y_r}]), normalized in the log domain.
pub fn update_lambda(phi_bar: &[f64], eta: &Array2<f64>, labels: &[(usize, usize)], elog_pi: &Array3<f64>) -> Vec<f64> {
    let mut logits: Vec<f64> = eta
        .rows()
        .into_iter()
        .map(|row| row.iter().zip(phi_bar).map(|(e, p)| e * p).sum())
        .collect();
    for &(r, y) in labels {
        for (l, v) in logits.iter_mut().enumerate() {
            *v += elog_pi[[r, l, y]];
        }
    }
    softmax_in_place(&mut logits);
    logits
}

/// Running state of the Jensen bound on E[log Σ_l exp(η_lᵀz̄)] for one
/// document.
///
/// With u_{n,l} = φₙᵀ exp(η_l / N) and b_l = Πₙ u_{n,l}, the products are
/// kept as `scaled[l]` = b_l · exp(−`shift`) so that replacing a word's row
/// is a multiply and a divide. The per-word auxiliary vector a and the
/// tangent point ε = aᵀφₙ are derived from these on demand.
#[derive(Debug, Clone)]
pub struct SoftmaxBoundWorkspace {
    classes: usize,
    topics: usize,
    /// C×K row-major, exp(η_{l,i} / N).
    exp_eta: Vec<f64>,
    /// N×C row-major, u_{n,l}.
    factors: Vec<f64>,
    scaled: Vec<f64>,
    shift: f64,
    row: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl SoftmaxBoundWorkspace {
    pub fn new(eta: &Array2<f64>, phi: &Array2<f64>) -> Self {
        let (classes, topics) = eta.dim();
        let n = phi.nrows() as f64;
        let mut ws = Self {
            classes,
            topics,
            exp_eta: eta.iter().map(|e| (e / n).exp()).collect(),
            factors: vec![0.0; phi.nrows() * classes],
            scaled: vec![0.0; classes],
            shift: 0.0,
            row: vec![0.0; topics],
        };
        ws.refresh(phi);
        ws
    }

    fn exp_eta_row(&self, l: usize) -> &[f64] {
        &self.exp_eta[l * self.topics..(l + 1) * self.topics]
    }

    /// Recompute every factor and product from `phi`.
    pub fn refresh(&mut self, phi: &Array2<f64>) {
        let c = self.classes;
        // Running products, folded into the logs whenever they leave a
        // safe range.
        let mut log_b = vec![0.0; c];
        let mut prod = vec![1.0; c];
        for (n, row) in phi.rows().into_iter().enumerate() {
            self.row.iter_mut().zip(row).for_each(|(d, &p)| *d = p);
            for l in 0..c {
                let u = dot(&self.row, self.exp_eta_row(l));
                self.factors[n * c + l] = u;
                prod[l] *= u;
                if !(SAFE_LOW..=SAFE_HIGH).contains(&prod[l]) {
                    log_b[l] += prod[l].ln();
                    prod[l] = 1.0;
                }
            }
        }
        for (lb, p) in log_b.iter_mut().zip(&prod) {
            *lb += p.ln();
        }
        self.shift = log_b.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for (s, lb) in self.scaled.iter_mut().zip(&log_b) {
            *s = (lb - self.shift).exp();
        }
    }

    /// log b_l for every class.
    pub fn log_b(&self) -> Vec<f64> {
        self.scaled.iter().map(|s| s.ln() + self.shift).collect()
    }

    /// log ε = log(aᵀφₙ) at the current φₙ; the same for every word.
    pub fn log_epsilon(&self) -> f64 {
        self.scaled.iter().sum::<f64>().ln() + self.shift
    }

    /// (aᵀφₙ)⁻¹ aᵢ for word `n`, written into `out` (length K).
    pub fn correction(&self, n: usize, out: &mut [f64]) {
        let c = self.classes;
        let total: f64 = self.scaled.iter().sum();
        out.iter_mut().for_each(|o| *o = 0.0);
        for l in 0..c {
            let w = self.scaled[l] / (total * self.factors[n * c + l]);
            for (o, &e) in out.iter_mut().zip(self.exp_eta_row(l)) {
                *o += w * e;
            }
        }
    }

    /// Swap word `n`'s factors for those of its new φ row.
    pub fn replace_row(&mut self, n: usize, phi: &Array2<f64>) {
        let c = self.classes;
        self.row.iter_mut().zip(phi.row(n)).for_each(|(d, &p)| *d = p);
        let mut refresh = false;
        let mut largest: f64 = 0.0;
        for l in 0..c {
            let u = dot(&self.row, self.exp_eta_row(l));
            let slot = &mut self.factors[n * c + l];
            self.scaled[l] *= u / *slot;
            *slot = u;
            largest = largest.max(self.scaled[l]);
            refresh |= u < FACTOR_FLOOR;
        }
        if refresh || !(SAFE_LOW..=SAFE_HIGH).contains(&largest) {
            self.refresh(phi);
        }
    }
}

/// Per-sweep constants of the φ update.
pub struct PhiContext<'a> {
    /// Ψ(γᵢ).
    pub digamma_gamma: &'a [f64],
    /// Σ_l λ_l η_{l,i} / N.
    pub lambda_eta: &'a [f64],
    pub elog_beta: &'a Array2<f64>,
}

/// Fixed-point update of word `n`:
/// φₙ,ᵢ ∝ exp(Ψ(γᵢ) + E[log β_{i,w}] + Σ_l λ_l η_{l,i}/N − (aᵀφₙ^old)⁻¹ aᵢ).
/// Returns the largest absolute change in the row.
pub fn update_phi_word(
    n: usize,
    term: usize,
    phi: &mut Array2<f64>,
    ctx: &PhiContext<'_>,
    ws: &mut SoftmaxBoundWorkspace,
    exponent: &mut [f64],
) -> Result<f64> {
    ws.correction(n, exponent);
    for (i, e) in exponent.iter_mut().enumerate() {
        *e = ctx.digamma_gamma[i] + ctx.elog_beta[[i, term]] + ctx.lambda_eta[i] - *e;
    }
    normalize_row(exponent, || format!("word {n} (term {term})"))?;
    let mut change: f64 = 0.0;
    for (p, &e) in phi.row_mut(n).iter_mut().zip(exponent.iter()) {
        change = change.max((*p - e).abs());
        *p = e;
    }
    ws.replace_row(n, phi);
    Ok(change)
}

/// Coordinate ascent over φ (every word, in order), γ and λ for one
/// document, starting from `state`. Returns the number of sweeps run.
pub fn estep_document(
    doc: &Document,
    labels: &[(usize, usize)],
    globals: &ClassGlobals,
    state: &mut ClassDocState,
    inner: &InnerConfig,
) -> Result<usize> {
    let k = globals.num_topics();
    let nd = doc.len() as f64;
    let mut ws = SoftmaxBoundWorkspace::new(&globals.eta, &state.phi);
    let mut exponent = vec![0.0; k];
    let mut lambda_eta = vec![0.0; k];
    let terms: Vec<usize> = doc.tokens().collect();

    for sweep in 1..=inner.max_iter {
        let digamma_gamma: Vec<f64> = state.gamma.iter().map(|&g| digamma(g)).collect();
        for (i, le) in lambda_eta.iter_mut().enumerate() {
            *le = state
                .lambda
                .iter()
                .zip(globals.eta.column(i))
                .map(|(l, e)| l * e)
                .sum::<f64>()
                / nd;
        }
        let ctx = PhiContext {
            digamma_gamma: &digamma_gamma,
            lambda_eta: &lambda_eta,
            elog_beta: &globals.elog_beta,
        };
        if sweep > 1 {
            ws.refresh(&state.phi);
        }
        let mut change: f64 = 0.0;
        for (n, &term) in terms.iter().enumerate() {
            change = change.max(update_phi_word(n, term, &mut state.phi, &ctx, &mut ws, &mut exponent)?);
        }
        let gamma = update_gamma(&state.phi, globals.alpha);
        change = change.max(max_abs_diff(&gamma, &state.gamma));
        state.gamma = gamma;
        let lambda = update_lambda(&mean_assignment(&state.phi), &globals.eta, labels, &globals.elog_pi);
        change = change.max(max_abs_diff(&lambda, &state.lambda));
        state.lambda = lambda;
        if change < inner.tol {
            return Ok(sweep);
        }
    }
    Ok(inner.max_iter)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::{array, Array3};

    #[test]
    fn lambda_uniform_without_signal() {
        let eta = Array2::zeros((3, 2));
        let elog_pi = Array3::zeros((1, 3, 3));
        let l = update_lambda(&[0.5, 0.5], &eta, &[], &elog_pi);
        for v in l {
            assert_relative_eq!(v, 1.0 / 3.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn lambda_single_annotator() {
        let eta = Array2::zeros((2, 2));
        let elog_pi = Array3::from_shape_vec((1, 2, 2), vec![-0.1, -2.3, -2.3, -0.1]).unwrap();
        let l = update_lambda(&[0.5, 0.5], &eta, &[(0, 0)], &elog_pi);
        let expected = (-0.1f64).exp() / ((-0.1f64).exp() + (-2.3f64).exp());
        assert_relative_eq!(l[0], expected, epsilon = 1e-12);
        assert_relative_eq!(l[0], 0.9002, epsilon = 1e-4);
        assert_relative_eq!(l[1], 1.0 - expected, epsilon = 1e-12);

        let shifted = elog_pi.mapv(|v| v - 3.7);
        let l2 = update_lambda(&[0.5, 0.5], &eta, &[(0, 0)], &shifted);
        assert_relative_eq!(l[0], l2[0], epsilon = 1e-14);
    }

    #[test]
    fn workspace_tracks_products_incrementally() {
        let eta = array![[1.0, -2.0, 0.5], [0.0, 3.0, -1.0]];
        let mut phi = array![[0.2, 0.3, 0.5], [0.6, 0.2, 0.2], [0.1, 0.1, 0.8]];
        let mut ws = SoftmaxBoundWorkspace::new(&eta, &phi);
        phi.row_mut(1).assign(&array![0.3, 0.3, 0.4]);
        ws.replace_row(1, &phi);
        let fresh = SoftmaxBoundWorkspace::new(&eta, &phi);
        for (a, b) in ws.log_b().iter().zip(&fresh.log_b()) {
            assert_relative_eq!(a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn correction_matches_definition() {
        // aᵢ = Σ_l exp(η_{l,i}/N) Π_{j≠n} φⱼᵀ exp(η_l/N); correction = aᵢ / aᵀφₙ.
        let eta = array![[1.0, -2.0], [0.5, 0.25], [-1.0, 2.0]];
        let phi = array![[0.2, 0.8], [0.7, 0.3], [0.5, 0.5]];
        let n_tok = 3.0;
        let e = eta.mapv(|v: f64| (v / n_tok).exp());
        let u = |j: usize, l: usize| phi[[j, 0]] * e[[l, 0]] + phi[[j, 1]] * e[[l, 1]];
        let n = 1;
        let mut a = [0.0; 2];
        for l in 0..3 {
            let prod: f64 = (0..3).filter(|&j| j != n).map(|j| u(j, l)).product();
            for i in 0..2 {
                a[i] += e[[l, i]] * prod;
            }
        }
        let eps = a[0] * phi[[n, 0]] + a[1] * phi[[n, 1]];
        let ws = SoftmaxBoundWorkspace::new(&eta, &phi);
        assert_relative_eq!(ws.log_epsilon(), eps.ln(), epsilon = 1e-13);
        let mut out = [0.0; 2];
        ws.correction(n, &mut out);
        for i in 0..2 {
            assert_relative_eq!(out[i], a[i] / eps, epsilon = 1e-13);
        }
    }
}
