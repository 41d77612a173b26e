use super::ObjectiveEvaluation;

/// Worst relative disagreement between the analytic gradient at `x` and
/// central differences with step `h`.
///
/// The relative error of coordinate i is |gᵢ − ĝᵢ| / max(|gᵢ|, |ĝᵢ|, 1e-6);
/// the floor keeps near-zero components from amplifying rounding noise.
pub fn check_gradient<F>(mut objective: F, x: &[f64], h: f64) -> f64
where
    F: FnMut(&[f64]) -> ObjectiveEvaluation,
{
    let analytic = objective(x).gradient;
    let mut point = x.to_vec();
    let mut worst: f64 = 0.0;
    for i in 0..x.len() {
        point[i] = x[i] + h;
        let up = objective(&point).value;
        point[i] = x[i] - h;
        let down = objective(&point).value;
        point[i] = x[i];
        let numeric = (up - down) / (2.0 * h);
        let scale = analytic[i].abs().max(numeric.abs()).max(1e-6);
        worst = worst.max((analytic[i] - numeric).abs() / scale);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_quadratic_gradient_passes() {
        let c = [0.3, -1.0, 4.0];
        let f = |x: &[f64]| ObjectiveEvaluation {
            value: x.iter().zip(&c).map(|(a, b)| (a - b).powi(2)).sum(),
            gradient: x.iter().zip(&c).map(|(a, b)| 2.0 * (a - b)).collect(),
        };
        assert!(check_gradient(f, &[1.0, 2.0, -3.0], 1e-5) < 1e-9);
    }

    #[test]
    fn wrong_gradient_is_flagged() {
        let f = |x: &[f64]| ObjectiveEvaluation {
            value: x.iter().map(|a| a * a).sum(),
            gradient: x.to_vec(),
        };
        let err = check_gradient(f, &[1.0, 2.0], 1e-5);
        assert!((err - 0.5).abs() < 1e-6);
    }
}
