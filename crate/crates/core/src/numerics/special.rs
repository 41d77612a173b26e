use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Digamma function Ψ(x) for x > 0.
///
/// Arguments below 10 are shifted up with Ψ(x) = Ψ(x + 1) − 1/x, then the
/// asymptotic expansion is evaluated. Returns NaN outside the domain; use
/// [`try_digamma`] for a checked call.
pub fn digamma(x: f64) -> f64 {
    if !(x > 0.0) || !x.is_finite() {
        return f64::NAN;
    }
    // Below this the recurrence loses nothing and the series is exact to
    // leading order: Ψ(x) = −1/x − γ + O(x).
    if x < 1e-6 {
        return -1.0 / x - EULER_GAMMA + 1.644_934_066_848_226_4 * x;
    }
    let mut x = x;
    let mut shift = 0.0;
    while x < 10.0 {
        shift -= 1.0 / x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2
                        * (1.0 / 252.0
                            - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0 - inv2 * 691.0 / 32760.0)))));
    shift + x.ln() - 0.5 * inv - series
}

pub fn try_digamma(x: f64) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(digamma(x))
    } else {
        Err(Error::invalid(format!("digamma undefined at {x}")))
    }
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for x > 0 (Lanczos, g = 7).
///
/// Small arguments go through lnΓ(x) = lnΓ(x + 1) − ln x so the
/// approximation is only ever evaluated on [1, ∞).
pub fn log_gamma(x: f64) -> f64 {
    if !(x > 0.0) || !x.is_finite() {
        return f64::NAN;
    }
    if x < 1.0 {
        return log_gamma(x + 1.0) - x.ln();
    }
    let z = x - 1.0;
    let mut acc = LANCZOS[0];
    for (k, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (z + k as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

pub fn try_log_gamma(x: f64) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(log_gamma(x))
    } else {
        Err(Error::invalid(format!("log_gamma undefined at {x}")))
    }
}
