use std::f64::consts::PI;

use super::EvalOptions;
use crate::error::{Error, Result};

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

/// Lanczos sum for arguments `x >= 0.5`, returning `(t, series)` with `t = x + g - 1/2`.
fn lanczos(x: f64) -> (f64, f64) {
    let x = x - 1.0;
    let mut s = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        s += c / (x + i as f64);
    }
    (x + LANCZOS_G + 0.5, s)
}

/// Gamma function on the whole real line except the poles, with reflection below 1/2.
pub(crate) fn gamma_real(x: f64) -> f64 {
    if x < 0.5 {
        if x == x.floor() {
            return f64::NAN;
        }
        PI / ((PI * x).sin() * gamma_real(1.0 - x))
    } else if x <= 20.0 && x == x.floor() {
        (2..x as u64).fold(1.0, |acc, k| acc * k as f64)
    } else if x > 171.7 {
        f64::INFINITY
    } else {
        let (t, s) = lanczos(x);
        // Split the power to avoid overflow near the top of the range.
        let p = t.powf((x - 0.5) / 2.0);
        (2.0 * PI).sqrt() * p * (s * (-t).exp()) * p
    }
}

/// Reciprocal gamma, defined as zero at the poles.
pub(crate) fn rgamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        0.0
    } else {
        1.0 / gamma_real(x)
    }
}

/// Natural logarithm of `|Γ(x)|` for `x > 0`.
pub(crate) fn lgamma(x: f64) -> f64 {
    if x < 0.5 {
        (PI / (PI * x).sin()).abs().ln() - lgamma(1.0 - x)
    } else {
        let (t, s) = lanczos(x);
        0.5 * (2.0 * PI).ln() + (x - 0.5) * t.ln() - t + s.ln()
    }
}

/// The gamma function `Γ(x)` for `x > 0`.
pub fn gamma_fn(x: f64) -> Result<f64> {
    gamma_fn_with(x, &EvalOptions::default())
}

/// [`gamma_fn`] with explicit evaluation options.
pub fn gamma_fn_with(x: f64, opts: &EvalOptions) -> Result<f64> {
    opts.validate()?;
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("gamma requires x > 0, got {x}")));
    }
    Ok(gamma_real(x))
}

/// The digamma function `ψ(x) = Γ'(x)/Γ(x)` for `x > 0`.
pub fn digamma_fn(x: f64) -> Result<f64> {
    digamma_fn_with(x, &EvalOptions::default())
}

/// [`digamma_fn`] with explicit evaluation options.
pub fn digamma_fn_with(x: f64, opts: &EvalOptions) -> Result<f64> {
    opts.validate()?;
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("digamma requires x > 0, got {x}")));
    }
    Ok(digamma_real(x))
}

pub(crate) fn digamma_real(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 10.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let x2 = 1.0 / (x * x);
    // Bernoulli terms B_{2k}/(2k) for k = 1..7.
    let series = x2
        * (1.0 / 12.0
            - x2 * (1.0 / 120.0
                - x2 * (1.0 / 252.0
                    - x2 * (1.0 / 240.0 - x2 * (1.0 / 132.0 - x2 * (691.0 / 32760.0 - x2 / 12.0))))));
    acc + x.ln() - 0.5 / x - series
}
