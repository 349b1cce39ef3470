use super::gamma::lgamma;
use super::EvalOptions;
use crate::error::{Error, Result};

/// Regularized incomplete beta function `I_μ(p, q)`.
pub fn incomplete_beta(mu: f64, p: f64, q: f64) -> Result<f64> {
    incomplete_beta_with(mu, p, q, &EvalOptions::default())
}

/// [`incomplete_beta`] with explicit evaluation options.
pub fn incomplete_beta_with(mu: f64, p: f64, q: f64, opts: &EvalOptions) -> Result<f64> {
    opts.validate()?;
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(Error::Domain(format!("incomplete_beta requires mu in (0, 1], got {mu}")));
    }
    if !(p > 0.0 && q > 0.0) || !p.is_finite() || !q.is_finite() {
        return Err(Error::Domain(format!("incomplete_beta requires p, q > 0, got ({p}, {q})")));
    }
    ibeta_split(mu, 1.0 - mu, p, q, opts)
}

/// `I_x(p, q)` where the caller supplies `y = 1 - x` separately to avoid cancellation.
pub(crate) fn ibeta_split(x: f64, y: f64, p: f64, q: f64, opts: &EvalOptions) -> Result<f64> {
    if x <= 0.0 {
        return Ok(0.0);
    }
    if y <= 0.0 {
        return Ok(1.0);
    }
    let ln_front = p * x.ln() + q * y.ln() + lgamma(p + q) - lgamma(p) - lgamma(q);
    if x < (p + 1.0) / (p + q + 2.0) {
        Ok(ln_front.exp() * betacf(x, p, q, opts)? / p)
    } else {
        Ok(1.0 - ln_front.exp() * betacf(y, q, p, opts)? / q)
    }
}

/// Continued fraction for the incomplete beta function, evaluated by the modified Lentz method.
fn betacf(x: f64, a: f64, b: f64, opts: &EvalOptions) -> Result<f64> {
    const TINY: f64 = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    let cap = opts.max_terms.max(32) * 10;
    for m in 1..=cap {
        let mf = m as f64;
        let m2 = 2.0 * mf;
        let aa = mf * (b - mf) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + mf) * (qab + mf) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            return Ok(h);
        }
    }
    Err(Error::Accuracy(format!("incomplete beta continued fraction did not converge (x={x}, a={a}, b={b})")))
}
