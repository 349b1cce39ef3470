use std::f64::consts::PI;

use num_complex::Complex64;

use super::gamma::{gamma_real, rgamma};
use super::EvalOptions;
use crate::error::{Error, Result};

/// Double-double number `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Clone, Copy, Debug)]
struct Dd {
    hi: f64,
    lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

impl Dd {
    fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    fn sum(a: f64, b: f64) -> Self {
        let (hi, lo) = two_sum(a, b);
        Dd { hi, lo }
    }

    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }

    fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p);
        let (hi, lo) = quick_two_sum(p, e + (self.hi * o.lo + self.lo * o.hi));
        Dd { hi, lo }
    }

    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self.add(o.mul(Dd::from(-q1)));
        let q2 = r.hi / o.hi;
        let r = r.add(o.mul(Dd::from(-q2)));
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }.add(Dd::from(q3))
    }
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// Generalized hypergeometric function `₁F₂(a; b1, b2; z)`.
pub fn hyp1f2(a: f64, b1: f64, b2: f64, z: f64) -> Result<f64> {
    hyp1f2_with(a, b1, b2, z, &EvalOptions::default())
}

/// [`hyp1f2`] with explicit evaluation options.
pub fn hyp1f2_with(a: f64, b1: f64, b2: f64, z: f64, opts: &EvalOptions) -> Result<f64> {
    opts.validate()?;
    if !(a.is_finite() && b1.is_finite() && b2.is_finite() && z.is_finite()) {
        return Err(Error::Domain("hyp1f2 arguments must be finite".into()));
    }
    if is_nonpositive_integer(b1) || is_nonpositive_integer(b2) {
        return Err(Error::Domain(format!(
            "hyp1f2 lower parameters must not be non-positive integers (b1={b1}, b2={b2})"
        )));
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    if z.abs() <= 10.0 {
        series_plain(a, b1, b2, z, opts)
    } else if z >= -400.0 || is_nonpositive_integer(a) {
        series_dd(a, b1, b2, z, opts)
    } else {
        asymptotic_negative(a, b1, b2, -z, opts)
    }
}

fn series_plain(a: f64, b1: f64, b2: f64, z: f64, opts: &EvalOptions) -> Result<f64> {
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    let mut comp = 0.0_f64;
    let mut tail_small = 0;
    for j in 0..opts.max_terms {
        let jf = j as f64;
        term *= (a + jf) * z / ((jf + 1.0) * (b1 + jf) * (b2 + jf));
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
        if term == 0.0 {
            return Ok(sum + comp);
        }
        if term.abs() < opts.rel_tol * 1e-3 * (sum + comp).abs() {
            tail_small += 1;
            if tail_small >= 2 {
                return Ok(sum + comp);
            }
        } else {
            tail_small = 0;
        }
    }
    Err(Error::Accuracy(format!(
        "hyp1f2 series did not converge within {} terms at z={z}",
        opts.max_terms
    )))
}

fn series_dd(a: f64, b1: f64, b2: f64, z: f64, opts: &EvalOptions) -> Result<f64> {
    let mut term = Dd::from(1.0);
    let mut sum = Dd::from(1.0);
    let zd = Dd::from(z);
    let cap = opts.max_terms;
    let mut tail_small = 0;
    for j in 0..cap {
        let jf = j as f64;
        let num = Dd::sum(a, jf).mul(zd);
        let den = Dd::sum(b1, jf).mul(Dd::sum(b2, jf)).mul(Dd::from(jf + 1.0));
        term = term.mul(num).div(den);
        sum = sum.add(term);
        if term.hi == 0.0 {
            return Ok(sum.hi + sum.lo);
        }
        if term.hi.abs() < 1e-3 * opts.rel_tol * sum.hi.abs() && j as f64 > z.abs().sqrt() {
            tail_small += 1;
            if tail_small >= 2 {
                return Ok(sum.hi + sum.lo);
            }
        } else {
            tail_small = 0;
        }
    }
    Err(Error::Accuracy(format!(
        "hyp1f2 extended-precision series did not converge within {cap} terms at z={z}"
    )))
}

/// Large negative argument: algebraic plus trigonometric asymptotic parts.
fn asymptotic_negative(a: f64, b1: f64, b2: f64, x: f64, opts: &EvalOptions) -> Result<f64> {
    let zeta = 2.0 * x.sqrt();
    let nu = a - b1 - b2 + 0.5;

    let mut t = rgamma(b1 - a) * rgamma(b2 - a) * x.powf(-a);
    let mut h = t;
    let mut last = t.abs();
    for k in 1..opts.max_terms {
        let kf = k as f64;
        t *= -(a + kf - 1.0) / (kf * x) * (b1 - a - kf) * (b2 - a - kf);
        if t.abs() > last || t == 0.0 {
            break;
        }
        last = t.abs();
        h += t;
        if t.abs() < 1e-17 * h.abs() {
            break;
        }
    }

    let a1 = |m: f64| Complex64::new(0.0, 3.0 * m * m + (4.0 * b1 + 4.0 * b2 - 5.0) * m + 4.0 * b1 * b2 - 2.0 * b1 - 2.0 * b2 + 1.0);
    let a0 = |m: f64| m * (m + 2.0 * b1 - 2.0) * (m + 2.0 * b2 - 2.0);
    let mut c_prev2 = Complex64::new(0.0, 0.0);
    let mut c_prev = Complex64::new(1.0, 0.0);
    let mut s = Complex64::new(1.0, 0.0);
    let mut last = 1.0;
    let mut zpow = 1.0;
    for n in 1..opts.max_terms {
        let nf = n as f64;
        let cn = -(c_prev * a1(nu - nf + 1.0) + c_prev2 * a0(nu - nf + 2.0)) / (2.0 * nf);
        zpow /= zeta;
        let term = cn * zpow;
        if term.norm() > last {
            break;
        }
        last = term.norm();
        s += term;
        c_prev2 = c_prev;
        c_prev = cn;
        if last < 1e-17 {
            break;
        }
    }
    let phase = Complex64::from_polar(1.0, zeta + 0.5 * PI * nu);
    let osc = rgamma(a) * (2.0 * PI).powf(-0.5) * 2f64.powf(0.5 - nu) * zeta.powf(nu) * (phase * s).re;
    let value = gamma_real(b1) * gamma_real(b2) * (h + osc);
    if !value.is_finite() {
        return Err(Error::Accuracy(format!("hyp1f2 asymptotic form overflowed at z={}", -x)));
    }
    Ok(value)
}
