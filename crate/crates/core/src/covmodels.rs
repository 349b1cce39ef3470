//! Isotropic covariance families with long-range dependence.
//!
//! Three families are provided:
//!
//! * Cauchy, `B(r) = (1 + r²)^{-θ}`;
//! * generalized Linnik, `B(r) = (1 + r^σ)^{-θ}` with `σ ∈ (0, 2]`;
//! * local-global, `B(r) = 1 - α/(θ+α)·r^θ` for `r ≤ 1` and `θ/(θ+α)·r^{-α}` beyond.
//!
//! For each family the module evaluates the covariance, the isotropic spectral density `f`,
//! the leading power law `c₂(d,α) λ^{α-d} L(1/λ)` at the origin, and the long-memory
//! parameters `(α, L, q_max, υ)` that drive the rate bound in [`crate::ratelab`].

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate, integrate_breaks, QuadOptions};
use crate::specfun::{gamma_real, hyp1f2, k_real, lgamma, EvalOptions};

/// Parametric family of a covariance model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// `B(r) = (1 + r²)^{-θ}`.
    Cauchy { theta: f64 },
    /// `B(r) = (1 + r^σ)^{-θ}`.
    #[serde(alias = "generalized_linnik")]
    Linnik { sigma: f64, theta: f64 },
    /// Piecewise local-global model with cusp exponent `θ` and tail exponent `α`.
    #[serde(alias = "local-global", alias = "localglobal")]
    LocalGlobal { alpha: f64, theta: f64 },
}

/// A covariance family in dimension `d`.
///
/// Serialized as a flat JSON object, e.g. `{"family":"cauchy","theta":0.2,"d":1}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovarianceModel {
    #[serde(flatten)]
    pub family: Family,
    pub d: u32,
}

/// Slowly varying function `L` at infinity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SlowlyVarying {
    /// `L(t) = c`.
    Constant { value: f64 },
    /// `L(t) = (1 + t^{-σ})^{-θ}`.
    PowerCorrection { sigma: f64, theta: f64 },
    /// `L(t) = θ/(θ+α)` for `t > 1`, and `t^α B(t)` otherwise.
    LocalGlobal { alpha: f64, theta: f64 },
    /// `L(t) = ln t`, which is slowly varying but has no polynomial remainder.
    Logarithm,
}

impl SlowlyVarying {
    /// Evaluates `L(t)` for `t > 0`.
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            SlowlyVarying::Constant { value } => value,
            SlowlyVarying::PowerCorrection { sigma, theta } => (1.0 + t.powf(-sigma)).powf(-theta),
            SlowlyVarying::LocalGlobal { alpha, theta } => {
                if t > 1.0 {
                    theta / (theta + alpha)
                } else {
                    t.powf(alpha) * (1.0 - alpha / (theta + alpha) * t.powf(theta))
                }
            }
            SlowlyVarying::Logarithm => t.ln(),
        }
    }
}

/// Long-memory parameters of a model: `B(r) = r^{-α} L(r)` with remainder order `q_max` for
/// `L` and spectral remainder order `υ` at the origin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LongMemoryParams {
    pub d: u32,
    pub alpha: f64,
    pub l: SlowlyVarying,
    /// Supremum of admissible remainder orders; callers choose `q` strictly below it.
    pub q_max: f64,
    pub upsilon: f64,
}

impl LongMemoryParams {
    /// Parameters of the exact power model `f(λ) = c₂ λ^{α-d}` with `L ≡ 1`.
    pub fn exact_power(d: u32, alpha: f64, upsilon: f64) -> Result<Self> {
        if d == 0 || !(alpha > 0.0 && alpha < d as f64 / 2.0) {
            return Err(Error::Parameter(format!("need 0 < alpha < d/2, got d={d}, alpha={alpha}")));
        }
        Ok(LongMemoryParams {
            d,
            alpha,
            l: SlowlyVarying::Constant { value: 1.0 },
            q_max: d as f64 / 2.0 - alpha,
            upsilon,
        })
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("{name} must be positive and finite, got {v}")))
    }
}

impl CovarianceModel {
    /// Cauchy model in dimension `d`.
    pub fn cauchy(d: u32, theta: f64) -> Result<Self> {
        let m = CovarianceModel { family: Family::Cauchy { theta }, d };
        m.validate()?;
        Ok(m)
    }

    /// Generalized Linnik model in dimension `d`.
    pub fn linnik(d: u32, sigma: f64, theta: f64) -> Result<Self> {
        let m = CovarianceModel { family: Family::Linnik { sigma, theta }, d };
        m.validate()?;
        Ok(m)
    }

    /// Local-global model in dimension `d ∈ {1, 2}`.
    pub fn local_global(d: u32, alpha: f64, theta: f64) -> Result<Self> {
        let m = CovarianceModel { family: Family::LocalGlobal { alpha, theta }, d };
        m.validate()?;
        Ok(m)
    }

    /// Checks the parameter ranges of the family.
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::Parameter("dimension must be at least 1".into()));
        }
        match self.family {
            Family::Cauchy { theta } => check_positive("theta", theta),
            Family::Linnik { sigma, theta } => {
                check_positive("theta", theta)?;
                if !(sigma > 0.0 && sigma <= 2.0) {
                    return Err(Error::Parameter(format!("Linnik sigma must lie in (0, 2], got {sigma}")));
                }
                Ok(())
            }
            Family::LocalGlobal { alpha, theta } => {
                check_positive("alpha", alpha)?;
                check_positive("theta", theta)?;
                if self.d > 2 {
                    return Err(Error::Parameter(format!("local-global model requires d in {{1, 2}}, got {}", self.d)));
                }
                let cap = (3.0 - self.d as f64) / 2.0;
                if theta > cap {
                    return Err(Error::Parameter(format!("local-global theta must lie in (0, {cap}], got {theta}")));
                }
                Ok(())
            }
        }
    }

    /// Tail exponent `α` of `B(r) ~ r^{-α} L(r)`.
    pub fn alpha(&self) -> f64 {
        match self.family {
            Family::Cauchy { theta } => 2.0 * theta,
            Family::Linnik { sigma, theta } => sigma * theta,
            Family::LocalGlobal { alpha, .. } => alpha,
        }
    }

    /// Covariance `B(r)` for `r ≥ 0`.
    pub fn covariance(&self, r: f64) -> Result<f64> {
        covariance_eval(self, r)
    }

    /// Isotropic spectral density `f(λ)` for `λ > 0`.
    pub fn spectral_density(&self, lam: f64) -> Result<f64> {
        spectral_density(self, lam)
    }
}

/// Covariance `B(r)` of the model; `B(0) = 1` exactly.
pub fn covariance_eval(model: &CovarianceModel, r: f64) -> Result<f64> {
    model.validate()?;
    if !(r >= 0.0) || r.is_nan() {
        return Err(Error::Domain(format!("covariance requires r >= 0, got {r}")));
    }
    if r == 0.0 {
        return Ok(1.0);
    }
    Ok(match model.family {
        Family::Cauchy { theta } => (1.0 + r * r).powf(-theta),
        Family::Linnik { sigma, theta } => (1.0 + r.powf(sigma)).powf(-theta),
        Family::LocalGlobal { alpha, theta } => {
            if r <= 1.0 {
                1.0 - alpha / (theta + alpha) * r.powf(theta)
            } else {
                theta / (theta + alpha) * r.powf(-alpha)
            }
        }
    })
}

/// Long-memory parameters of a model in its long-range-dependent regime.
pub fn lrd_params(model: &CovarianceModel) -> Result<LongMemoryParams> {
    model.validate()?;
    let d = model.d as f64;
    let alpha = model.alpha();
    if alpha >= d / 2.0 {
        return Err(Error::Regime(format!("alpha = {alpha} is not below d/2 = {}", d / 2.0)));
    }
    let half_gap = d / 2.0 - alpha;
    let (l, q_max, upsilon) = match model.family {
        Family::Cauchy { theta } => (
            SlowlyVarying::PowerCorrection { sigma: 2.0, theta },
            half_gap.min(2.0),
            (d - 2.0 * theta).min(2.0),
        ),
        Family::Linnik { sigma, theta } => (
            SlowlyVarying::PowerCorrection { sigma, theta },
            half_gap.min(sigma),
            (d - sigma * theta).min(sigma),
        ),
        Family::LocalGlobal { alpha, theta } => {
            if model.d != 1 {
                return Err(Error::Unsupported("the local-global spectral remainder is only available for d = 1".into()));
            }
            (SlowlyVarying::LocalGlobal { alpha, theta }, half_gap, 1.0 - alpha)
        }
    };
    Ok(LongMemoryParams { d: model.d, alpha, l, q_max, upsilon })
}

/// `c₂(d, α) = Γ((d-α)/2) / (2^α π^{d/2} Γ(α/2))`.
pub fn c2_constant(d: u32, alpha: f64) -> Result<f64> {
    let df = d as f64;
    if d == 0 || !(alpha > 0.0 && alpha < df) {
        return Err(Error::Domain(format!("c2 requires 0 < alpha < d, got d={d}, alpha={alpha}")));
    }
    Ok((lgamma((df - alpha) / 2.0) - lgamma(alpha / 2.0) - alpha * 2f64.ln() - 0.5 * df * PI.ln()).exp())
}

/// Isotropic spectral density `f(λ)`.
pub fn spectral_density(model: &CovarianceModel, lam: f64) -> Result<f64> {
    model.validate()?;
    if !(lam > 0.0) || !lam.is_finite() {
        return Err(Error::Domain(format!("spectral density requires finite lambda > 0, got {lam}")));
    }
    let d = model.d as f64;
    match model.family {
        Family::Cauchy { theta } => Ok(cauchy_density(d, theta, lam)),
        Family::Linnik { sigma, theta } => {
            if sigma == 2.0 {
                Ok(cauchy_density(d, theta, lam))
            } else {
                linnik_density(d, sigma, theta, lam)
            }
        }
        Family::LocalGlobal { alpha, theta } => {
            if model.d != 1 {
                return Err(Error::Unsupported("local-global spectral density is only available for d = 1".into()));
            }
            local_global_density(alpha, theta, lam)
        }
    }
}

fn cauchy_density(d: f64, theta: f64, lam: f64) -> f64 {
    let nu = d / 2.0 - theta;
    let k = k_real(nu, lam, &EvalOptions::default());
    let log_norm = (d / 2.0 + theta - 1.0) * 2f64.ln() + d / 2.0 * PI.ln() + lgamma(theta);
    lam.powf(theta - d / 2.0) * k * (-log_norm).exp()
}

/// Linnik density via `-Im ∫ K_{(d-2)/2}(λu) u^{d/2} (1 + e^{iπσ/2} u^σ)^{-θ} du`, with the
/// complex power written in polar form `ρ^{-θ}(cos θψ - i sin θψ)`.
pub(crate) fn linnik_density(d: f64, sigma: f64, theta: f64, lam: f64) -> Result<f64> {
    let nu = (d - 2.0) / 2.0;
    let (cs, sn) = ((PI * sigma / 2.0).cos(), (PI * sigma / 2.0).sin());
    let opts = EvalOptions::default();
    // Substitute v = λu, so the Bessel factor lives on a fixed scale.
    let integrand = |v: f64| {
        if v <= 0.0 {
            return 0.0;
        }
        let u = v / lam;
        let us = u.powf(sigma);
        let re = 1.0 + us * cs;
        let im = us * sn;
        let rho = re.hypot(im);
        let psi = im.atan2(re);
        k_real(nu, v, &opts) * v.powf(d / 2.0) * rho.powf(-theta) * (theta * psi).sin()
    };
    let upper = 45.0;
    let quad = QuadOptions::new(1e-300, 1e-12, 20_000);
    let geometric_breaks = |lo: f64, hi: f64| -> Vec<f64> {
        let mut br: Vec<f64> = [0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 30.0].into_iter().filter(|b| *b > lo && *b < hi).collect();
        let mut b = lam * 1e-4;
        while b < hi {
            if b > lo {
                br.push(b);
            }
            b *= 3.0;
        }
        br
    };
    let mut pieces = Vec::new();
    if lam < upper {
        // As σ → 2 the modulus 1 + u^σ e^{iπσ/2} vanishes at u = 1, leaving a |v - λ|^{-θ}
        // singularity on the right of λ. The substitution v = λ + t^p with p(1 - θ) = 1 removes it.
        let near = (2.0 * lam).min(upper);
        let p = 1.0 / (1.0 - theta.min(0.9));
        pieces.push(integrate_breaks(&integrand, 0.0, lam, &geometric_breaks(0.0, lam), &quad));
        pieces.push(integrate(
            |t: f64| p * t.powf(p - 1.0) * integrand(lam + t.powf(p)),
            0.0,
            (near - lam).powf(1.0 / p),
            &quad,
        ));
        pieces.push(integrate_breaks(&integrand, near, upper, &geometric_breaks(near, upper), &quad));
    } else {
        pieces.push(integrate_breaks(&integrand, 0.0, upper, &geometric_breaks(0.0, upper), &quad));
    }
    let value: f64 = pieces.iter().map(|q| q.value).sum();
    let abs_err: f64 = pieces.iter().map(|q| q.abs_err).sum();
    if !(abs_err <= 1e-12 * value.abs()) || !value.is_finite() {
        return Err(Error::Accuracy(format!(
            "Linnik spectral integral did not converge at lambda={lam} (error estimate {abs_err:.3e})"
        )));
    }
    let scale = lam.powf((2.0 - d) / 2.0) / (2f64.powf((d - 2.0) / 2.0) * PI.powf((d + 2.0) / 2.0));
    Ok(scale * value * lam.powf(-d / 2.0 - 1.0))
}

fn local_global_density(alpha: f64, theta: f64, lam: f64) -> Result<f64> {
    if alpha >= 1.0 {
        return Err(Error::Unsupported(format!(
            "local-global spectral density requires alpha < 1, got {alpha}"
        )));
    }
    let z = -lam * lam / 4.0;
    let w = theta / (theta + alpha);
    let f1 = hyp1f2((1.0 - alpha) / 2.0, 0.5, (3.0 - alpha) / 2.0, z)?;
    let f2 = hyp1f2((theta + 1.0) / 2.0, 0.5, (theta + 3.0) / 2.0, z)?;
    let algebraic = lam.powf(alpha - 1.0) * (PI * alpha / 2.0).sin() * gamma_real(1.0 - alpha);
    let v = (lam.sin() / lam + w * (f1 / (alpha - 1.0) + algebraic) - alpha / ((theta + 1.0) * (theta + alpha)) * f2) / PI;
    Ok(v)
}

/// Leading behaviour `c₂(d,α) λ^{α-d} L(1/λ)` of the spectral density at the origin.
pub fn spectral_leading(params: &LongMemoryParams, lam: f64) -> Result<f64> {
    if !(lam > 0.0) {
        return Err(Error::Domain(format!("lambda must be positive, got {lam}")));
    }
    let c2 = c2_constant(params.d, params.alpha)?;
    Ok(c2 * lam.powf(params.alpha - params.d as f64) * params.l.eval(1.0 / lam))
}

/// Least-squares slope of `log|f/leading - 1|` against `log λ`, an estimate of `υ`.
pub fn residual_exponent_fit(model: &CovarianceModel, lam_grid: &[f64]) -> Result<f64> {
    if lam_grid.len() < 8 {
        return Err(Error::DegenerateFit(format!("need at least 8 grid points, got {}", lam_grid.len())));
    }
    if lam_grid.iter().any(|l| !(*l > 0.0 && *l <= 0.1)) {
        return Err(Error::Domain("residual grid must lie inside (0, 0.1]".into()));
    }
    let params = lrd_params(model)?;
    let mut xs = Vec::with_capacity(lam_grid.len());
    let mut ys = Vec::with_capacity(lam_grid.len());
    for &lam in lam_grid {
        let f = spectral_density(model, lam)?;
        let lead = spectral_leading(&params, lam)?;
        let res = (f / lead - 1.0).abs();
        if !(res > 1e-13) {
            return Err(Error::DegenerateFit(format!(
                "relative residual {res:.3e} at lambda={lam} is at machine precision"
            )));
        }
        xs.push(lam.ln());
        ys.push(res.ln());
    }
    Ok(crate::stats::ols_slope(&xs, &ys)?.0)
}

/// `sup r^q |1 - L(tr)/L(r)|` over the grid.
pub fn slowly_varying_remainder(l: &SlowlyVarying, q: f64, r_grid: &[f64], t_grid: &[f64]) -> Result<f64> {
    if r_grid.is_empty() || t_grid.is_empty() {
        return Err(Error::Input("grids must be non-empty".into()));
    }
    if r_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Input("r_grid must be increasing".into()));
    }
    if t_grid.iter().any(|t| !(*t >= 1.0)) {
        return Err(Error::Input("t_grid values must be at least 1".into()));
    }
    let mut sup = 0.0_f64;
    for &r in r_grid {
        let lr = l.eval(r);
        for &t in t_grid {
            sup = sup.max(r.powf(q) * (1.0 - l.eval(t * r) / lr).abs());
        }
    }
    Ok(sup)
}

/// Spectral measure `Φ(z) = 2π^{d/2}/Γ(d/2) ∫₀^z u^{d-1} f(u) du`.
pub fn isotropic_measure(model: &CovarianceModel, z: f64) -> Result<f64> {
    if !(z >= 0.0) {
        return Err(Error::Domain(format!("z must be non-negative, got {z}")));
    }
    model.validate()?;
    let d = model.d as f64;
    if z == 0.0 {
        return Ok(0.0);
    }
    // Exponent used to flatten the u^{α-1} behaviour of u^{d-1} f(u) at the origin.
    let alpha = model.alpha().min(d).min(1.0);
    let z0 = z.min(1.0);
    let mut failure: Option<Error> = None;
    let mut density = |u: f64| -> f64 {
        match spectral_density(model, u) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        }
    };
    // On [0, z0] the substitution u = z0 t^{1/α} removes the u^{α-1} singularity.
    let head = integrate(
        |t: f64| {
            if t <= 0.0 {
                return 0.0;
            }
            let u = z0 * t.powf(1.0 / alpha);
            z0 / alpha * t.powf(1.0 / alpha - 1.0) * u.powf(d - 1.0) * density(u)
        },
        0.0,
        1.0,
        &QuadOptions::new(1e-14, 1e-11, 4000),
    );
    let mut total = head.value;
    let mut ok = head.converged;
    if z > 1.0 {
        let mut breaks = Vec::new();
        let mut b = 2.0;
        while b < z {
            breaks.push(b);
            b *= 2.0;
        }
        let tail = integrate_breaks(|u: f64| u.powf(d - 1.0) * density(u), 1.0, z, &breaks, &QuadOptions::new(1e-14, 1e-11, 8000));
        total += tail.value;
        ok &= tail.converged;
    }
    if let Some(e) = failure {
        return Err(e);
    }
    if !ok {
        return Err(Error::Accuracy(format!("spectral measure quadrature did not converge at z={z}")));
    }
    Ok(2.0 * PI.powf(d / 2.0) / gamma_real(d / 2.0) * total)
}

/// `Q_r(λ₁, λ₂)` for an arbitrary spectral density `f`.
pub fn qr_diagnostic_with<F: Fn(f64) -> Result<f64>>(params: &LongMemoryParams, f: F, r: f64, lam1: f64, lam2: f64) -> Result<f64> {
    if !(r > 0.0 && lam1 > 0.0 && lam2 > 0.0) {
        return Err(Error::Domain("r, lam1 and lam2 must be positive".into()));
    }
    let d = params.d as f64;
    let a = params.alpha;
    let c2 = c2_constant(params.d, a)?;
    let inner = lam1.powf(d - a) * lam2.powf(d - a) * f(lam1 / r)? * f(lam2 / r)?;
    Ok(r.powf(a - d) / params.l.eval(r) / c2 * inner.sqrt())
}

/// `Q_r(λ₁, λ₂) = r^{α-d} L(r)^{-1} c₂^{-1} [λ₁^{d-α} λ₂^{d-α} f(λ₁/r) f(λ₂/r)]^{1/2}`.
pub fn qr_diagnostic(model: &CovarianceModel, r: f64, lam1: f64, lam2: f64) -> Result<f64> {
    let params = lrd_params(model)?;
    qr_diagnostic_with(&params, |l| spectral_density(model, l), r, lam1, lam2)
}
