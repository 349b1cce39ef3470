//! Convergence-rate exponents for rank-two functionals, and brute-force checks of the
//! sup-min identities behind them.
//!
//! Everything here is a pure function of `(d, α, q, υ)`. Only exponents are reported; the
//! constants in the rate bound are unspecified and never estimated.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covmodels::{lrd_params, CovarianceModel};
use crate::error::{Error, Result};

/// Inputs of the rate bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateInputs {
    pub d: u32,
    pub alpha: f64,
    /// Remainder order of the slowly varying factor, below `d/2 - α`.
    pub q: f64,
    /// Exponent of the spectral-density remainder.
    pub upsilon: f64,
}

impl RateInputs {
    pub fn new(d: u32, alpha: f64, q: f64, upsilon: f64) -> Result<Self> {
        let s = RateInputs { d, alpha, q, upsilon };
        s.validate()?;
        Ok(s)
    }

    /// Inputs with `q` pushed to `0.999 (d/2 - α)`, the limit the rate curves are drawn at.
    pub fn near_limit(d: u32, alpha: f64, upsilon: f64) -> Result<Self> {
        Self::new(d, alpha, 0.999 * (0.5 * d as f64 - alpha), upsilon)
    }

    /// Reads `α`, `υ` and `q_max` from a covariance model; `q` defaults to `0.999 q_max`.
    pub fn from_model(model: &CovarianceModel, q: Option<f64>) -> Result<Self> {
        let p = lrd_params(model)?;
        let q = q.unwrap_or(0.999 * p.q_max);
        Self::new(p.d, p.alpha, q, p.upsilon)
    }

    pub fn validate(&self) -> Result<()> {
        let half = 0.5 * self.d as f64;
        if self.d == 0 || !(self.alpha > 0.0 && self.alpha < half) {
            return Err(Error::Domain(format!("alpha must lie in (0, d/2) = (0, {half}), got {}", self.alpha)));
        }
        if !(self.q > 0.0 && self.q < half - self.alpha) {
            return Err(Error::Domain(format!("q must lie in (0, d/2 - alpha) = (0, {}), got {}", half - self.alpha, self.q)));
        }
        if !(self.upsilon > 0.0) || !self.upsilon.is_finite() {
            return Err(Error::Domain(format!("upsilon must be positive, got {}", self.upsilon)));
        }
        Ok(())
    }
}

/// `(2/(d-2α) + 2/(d+1-2α) + 1/υ)^{-1}`.
fn harmonic(d: u32, alpha: f64, upsilon: f64) -> f64 {
    let df = d as f64;
    1.0 / (2.0 / (df - 2.0 * alpha) + 2.0 / (df + 1.0 - 2.0 * alpha) + 1.0 / upsilon)
}

/// `κ₁ = 2 min(q, (2/(d-2α) + 2/(d+1-2α) + 1/υ)^{-1})`.
pub fn kappa1(inp: &RateInputs) -> f64 {
    2.0 * inp.q.min(harmonic(inp.d, inp.alpha, inp.upsilon))
}

/// `κ₁` in the limit `q → d/2 - α`, where the `q` branch never binds.
pub fn kappa1_limit(d: u32, alpha: f64, upsilon: f64) -> f64 {
    2.0 * harmonic(d, alpha, upsilon)
}

/// `α(d-2α)/(d-α)`.
pub fn geometric_term(d: u32, alpha: f64) -> f64 {
    let df = d as f64;
    alpha * (df - 2.0 * alpha) / (df - alpha)
}

/// Supremum of admissible rate exponents, `min(α(d-2α)/(d-α), κ₁)/3`.
pub fn kappa_bound(inp: &RateInputs) -> f64 {
    geometric_term(inp.d, inp.alpha).min(kappa1(inp)) / 3.0
}

fn check_d_alpha(d: u32, alpha: f64) -> Result<()> {
    if d == 0 || !(alpha > 0.0 && alpha < 0.5 * d as f64) {
        return Err(Error::Domain(format!("need d >= 1 and 0 < alpha < d/2, got d={d}, alpha={alpha}")));
    }
    Ok(())
}

/// `sup_{γ₀∈(0,γ)} min((γ-γ₀)(d-2α), γ₀(d+1-2α)) = γ(d-2α)(d+1-2α)/(2d+1-4α)`.
pub fn supmin_inner(d: u32, alpha: f64, gamma: f64) -> Result<f64> {
    check_d_alpha(d, alpha)?;
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Domain(format!("gamma must lie in [0, 1], got {gamma}")));
    }
    let df = d as f64;
    Ok(gamma * (df - 2.0 * alpha) * (df + 1.0 - 2.0 * alpha) / (2.0 * df + 1.0 - 4.0 * alpha))
}

/// `sup_{γ∈(0,1)} min(2υ(1-γ), supmin_inner(γ)) = 2(2/(d-2α) + 2/(d+1-2α) + 1/υ)^{-1}`.
pub fn supmin_outer(d: u32, alpha: f64, upsilon: f64) -> Result<f64> {
    check_d_alpha(d, alpha)?;
    if !(upsilon > 0.0) {
        return Err(Error::Domain(format!("upsilon must be positive, got {upsilon}")));
    }
    Ok(2.0 * harmonic(d, alpha, upsilon))
}

/// Grid controls for the brute-force searches.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupMinSearch {
    /// Points per axis; grids use cell midpoints so they stay inside the open intervals.
    pub resolution: usize,
    /// Zoom passes around the current argmax, each spanning two cells either side.
    pub refinements: usize,
}

impl Default for SupMinSearch {
    fn default() -> Self {
        SupMinSearch { resolution: 1000, refinements: 1 }
    }
}

impl SupMinSearch {
    /// Settings for the three-dimensional search in [`kappa0_identity_check`].
    pub fn three_axis() -> Self {
        SupMinSearch { resolution: 160, refinements: 4 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.resolution < 4 {
            return Err(Error::Parameter(format!("grid resolution must be at least 4, got {}", self.resolution)));
        }
        Ok(())
    }
}

/// Result of a brute-force maximisation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridMax {
    pub value: f64,
    pub argmax: Vec<f64>,
    pub evaluations: u64,
}

/// Maximises `f` over the box `lo..hi` on midpoint grids, zooming in around the best point.
fn grid_maximise<F>(f: F, lo: &[f64], hi: &[f64], search: &SupMinSearch) -> Result<GridMax>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    search.validate()?;
    let dim = lo.len();
    let n = search.resolution;
    let mut lo = lo.to_vec();
    let mut hi = hi.to_vec();
    let (full_lo, full_hi) = (lo.clone(), hi.clone());
    let mut best = (f64::NEG_INFINITY, vec![0.0; dim]);
    let mut evaluations = 0u64;
    for pass in 0..=search.refinements {
        let step: Vec<f64> = (0..dim).map(|k| (hi[k] - lo[k]) / n as f64).collect();
        let total = n.pow(dim as u32);
        // Ties resolve to the lowest flat index, so the result does not depend on scheduling.
        let (v, idx) = (0..total)
            .into_par_iter()
            .map(|flat| {
                let mut x = [0.0; 3];
                let mut rem = flat;
                for k in 0..dim {
                    x[k] = lo[k] + (rem % n) as f64 * step[k] + 0.5 * step[k];
                    rem /= n;
                }
                (f(&x[..dim]), flat)
            })
            .reduce(|| (f64::NEG_INFINITY, usize::MAX), |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a });
        evaluations += total as u64;
        let mut rem = idx;
        let mut x = vec![0.0; dim];
        for k in 0..dim {
            x[k] = lo[k] + (rem % n) as f64 * step[k] + 0.5 * step[k];
            rem /= n;
        }
        if v > best.0 {
            best = (v, x.clone());
        }
        if pass < search.refinements {
            for k in 0..dim {
                lo[k] = (best.1[k] - 2.0 * step[k]).max(full_lo[k]);
                hi[k] = (best.1[k] + 2.0 * step[k]).min(full_hi[k]);
            }
        }
    }
    Ok(GridMax { value: best.0, argmax: best.1, evaluations })
}

/// Grid value of `sup_{γ₀∈(0,γ)} min((γ-γ₀)(d-2α), γ₀(d+1-2α))`.
pub fn grid_supmin_inner(d: u32, alpha: f64, gamma: f64, search: &SupMinSearch) -> Result<GridMax> {
    check_d_alpha(d, alpha)?;
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::Domain(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    let df = d as f64;
    grid_maximise(|x| ((gamma - x[0]) * (df - 2.0 * alpha)).min(x[0] * (df + 1.0 - 2.0 * alpha)), &[0.0], &[gamma], search)
}

/// Grid value of `sup_γ sup_{γ₀<γ} min(2υ(1-γ), (γ-γ₀)(d-2α), γ₀(d+1-2α))`, searched jointly over
/// `(γ, t)` with `γ₀ = tγ`.
pub fn grid_supmin_outer(d: u32, alpha: f64, upsilon: f64, search: &SupMinSearch) -> Result<GridMax> {
    check_d_alpha(d, alpha)?;
    let df = d as f64;
    let mut g = grid_maximise(
        |x| {
            let (gamma, g0) = (x[0], x[1] * x[0]);
            (2.0 * upsilon * (1.0 - gamma)).min((gamma - g0) * (df - 2.0 * alpha)).min(g0 * (df + 1.0 - 2.0 * alpha))
        },
        &[0.0, 0.0],
        &[1.0, 1.0],
        search,
    )?;
    g.argmax[1] *= g.argmax[0];
    Ok(g)
}

/// Grid value of `sup_{β>0} min(β, c - 2β)`, which equals `c/3`.
pub fn grid_beta_supmin(c: f64, search: &SupMinSearch) -> Result<GridMax> {
    if !(c > 0.0) {
        return Err(Error::Domain(format!("c must be positive, got {c}")));
    }
    grid_maximise(|x| x[0].min(c - 2.0 * x[0]), &[0.0], &[c], search)
}

/// Outcome of [`kappa0_identity_check`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Kappa0Report {
    pub inputs: RateInputs,
    pub kappa1_over_3: f64,
    pub grid_value: f64,
    pub deviation: f64,
    /// `(β, γ, γ₀)` at the grid maximum.
    pub argmax: Vec<f64>,
    pub evaluations: u64,
}

/// Brute-force `κ₀ = sup min(β, 2υ(1-γ)-2β, 2q-2β, (γ-γ₀)(d-2α)-2β, γ₀(d+1-2α)-2β)` over
/// `β > 0, γ ∈ (0,1), γ₀ ∈ (0,γ)`, compared with `κ₁/3`.
pub fn kappa0_identity_check(inp: &RateInputs, search: &SupMinSearch) -> Result<Kappa0Report> {
    inp.validate()?;
    let df = inp.d as f64;
    let (a, q, u) = (inp.alpha, inp.q, inp.upsilon);
    let beta_max = 2.0 * q;
    let g = grid_maximise(
        |x| {
            let (beta, gamma) = (x[0], x[1]);
            let g0 = x[2] * gamma;
            let rest = (2.0 * u * (1.0 - gamma))
                .min(2.0 * q)
                .min((gamma - g0) * (df - 2.0 * a))
                .min(g0 * (df + 1.0 - 2.0 * a));
            beta.min(rest - 2.0 * beta)
        },
        &[0.0, 0.0, 0.0],
        &[beta_max, 1.0, 1.0],
        search,
    )?;
    let target = kappa1(inp) / 3.0;
    let mut argmax = g.argmax.clone();
    argmax[2] *= argmax[1];
    Ok(Kappa0Report {
        inputs: *inp,
        kappa1_over_3: target,
        grid_value: g.value,
        deviation: (g.value - target).abs(),
        argmax,
        evaluations: g.evaluations,
    })
}

/// How `υ` depends on `α` along a curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "value")]
pub enum UpsilonRule {
    Fixed(f64),
    /// `υ = 1 - α`, the local-global model.
    OneMinusAlpha,
}

impl UpsilonRule {
    pub fn at(&self, alpha: f64) -> f64 {
        match self {
            UpsilonRule::Fixed(v) => *v,
            UpsilonRule::OneMinusAlpha => 1.0 - alpha,
        }
    }
}

/// One row of a rate-curve table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub alpha: f64,
    pub kappa1_over_3: f64,
    pub geometric_term_over_3: f64,
    pub kappa_bound: f64,
}

/// Both rate curves over `alpha_grid`, with `q` taken to its limit `d/2 - α`.
pub fn curve_table(d: u32, upsilon: UpsilonRule, alpha_grid: &[f64]) -> Result<Vec<CurveRow>> {
    alpha_grid
        .iter()
        .map(|&alpha| {
            check_d_alpha(d, alpha)?;
            let u = upsilon.at(alpha);
            if !(u > 0.0) {
                return Err(Error::Domain(format!("upsilon({alpha}) = {u} is not positive")));
            }
            let k = kappa1_limit(d, alpha, u) / 3.0;
            let g = geometric_term(d, alpha) / 3.0;
            Ok(CurveRow { alpha, kappa1_over_3: k, geometric_term_over_3: g, kappa_bound: k.min(g) })
        })
        .collect()
}

/// `n` evenly spaced interior points of `(0, d/2)`.
pub fn alpha_grid(d: u32, n: usize) -> Vec<f64> {
    let top = 0.5 * d as f64;
    (1..=n).map(|i| top * i as f64 / (n + 1) as f64).collect()
}
