//! Experiment drivers: Kolmogorov distances, convergence-rate experiments and the
//! command-line front end.
//!
//! [`rate_experiment`] simulates the normalised functional `2K_r/(C₂ r^{d-α} L(r))` at each
//! radius of a grid and measures its two-sample Kolmogorov distance to a reference sample of
//! the Rosenblatt-type law. Every random stream is derived from one master seed, so a run is
//! reproducible bit for bit regardless of the worker count.

mod experiment;
mod output;

pub mod cli;

pub use experiment::{rank_two_coefficient, rate_experiment, reference_sample, ExperimentConfig, RhoRow, RhoTable};
pub use output::{write_csv, RunManifest};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fieldsim::mix_seed;
use crate::rosenblatt::{density_estimate, silverman_bandwidth};
use crate::stats::ols_slope;

fn sorted_copy(x: &[f64], what: &str) -> Result<Vec<f64>> {
    if x.is_empty() {
        return Err(Error::Input(format!("{what} sample is empty")));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input(format!("{what} sample contains non-finite values")));
    }
    let mut s = x.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(s)
}

/// `sup_z |F̂_a(z) - F̂_b(z)|` for two sorted samples.
pub(crate) fn ks_sorted(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Two-sample Kolmogorov distance, evaluated at every pooled breakpoint.
pub fn ks_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    Ok(ks_sorted(&sorted_copy(a, "first")?, &sorted_copy(b, "second")?))
}

/// Bootstrap standard error of [`ks_distance`] against a fixed sorted reference, resampling
/// `sample` with replacement.
pub fn ks_bootstrap_stderr(sample: &[f64], reference_sorted: &[f64], resamples: usize, seed: u64) -> Result<f64> {
    if resamples < 2 {
        return Err(Error::Parameter(format!("need at least 2 bootstrap resamples, got {resamples}")));
    }
    sorted_copy(sample, "bootstrap")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = sample.len();
    let mut buf = vec![0.0; n];
    let vals: Vec<f64> = (0..resamples)
        .map(|_| {
            for v in buf.iter_mut() {
                *v = sample[rng.random_range(0..n)];
            }
            buf.sort_by(|a, b| a.partial_cmp(b).unwrap());
            ks_sorted(&buf, reference_sorted)
        })
        .collect();
    Ok(crate::stats::variance(&vals).sqrt())
}

/// One `ε` row of [`smoothing_inequality_check`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothingRow {
    pub eps: f64,
    /// `ρ(X+Y, Z)`.
    pub lhs: f64,
    /// `ρ(X, Z) + ρ(Z+ε, Z) + P(|Y| ≥ ε)`.
    pub rhs: f64,
    pub shift_distance: f64,
    /// `ε · max f̂_Z`, the density bound on `ρ(Z+ε, Z)`.
    pub density_bound: f64,
    pub holds: bool,
    pub density_bound_holds: bool,
}

/// Empirical check of `ρ(X+Y, Z) ≤ ρ(X, Z) + ρ(Z+ε, Z) + P(|Y| ≥ ε)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothingReport {
    pub rows: Vec<SmoothingRow>,
    /// Allowance for Monte Carlo error added to each right-hand side.
    pub tolerance: f64,
    pub kde_max: f64,
}

/// Splits `reference` into independent halves `X` and `Z`, perturbs `X` by `Y = y_scale·N(0,1)`
/// and evaluates the smoothing inequality for each `ε`.
pub fn smoothing_inequality_check(reference: &[f64], eps: &[f64], y_scale: f64, seed: u64) -> Result<SmoothingReport> {
    if reference.len() < 100_000 {
        return Err(Error::Input(format!("smoothing check needs at least 10^5 reference samples, got {}", reference.len())));
    }
    if eps.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::Domain("every eps must be positive".into()));
    }
    let half = reference.len() / 2;
    let (x, z) = (&reference[..half], &reference[half..2 * half]);
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(&[seed, 0x5107]));
    let y: Vec<f64> = (0..half).map(|_| y_scale * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng)).collect();
    let xy: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
    let zs = sorted_copy(z, "reference")?;
    let lhs = ks_sorted(&sorted_copy(&xy, "perturbed")?, &zs);
    let base = ks_sorted(&sorted_copy(x, "reference")?, &zs);
    let kde = density_estimate(z, silverman_bandwidth(z))?;
    let tolerance = 2.0 / (half as f64).sqrt();
    let rows = eps
        .iter()
        .map(|&e| {
            let shifted: Vec<f64> = zs.iter().map(|v| v + e).collect();
            let shift = ks_sorted(&shifted, &zs);
            let tail = y.iter().filter(|v| v.abs() >= e).count() as f64 / half as f64;
            let rhs = base + shift + tail;
            SmoothingRow {
                eps: e,
                lhs,
                rhs,
                shift_distance: shift,
                density_bound: e * kde.max,
                holds: lhs <= rhs + tolerance,
                density_bound_holds: shift <= e * kde.max + tolerance,
            }
        })
        .collect();
    Ok(SmoothingReport { rows, tolerance, kde_max: kde.max })
}

/// Log-log regression of `ρ` on `r`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub slope_stderr: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub rows_used: usize,
    pub kappa_bound: f64,
    /// Whether `-slope ≥ kappa_bound - 2·slope_stderr`. Reported only: the bound is one-sided.
    pub consistent_with_bound: bool,
}

/// Fits `log ρ = intercept + slope·log r` on the rows with `ρ > 3·stderr`.
pub fn slope_fit(table: &RhoTable) -> Result<SlopeFit> {
    let rows: Vec<&RhoRow> = table.rows.iter().filter(|r| r.rho > 3.0 * r.rho_stderr && r.rho > 0.0).collect();
    if rows.len() < 4 {
        return Err(Error::DegenerateFit(format!("only {} rows lie above the noise floor; need 4", rows.len())));
    }
    let x: Vec<f64> = rows.iter().map(|r| r.r.ln()).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.rho.ln()).collect();
    let (slope, se, intercept) = ols_slope(&x, &y)?;
    let ybar = crate::stats::mean(&y);
    let ss_tot: f64 = y.iter().map(|v| (v - ybar).powi(2)).sum();
    let ss_res: f64 = x.iter().zip(&y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    let kappa_bound = rows[0].kappa_bound;
    Ok(SlopeFit {
        slope,
        slope_stderr: se,
        intercept,
        r_squared,
        rows_used: rows.len(),
        kappa_bound,
        consistent_with_bound: -slope >= kappa_bound - 2.0 * se,
    })
}

/// Adjacent pairs where `ρ` rises by more than twice the standard error of the difference.
pub fn monotonicity_violations(table: &RhoTable) -> Vec<(f64, f64)> {
    table
        .rows
        .windows(2)
        .filter(|w| w[1].rho > w[0].rho + 2.0 * w[0].rho_stderr.hypot(w[1].rho_stderr))
        .map(|w| (w[0].r, w[1].r))
        .collect()
}

/// `max_k ρ_k r_k^κ / (ρ_0 r_0^κ)` with `κ = kappa_bound`; values up to 2 count as bounded.
pub fn rate_product_ratio(table: &RhoTable) -> Result<f64> {
    let first = table.rows.first().ok_or_else(|| Error::Input("empty table".into()))?;
    let p0 = first.rho * first.r.powf(first.kappa_bound);
    if !(p0 > 0.0) {
        return Err(Error::DegenerateFit("rho at the first radius is zero".into()));
    }
    Ok(table.rows.iter().map(|r| r.rho * r.r.powf(r.kappa_bound) / p0).fold(0.0, f64::max))
}
