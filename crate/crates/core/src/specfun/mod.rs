//! Special functions: gamma, digamma, Bessel `J` and `K`, the regularized incomplete beta
//! function, `₁F₂`, probabilists' Hermite polynomials and the isotropic kernel `Y_d`.
//!
//! Every function has a plain form using [`EvalOptions::default`] and a `_with` form taking
//! explicit options. All functions are pure and thread-safe.

mod bessel;
mod beta;
mod gamma;
mod hyp;

pub use bessel::{bessel_j, bessel_j_with, bessel_k, bessel_k_with};
pub use beta::{incomplete_beta, incomplete_beta_with};
pub use gamma::{digamma_fn, digamma_fn_with, gamma_fn, gamma_fn_with};
pub use hyp::{hyp1f2, hyp1f2_with};

pub(crate) use bessel::{j_int_sequence, j_real, k_real};
pub(crate) use beta::ibeta_split;
pub(crate) use gamma::{gamma_real, lgamma};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Accuracy controls shared by the special-function kernels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    /// Target relative tolerance, in `(0, 1e-3]`.
    pub rel_tol: f64,
    /// Maximum number of series terms, at least 32.
    pub max_terms: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { rel_tol: 1e-14, max_terms: 500 }
    }
}

impl EvalOptions {
    /// Checks the option invariants.
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol <= 1e-3) {
            return Err(Error::Parameter(format!("rel_tol must lie in (0, 1e-3], got {}", self.rel_tol)));
        }
        if self.max_terms < 32 {
            return Err(Error::Parameter(format!("max_terms must be at least 32, got {}", self.max_terms)));
        }
        Ok(())
    }
}

/// Probabilists' Hermite polynomial `H_k(w)` via the three-term recurrence.
pub fn hermite_poly(k: usize, w: f64) -> f64 {
    let mut h0 = 1.0;
    if k == 0 {
        return h0;
    }
    let mut h1 = w;
    for j in 1..k {
        let h2 = w * h1 - j as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// Fills `out[j] = H_j(w)` for `j < out.len()`.
pub fn hermite_poly_all(w: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = w;
    }
    for j in 2..out.len() {
        out[j] = w * out[j - 1] - (j - 1) as f64 * out[j - 2];
    }
}

/// Isotropic kernel `Y_d(z) = 2^{(d-2)/2} Γ(d/2) J_{(d-2)/2}(z) z^{(2-d)/2}` with `Y_d(0) = 1`.
pub fn y_d_kernel(d: u32, z: f64) -> Result<f64> {
    if d == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    if !(z >= 0.0) || !z.is_finite() {
        return Err(Error::Domain(format!("y_d_kernel requires finite z >= 0, got {z}")));
    }
    let nu = 0.5 * d as f64 - 1.0;
    if z < 1.0 {
        // Y_d(z) = 0F1(; d/2; -z^2/4), which is regular at the origin.
        let q = -0.25 * z * z;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..60 {
            term *= q / (k as f64 * (nu + k as f64));
            sum += term;
            if term.abs() < 1e-18 {
                break;
            }
        }
        return Ok(sum);
    }
    let opts = EvalOptions::default();
    Ok(2f64.powf(nu) * gamma_real(nu + 1.0) * j_real(nu, z, &opts) * z.powf(-nu))
}
