//! Hermite expansions `G(w) = Σ C_j H_j(w)/j!` with respect to the standard normal weight.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{gauss_hermite_normal, integrate_breaks, QuadOptions};
use crate::specfun::{hermite_poly, hermite_poly_all};

/// Half-width of the integration window used by the piecewise route; `φ(14) ≈ 1e-43`.
const WINDOW: f64 = 14.0;

/// Coefficients `C_0, …, C_J` of a Hermite expansion together with `E G(W)²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HermiteExpansion {
    pub coeffs: Vec<f64>,
    pub second_moment: f64,
}

impl HermiteExpansion {
    /// Truncation order `J`.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }
}

fn factorial(j: usize) -> f64 {
    (2..=j).fold(1.0, |acc, k| acc * k as f64)
}

fn gh_moments<G: Fn(f64) -> f64>(g: &G, j_max: usize, n: usize) -> (Vec<f64>, f64) {
    let (x, w) = gauss_hermite_normal(n);
    let mut c = vec![0.0; j_max + 1];
    let mut h = vec![0.0; j_max + 1];
    let mut m2 = 0.0;
    for (xi, wi) in x.iter().zip(&w) {
        let gv = g(*xi);
        hermite_poly_all(*xi, &mut h);
        for (cj, hj) in c.iter_mut().zip(&h) {
            *cj += wi * gv * hj;
        }
        m2 += wi * gv * gv;
    }
    (c, m2)
}

/// `C_j = E[G(W) H_j(W)]` by Gauss–Hermite quadrature with `quad_order` nodes.
///
/// The result is cross-checked against a rule of twice the order. Disagreement beyond
/// `1e-8` in the normalised coefficients `C_j/√j!` yields [`Error::Accuracy`]; for functionals
/// with kinks use [`hermite_coefficients_piecewise`].
pub fn hermite_coefficients<G: Fn(f64) -> f64>(g: G, j_max: usize, quad_order: usize) -> Result<HermiteExpansion> {
    if quad_order < 2 * j_max.max(1) {
        return Err(Error::Parameter(format!("quad_order {quad_order} must be at least 2J = {}", 2 * j_max)));
    }
    let (c, m2) = gh_moments(&g, j_max, quad_order);
    let (c2, m2b) = gh_moments(&g, j_max, 2 * quad_order);
    let scale = m2.abs().sqrt().max(1.0);
    for (j, (a, b)) in c.iter().zip(&c2).enumerate() {
        let diff = (a - b).abs() / factorial(j).sqrt();
        if !(diff <= 1e-8 * scale) {
            return Err(Error::Accuracy(format!(
                "coefficient C_{j} changes by {diff:.2e} between {quad_order} and {} nodes",
                2 * quad_order
            )));
        }
    }
    if !((m2 - m2b).abs() <= 1e-8 * m2.abs().max(1.0)) {
        return Err(Error::Accuracy("second moment unstable under quadrature refinement".into()));
    }
    Ok(HermiteExpansion { coeffs: c, second_moment: m2 })
}

fn normal_pdf(w: f64) -> f64 {
    (-0.5 * w * w).exp() / (2.0 * PI).sqrt()
}

/// `C_j` by adaptive Gauss–Kronrod integration on `[-14, 14]`, split at the given kinks.
pub fn hermite_coefficients_piecewise<G: Fn(f64) -> f64>(g: G, j_max: usize, kinks: &[f64]) -> Result<HermiteExpansion> {
    let opts = QuadOptions::new(1e-15, 1e-13, 4000);
    let mut breaks: Vec<f64> = kinks.to_vec();
    breaks.extend((-6..=6).map(|k| 2.0 * k as f64));
    let mut coeffs = Vec::with_capacity(j_max + 1);
    for j in 0..=j_max {
        let r = integrate_breaks(|w| g(w) * hermite_poly(j, w) * normal_pdf(w), -WINDOW, WINDOW, &breaks, &opts);
        if !r.converged && r.abs_err > 1e-10 * factorial(j).sqrt() {
            return Err(Error::Accuracy(format!("adaptive quadrature for C_{j} left error {:.2e}", r.abs_err)));
        }
        coeffs.push(r.value);
    }
    let m2 = integrate_breaks(|w| g(w).powi(2) * normal_pdf(w), -WINDOW, WINDOW, &breaks, &opts).value;
    Ok(HermiteExpansion { coeffs, second_moment: m2 })
}

/// Smallest `j ≥ 1` with `|C_j| > tol`. A non-positive `tol` selects `1e-8·max_j |C_j|`.
pub fn hermite_rank(exp: &HermiteExpansion, tol: f64) -> Result<usize> {
    let tol = if tol > 0.0 {
        tol
    } else {
        1e-8 * exp.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    };
    exp.coeffs
        .iter()
        .enumerate()
        .skip(1)
        .find(|(_, c)| c.abs() > tol)
        .map(|(j, _)| j)
        .ok_or_else(|| Error::RankUndetected(format!("all coefficients C_1..C_{} are below {tol:.3e}", exp.order())))
}

/// `E G(W)² - Σ_{j≤J} C_j²/j!`.
pub fn parseval_defect(exp: &HermiteExpansion) -> f64 {
    let partial: f64 = exp.coeffs.iter().enumerate().map(|(j, c)| c * c / factorial(j)).sum();
    exp.second_moment - partial
}

/// Partial sum `Σ_{j≤J} C_j H_j(w)/j!`.
pub fn truncated_eval(exp: &HermiteExpansion, w: f64) -> f64 {
    let mut h = vec![0.0; exp.coeffs.len()];
    hermite_poly_all(w, &mut h);
    exp.coeffs.iter().zip(&h).enumerate().map(|(j, (c, hj))| c * hj / factorial(j)).sum()
}

/// Named functionals available from the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Functional {
    /// `H_2(w) = w² - 1`.
    #[serde(rename = "h2")]
    H2,
    /// `w²`.
    #[serde(rename = "square")]
    Square,
    /// `|w| - √(2/π)`.
    #[serde(rename = "abs-centered")]
    AbsCentered,
}

impl Functional {
    /// Looks a functional up by its catalog name.
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "h2" => Ok(Functional::H2),
            "square" => Ok(Functional::Square),
            "abs-centered" => Ok(Functional::AbsCentered),
            other => Err(Error::Input(format!("unknown functional '{other}' (expected h2, square or abs-centered)"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Functional::H2 => "h2",
            Functional::Square => "square",
            Functional::AbsCentered => "abs-centered",
        }
    }

    pub fn eval(&self, w: f64) -> f64 {
        match self {
            Functional::H2 => w * w - 1.0,
            Functional::Square => w * w,
            Functional::AbsCentered => w.abs() - (2.0 / PI).sqrt(),
        }
    }

    /// Points where the functional is not smooth.
    pub fn kinks(&self) -> &'static [f64] {
        match self {
            Functional::AbsCentered => &[0.0],
            _ => &[],
        }
    }

    /// Expansion up to order `j_max`, using Gauss–Hermite for smooth functionals and the
    /// piecewise adaptive route otherwise.
    pub fn expand(&self, j_max: usize) -> Result<HermiteExpansion> {
        let f = *self;
        if self.kinks().is_empty() {
            hermite_coefficients(move |w| f.eval(w), j_max, (2 * j_max).max(40))
        } else {
            hermite_coefficients_piecewise(move |w| f.eval(w), j_max, self.kinks())
        }
    }
}
