//! Small descriptive-statistics helpers shared by the experiment drivers and tests.

use crate::error::{Error, Result};

/// Arithmetic mean.
pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Unbiased sample variance.
pub fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() as f64 - 1.0)
}

/// Unbiased estimates (k-statistics) of the second and third cumulants.
pub fn k_statistics(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = mean(x);
    let (mut s2, mut s3) = (0.0, 0.0);
    for v in x {
        let c = v - m;
        s2 += c * c;
        s3 += c * c * c;
    }
    let k2 = s2 / (n - 1.0);
    let k3 = n * s3 / ((n - 1.0) * (n - 2.0));
    (k2, k3)
}

/// Ordinary least-squares fit `y ≈ a + b x`, returning `(b, stderr(b), a)`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    if x.len() != y.len() {
        return Err(Error::Input("x and y must have equal length".into()));
    }
    if x.len() < 3 {
        return Err(Error::DegenerateFit(format!("need at least 3 points, got {}", x.len())));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Input("regression data must be finite".into()));
    }
    let n = x.len() as f64;
    let mx = mean(x);
    let my = mean(y);
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if !(sxx > 0.0) {
        return Err(Error::DegenerateFit("regressor has zero spread".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let rss: f64 = x.iter().zip(y).map(|(u, v)| (v - a - b * u).powi(2)).sum();
    let se = (rss / (n - 2.0) / sxx).sqrt();
    Ok((b, se, a))
}
