//! Convex observation windows: balls and origin-containing rectangles.
//!
//! A [`DomainSet`] `Δ` is always given at unit scale; operations take the homothety factor `r`
//! explicitly and act on `Δ(r) = {r·x : x ∈ Δ}`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{gauss_legendre, integrate_breaks, QuadOptions};
use crate::specfun::{gamma_real, ibeta_split, y_d_kernel, EvalOptions};

/// A convex set containing the origin in its interior.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum DomainSet {
    /// Centred Euclidean ball of radius `R` in dimension `d`.
    Ball {
        #[serde(rename = "R")]
        radius: f64,
        d: u32,
    },
    /// Axis-parallel rectangle `Π [a_j, b_j]` with `a_j < 0 < b_j`.
    #[serde(alias = "rectangle")]
    Rect { a: Vec<f64>, b: Vec<f64> },
}

impl DomainSet {
    /// Ball of radius `radius` in dimension `d`.
    pub fn ball(d: u32, radius: f64) -> Result<Self> {
        let s = DomainSet::Ball { radius, d };
        s.validate()?;
        Ok(s)
    }

    /// Rectangle with lower corner `a` and upper corner `b`.
    pub fn rect(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        let s = DomainSet::Rect { a, b };
        s.validate()?;
        Ok(s)
    }

    /// Symmetric interval or box `[-h_j, h_j]`.
    pub fn centered_box(half_widths: &[f64]) -> Result<Self> {
        DomainSet::rect(half_widths.iter().map(|h| -h).collect(), half_widths.to_vec())
    }

    /// Checks the set invariants.
    pub fn validate(&self) -> Result<()> {
        match self {
            DomainSet::Ball { radius, d } => {
                if *d == 0 {
                    return Err(Error::Parameter("dimension must be at least 1".into()));
                }
                if !(*radius > 0.0 && radius.is_finite()) {
                    return Err(Error::Parameter(format!("ball radius must be positive, got {radius}")));
                }
            }
            DomainSet::Rect { a, b } => {
                if a.is_empty() || a.len() != b.len() {
                    return Err(Error::Parameter("rectangle corners must be non-empty and of equal length".into()));
                }
                for (lo, hi) in a.iter().zip(b) {
                    if !(*lo < 0.0 && *hi > 0.0 && lo.is_finite() && hi.is_finite()) {
                        return Err(Error::Parameter(format!(
                            "rectangle sides must satisfy a_j < 0 < b_j, got [{lo}, {hi}]"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Dimension of the ambient space.
    pub fn dim(&self) -> u32 {
        match self {
            DomainSet::Ball { d, .. } => *d,
            DomainSet::Rect { a, .. } => a.len() as u32,
        }
    }

    /// `true` when `Δ = -Δ`, in which case the Fourier transform is real.
    pub fn is_origin_symmetric(&self) -> bool {
        match self {
            DomainSet::Ball { .. } => true,
            DomainSet::Rect { a, b } => a.iter().zip(b).all(|(lo, hi)| (lo + hi).abs() <= 1e-14 * hi.abs()),
        }
    }

    /// Membership test for `Δ(r)`.
    pub fn contains(&self, r: f64, x: &[f64]) -> bool {
        match self {
            DomainSet::Ball { radius, .. } => x.iter().map(|v| v * v).sum::<f64>() <= (radius * r).powi(2),
            DomainSet::Rect { a, b } => x.iter().zip(a.iter().zip(b)).all(|(v, (lo, hi))| *v >= lo * r && *v <= hi * r),
        }
    }

    /// Smallest axis-parallel box `[lo, hi]` containing `Δ(r)`.
    pub fn bounding_box(&self, r: f64) -> (Vec<f64>, Vec<f64>) {
        match self {
            DomainSet::Ball { radius, d } => (vec![-radius * r; *d as usize], vec![radius * r; *d as usize]),
            DomainSet::Rect { a, b } => (a.iter().map(|v| v * r).collect(), b.iter().map(|v| v * r).collect()),
        }
    }
}

/// Lebesgue measure `|Δ(r)| = r^d |Δ|`.
pub fn volume(set: &DomainSet, r: f64) -> Result<f64> {
    set.validate()?;
    check_scale(r)?;
    Ok(match set {
        DomainSet::Ball { radius, d } => {
            let df = *d as f64;
            PI.powf(df / 2.0) * (radius * r).powf(df) / gamma_real(df / 2.0 + 1.0)
        }
        DomainSet::Rect { a, b } => a.iter().zip(b).map(|(lo, hi)| (hi - lo) * r).product(),
    })
}

/// Diameter of `Δ(r)`.
pub fn diameter(set: &DomainSet, r: f64) -> Result<f64> {
    set.validate()?;
    check_scale(r)?;
    Ok(match set {
        DomainSet::Ball { radius, .. } => 2.0 * radius * r,
        DomainSet::Rect { a, b } => r * a.iter().zip(b).map(|(lo, hi)| (hi - lo).powi(2)).sum::<f64>().sqrt(),
    })
}

fn check_scale(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("scale r must be positive, got {r}")))
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Fourier transform of the indicator, `K_Δ(x) = ∫_Δ e^{i(x,u)} du`.
pub fn indicator_ft(set: &DomainSet, x: &[f64]) -> Result<Complex64> {
    set.validate()?;
    if x.len() != set.dim() as usize {
        return Err(Error::Domain(format!("point has dimension {}, set has {}", x.len(), set.dim())));
    }
    Ok(match set {
        DomainSet::Ball { radius, d } => {
            let s = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            Complex64::new(ball_ft_radial(*d, *radius, s), 0.0)
        }
        DomainSet::Rect { a, b } => {
            let mut acc = Complex64::new(1.0, 0.0);
            for ((lo, hi), xj) in a.iter().zip(b).zip(x) {
                acc *= interval_ft(*lo, *hi, *xj);
            }
            acc
        }
    })
}

/// `∫_a^b e^{ixu} du = (b-a) sinc((b-a)x/2) e^{i(a+b)x/2}`.
pub(crate) fn interval_ft(a: f64, b: f64, x: f64) -> Complex64 {
    let m = (b - a) * sinc(0.5 * (b - a) * x);
    Complex64::from_polar(1.0, 0.5 * (a + b) * x) * m
}

/// Radial profile of the ball transform, `|B_R| Y_{d+2}(R s)`.
pub(crate) fn ball_ft_radial(d: u32, radius: f64, s: f64) -> f64 {
    let df = d as f64;
    let vol = PI.powf(df / 2.0) * radius.powf(df) / gamma_real(df / 2.0 + 1.0);
    vol * y_d_kernel(d + 2, radius * s).expect("non-negative argument")
}

/// Density of `‖X - Y‖` for `X, Y` independent and uniform in `Δ(r)`.
///
/// Balls use the closed incomplete-beta form and rectangles in one and two dimensions use exact
/// expressions. Rectangles in three or more dimensions use a cached Monte Carlo histogram with
/// `10⁶` pairs and 512 bins; see [`distance_pdf_is_exact`].
pub fn distance_pdf(set: &DomainSet, r: f64, z: f64) -> Result<f64> {
    set.validate()?;
    check_scale(r)?;
    if !(z >= 0.0) {
        return Err(Error::Domain(format!("distance must be non-negative, got {z}")));
    }
    if z > diameter(set, r)? {
        return Ok(0.0);
    }
    let opts = EvalOptions::default();
    match set {
        DomainSet::Ball { radius, d } => {
            let rho = radius * r;
            let df = *d as f64;
            let s = z / (2.0 * rho);
            let s2 = s * s;
            let i = ibeta_split(1.0 - s2, s2, (df + 1.0) / 2.0, 0.5, &opts)?;
            Ok(df * rho.powf(-df) * z.powf(df - 1.0) * i)
        }
        DomainSet::Rect { a, b } => {
            let sides: Vec<f64> = a.iter().zip(b).map(|(lo, hi)| (hi - lo) * r).collect();
            match sides.len() {
                1 => {
                    let l = sides[0];
                    Ok(2.0 * (l - z) / (l * l))
                }
                2 => Ok(rect2_distance_pdf(sides[0], sides[1], z)),
                _ => {
                    let h = rect_histogram(&sides.iter().map(|s| s / r).collect::<Vec<_>>());
                    Ok(h.density(z / r) / r)
                }
            }
        }
    }
}

/// `false` when [`distance_pdf`] is a Monte Carlo estimate rather than a closed form.
pub fn distance_pdf_is_exact(set: &DomainSet) -> bool {
    match set {
        DomainSet::Ball { .. } => true,
        DomainSet::Rect { a, .. } => a.len() <= 2,
    }
}

fn triangular(l: f64, u: f64) -> f64 {
    let u = u.abs();
    if u >= l {
        0.0
    } else {
        (l - u) / (l * l)
    }
}

fn rect2_distance_pdf(l1: f64, l2: f64, z: f64) -> f64 {
    if z == 0.0 {
        return 0.0;
    }
    let lo = if z > l1 { (l1 / z).acos() } else { 0.0 };
    let hi = if z > l2 { (l2 / z).asin() } else { PI / 2.0 };
    if hi <= lo {
        return 0.0;
    }
    // The integrand is a trigonometric polynomial of low degree on [lo, hi].
    static NODES: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    let (x, w) = NODES.get_or_init(|| gauss_legendre(24));
    let (c, h) = (0.5 * (hi + lo), 0.5 * (hi - lo));
    let mut s = 0.0;
    for (xi, wi) in x.iter().zip(w) {
        let phi = c + h * xi;
        s += wi * triangular(l1, z * phi.cos()) * triangular(l2, z * phi.sin());
    }
    4.0 * z * h * s
}

const HIST_BINS: usize = 512;
const HIST_PAIRS: usize = 1_000_000;

struct DistanceHistogram {
    diam: f64,
    d: usize,
    density: Vec<f64>,
}

impl DistanceHistogram {
    fn density(&self, z: f64) -> f64 {
        if z >= self.diam || z < 0.0 {
            return 0.0;
        }
        let h = self.diam / HIST_BINS as f64;
        let k = ((z / h) as usize).min(HIST_BINS - 1);
        if k == 0 {
            // Keep the exact z^{d-1} behaviour at the origin inside the first bin.
            let mass = self.density[0] * h;
            mass * self.d as f64 * z.powi(self.d as i32 - 1) / h.powi(self.d as i32)
        } else {
            self.density[k]
        }
    }
}

fn rect_histogram(sides: &[f64]) -> Arc<DistanceHistogram> {
    static CACHE: OnceLock<Mutex<HashMap<Vec<u64>, Arc<DistanceHistogram>>>> = OnceLock::new();
    let key: Vec<u64> = sides.iter().map(|s| s.to_bits()).collect();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(h) = cache.lock().expect("histogram cache poisoned").get(&key) {
        return h.clone();
    }
    let diam = sides.iter().map(|s| s * s).sum::<f64>().sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_d157);
    let mut counts = vec![0u64; HIST_BINS];
    let h = diam / HIST_BINS as f64;
    for _ in 0..HIST_PAIRS {
        let mut s = 0.0;
        for l in sides {
            let u = l * (rng.random::<f64>() - rng.random::<f64>());
            s += u * u;
        }
        let k = ((s.sqrt() / h) as usize).min(HIST_BINS - 1);
        counts[k] += 1;
    }
    let density = counts.iter().map(|c| *c as f64 / (HIST_PAIRS as f64 * h)).collect();
    let hist = Arc::new(DistanceHistogram { diam, d: sides.len(), density });
    cache.lock().expect("histogram cache poisoned").insert(key, hist.clone());
    hist
}

/// `n` independent uniform points in `Δ(r)`, by rejection from the bounding box.
pub fn uniform_sample(set: &DomainSet, r: f64, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    set.validate()?;
    check_scale(r)?;
    if n == 0 {
        return Err(Error::Input("sample size must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = set.bounding_box(r);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let p: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| a + (b - a) * rng.random::<f64>()).collect();
        if set.contains(r, &p) {
            out.push(p);
        }
    }
    Ok(out)
}

/// `∫_{Δ(r)}∫_{Δ(r)} ϒ(‖x-y‖) dx dy = |Δ(r)|² ∫ ϒ(z) ψ_{Δ(r)}(z) dz`.
///
/// The local power of `ϒ·ψ` at the origin is probed first; an exponent at or below `-1`
/// means the integral diverges and yields [`Error::Integrability`].
pub fn distance_integral<F: Fn(f64) -> f64>(set: &DomainSet, r: f64, upsilon: F) -> Result<f64> {
    let vol = volume(set, r)?;
    let diam = diameter(set, r)?;
    let g = |z: f64| -> f64 {
        if z <= 0.0 {
            return 0.0;
        }
        upsilon(z) * distance_pdf(set, r, z).unwrap_or(0.0)
    };
    let (z1, z2) = (diam * 1e-9, diam * 1e-7);
    let (g1, g2) = (g(z1), g(z2));
    let p = if g1 != 0.0 && g2 != 0.0 && g1.is_finite() && g2.is_finite() {
        (g2.abs() / g1.abs()).ln() / (z2 / z1).ln()
    } else if !g1.is_finite() {
        f64::NEG_INFINITY
    } else {
        0.0
    };
    if p <= -1.0 + 1e-6 {
        return Err(Error::Integrability(format!(
            "integrand behaves like z^{p:.4} at the origin; the distance integral diverges"
        )));
    }
    // On [0, zc] substitute z = zc t^k with k = 1/(p+1) so the integrand is bounded.
    let zc = diam * 1e-3;
    let k = (1.0 / (p + 1.0)).clamp(1.0, 60.0);
    let head = integrate_breaks(
        |t: f64| {
            if t <= 0.0 {
                return 0.0;
            }
            let z = zc * t.powf(k);
            g(z) * zc * k * t.powf(k - 1.0)
        },
        0.0,
        1.0,
        &[],
        &QuadOptions::new(0.0, 1e-11, 4000),
    );
    let mut breaks = vec![];
    let mut b = zc * 4.0;
    while b < diam {
        breaks.push(b);
        b *= 4.0;
    }
    if let DomainSet::Rect { a, b: hi } = set {
        // Kinks of the distance pdf where z crosses a side length.
        breaks.extend(a.iter().zip(hi).map(|(lo, up)| (up - lo) * r));
    }
    let tail = integrate_breaks(&g, zc, diam, &breaks, &QuadOptions::new(0.0, 1e-11, 20_000));
    if !(head.converged && tail.converged) || !(head.value + tail.value).is_finite() {
        return Err(Error::Integrability(format!(
            "adaptive refinement of the distance integral did not settle (error estimates {:.2e}, {:.2e})",
            head.abs_err, tail.abs_err
        )));
    }
    Ok(vol * vol * (head.value + tail.value))
}

/// Spherical average `(1/|S^{d-1}|) ∫ |K_Δ(zω)|² dω`.
pub fn spherical_l2_average(set: &DomainSet, z: f64) -> Result<f64> {
    set.validate()?;
    match set {
        DomainSet::Ball { radius, d } => Ok(ball_ft_radial(*d, *radius, z).powi(2)),
        DomainSet::Rect { .. } => match set.dim() {
            1 => Ok(0.5 * (indicator_ft(set, &[z])?.norm_sqr() + indicator_ft(set, &[-z])?.norm_sqr())),
            2 => {
                let n = (8.0 * z * diameter(set, 1.0)?).ceil().max(64.0) as usize;
                let mut s = 0.0;
                for k in 0..n {
                    let phi = 2.0 * PI * (k as f64 + 0.5) / n as f64;
                    s += indicator_ft(set, &[z * phi.cos(), z * phi.sin()])?.norm_sqr();
                }
                Ok(s / n as f64)
            }
            _ => Err(Error::Unsupported("spherical averages of rectangles are implemented for d <= 2".into())),
        },
    }
}

/// Log-log slope of the window-averaged spherical `L²` average over `[z_lo, z_hi]`.
///
/// Each sample averages over a window `[z, 1.25 z]` to remove the oscillation zeros, so the
/// slope estimates the envelope exponent `-(d+1)`.
pub fn spherical_l2_decay_exponent(set: &DomainSet, z_lo: f64, z_hi: f64) -> Result<f64> {
    if !(z_lo > 0.0 && z_hi > z_lo) {
        return Err(Error::Domain("need 0 < z_lo < z_hi".into()));
    }
    let n = 16;
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for i in 0..n {
        let z = z_lo * (z_hi / z_lo).powf(i as f64 / (n - 1) as f64);
        let m = 200;
        let mut s = 0.0;
        for j in 0..m {
            s += spherical_l2_average(set, z * (1.0 + 0.25 * (j as f64 + 0.5) / m as f64))?;
        }
        xs.push(z.ln());
        ys.push((s / m as f64).ln());
    }
    Ok(crate::stats::ols_slope(&xs, &ys)?.0)
}
