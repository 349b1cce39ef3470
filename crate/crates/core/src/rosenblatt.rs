//! Rosenblatt-type laws `X₂(Δ)` as weighted chi-square series.
//!
//! The second-order Wiener–Itô integral with kernel
//! `c₂ K_Δ(λ₁ + λ₂) (‖λ₁‖‖λ₂‖)^{-(d-α)/2}` has, after the reflection `λ₂ ↦ -λ₂` allowed by the
//! Hermitian white noise, the same law as `Σ_j μ_j (Z_j² - 1)`, where `μ_j` are the eigenvalues of
//! the positive operator with kernel `T(λ₁, λ₂) = c₂ K_Δ(λ₁ - λ₂) (‖λ₁‖‖λ₂‖)^{-(d-α)/2}`.
//! [`build_kernel`] discretises `T` on a graded frequency mesh inside `‖λ‖ ≤ Λ`, using parity
//! blocks for intervals and rectangles and angular Fourier modes for disks.
//!
//! The Hilbert–Schmidt mass outside the cutoff is estimated in closed form and carried by the
//! sampler as an independent Gaussian term, since it consists of many small eigenvalues.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covmodels::c2_constant;
use crate::error::{Error, Result};
use crate::fieldsim::mix_seed;
use crate::geometry::{distance_integral, volume, DomainSet};
use crate::quad::gauss_legendre;
use crate::specfun::{gamma_real, j_int_sequence};

/// Discretisation controls for [`build_kernel`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelOptions {
    /// Frequency cutoff `Λ`. When absent it is chosen so that the estimated mass beyond `Λ` is
    /// `tail_fraction` of the total, subject to `max_nodes`.
    pub cutoff: Option<f64>,
    pub tail_fraction: f64,
    /// Gauss–Legendre nodes per radial panel.
    pub nodes_per_panel: usize,
    /// Nodes in the graded panel at the origin.
    pub origin_nodes: usize,
    /// Upper bound on the size of any single block.
    pub max_nodes: usize,
}

impl Default for KernelOptions {
    fn default() -> Self {
        KernelOptions { cutoff: None, tail_fraction: 0.01, nodes_per_panel: 8, origin_nodes: 16, max_nodes: 2400 }
    }
}

/// One diagonal block of the discretised operator, repeated `multiplicity` times.
#[derive(Clone, Debug)]
pub struct KernelBlock {
    pub label: String,
    pub multiplicity: usize,
    pub matrix: DMatrix<f64>,
}

/// Block-diagonal Nyström discretisation of the Rosenblatt kernel.
#[derive(Clone, Debug)]
pub struct RosenblattKernel {
    pub set: DomainSet,
    pub alpha: f64,
    pub cutoff: f64,
    pub blocks: Vec<KernelBlock>,
    /// Closed-form estimate of `‖T‖²_HS` restricted to `‖λ‖ > Λ`.
    pub cutoff_tail_hs2: f64,
}

impl RosenblattKernel {
    /// `Σ_i M_ii` over all blocks, counting multiplicities.
    pub fn trace(&self) -> f64 {
        self.blocks.iter().map(|b| b.multiplicity as f64 * b.matrix.trace()).sum()
    }

    /// Squared Frobenius norm over all blocks, counting multiplicities.
    pub fn frobenius_sq(&self) -> f64 {
        self.blocks.iter().map(|b| b.multiplicity as f64 * b.matrix.norm_squared()).sum()
    }

    /// Largest block dimension.
    pub fn max_block_size(&self) -> usize {
        self.blocks.iter().map(|b| b.matrix.nrows()).max().unwrap_or(0)
    }
}

fn sphere_area(d: u32) -> f64 {
    let df = d as f64;
    2.0 * PI.powf(df / 2.0) / gamma_real(df / 2.0)
}

/// `c₂²(2π)^d |Δ| |S^{d-1}| Λ^{2α-d}/(d-2α)`: mass of `T` beyond `Λ` for large `Λ`.
fn tail_hs2(set: &DomainSet, alpha: f64, cutoff: f64) -> Result<f64> {
    let d = set.dim();
    let df = d as f64;
    let c2 = c2_constant(d, alpha)?;
    Ok(c2 * c2 * (2.0 * PI).powf(df) * volume(set, 1.0)? * sphere_area(d) * cutoff.powf(2.0 * alpha - df) / (df - 2.0 * alpha))
}

/// `2 ∫_Δ∫_Δ ‖u - v‖^{-2α} du dv`, the variance of `X₂(Δ)`.
pub fn variance_oracle(set: &DomainSet, alpha: f64) -> Result<f64> {
    let d = set.dim() as f64;
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
    }
    if alpha >= d / 2.0 {
        return Err(Error::Integrability(format!("alpha = {alpha} is not below d/2 = {}; the variance diverges", d / 2.0)));
    }
    Ok(2.0 * distance_integral(set, 1.0, |z| z.powf(-2.0 * alpha))?)
}

/// Radial nodes and weights `ω_i` for the measure `ρ^{α-1} dρ` on `(0, Λ]`.
///
/// The first panel `[0, ρ_c]` is mapped by `ρ = ρ_c t^{1/α}`, which turns the measure into
/// `(ρ_c^α/α) dt`; the remaining panels of width `width` use plain Gauss–Legendre rules.
fn radial_nodes(alpha: f64, width: f64, cutoff: f64, q: usize, q0: usize) -> (Vec<f64>, Vec<f64>) {
    let rc = width.min(cutoff);
    let (x0, w0) = gauss_legendre(q0);
    let mut rho = Vec::new();
    let mut omega = Vec::new();
    for (x, w) in x0.iter().zip(&w0) {
        let t = 0.5 * (x + 1.0);
        rho.push(rc * t.powf(1.0 / alpha));
        omega.push(0.5 * w * rc.powf(alpha) / alpha);
    }
    let (xg, wg) = gauss_legendre(q);
    let panels = ((cutoff - rc) / width).ceil().max(0.0) as usize;
    let step = if panels > 0 { (cutoff - rc) / panels as f64 } else { 0.0 };
    for k in 0..panels {
        let (lo, hi) = (rc + k as f64 * step, rc + (k + 1) as f64 * step);
        for (x, w) in xg.iter().zip(&wg) {
            let r = 0.5 * (lo + hi) + 0.5 * (hi - lo) * x;
            rho.push(r);
            omega.push(0.5 * (hi - lo) * w * r.powf(alpha - 1.0));
        }
    }
    (rho, omega)
}

fn radial_count(width: f64, cutoff: f64, q: usize, q0: usize) -> usize {
    q0 + q * ((cutoff - width.min(cutoff)) / width).ceil().max(0.0) as usize
}

fn symmetric_half_widths(set: &DomainSet) -> Result<Vec<f64>> {
    if !set.is_origin_symmetric() {
        return Err(Error::Unsupported("the Rosenblatt kernel requires an origin-symmetric set".into()));
    }
    Ok(match set {
        DomainSet::Ball { radius, d } => vec![*radius; *d as usize],
        DomainSet::Rect { b, .. } => b.clone(),
    })
}

/// Discretises the Rosenblatt kernel of `Δ` and `α`.
pub fn build_kernel(set: &DomainSet, alpha: f64, opts: &KernelOptions) -> Result<RosenblattKernel> {
    set.validate()?;
    let d = set.dim();
    let df = d as f64;
    if !(alpha > 0.0 && alpha < df / 2.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, d/2) = (0, {}), got {alpha}", df / 2.0)));
    }
    if opts.nodes_per_panel < 2 || opts.origin_nodes < 2 || !(opts.tail_fraction > 0.0 && opts.tail_fraction < 1.0) {
        return Err(Error::Parameter("kernel options need at least two nodes per panel and a tail fraction in (0, 1)".into()));
    }
    let half = symmetric_half_widths(set)?;
    let diam = crate::geometry::diameter(set, 1.0)?;
    let width = PI / diam;
    let (q, q0) = (opts.nodes_per_panel, opts.origin_nodes);
    let hs_total = 0.5 * variance_oracle(set, alpha)?;

    let mut cutoff = match opts.cutoff {
        Some(c) if c > 0.0 && c.is_finite() => c,
        Some(c) => return Err(Error::Parameter(format!("cutoff must be positive, got {c}"))),
        None => {
            let unit = tail_hs2(set, alpha, 1.0)?;
            (opts.tail_fraction * hs_total / unit).powf(1.0 / (2.0 * alpha - df))
        }
    };
    let block_size = |cut: f64| -> usize {
        let nr = radial_count(width, cut, q, q0);
        match (set, d) {
            (DomainSet::Rect { .. }, 2) => angular_counts(width, cut, q, q0).iter().sum(),
            _ => nr,
        }
    };
    if opts.cutoff.is_none() {
        while block_size(cutoff) > opts.max_nodes && cutoff > 2.0 * width {
            cutoff *= 0.9;
        }
    }
    if block_size(cutoff) > opts.max_nodes {
        return Err(Error::Parameter(format!(
            "cutoff {cutoff:.1} needs blocks of {} nodes, above max_nodes = {}",
            block_size(cutoff),
            opts.max_nodes
        )));
    }

    let c2 = c2_constant(d, alpha)?;
    let blocks = match (set, d) {
        (_, 1) => interval_blocks(half[0], alpha, c2, width, cutoff, q, q0),
        (DomainSet::Ball { radius, .. }, 2) => disk_blocks(*radius, alpha, c2, width, cutoff, q, q0),
        (DomainSet::Rect { .. }, 2) => rectangle_blocks(half[0], half[1], alpha, c2, width, cutoff, q, q0),
        _ => return Err(Error::Unsupported(format!("Rosenblatt kernels are implemented for d = 1 and 2, got d = {d}"))),
    };
    Ok(RosenblattKernel { set: set.clone(), alpha, cutoff, blocks, cutoff_tail_hs2: tail_hs2(set, alpha, cutoff)? })
}

/// `∫_{-h}^{h} e^{ixu} du`.
fn interval_k(h: f64, x: f64) -> f64 {
    let y = h * x;
    if y.abs() < 1e-4 {
        2.0 * h * (1.0 - y * y / 6.0)
    } else {
        2.0 * y.sin() / x
    }
}

fn interval_blocks(h: f64, alpha: f64, c2: f64, width: f64, cutoff: f64, q: usize, q0: usize) -> Vec<KernelBlock> {
    let (lam, om) = radial_nodes(alpha, width, cutoff, q, q0);
    let n = lam.len();
    let s: Vec<f64> = om.iter().map(|w| (c2 * w).sqrt()).collect();
    let mut even = DMatrix::zeros(n, n);
    let mut odd = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let a = interval_k(h, lam[i] - lam[j]);
            let b = interval_k(h, lam[i] + lam[j]);
            let f = s[i] * s[j];
            even[(i, j)] = f * (a + b);
            odd[(i, j)] = f * (a - b);
            even[(j, i)] = even[(i, j)];
            odd[(j, i)] = odd[(i, j)];
        }
    }
    vec![
        KernelBlock { label: "even".into(), multiplicity: 1, matrix: even },
        KernelBlock { label: "odd".into(), multiplicity: 1, matrix: odd },
    ]
}

fn disk_blocks(radius: f64, alpha: f64, c2: f64, width: f64, cutoff: f64, q: usize, q0: usize) -> Vec<KernelBlock> {
    let (rho, om) = radial_nodes(alpha, width, cutoff, q, q0);
    let n = rho.len();
    let x = cutoff * radius;
    let m_max = (x + 10.0 * x.cbrt()).ceil() as usize + 10;
    let ns = (0.75 * x).ceil() as usize + 24;
    let (sx, sw) = gauss_legendre(ns);
    let s: Vec<f64> = sx.iter().map(|v| 0.5 * radius * (v + 1.0)).collect();
    let sv: Vec<f64> = sw.iter().zip(&s).map(|(w, si)| (0.5 * radius * w * si).sqrt()).collect();
    // J_m(ρ_i s_k) for all orders at once.
    let table: Vec<Vec<Vec<f64>>> = rho.iter().map(|r| s.iter().map(|sk| j_int_sequence(r * sk, m_max)).collect()).collect();
    (0..=m_max)
        .into_par_iter()
        .map(|m| {
            let mut b = DMatrix::zeros(n, ns);
            for i in 0..n {
                let f = 2.0 * PI * (c2 * om[i]).sqrt();
                for k in 0..ns {
                    b[(i, k)] = f * table[i][k][m] * sv[k];
                }
            }
            KernelBlock { label: format!("mode {m}"), multiplicity: if m == 0 { 1 } else { 2 }, matrix: &b * b.transpose() }
        })
        .collect()
}

fn angular_counts(width: f64, cutoff: f64, q: usize, q0: usize) -> Vec<usize> {
    let (rho, _) = radial_nodes(0.5, width, cutoff, q, q0);
    rho.iter().map(|r| (q as f64 * (0.5 * PI * r / width).ceil()).max(q as f64) as usize).collect()
}

#[allow(clippy::too_many_arguments)]
fn rectangle_blocks(hx: f64, hy: f64, alpha: f64, c2: f64, width: f64, cutoff: f64, q: usize, q0: usize) -> Vec<KernelBlock> {
    let (rho, om) = radial_nodes(alpha, width, cutoff, q, q0);
    let counts = angular_counts(width, cutoff, q, q0);
    let mut px = Vec::new();
    let mut py = Vec::new();
    let mut sw = Vec::new();
    for ((r, w), na) in rho.iter().zip(&om).zip(&counts) {
        let (ax, aw) = gauss_legendre(*na);
        for (t, v) in ax.iter().zip(&aw) {
            let phi = 0.25 * PI * (t + 1.0);
            px.push(r * phi.cos());
            py.push(r * phi.sin());
            sw.push((c2 * w * 0.25 * PI * v).sqrt());
        }
    }
    let n = px.len();
    let parities = [(1.0, 1.0, "even-even"), (1.0, -1.0, "even-odd"), (-1.0, 1.0, "odd-even"), (-1.0, -1.0, "odd-odd")];
    parities
        .par_iter()
        .map(|(sx, sy, label)| {
            let mut m = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..=i {
                    let kxm = interval_k(hx, px[i] - px[j]);
                    let kxp = interval_k(hx, px[i] + px[j]);
                    let kym = interval_k(hy, py[i] - py[j]);
                    let kyp = interval_k(hy, py[i] + py[j]);
                    let v = sw[i] * sw[j] * (kxm + sx * kxp) * (kym + sy * kyp);
                    m[(i, j)] = v;
                    m[(j, i)] = v;
                }
            }
            KernelBlock { label: label.to_string(), multiplicity: 1, matrix: m }
        })
        .collect()
}

/// Truncated chi-square series `Σ_{j≤m} μ_j (Z_j² - 1) + σ_G Z_0`.
///
/// `σ_G² = gaussian_variance` collects the discarded eigenvalues and the mass beyond the cutoff.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenSeries {
    /// Leading eigenvalues, decreasing in magnitude.
    pub eigenvalues: Vec<f64>,
    pub gaussian_variance: f64,
    /// `Σ μ_j²` of the eigenvalues dropped by truncation.
    pub discarded_hs2: f64,
    /// Estimated `‖T‖²_HS` beyond the frequency cutoff.
    pub cutoff_tail_hs2: f64,
    /// Factor applied by [`EigenSeries::calibrate`]; `1` before calibration.
    pub calibration: f64,
}

/// Eigenvalues of all blocks, sorted by decreasing magnitude and truncated to `m` terms.
///
/// With `m = None` the smallest `m` leaving at most `0.25 %` of the discretised mass is used.
pub fn eigen_series(kernel: &RosenblattKernel, m: Option<usize>) -> Result<EigenSeries> {
    let per_block: Vec<Vec<f64>> = kernel.blocks.par_iter().map(|b| b.matrix.symmetric_eigenvalues().as_slice().to_vec()).collect();
    let mut all = Vec::new();
    for (b, eig) in kernel.blocks.iter().zip(per_block) {
        if eig.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("eigen-decomposition of block {} produced non-finite values", b.label)));
        }
        for v in eig {
            for _ in 0..b.multiplicity {
                all.push(v);
            }
        }
    }
    all.sort_by(|a, b| b.abs().partial_cmp(&a.abs()).unwrap());
    let total: f64 = all.iter().map(|v| v * v).sum();
    let keep = match m {
        Some(m) if m > all.len() => {
            return Err(Error::Parameter(format!("requested {m} eigenvalues but the kernel has {}", all.len())));
        }
        Some(m) => m,
        None => {
            let mut acc = 0.0;
            let mut k = all.len();
            for (i, v) in all.iter().enumerate() {
                acc += v * v;
                if total - acc <= 0.0025 * total {
                    k = i + 1;
                    break;
                }
            }
            k
        }
    };
    let discarded: f64 = all[keep..].iter().map(|v| v * v).sum();
    all.truncate(keep);
    Ok(EigenSeries {
        eigenvalues: all,
        gaussian_variance: 2.0 * (discarded + kernel.cutoff_tail_hs2),
        discarded_hs2: discarded,
        cutoff_tail_hs2: kernel.cutoff_tail_hs2,
        calibration: 1.0,
    })
}

impl EigenSeries {
    /// Series built from explicit eigenvalues with no Gaussian remainder.
    pub fn from_eigenvalues(mut eigenvalues: Vec<f64>) -> Self {
        eigenvalues.sort_by(|a, b| b.abs().partial_cmp(&a.abs()).unwrap());
        EigenSeries { eigenvalues, gaussian_variance: 0.0, discarded_hs2: 0.0, cutoff_tail_hs2: 0.0, calibration: 1.0 }
    }

    /// `2 Σ μ_j² + σ_G²`.
    pub fn variance(&self) -> f64 {
        2.0 * self.eigenvalues.iter().map(|v| v * v).sum::<f64>() + self.gaussian_variance
    }

    /// Share of the variance carried by the Gaussian remainder.
    pub fn tail_mass(&self) -> f64 {
        self.gaussian_variance / self.variance()
    }

    /// Rescales everything by one factor so that the variance equals `target`.
    ///
    /// Returns the factor, or [`Error::Accuracy`] (leaving the series unchanged) when it falls
    /// outside `[0.97, 1.03]`.
    pub fn calibrate(&mut self, target: f64) -> Result<f64> {
        let c = (target / self.variance()).sqrt();
        if !(0.97..=1.03).contains(&c) {
            return Err(Error::Accuracy(format!("calibration factor {c:.4} is outside [0.97, 1.03]")));
        }
        for v in self.eigenvalues.iter_mut() {
            *v *= c;
        }
        self.gaussian_variance *= c * c;
        self.discarded_hs2 *= c * c;
        self.cutoff_tail_hs2 *= c * c;
        self.calibration *= c;
        Ok(c)
    }

    /// Draws `n` independent variates; output depends only on `(n, seed)`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::Input("sample size must be at least 1".into()));
        }
        const CHUNK: usize = 4096;
        let sg = self.gaussian_variance.sqrt();
        let chunks: Vec<Vec<f64>> = (0..n.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| {
                let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(&[seed, c as u64]));
                let len = CHUNK.min(n - c * CHUNK);
                (0..len)
                    .map(|_| {
                        let mut x = 0.0;
                        for mu in &self.eigenvalues {
                            let z: f64 = StandardNormal.sample(&mut rng);
                            x += mu * (z * z - 1.0);
                        }
                        let z: f64 = StandardNormal.sample(&mut rng);
                        x + sg * z
                    })
                    .collect()
            })
            .collect();
        Ok(chunks.concat())
    }
}

/// `p`-th cumulant `2^{p-1}(p-1)! Σ μ_j^p`; for `p = 2` the Gaussian remainder is included.
pub fn cumulant(series: &EigenSeries, p: u32) -> Result<f64> {
    if p < 2 {
        return Err(Error::Domain(format!("cumulant order must be at least 2, got {p}")));
    }
    let fact: f64 = (1..p).map(|k| k as f64).product();
    let s: f64 = series.eigenvalues.iter().map(|v| v.powi(p as i32)).sum();
    let extra = if p == 2 { series.gaussian_variance } else { 0.0 };
    Ok(2f64.powi(p as i32 - 1) * fact * s + extra)
}

/// Gaussian kernel density estimate on a regular grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityTable {
    pub x: Vec<f64>,
    pub density: Vec<f64>,
    pub max: f64,
    pub bandwidth: f64,
}

/// Silverman's rule-of-thumb bandwidth.
pub fn silverman_bandwidth(samples: &[f64]) -> f64 {
    let n = samples.len() as f64;
    let sd = crate::stats::variance(samples).sqrt();
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let iqr = sorted[(0.75 * (n - 1.0)) as usize] - sorted[(0.25 * (n - 1.0)) as usize];
    0.9 * sd.min(iqr / 1.34) * n.powf(-0.2)
}

/// KDE evaluated on 1024 points spanning the sample range plus four bandwidths each side.
pub fn density_estimate(samples: &[f64], bandwidth: f64) -> Result<DensityTable> {
    if samples.len() < 10_000 {
        return Err(Error::Input(format!("density estimation needs at least 10^4 samples, got {}", samples.len())));
    }
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(Error::Parameter(format!("bandwidth must be positive, got {bandwidth}")));
    }
    let lo = samples.iter().cloned().fold(f64::INFINITY, f64::min) - 4.0 * bandwidth;
    let hi = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 4.0 * bandwidth;
    // Linear binning on a fine grid, then direct convolution with the Gaussian kernel.
    let nb = 8192;
    let db = (hi - lo) / (nb - 1) as f64;
    let mut bins = vec![0.0; nb];
    for x in samples {
        let t = (x - lo) / db;
        let k = (t.floor() as usize).min(nb - 2);
        let f = t - k as f64;
        bins[k] += 1.0 - f;
        bins[k + 1] += f;
    }
    let ng = 1024;
    let dg = (hi - lo) / (ng - 1) as f64;
    let norm = 1.0 / (samples.len() as f64 * bandwidth * (2.0 * PI).sqrt());
    let reach = (6.0 * bandwidth / db).ceil() as isize;
    let x: Vec<f64> = (0..ng).map(|i| lo + i as f64 * dg).collect();
    let density: Vec<f64> = x
        .par_iter()
        .map(|xg| {
            let c = ((xg - lo) / db).round() as isize;
            let mut s = 0.0;
            for k in (c - reach).max(0)..=(c + reach).min(nb as isize - 1) {
                let u = (xg - (lo + k as f64 * db)) / bandwidth;
                s += bins[k as usize] * (-0.5 * u * u).exp();
            }
            s * norm
        })
        .collect();
    let max = density.iter().cloned().fold(0.0, f64::max);
    Ok(DensityTable { x, density, max, bandwidth })
}

/// Calibrated reference series for `(Δ, α)` with its raw variance and calibration factor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub series: EigenSeries,
    pub oracle_variance: f64,
    pub raw_variance: f64,
    pub calibration: f64,
}

/// Builds, decomposes and calibrates the series for `(Δ, α)` with default options.
pub fn reference_series(set: &DomainSet, alpha: f64) -> Result<Reference> {
    let kernel = build_kernel(set, alpha, &KernelOptions::default())?;
    let mut series = eigen_series(&kernel, None)?;
    let oracle = variance_oracle(set, alpha)?;
    let raw = series.variance();
    let c = series.calibrate(oracle)?;
    Ok(Reference { series, oracle_variance: oracle, raw_variance: raw, calibration: c })
}
