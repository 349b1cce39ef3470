//! Lattice simulation of stationary isotropic Gaussian fields by circulant embedding, and the
//! integral functionals `K_r`, `K_{r,2}`, `S_r` built on them.

use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::covmodels::{covariance_eval, CovarianceModel, LongMemoryParams};
use crate::error::{Error, Result};
use crate::geometry::DomainSet;
use crate::hermite::HermiteExpansion;

/// Default torus padding relative to the lattice length.
pub const DEFAULT_PADDING: usize = 4;
const MAX_POINTS_PER_AXIS: usize = 1 << 22;

/// Everything needed to simulate one lattice field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationPlan {
    pub model: CovarianceModel,
    /// Grid step.
    pub h: f64,
    /// Half-width of the simulated cube `[-extent, extent]^d`.
    pub extent: f64,
    pub seed: u64,
    #[serde(default = "default_padding")]
    pub padding: usize,
}

fn default_padding() -> usize {
    DEFAULT_PADDING
}

impl SimulationPlan {
    pub fn new(model: CovarianceModel, h: f64, extent: f64, seed: u64) -> Self {
        SimulationPlan { model, h, extent, seed, padding: DEFAULT_PADDING }
    }

    /// Smallest plan covering `Δ(r)` for every `r` up to `r_max`.
    pub fn covering(model: CovarianceModel, set: &DomainSet, r_max: f64, h: f64, seed: u64) -> Result<Self> {
        let (lo, hi) = set.bounding_box(r_max);
        let reach = lo.iter().chain(&hi).fold(0.0_f64, |m, v| m.max(v.abs()));
        Ok(SimulationPlan::new(model, h, reach + h, seed))
    }

    pub fn dim(&self) -> u32 {
        self.model.d
    }

    /// Lattice points per axis, always even.
    pub fn points_per_axis(&self) -> usize {
        let n = (2.0 * self.extent / self.h).ceil() as usize;
        (n + n % 2).max(2)
    }

    /// Side length of the embedding torus in lattice units.
    pub fn torus_len(&self) -> usize {
        (self.padding.max(2) * self.points_per_axis()).next_power_of_two()
    }

    fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if !(self.model.d == 1 || self.model.d == 2) {
            return Err(Error::Unsupported(format!("field simulation supports d = 1 or 2, got {}", self.model.d)));
        }
        if !(self.h > 0.0 && self.h.is_finite() && self.extent > 0.0 && self.extent.is_finite()) {
            return Err(Error::Parameter("grid step and extent must be positive".into()));
        }
        if self.extent / self.h > MAX_POINTS_PER_AXIS as f64 {
            return Err(Error::Parameter(format!("extent/h exceeds the budget of {MAX_POINTS_PER_AXIS} points per axis")));
        }
        Ok(())
    }
}

/// A realisation on the lattice `x_k = (k - n/2 + 1/2) h`, row-major for `d = 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    pub d: u32,
    pub n: usize,
    pub h: f64,
    pub values: Vec<f64>,
}

impl GridField {
    /// Coordinate of lattice index `k` along any axis.
    pub fn coord(&self, k: usize) -> f64 {
        (k as f64 - self.n as f64 / 2.0 + 0.5) * self.h
    }

    /// Half-width of the region covered by the lattice cells.
    pub fn extent(&self) -> f64 {
        self.n as f64 * self.h / 2.0
    }

    /// Writes the little-endian snapshot: `b"GFLD"`, `d: u32`, `n: u64`, `h: f64`, values.
    pub fn write_snapshot(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        f.write_all(b"GFLD")?;
        f.write_all(&self.d.to_le_bytes())?;
        f.write_all(&(self.n as u64).to_le_bytes())?;
        f.write_all(&self.h.to_le_bytes())?;
        for v in &self.values {
            f.write_all(&v.to_le_bytes())?;
        }
        f.flush()?;
        Ok(())
    }

    pub fn read_snapshot(path: &Path) -> Result<Self> {
        let mut buf = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut buf)?;
        if buf.len() < 24 || &buf[..4] != b"GFLD" {
            return Err(Error::Input("not a field snapshot".into()));
        }
        let d = u32::from_le_bytes(buf[4..8].try_into().unwrap());
        let n = u64::from_le_bytes(buf[8..16].try_into().unwrap()) as usize;
        let h = f64::from_le_bytes(buf[16..24].try_into().unwrap());
        let count = n.pow(d);
        if buf.len() != 24 + 8 * count {
            return Err(Error::Input("snapshot length does not match its header".into()));
        }
        let values = buf[24..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        Ok(GridField { d, n, h, values })
    }
}

/// Deterministic seed derivation by SplitMix64 chaining.
pub fn mix_seed(parts: &[u64]) -> u64 {
    let mut z = 0x9e37_79b9_7f4a_7c15_u64;
    for p in parts {
        z ^= p.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(z << 6).wrapping_add(z >> 2);
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^= z >> 31;
    }
    z
}

fn fft_nd(fft: &dyn Fft<f64>, data: &mut [Complex64], n: usize, d: u32) {
    if d == 1 {
        fft.process(data);
        return;
    }
    fft.process(data);
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        for i in 0..n {
            col[i] = data[i * n + j];
        }
        fft.process(&mut col);
        for i in 0..n {
            data[i * n + j] = col[i];
        }
    }
}

/// Eigenvalues of the circulant embedding of a covariance sampled on the torus.
///
/// `cov(k)` receives the wrapped lag in lattice units for each axis. Negative eigenvalues are
/// clamped to zero when they are above `-1e-8·max`; otherwise [`Error::Embedding`] is returned.
pub fn circulant_spectrum_from<F: Fn(&[f64]) -> f64>(cov: F, torus_len: usize, d: u32) -> Result<Vec<f64>> {
    let n = torus_len;
    let wrap = |k: usize| k.min(n - k) as f64;
    let mut data: Vec<Complex64> = match d {
        1 => (0..n).map(|k| Complex64::new(cov(&[wrap(k)]), 0.0)).collect(),
        2 => (0..n * n).map(|k| Complex64::new(cov(&[wrap(k / n), wrap(k % n)]), 0.0)).collect(),
        _ => return Err(Error::Unsupported("circulant embedding implemented for d = 1 or 2".into())),
    };
    let fft = FftPlanner::new().plan_fft_forward(n);
    fft_nd(fft.as_ref(), &mut data, n, d);
    let eig: Vec<f64> = data.iter().map(|c| c.re).collect();
    let max = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < -1e-8 * max {
        return Err(Error::Embedding(format!(
            "circulant embedding has eigenvalue {min:.3e} below -1e-8 x max ({max:.3e}); enlarge the torus"
        )));
    }
    Ok(eig.into_iter().map(|v| v.max(0.0)).collect())
}

/// Circulant spectrum for the plan's covariance model.
pub fn circulant_spectrum(plan: &SimulationPlan) -> Result<Vec<f64>> {
    plan.validate()?;
    let h = plan.h;
    let model = plan.model;
    circulant_spectrum_from(
        |k| covariance_eval(&model, h * k.iter().map(|v| v * v).sum::<f64>().sqrt()).unwrap_or(f64::NAN),
        plan.torus_len(),
        plan.dim(),
    )
}

/// How the lattice covariance was embedded on the torus.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Embedding {
    /// Wrapped covariance used as is.
    Plain,
    /// `B = c + (B - c)`: a shared `N(0, c)` shift plus a torus field whose covariance is
    /// `B - c` up to the largest lattice distance and is cosine-tapered to zero beyond it.
    OffsetTaper { offset: f64 },
}

fn embed(plan: &SimulationPlan) -> Result<(Vec<f64>, Embedding)> {
    let plain = circulant_spectrum(plan);
    let err = match plain {
        Ok(eig) => return Ok((eig, Embedding::Plain)),
        Err(Error::Embedding(e)) => e,
        Err(e) => return Err(e),
    };
    let h = plan.h;
    let model = plan.model;
    let r1 = (plan.dim() as f64).sqrt() * plan.points_per_axis() as f64 * h;
    let r2 = plan.torus_len() as f64 * h / 2.0;
    let b = |rho: f64| covariance_eval(&model, rho).unwrap_or(f64::NAN);
    let offset = b(r2);
    if r2 <= r1 || offset <= 0.0 {
        return Err(Error::Embedding(err));
    }
    let taper = |rho: f64| {
        if rho <= r1 {
            1.0
        } else if rho >= r2 {
            0.0
        } else {
            0.5 * (1.0 + (std::f64::consts::PI * (rho - r1) / (r2 - r1)).cos())
        }
    };
    let eig = circulant_spectrum_from(
        |k| {
            let rho = h * k.iter().map(|v| v * v).sum::<f64>().sqrt();
            (b(rho) - offset) * taper(rho)
        },
        plan.torus_len(),
        plan.dim(),
    )
    .map_err(|e| Error::Embedding(format!("{err}; offset-taper fallback also failed: {e}")))?;
    Ok((eig, Embedding::OffsetTaper { offset }))
}

/// Reusable sampler: holds the square-root spectrum and the FFT plan.
#[derive(Clone)]
pub struct FieldSimulator {
    plan: SimulationPlan,
    sqrt_eig: Arc<Vec<f64>>,
    fft: Arc<dyn Fft<f64>>,
    embedding: Embedding,
}

impl std::fmt::Debug for FieldSimulator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FieldSimulator").field("plan", &self.plan).finish()
    }
}

impl FieldSimulator {
    /// Builds the sampler, falling back to [`Embedding::OffsetTaper`] when the plain
    /// embedding is indefinite.
    pub fn new(plan: SimulationPlan) -> Result<Self> {
        let (eig, embedding) = embed(&plan)?;
        let total = eig.len() as f64;
        let sqrt_eig = eig.iter().map(|v| (v / total).sqrt()).collect();
        let fft = FftPlanner::new().plan_fft_forward(plan.torus_len());
        Ok(FieldSimulator { plan, sqrt_eig: Arc::new(sqrt_eig), fft, embedding })
    }

    pub fn embedding(&self) -> Embedding {
        self.embedding
    }

    pub fn plan(&self) -> &SimulationPlan {
        &self.plan
    }

    /// One realisation driven by `seed`.
    pub fn sample(&self, seed: u64) -> GridField {
        let d = self.plan.dim();
        let big = self.plan.torus_len();
        let n = self.plan.points_per_axis();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut data: Vec<Complex64> = self
            .sqrt_eig
            .iter()
            .map(|s| {
                let a: f64 = StandardNormal.sample(&mut rng);
                let b: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(s * a, s * b)
            })
            .collect();
        fft_nd(self.fft.as_ref(), &mut data, big, d);
        let shift = match self.embedding {
            Embedding::Plain => 0.0,
            Embedding::OffsetTaper { offset } => {
                let z: f64 = StandardNormal.sample(&mut rng);
                offset.sqrt() * z
            }
        };
        let values = match d {
            1 => data[..n].iter().map(|c| c.re + shift).collect(),
            _ => (0..n * n).map(|k| data[(k / n) * big + k % n].re + shift).collect(),
        };
        GridField { d, n, h: self.plan.h, values }
    }

    /// Applies `f` to `count` independent realisations, seeded by `mix(plan.seed, stream, i)`.
    ///
    /// Work is spread over the current rayon pool and results are returned in replicate order.
    pub fn map_replicates<T: Send, F: Fn(&GridField) -> T + Sync>(&self, stream: u64, count: usize, f: F) -> Vec<T> {
        (0..count)
            .into_par_iter()
            .map(|i| f(&self.sample(mix_seed(&[self.plan.seed, stream, i as u64]))))
            .collect()
    }
}

/// Single realisation for the plan's own seed.
pub fn simulate_field(plan: &SimulationPlan) -> Result<GridField> {
    Ok(FieldSimulator::new(plan.clone())?.sample(plan.seed))
}

fn check_coverage(field: &GridField, set: &DomainSet, r: f64) -> Result<()> {
    if set.dim() != field.d {
        return Err(Error::Domain(format!("set dimension {} differs from field dimension {}", set.dim(), field.d)));
    }
    let (lo, hi) = set.bounding_box(r);
    let reach = lo.iter().chain(&hi).fold(0.0_f64, |m, v| m.max(v.abs()));
    if reach > field.extent() {
        return Err(Error::Coverage(format!(
            "window reaches {reach:.4} but the lattice only covers half-width {:.4}",
            field.extent()
        )));
    }
    Ok(())
}

/// Calls `f(η(x))` for every lattice point `x ∈ Δ(r)`.
fn for_each_in_set<F: FnMut(f64)>(field: &GridField, set: &DomainSet, r: f64, mut f: F) -> Result<()> {
    check_coverage(field, set, r)?;
    let n = field.n;
    match field.d {
        1 => {
            for k in 0..n {
                if set.contains(r, &[field.coord(k)]) {
                    f(field.values[k]);
                }
            }
        }
        _ => {
            for i in 0..n {
                let xi = field.coord(i);
                for j in 0..n {
                    if set.contains(r, &[xi, field.coord(j)]) {
                        f(field.values[i * n + j]);
                    }
                }
            }
        }
    }
    Ok(())
}

/// Midpoint Riemann sum `Σ G(η(x_i)) h^d` over lattice points in `Δ(r)`.
pub fn functional_integral<G: Fn(f64) -> f64>(field: &GridField, g: G, set: &DomainSet, r: f64) -> Result<f64> {
    let mut s = 0.0;
    for_each_in_set(field, set, r, |v| s += g(v))?;
    Ok(s * field.h.powi(field.d as i32))
}

/// The decomposition `K_r - C_0|Δ(r)| = K_{r,2} + S_r` evaluated on one field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionalParts {
    /// `∫ G(η) - C_0 |Δ(r)|`, the centred functional.
    pub k_r: f64,
    /// `(C_2/2) ∫ H_2(η)`.
    pub k_r2: f64,
    /// `k_r - k_r2`.
    pub s_r: f64,
}

/// Computes [`FunctionalParts`] for `G` with Hermite expansion `exp` in one pass.
pub fn functional_parts<G: Fn(f64) -> f64>(
    field: &GridField,
    g: G,
    exp: &HermiteExpansion,
    set: &DomainSet,
    r: f64,
) -> Result<FunctionalParts> {
    let c0 = exp.coeffs.first().copied().unwrap_or(0.0);
    let c2 = exp.coeffs.get(2).copied().unwrap_or(0.0);
    let (mut sg, mut sh) = (0.0, 0.0);
    for_each_in_set(field, set, r, |v| {
        sg += g(v) - c0;
        sh += v * v - 1.0;
    })?;
    let cell = field.h.powi(field.d as i32);
    let k_r = sg * cell;
    let k_r2 = 0.5 * c2 * sh * cell;
    Ok(FunctionalParts { k_r, k_r2, s_r: k_r - k_r2 })
}

/// `2 k_r / (C_2 r^{d-α} L(r))`.
pub fn normalized_statistic(kr: f64, c2: f64, r: f64, params: &LongMemoryParams) -> Result<f64> {
    if c2 == 0.0 {
        return Err(Error::RankViolation("C_2 = 0: the functional does not have Hermite rank 2".into()));
    }
    if !(r > 0.0) {
        return Err(Error::Domain(format!("r must be positive, got {r}")));
    }
    Ok(2.0 * kr / (c2 * r.powf(params.d as f64 - params.alpha) * params.l.eval(r)))
}

/// Exact variance of the lattice sum `h^d Σ_{x ∈ Δ(r)} H_2(η(x))`, namely `2 h^{2d} Σ_{x,y} B(x-y)²`.
pub fn lattice_h2_variance(plan: &SimulationPlan, set: &DomainSet, r: f64) -> Result<f64> {
    plan.validate()?;
    let probe = GridField { d: plan.dim(), n: plan.points_per_axis(), h: plan.h, values: vec![0.0; plan.points_per_axis().pow(plan.dim())] };
    let mut pts: Vec<Vec<f64>> = Vec::new();
    let n = probe.n;
    check_coverage(&probe, set, r)?;
    match probe.d {
        1 => pts.extend((0..n).map(|k| vec![probe.coord(k)]).filter(|p| set.contains(r, p))),
        _ => {
            for i in 0..n {
                for j in 0..n {
                    let p = vec![probe.coord(i), probe.coord(j)];
                    if set.contains(r, &p) {
                        pts.push(p);
                    }
                }
            }
        }
    }
    let model = plan.model;
    let s: f64 = pts
        .par_iter()
        .map(|p| {
            pts.iter()
                .map(|q| {
                    let dist = p.iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                    covariance_eval(&model, dist).unwrap().powi(2)
                })
                .sum::<f64>()
        })
        .collect::<Vec<_>>()
        .iter()
        .sum();
    Ok(2.0 * plan.h.powi(2 * plan.dim() as i32) * s)
}
