use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, OnceLock};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{ks_bootstrap_stderr, ks_sorted};
use crate::covmodels::{lrd_params, CovarianceModel};
use crate::error::{Error, Result};
use crate::fieldsim::{functional_integral, mix_seed, normalized_statistic, FieldSimulator, SimulationPlan};
use crate::geometry::DomainSet;
use crate::hermite::{hermite_rank, Functional, HermiteExpansion};
use crate::ratelab::{kappa_bound, RateInputs};
use crate::rosenblatt::reference_series;

fn default_h() -> f64 {
    0.5
}
fn default_padding() -> usize {
    4
}
fn default_bootstrap() -> usize {
    200
}
fn default_reference_size() -> usize {
    100_000
}

/// Configuration of a convergence-rate experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: CovarianceModel,
    pub set: DomainSet,
    pub functional: Functional,
    pub r_grid: Vec<f64>,
    pub replicates: usize,
    #[serde(default = "default_reference_size")]
    pub reference_size: usize,
    #[serde(default)]
    pub seed: u64,
    /// Lattice spacing of the simulated field.
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default = "default_padding")]
    pub padding: usize,
    #[serde(default = "default_bootstrap")]
    pub bootstrap: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Configuration with the default lattice, reference size and bootstrap count.
    pub fn new(model: CovarianceModel, set: DomainSet, functional: Functional, r_grid: Vec<f64>, replicates: usize, seed: u64) -> Self {
        ExperimentConfig {
            model,
            set,
            functional,
            r_grid,
            replicates,
            reference_size: default_reference_size(),
            seed,
            h: default_h(),
            padding: default_padding(),
            bootstrap: default_bootstrap(),
            out: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.set.validate()?;
        if self.model.d != self.set.dim() {
            return Err(Error::Parameter(format!("model has d = {} but the set has d = {}", self.model.d, self.set.dim())));
        }
        if self.r_grid.is_empty() || self.r_grid.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(Error::Parameter("r_grid must hold positive radii".into()));
        }
        if self.r_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Parameter("r_grid must be strictly increasing".into()));
        }
        if self.replicates < 1000 {
            return Err(Error::Parameter(format!("distance estimates need at least 1000 replicates, got {}", self.replicates)));
        }
        if self.reference_size < 1000 {
            return Err(Error::Parameter(format!("reference_size must be at least 1000, got {}", self.reference_size)));
        }
        if !(self.h > 0.0) || self.padding < 2 || self.bootstrap < 2 {
            return Err(Error::Parameter("need h > 0, padding >= 2 and bootstrap >= 2".into()));
        }
        Ok(())
    }
}

/// One radius of a [`RhoTable`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhoRow {
    pub r: f64,
    pub replicates: usize,
    pub rho: f64,
    pub rho_stderr: f64,
    pub kappa_bound: f64,
    /// Wall time for this radius; excluded from CSV output so that files stay reproducible.
    #[serde(skip_serializing)]
    #[serde(default)]
    pub runtime_seconds: f64,
}

/// Kolmogorov distances to the reference law over a grid of radii.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhoTable {
    pub rows: Vec<RhoRow>,
    pub reference_calibration: f64,
}

type RefKey = (String, u64, usize, u64);
type RefCache = Mutex<HashMap<RefKey, (Arc<Vec<f64>>, f64)>>;

fn reference_cache() -> &'static RefCache {
    static CACHE: OnceLock<RefCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Sorted reference sample of the Rosenblatt-type law for `(Δ, α)` and the calibration factor
/// applied to its series. Samples are cached for the lifetime of the process.
pub fn reference_sample(set: &DomainSet, alpha: f64, size: usize, seed: u64) -> Result<(Arc<Vec<f64>>, f64)> {
    let key = (serde_json::to_string(set)?, alpha.to_bits(), size, seed);
    if let Some(hit) = reference_cache().lock().unwrap().get(&key) {
        return Ok(hit.clone());
    }
    let reference = reference_series(set, alpha)?;
    let mut s = reference.series.sample(size, mix_seed(&[seed, 0x7265_6600]))?;
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let entry = (Arc::new(s), reference.calibration);
    reference_cache().lock().unwrap().insert(key, entry.clone());
    Ok(entry)
}

/// `C₂` of an expansion, or [`Error::Precondition`] unless its Hermite rank is 2.
pub fn rank_two_coefficient(exp: &HermiteExpansion) -> Result<f64> {
    let rank = hermite_rank(exp, 0.0)?;
    if rank != 2 {
        return Err(Error::Precondition(format!("the functional has Hermite rank {rank}; the rate experiment needs rank 2")));
    }
    Ok(exp.coeffs[2])
}

/// Runs the experiment described by `config`.
///
/// Replicate `i` at radius index `k` uses the field seed `mix(seed, k, i)`; bootstrap streams and
/// the reference sample use further tags of the same master seed.
pub fn rate_experiment(config: &ExperimentConfig) -> Result<RhoTable> {
    config.validate()?;
    let c2 = rank_two_coefficient(&config.functional.expand(8)?)?;
    let params = lrd_params(&config.model)?;
    let bound = kappa_bound(&RateInputs::from_model(&config.model, None)?);
    let (reference, calibration) = reference_sample(&config.set, params.alpha, config.reference_size, config.seed)?;
    let g = config.functional;

    let mut rows = Vec::with_capacity(config.r_grid.len());
    for (k, &r) in config.r_grid.iter().enumerate() {
        let start = Instant::now();
        let mut plan = SimulationPlan::covering(config.model, &config.set, r, config.h, config.seed)?;
        plan.padding = config.padding;
        let sim = FieldSimulator::new(plan)?;
        let stats: Vec<f64> = sim
            .map_replicates(k as u64, config.replicates, |field| {
                functional_integral(field, |w| g.eval(w), &config.set, r).and_then(|kr| normalized_statistic(kr, c2, r, &params))
            })
            .into_iter()
            .collect::<Result<_>>()?;
        let mut sorted = stats.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let rho = ks_sorted(&sorted, &reference);
        let se = ks_bootstrap_stderr(&stats, &reference, config.bootstrap, mix_seed(&[config.seed, k as u64, 0xb007]))?;
        rows.push(RhoRow {
            r,
            replicates: config.replicates,
            rho,
            rho_stderr: se,
            kappa_bound: bound,
            runtime_seconds: start.elapsed().as_secs_f64(),
        });
    }
    Ok(RhoTable { rows, reference_calibration: calibration })
}
