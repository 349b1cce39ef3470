//! Command-line front end of the `rosenblatt-lab` binary.
//!
//! Every subcommand reads an optional JSON config (`--config`) whose keys are overridden by
//! flags, writes a CSV table to `--out` (standard output otherwise) and records a run manifest
//! next to it.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use super::{rate_experiment, slope_fit, write_csv, ExperimentConfig, RunManifest};
use crate::covmodels::{covariance_eval, lrd_params, residual_exponent_fit, spectral_density, spectral_leading, CovarianceModel};
use crate::error::{Error, Result};
use crate::fieldsim::{simulate_field, SimulationPlan};
use crate::geometry::{indicator_ft, DomainSet};
use crate::hermite::{hermite_rank, parseval_defect, Functional};
use crate::ratelab::{
    curve_table, geometric_term, grid_beta_supmin, grid_supmin_inner, grid_supmin_outer, kappa0_identity_check, kappa1, kappa_bound,
    supmin_inner, supmin_outer, RateInputs, SupMinSearch, UpsilonRule,
};
use crate::rosenblatt::{build_kernel, density_estimate, eigen_series, silverman_bandwidth, variance_oracle, KernelOptions};

#[derive(Parser, Debug)]
#[command(name = "rosenblatt-lab", version, about = "Long-range dependent fields and Rosenblatt-type limit laws")]
pub struct Cli {
    /// Master seed for every random stream.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// CSV output path; a `.manifest.json` file is written beside it.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// JSON document supplying defaults for any flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Covariance functions.
    #[command(subcommand)]
    Covariance(CovarianceCmd),
    /// Spectral densities.
    #[command(subcommand)]
    Spectral(SpectralCmd),
    /// Observation sets.
    #[command(subcommand)]
    Geometry(GeometryCmd),
    /// Hermite expansions.
    #[command(subcommand)]
    Hermite(HermiteCmd),
    /// Field simulation.
    #[command(subcommand)]
    Simulate(SimulateCmd),
    /// Rosenblatt-type limit laws.
    #[command(subcommand)]
    Rosenblatt(RosenblattCmd),
    /// Convergence-rate bounds and experiments.
    #[command(subcommand)]
    Rate(RateCmd),
    /// Numerical checks of closed-form identities.
    #[command(subcommand)]
    Verify(VerifyCmd),
}

#[derive(Subcommand, Debug)]
pub enum CovarianceCmd {
    /// Evaluate B(r).
    Eval {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_delimiter = ',')]
        r: Option<Vec<f64>>,
    },
}

#[derive(Subcommand, Debug)]
pub enum SpectralCmd {
    /// Evaluate f(λ) and its leading power law.
    Eval {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_delimiter = ',')]
        lambda: Option<Vec<f64>>,
    },
    /// Fit the exponent of f(λ)/leading - 1 at the origin.
    FitUpsilon {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        lambda_min: Option<f64>,
        #[arg(long)]
        lambda_max: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
    },
}

#[derive(Subcommand, Debug)]
pub enum GeometryCmd {
    /// Fourier transform of the indicator of a set.
    Ft {
        #[command(flatten)]
        set: SetArgs,
        /// Frequencies, components separated by ',' and points by ';'.
        #[arg(long)]
        x: Option<String>,
    },
}

#[derive(Subcommand, Debug)]
pub enum HermiteCmd {
    /// Hermite coefficients of a catalog functional.
    Coeffs {
        #[arg(long)]
        functional: Option<String>,
        #[arg(long)]
        order: Option<usize>,
    },
}

#[derive(Subcommand, Debug)]
pub enum SimulateCmd {
    /// One realisation on a lattice.
    Field {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        extent: Option<f64>,
        /// Also write a binary snapshot.
        #[arg(long)]
        snapshot: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum RosenblattCmd {
    /// Eigenvalues of the discretised kernel.
    Build(RosenblattArgs),
    /// Samples, or a density estimate with --density.
    Sample {
        #[command(flatten)]
        args: RosenblattArgs,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        density: bool,
    },
}

#[derive(Subcommand, Debug)]
pub enum RateCmd {
    /// Rate exponents for given inputs or a model.
    Bound(RateArgs),
    /// Both rate curves over a grid of α.
    Curves {
        #[arg(long = "dim")]
        d: Option<u32>,
        /// A number, or `one-minus-alpha`.
        #[arg(long)]
        upsilon: Option<String>,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Kolmogorov distances to the limit law over a grid of radii.
    Experiment {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        set: SetArgs,
        #[arg(long)]
        functional: Option<String>,
        #[arg(long, value_delimiter = ',')]
        r_grid: Option<Vec<f64>>,
        #[arg(long)]
        replicates: Option<usize>,
        #[arg(long)]
        reference_size: Option<usize>,
        #[arg(long)]
        h: Option<f64>,
    },
}

#[derive(Subcommand, Debug)]
pub enum VerifyCmd {
    /// Grid searches against the sup-min closed forms.
    Supmin(RateArgs),
}

#[derive(Args, Debug, Default)]
pub struct ModelArgs {
    /// cauchy, linnik or local-global.
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long = "dim")]
    pub d: Option<u32>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Tail exponent of the local-global model.
    #[arg(long = "model-alpha")]
    pub model_alpha: Option<f64>,
}

#[derive(Args, Debug, Default)]
pub struct SetArgs {
    /// ball or rect.
    #[arg(long)]
    pub shape: Option<String>,
    #[arg(long = "set-dim")]
    pub set_d: Option<u32>,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub lower: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub upper: Option<Vec<f64>>,
}

#[derive(Args, Debug)]
pub struct RosenblattArgs {
    #[command(flatten)]
    pub set: SetArgs,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub cutoff: Option<f64>,
    #[arg(long)]
    pub nodes_per_panel: Option<usize>,
    /// Number of eigenvalues to keep.
    #[arg(long)]
    pub terms: Option<usize>,
}

#[derive(Args, Debug)]
pub struct RateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub upsilon: Option<f64>,
}

/// Flag values layered over a JSON config.
struct Settings {
    cfg: Value,
}

impl Settings {
    fn get<T: DeserializeOwned>(&self, key: &str) -> Result<Option<T>> {
        match self.cfg.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(v) => serde_json::from_value(v.clone()).map(Some).map_err(|e| Error::Input(format!("config key '{key}': {e}"))),
        }
    }

    fn pick<T: DeserializeOwned>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }

    fn require<T: DeserializeOwned>(&self, flag: Option<T>, key: &str) -> Result<T> {
        self.pick(flag, key)?.ok_or_else(|| Error::Input(format!("missing required value '{key}' (flag or config key)")))
    }

    fn model(&self, a: &ModelArgs) -> Result<CovarianceModel> {
        if a.family.is_none() {
            if let Some(m) = self.get::<CovarianceModel>("model")? {
                m.validate()?;
                return Ok(m);
            }
        }
        let family: String = self.require(a.family.clone(), "family")?;
        let d: u32 = self.require(a.d, "d")?;
        match family.as_str() {
            "cauchy" => CovarianceModel::cauchy(d, self.require(a.theta, "theta")?),
            "linnik" => CovarianceModel::linnik(d, self.require(a.sigma, "sigma")?, self.require(a.theta, "theta")?),
            "local-global" | "local_global" => CovarianceModel::local_global(d, self.require(a.model_alpha, "model_alpha")?, self.require(a.theta, "theta")?),
            other => Err(Error::Input(format!("unknown family '{other}' (expected cauchy, linnik or local-global)"))),
        }
    }

    fn set(&self, a: &SetArgs) -> Result<DomainSet> {
        if a.shape.is_none() {
            if let Some(s) = self.get::<DomainSet>("set")? {
                s.validate()?;
                return Ok(s);
            }
        }
        let shape: String = self.require(a.shape.clone(), "shape")?;
        match shape.as_str() {
            "ball" => DomainSet::ball(self.require(a.set_d, "set_d")?, self.require(a.radius, "radius")?),
            "rect" | "rectangle" => DomainSet::rect(self.require(a.lower.clone(), "lower")?, self.require(a.upper.clone(), "upper")?),
            other => Err(Error::Input(format!("unknown shape '{other}' (expected ball or rect)"))),
        }
    }

    fn rate_inputs(&self, a: &RateArgs) -> Result<RateInputs> {
        let from_model = a.model.family.is_some() || (a.alpha.is_none() && self.get::<Value>("model")?.is_some());
        if from_model {
            let model = self.model(&a.model)?;
            return RateInputs::from_model(&model, self.pick(a.q, "q")?);
        }
        let d: u32 = self.require(a.model.d, "d")?;
        let alpha: f64 = self.require(a.alpha, "alpha")?;
        let upsilon: f64 = self.require(a.upsilon, "upsilon")?;
        match self.pick(a.q, "q")? {
            Some(q) => RateInputs::new(d, alpha, q, upsilon),
            None => RateInputs::near_limit(d, alpha, upsilon),
        }
    }
}

type Writer = Box<dyn FnOnce(Option<&Path>) -> Result<()> + Send>;

/// Output of one subcommand before it is written.
struct Outcome {
    command: &'static str,
    config: Value,
    extra: Vec<String>,
    timings: Vec<(String, f64)>,
    write: Writer,
}

fn table<T: Serialize + Send + 'static>(command: &'static str, config: Value, rows: Vec<T>) -> Outcome {
    Outcome { command, config, extra: Vec::new(), timings: Vec::new(), write: Box::new(move |p| write_csv(&rows, p)) }
}

/// Parses `args` (including the program name) and runs the selected subcommand.
pub fn run<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::Input(e.to_string()))?;
    run_cli(cli)
}

/// Runs an already parsed command line.
pub fn run_cli(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?)?,
        None => Value::Object(Default::default()),
    };
    if !cfg.is_object() {
        return Err(Error::Input("config must be a JSON object".into()));
    }
    let s = Settings { cfg };
    let seed = s.pick(cli.seed, "seed")?.unwrap_or(0);
    let out: Option<PathBuf> = s.pick(cli.out.clone(), "out")?;
    let threads = s.pick(cli.threads, "threads")?.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Parameter(format!("cannot start thread pool: {e}")))?;
    let start = Instant::now();
    let outcome = pool.install(|| dispatch(&s, cli.command, seed))?;
    (outcome.write)(out.as_deref())?;
    let manifest = RunManifest {
        command: outcome.command.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: outcome.config,
        seed,
        threads: pool.current_num_threads(),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        timings: outcome.timings,
        notes: outcome.extra,
    };
    match out {
        Some(p) => manifest.write(&RunManifest::path_for(&p))?,
        None => eprintln!("{}", serde_json::to_string(&manifest)?),
    }
    Ok(())
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1).max(1) as f64).exp()).collect()
}

fn parse_points(x: &str) -> Result<Vec<Vec<f64>>> {
    x.split(';')
        .map(|p| {
            p.split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|e| Error::Input(format!("bad frequency component '{v}': {e}"))))
                .collect()
        })
        .collect()
}

fn dispatch(s: &Settings, cmd: Command, seed: u64) -> Result<Outcome> {
    match cmd {
        Command::Covariance(CovarianceCmd::Eval { model, r }) => {
            let m = s.model(&model)?;
            let rs: Vec<f64> = s.require(r, "r")?;
            #[derive(Serialize)]
            struct Row {
                r: f64,
                covariance: f64,
            }
            let rows = rs.iter().map(|&r| Ok(Row { r, covariance: covariance_eval(&m, r)? })).collect::<Result<Vec<_>>>()?;
            Ok(table("covariance eval", json!({ "model": m, "r": rs }), rows))
        }
        Command::Spectral(SpectralCmd::Eval { model, lambda }) => {
            let m = s.model(&model)?;
            let ls: Vec<f64> = s.require(lambda, "lambda")?;
            let p = lrd_params(&m).ok();
            #[derive(Serialize)]
            struct Row {
                lambda: f64,
                density: f64,
                leading: Option<f64>,
            }
            let rows = ls
                .iter()
                .map(|&l| Ok(Row { lambda: l, density: spectral_density(&m, l)?, leading: p.as_ref().and_then(|p| spectral_leading(p, l).ok()) }))
                .collect::<Result<Vec<_>>>()?;
            Ok(table("spectral eval", json!({ "model": m, "lambda": ls }), rows))
        }
        Command::Spectral(SpectralCmd::FitUpsilon { model, lambda_min, lambda_max, points }) => {
            let m = s.model(&model)?;
            let lo = s.pick(lambda_min, "lambda_min")?.unwrap_or(1e-4);
            let hi = s.pick(lambda_max, "lambda_max")?.unwrap_or(1e-2);
            let n = s.pick(points, "points")?.unwrap_or(24);
            let fit = residual_exponent_fit(&m, &log_grid(lo, hi, n))?;
            #[derive(Serialize)]
            struct Row {
                upsilon_fit: f64,
                upsilon_model: f64,
            }
            let rows = vec![Row { upsilon_fit: fit, upsilon_model: lrd_params(&m)?.upsilon }];
            Ok(table("spectral fit-upsilon", json!({ "model": m, "lambda_min": lo, "lambda_max": hi, "points": n }), rows))
        }
        Command::Geometry(GeometryCmd::Ft { set, x }) => {
            let set = s.set(&set)?;
            let x: String = s.require(x, "x")?;
            #[derive(Serialize)]
            struct Row {
                x: String,
                re: f64,
                im: f64,
            }
            let rows = parse_points(&x)?
                .into_iter()
                .map(|p| {
                    let v = indicator_ft(&set, &p)?;
                    let label = p.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ");
                    Ok(Row { x: label, re: v.re, im: v.im })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(table("geometry ft", json!({ "set": set, "x": x }), rows))
        }
        Command::Hermite(HermiteCmd::Coeffs { functional, order }) => {
            let f = Functional::from_name(&s.require::<String>(functional, "functional")?)?;
            let j = s.pick(order, "order")?.unwrap_or(8);
            let e = f.expand(j)?;
            #[derive(Serialize)]
            struct Row {
                j: usize,
                coefficient: f64,
                normalized: f64,
            }
            let mut fact = 1.0;
            let rows: Vec<Row> = e
                .coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| {
                    if k > 0 {
                        fact *= k as f64;
                    }
                    Row { j: k, coefficient: *c, normalized: c / fact.sqrt() }
                })
                .collect();
            let mut out = table("hermite coeffs", json!({ "functional": f.name(), "order": j }), rows);
            out.extra.push(format!("hermite rank: {}", hermite_rank(&e, 0.0).map(|r| r.to_string()).unwrap_or_else(|e| e.to_string())));
            out.extra.push(format!("parseval defect: {:e}", parseval_defect(&e)));
            Ok(out)
        }
        Command::Simulate(SimulateCmd::Field { model, h, extent, snapshot }) => {
            let m = s.model(&model)?;
            let h = s.pick(h, "h")?.unwrap_or(1.0);
            let extent: f64 = s.require(extent, "extent")?;
            let plan = SimulationPlan::new(m, h, extent, seed);
            let field = simulate_field(&plan)?;
            if let Some(p) = s.pick(snapshot, "snapshot")? {
                field.write_snapshot(&p)?;
            }
            let config = serde_json::to_value(&plan)?;
            if field.d == 1 {
                #[derive(Serialize)]
                struct Row {
                    x: f64,
                    value: f64,
                }
                let rows = (0..field.n).map(|k| Row { x: field.coord(k), value: field.values[k] }).collect();
                Ok(table("simulate field", config, rows))
            } else {
                #[derive(Serialize)]
                struct Row {
                    x: f64,
                    y: f64,
                    value: f64,
                }
                let n = field.n;
                let rows = (0..n * n).map(|k| Row { x: field.coord(k / n), y: field.coord(k % n), value: field.values[k] }).collect();
                Ok(table("simulate field", config, rows))
            }
        }
        Command::Rosenblatt(cmd) => rosenblatt_cmd(s, cmd, seed),
        Command::Rate(RateCmd::Bound(a)) => {
            let inp = s.rate_inputs(&a)?;
            #[derive(Serialize)]
            struct Row {
                d: u32,
                alpha: f64,
                q: f64,
                upsilon: f64,
                kappa1: f64,
                geometric_term: f64,
                kappa_bound: f64,
            }
            let rows = vec![Row {
                d: inp.d,
                alpha: inp.alpha,
                q: inp.q,
                upsilon: inp.upsilon,
                kappa1: kappa1(&inp),
                geometric_term: geometric_term(inp.d, inp.alpha),
                kappa_bound: kappa_bound(&inp),
            }];
            Ok(table("rate bound", serde_json::to_value(inp)?, rows))
        }
        Command::Rate(RateCmd::Curves { d, upsilon, points }) => {
            let d: u32 = s.require(d, "d")?;
            let u: String = match s.pick(upsilon.map(Value::String), "upsilon")? {
                Some(Value::String(v)) => v,
                Some(Value::Number(v)) => v.to_string(),
                Some(other) => return Err(Error::Input(format!("bad upsilon {other}"))),
                None => return Err(Error::Input("missing required value 'upsilon' (flag or config key)".into())),
            };
            let rule = if u == "one-minus-alpha" {
                UpsilonRule::OneMinusAlpha
            } else {
                UpsilonRule::Fixed(u.parse().map_err(|e| Error::Input(format!("bad upsilon '{u}': {e}")))?)
            };
            let n = s.pick(points, "points")?.unwrap_or(99);
            let rows = curve_table(d, rule, &crate::ratelab::alpha_grid(d, n))?;
            Ok(table("rate curves", json!({ "d": d, "upsilon": rule, "points": n }), rows))
        }
        Command::Rate(RateCmd::Experiment { model, set, functional, r_grid, replicates, reference_size, h }) => {
            let mut cfg: ExperimentConfig = if s.cfg.get("model").is_some() && model.family.is_none() && set.shape.is_none() {
                serde_json::from_value(s.cfg.clone()).map_err(|e| Error::Input(format!("experiment config: {e}")))?
            } else {
                ExperimentConfig::new(
                    s.model(&model)?,
                    s.set(&set)?,
                    Functional::H2,
                    s.require(r_grid.clone(), "r_grid")?,
                    s.require(replicates, "replicates")?,
                    seed,
                )
            };
            if model.family.is_some() {
                cfg.model = s.model(&model)?;
            }
            if set.shape.is_some() {
                cfg.set = s.set(&set)?;
            }
            if let Some(f) = s.pick::<String>(functional, "functional")? {
                cfg.functional = Functional::from_name(&f)?;
            }
            if let Some(v) = r_grid {
                cfg.r_grid = v;
            }
            if let Some(v) = replicates {
                cfg.replicates = v;
            }
            if let Some(v) = reference_size {
                cfg.reference_size = v;
            }
            if let Some(v) = h {
                cfg.h = v;
            }
            cfg.seed = seed;
            let t = rate_experiment(&cfg)?;
            let mut out = table("rate experiment", serde_json::to_value(&cfg)?, t.rows.clone());
            out.timings = t.rows.iter().map(|r| (format!("r = {}", r.r), r.runtime_seconds)).collect();
            out.extra.push(format!("reference calibration factor: {}", t.reference_calibration));
            out.extra.push(match slope_fit(&t) {
                Ok(f) => format!("log-log slope {:.4} +- {:.4}, kappa_bound {:.4}, consistent: {}", f.slope, f.slope_stderr, f.kappa_bound, f.consistent_with_bound),
                Err(e) => format!("slope fit skipped: {e}"),
            });
            out.extra.push("Monte Carlo protocol (lattice step, replicates, reference size, bootstrap) chosen by this tool".into());
            Ok(out)
        }
        Command::Verify(VerifyCmd::Supmin(a)) => {
            let inp = s.rate_inputs(&a)?;
            #[derive(Serialize)]
            struct Row {
                check: &'static str,
                closed_form: f64,
                grid_value: f64,
                deviation: f64,
            }
            let row = |check, closed_form: f64, grid_value: f64| Row { check, closed_form, grid_value, deviation: (grid_value - closed_form).abs() };
            let fine = SupMinSearch::default();
            let inner = grid_supmin_inner(inp.d, inp.alpha, 0.5, &SupMinSearch { resolution: 10_000, refinements: 0 })?;
            let outer = grid_supmin_outer(inp.d, inp.alpha, inp.upsilon, &fine)?;
            let k0 = kappa0_identity_check(&inp, &SupMinSearch::three_axis())?;
            let beta = grid_beta_supmin(kappa1(&inp), &SupMinSearch { resolution: 1000, refinements: 3 })?;
            let rows = vec![
                row("inner(gamma=0.5)", supmin_inner(inp.d, inp.alpha, 0.5)?, inner.value),
                row("outer", supmin_outer(inp.d, inp.alpha, inp.upsilon)?, outer.value),
                row("kappa0", k0.kappa1_over_3, k0.grid_value),
                row("beta", kappa1(&inp) / 3.0, beta.value),
            ];
            Ok(table("verify supmin", serde_json::to_value(inp)?, rows))
        }
    }
}

fn rosenblatt_cmd(s: &Settings, cmd: RosenblattCmd, seed: u64) -> Result<Outcome> {
    let (args, sample) = match cmd {
        RosenblattCmd::Build(a) => (a, None),
        RosenblattCmd::Sample { args, n, density } => {
            let n = s.pick(n, "n")?.unwrap_or(100_000);
            (args, Some((n, density)))
        }
    };
    let set = s.set(&args.set)?;
    let alpha: f64 = s.require(args.alpha, "alpha")?;
    let mut opts = KernelOptions { cutoff: s.pick(args.cutoff, "cutoff")?, ..KernelOptions::default() };
    if let Some(q) = s.pick(args.nodes_per_panel, "nodes_per_panel")? {
        opts.nodes_per_panel = q;
    }
    let kernel = build_kernel(&set, alpha, &opts)?;
    let mut series = eigen_series(&kernel, s.pick(args.terms, "terms")?)?;
    let oracle = variance_oracle(&set, alpha)?;
    let raw = series.variance();
    let factor = series.calibrate(oracle)?;
    let config = json!({ "set": set, "alpha": alpha, "options": opts });
    let notes = vec![
        format!("cutoff: {}", kernel.cutoff),
        format!("raw variance: {raw}"),
        format!("oracle variance: {oracle}"),
        format!("calibration factor: {factor}"),
        format!("gaussian tail share of variance: {}", series.tail_mass()),
    ];
    let mut out = match sample {
        None => {
            #[derive(Serialize)]
            struct Row {
                index: usize,
                eigenvalue: f64,
            }
            let rows = series.eigenvalues.iter().enumerate().map(|(index, &eigenvalue)| Row { index, eigenvalue }).collect();
            table("rosenblatt build", config, rows)
        }
        Some((n, false)) => {
            #[derive(Serialize)]
            struct Row {
                value: f64,
            }
            let rows = series.sample(n, seed)?.into_iter().map(|value| Row { value }).collect();
            table("rosenblatt sample", config, rows)
        }
        Some((n, true)) => {
            let x = series.sample(n, seed)?;
            let d = density_estimate(&x, silverman_bandwidth(&x))?;
            #[derive(Serialize)]
            struct Row {
                x: f64,
                density: f64,
            }
            let rows = d.x.iter().zip(&d.density).map(|(&x, &density)| Row { x, density }).collect();
            table("rosenblatt sample", config, rows)
        }
    };
    out.extra = notes;
    Ok(out)
}

/// Entry point of the binary: runs the command line and maps errors to exit codes.
pub fn main_entry() -> std::process::ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match run_cli(cli) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::ExitCode::from(e.code().clamp(1, 255) as u8)
        }
    }
}
