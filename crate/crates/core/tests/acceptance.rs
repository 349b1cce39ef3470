//! Acceptance suite. Runs every criterion in sequence, prints one line per criterion and exits
//! with a failure status if any criterion fails.

use std::f64::consts::PI;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rosenblatt_lab::covmodels::{covariance_eval, residual_exponent_fit, spectral_density, CovarianceModel};
use rosenblatt_lab::expcli::{monotonicity_violations, rate_experiment, rate_product_ratio, slope_fit, ExperimentConfig};
use rosenblatt_lab::fieldsim::{FieldSimulator, SimulationPlan};
use rosenblatt_lab::geometry::{diameter, distance_pdf, DomainSet};
use rosenblatt_lab::hermite::Functional;
use rosenblatt_lab::quad::{integrate_breaks, QuadOptions};
use rosenblatt_lab::ratelab::*;
use rosenblatt_lab::rosenblatt::{cumulant, reference_series};
use rosenblatt_lab::specfun::{bessel_j, bessel_k, gamma_fn, hyp1f2, incomplete_beta};
use rosenblatt_lab::stats::{k_statistics, mean, variance};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn geom(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64)).collect()
}

fn special_function_goldens() -> Outcome {
    let mut worst: f64 = 0.0;
    for (x, want) in [(0.5, PI.sqrt()), (1.5, PI.sqrt() / 2.0), (5.0, 24.0), (2.5, 0.75 * PI.sqrt()), (10.0, 362_880.0)] {
        worst = worst.max(rel(gamma_fn(x).map_err(|e| e.to_string())?, want));
    }
    for x in [0.1, 1.0, 2.5, 7.0, 30.0] {
        let j = bessel_j(0.5, x).map_err(|e| e.to_string())?;
        worst = worst.max(rel(j, (2.0 / (PI * x)).sqrt() * x.sin()));
        let k = bessel_k(0.5, x).map_err(|e| e.to_string())?;
        worst = worst.max(rel(k, (PI / (2.0 * x)).sqrt() * (-x).exp()));
    }
    for mu in [0.01, 0.25, 0.5, 0.75, 0.99, 1.0] {
        worst = worst.max(rel(incomplete_beta(mu, 1.0, 0.5).map_err(|e| e.to_string())?, 1.0 - (1.0 - mu).sqrt()));
    }
    for (a, b1, b2) in [(0.3, 0.5, 1.3), (1.0, 2.0, 3.0), (-0.7, 1.5, 0.25)] {
        worst = worst.max(rel(hyp1f2(a, b1, b2, 0.0).map_err(|e| e.to_string())?, 1.0));
    }
    check(worst < 1e-10, format!("max relative error {worst:.2e}"))
}

fn pdf_mass(set: &DomainSet) -> f64 {
    let diam = diameter(set, 1.0).unwrap();
    let breaks: Vec<f64> = (1..16).map(|k| diam * k as f64 / 16.0).collect();
    integrate_breaks(|z| distance_pdf(set, 1.0, z).unwrap(), 0.0, diam, &breaks, &QuadOptions::new(1e-14, 1e-12, 4000)).value
}

fn distance_pdf_checks() -> Outcome {
    let interval = DomainSet::ball(1, 1.0).map_err(|e| e.to_string())?;
    let mut sup: f64 = 0.0;
    for k in 0..=2000 {
        let z = 2.0 * k as f64 / 2000.0;
        sup = sup.max((distance_pdf(&interval, 1.0, z).map_err(|e| e.to_string())? - (1.0 - z / 2.0)).abs());
    }
    let mut mass_err: f64 = 0.0;
    for d in 1..=3 {
        mass_err = mass_err.max((pdf_mass(&DomainSet::ball(d, 1.0).map_err(|e| e.to_string())?) - 1.0).abs());
    }
    check(sup < 1e-10 && mass_err < 1e-8, format!("triangular sup error {sup:.2e}, normalisation error {mass_err:.2e}"))
}

fn cauchy_closed_form() -> Outcome {
    let m = CovarianceModel::cauchy(2, 0.5).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for lam in geom(0.1, 10.0, 200) {
        let want = (-lam).exp() / (2.0 * PI * lam);
        worst = worst.max((spectral_density(&m, lam).map_err(|e| e.to_string())? - want).abs());
    }
    check(worst < 1e-10, format!("max abs error {worst:.2e} on 200 points of [0.1, 10]"))
}

fn residual_exponents() -> Outcome {
    let cases = [
        ("Cauchy d=1", CovarianceModel::cauchy(1, 0.2), geom(1e-5, 1e-2, 12), 0.6),
        ("Linnik d=2", CovarianceModel::linnik(2, 1.75, 1.0 / 3.0), geom(1e-6, 1e-3, 12), 17.0 / 12.0),
        ("LocalGlobal d=1", CovarianceModel::local_global(1, 0.4, 0.5), geom(1e-5, 1e-2, 12), 0.6),
    ];
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, m, grid, want) in cases {
        let got = residual_exponent_fit(&m.map_err(|e| e.to_string())?, &grid).map_err(|e| e.to_string())?;
        ok &= (got - want).abs() <= 0.05;
        parts.push(format!("{name} {got:.4} (want {want:.4})"));
    }
    check(ok, parts.join(", "))
}

fn rate_formulas() -> Outcome {
    let e = |r: Result<RateInputs, _>| r.map_err(|e: rosenblatt_lab::Error| e.to_string());
    let a = e(RateInputs::new(1, 0.25, 0.249, 0.75))?;
    let b = e(RateInputs::near_limit(2, 7.0 / 12.0, 17.0 / 12.0))?;
    let c = e(RateInputs::near_limit(3, 1.4, 1.0))?;
    let errs = [
        (kappa1(&a) - 0.3).abs(),
        (kappa_bound(&a) - 0.25 * 0.5 / (3.0 * 0.75)).abs(),
        (kappa_bound(&b) - 35.0 / 306.0).abs(),
        (kappa1(&c) / 3.0 - 1.0 / 19.0).abs(),
        (geometric_term(3, 1.4) / 3.0 - 7.0 / 120.0).abs(),
    ];
    let worst = errs.iter().cloned().fold(0.0, f64::max);
    let crossover = kappa1(&c) / 3.0 < geometric_term(3, 1.4) / 3.0;
    check(
        worst < 1e-6 && crossover && (kappa_bound(&b) - 0.11438).abs() < 1e-5,
        format!(
            "d=1 kappa1 {:.6} bound {:.6}; d=2 bound {:.6}; d=3 kappa1/3 {:.6} < {:.6}; max error {worst:.1e}",
            kappa1(&a),
            kappa_bound(&a),
            kappa_bound(&b),
            kappa1(&c) / 3.0,
            geometric_term(3, 1.4) / 3.0
        ),
    )
}

fn supmin_identities() -> Outcome {
    let s = |e: rosenblatt_lab::Error| e.to_string();
    let mut devs = Vec::new();
    for (d, a, g) in [(1, 0.25, 0.5), (2, 7.0 / 12.0, 0.3)] {
        let grid = grid_supmin_inner(d, a, g, &SupMinSearch::default()).map_err(s)?;
        devs.push(("inner", (grid.value - supmin_inner(d, a, g).map_err(s)?).abs()));
    }
    for (d, a, u) in [(1, 0.25, 0.75), (2, 7.0 / 12.0, 17.0 / 12.0)] {
        let grid = grid_supmin_outer(d, a, u, &SupMinSearch::default()).map_err(s)?;
        devs.push(("outer", (grid.value - supmin_outer(d, a, u).map_err(s)?).abs()));
    }
    for inp in [RateInputs::new(1, 0.25, 0.249, 0.75).map_err(s)?, RateInputs::near_limit(2, 7.0 / 12.0, 17.0 / 12.0).map_err(s)?] {
        devs.push(("kappa0", kappa0_identity_check(&inp, &SupMinSearch::three_axis()).map_err(s)?.deviation));
    }
    let worst = devs.iter().map(|d| d.1).fold(0.0, f64::max);
    let text = devs.iter().map(|(n, v)| format!("{n} {v:.1e}")).collect::<Vec<_>>().join(", ");
    check(worst < 1e-3, text)
}

fn lag_covariances() -> Outcome {
    let model = CovarianceModel::cauchy(1, 0.2).map_err(|e| e.to_string())?;
    let sim = FieldSimulator::new(SimulationPlan::new(model, 1.0, 64.0, 2024)).map_err(|e| e.to_string())?;
    let n = 10_000;
    let c = sim.plan().points_per_axis() / 2 - 10;
    let lags = [1usize, 5, 20];
    let rows = sim.map_replicates(0, n, |f| lags.iter().map(|k| f.values[c] * f.values[c + k]).collect::<Vec<_>>());
    let mut ok = true;
    let mut parts = Vec::new();
    for (col, lag) in lags.iter().enumerate() {
        let xs: Vec<f64> = rows.iter().map(|r| r[col]).collect();
        let b = covariance_eval(&model, *lag as f64).map_err(|e| e.to_string())?;
        let z = (mean(&xs) - b) / (variance(&xs) / n as f64).sqrt();
        ok &= z.abs() < 3.0;
        parts.push(format!("lag {lag}: z = {z:+.2}"));
    }
    check(ok, parts.join(", "))
}

fn rosenblatt_sampler() -> Outcome {
    let set = DomainSet::rect(vec![-0.5], vec![0.5]).map_err(|e| e.to_string())?;
    let r = reference_series(&set, 0.25).map_err(|e| e.to_string())?;
    let var_err = (r.raw_variance / (16.0 / 3.0) - 1.0).abs();
    let x = r.series.sample(1_000_000, 31).map_err(|e| e.to_string())?;
    let batches: Vec<f64> = x.chunks(20_000).map(|b| k_statistics(b).1).collect();
    let k3 = mean(&batches);
    let se = (variance(&batches) / batches.len() as f64).sqrt();
    let exact = cumulant(&r.series, 3).map_err(|e| e.to_string())?;
    check(
        var_err < 0.03 && (0.97..=1.03).contains(&r.calibration) && k3 > 3.0 * se,
        format!(
            "raw variance {:.5} ({:.2}% off 16/3), calibration {:.5}, k3 {k3:.3} +/- {se:.3} (series value {exact:.3})",
            r.raw_variance,
            100.0 * var_err,
            r.calibration
        ),
    )
}

fn convergence_property() -> Outcome {
    let model = CovarianceModel::cauchy(1, 0.2).map_err(|e| e.to_string())?;
    let set = DomainSet::rect(vec![-0.5], vec![0.5]).map_err(|e| e.to_string())?;
    let mut ok = true;
    let mut parts = Vec::new();
    for g in [Functional::H2, Functional::AbsCentered] {
        let cfg = ExperimentConfig::new(model, set.clone(), g, vec![8.0, 16.0, 32.0, 64.0, 128.0], 1000, 20_240_601);
        let t = rate_experiment(&cfg).map_err(|e| e.to_string())?;
        let viol = monotonicity_violations(&t);
        let ratio = rate_product_ratio(&t).map_err(|e| e.to_string())?;
        ok &= viol.is_empty() && ratio <= 2.0;
        let rho = t.rows.iter().map(|r| format!("{:.3}", r.rho)).collect::<Vec<_>>().join("/");
        let slope = slope_fit(&t).map(|f| format!("{:.3}", f.slope)).unwrap_or_else(|e| e.to_string());
        parts.push(format!("{g:?}: rho {rho}, violations {}, product ratio {ratio:.3}, slope {slope}", viol.len()));
        eprintln!("  {g:?} rows:");
        for r in &t.rows {
            eprintln!("    r={:>5} rho={:.4} se={:.4} kappa_bound={:.4} ({:.1} s)", r.r, r.rho, r.rho_stderr, r.kappa_bound, r.runtime_seconds);
        }
    }
    check(ok, parts.join("; "))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let run = |threads: &str, tag: &str| -> Result<Vec<u8>, String> {
        let out = dir.path().join(format!("rho-{tag}.csv"));
        let status = Command::new(env!("CARGO_BIN_EXE_rosenblatt-lab"))
            .args([
                "rate", "experiment", "--family", "cauchy", "--dim", "1", "--theta", "0.2", "--shape", "rect", "--lower=-0.5", "--upper", "0.5",
                "--functional", "h2", "--r-grid", "8,16,32", "--replicates", "1000", "--seed", "99", "--threads", threads, "--out",
            ])
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(String::from_utf8_lossy(&status.stderr).into_owned());
        }
        std::fs::read(&out).map_err(|e| e.to_string())
    };
    let one = run("1", "a")?;
    let eight = run("8", "b")?;
    let again = run("8", "c")?;
    check(
        one == eight && eight == again && !one.is_empty(),
        format!("{} bytes; 1 vs 8 workers identical: {}; rerun identical: {}", one.len(), one == eight, eight == again),
    )
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome, Duration);
    let secs = Duration::from_secs;
    let criteria: [Criterion; 10] = [
        ("special-function goldens", special_function_goldens, secs(1)),
        ("distance pdf", distance_pdf_checks, secs(1)),
        ("Cauchy spectral closed form", cauchy_closed_form, secs(1)),
        ("residual exponents", residual_exponents, secs(30)),
        ("rate formulas", rate_formulas, secs(1)),
        ("sup-min identities", supmin_identities, secs(30)),
        ("field simulator lag covariances", lag_covariances, secs(120)),
        ("Rosenblatt sampler", rosenblatt_sampler, secs(120)),
        ("convergence property", convergence_property, secs(1800)),
        ("determinism across workers", determinism, secs(300)),
    ];
    let mut failures = 0;
    for (k, (name, run, budget)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= budget;
        let (pass, detail) = match outcome {
            Ok(d) => (in_time, d),
            Err(d) => (false, d),
        };
        if !pass {
            failures += 1;
        }
        let timing = format!("{:.2} s of {} s{}", elapsed.as_secs_f64(), budget.as_secs(), if in_time { "" } else { ", over budget" });
        println!("criterion {:>2} {} {name}: {detail} [{timing}]", k + 1, if pass { "PASS" } else { "FAIL" });
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
