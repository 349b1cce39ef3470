use approx::assert_relative_eq;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rosenblatt_lab::geometry::{uniform_sample, volume, DomainSet};
use rosenblatt_lab::rosenblatt::*;
use rosenblatt_lab::stats::{k_statistics, mean};
use rosenblatt_lab::Error;
use std::sync::OnceLock;

fn unit_interval() -> DomainSet {
    DomainSet::rect(vec![-0.5], vec![0.5]).unwrap()
}

fn interval_series() -> &'static EigenSeries {
    static S: OnceLock<EigenSeries> = OnceLock::new();
    S.get_or_init(|| {
        let k = build_kernel(&unit_interval(), 0.25, &KernelOptions::default()).unwrap();
        eigen_series(&k, None).unwrap()
    })
}

/// Eigenvalues of `∫_{-1/2}^{1/2} |u - v|^{-α} h(v) dv` by piecewise-constant Galerkin with exact
/// cell integrals.
fn riesz_galerkin(alpha: f64, n: usize) -> Vec<f64> {
    let h = 1.0 / n as f64;
    let f = |x: f64| x.abs().powf(2.0 - alpha) / ((1.0 - alpha) * (2.0 - alpha));
    let cell = |k: usize| -> f64 {
        let dlt = k as f64 * h;
        (f(dlt + h) + f(dlt - h) - 2.0 * f(dlt)) / h
    };
    let m = DMatrix::from_fn(n, n, |i, j| cell(i.abs_diff(j)));
    let mut e = m.symmetric_eigenvalues().as_slice().to_vec();
    e.sort_by(|a, b| b.partial_cmp(a).unwrap());
    e
}

#[test]
fn interval_variance_oracle() {
    assert_relative_eq!(variance_oracle(&unit_interval(), 0.25).unwrap(), 16.0 / 3.0, max_relative = 1e-9);
    let s = interval_series();
    assert!((s.variance() / (16.0 / 3.0) - 1.0).abs() < 0.005, "variance {}", s.variance());
    assert!(s.tail_mass() < 0.02);
}

#[test]
fn leading_eigenvalues_match_space_domain_operator() {
    let riesz = riesz_galerkin(0.25, 1600);
    let s = interval_series();
    for j in 0..6 {
        assert!((s.eigenvalues[j] / riesz[j] - 1.0).abs() < 2e-3, "j={j}: {} vs {}", s.eigenvalues[j], riesz[j]);
    }
}

#[test]
fn spectrum_is_nonnegative() {
    let k = build_kernel(&unit_interval(), 0.25, &KernelOptions::default()).unwrap();
    let s = eigen_series(&k, Some(k.blocks.iter().map(|b| b.matrix.nrows()).sum())).unwrap();
    let top = s.eigenvalues[0];
    assert!(s.eigenvalues.iter().all(|v| *v > -1e-10 * top));
    assert_eq!(s.discarded_hs2, 0.0);
}

#[test]
fn refinement_changes_little() {
    let base = KernelOptions { cutoff: Some(200.0), ..KernelOptions::default() };
    let fine = KernelOptions { nodes_per_panel: 14, origin_nodes: 28, ..base };
    let hs = |o: &KernelOptions| build_kernel(&unit_interval(), 0.25, o).unwrap().frobenius_sq();
    let (a, b) = (hs(&base), hs(&fine));
    assert!((a / b - 1.0).abs() < 0.01, "{a} vs {b}");
}

#[test]
fn cutoff_tail_matches_mass_between_two_cutoffs() {
    let set = unit_interval();
    let k1 = build_kernel(&set, 0.25, &KernelOptions { cutoff: Some(150.0), ..KernelOptions::default() }).unwrap();
    let k2 = build_kernel(&set, 0.25, &KernelOptions { cutoff: Some(600.0), ..KernelOptions::default() }).unwrap();
    let gained = k2.frobenius_sq() - k1.frobenius_sq();
    let predicted = k1.cutoff_tail_hs2 - k2.cutoff_tail_hs2;
    assert!((gained / predicted - 1.0).abs() < 0.05, "{gained} vs {predicted}");
}

#[test]
fn diagonal_series_cumulants_and_moments() {
    let s = EigenSeries::from_eigenvalues(vec![1.0, 3.0]);
    assert_eq!(s.eigenvalues, vec![3.0, 1.0]);
    assert_relative_eq!(cumulant(&s, 2).unwrap(), 20.0);
    assert_relative_eq!(cumulant(&s, 3).unwrap(), 224.0);
    assert_relative_eq!(cumulant(&s, 4).unwrap(), 48.0 * 82.0);
    let x = s.sample(200_000, 5).unwrap();
    let n = x.len() as f64;
    let (k2, _) = k_statistics(&x);
    assert!(mean(&x).abs() < 3.0 * (20.0 / n).sqrt());
    // Var of the sample variance is about (κ4 + 2κ2²)/n.
    assert!((k2 - 20.0).abs() < 3.0 * ((48.0 * 82.0 + 800.0) / n).sqrt(), "k2 = {k2}");
    assert!(matches!(cumulant(&s, 1), Err(Error::Domain(_))));
}

#[test]
fn third_cumulant_agrees_with_simulation() {
    let mut s = interval_series().clone();
    let c = s.calibrate(16.0 / 3.0).unwrap();
    assert!((0.97..=1.03).contains(&c));
    assert_relative_eq!(s.variance(), 16.0 / 3.0, max_relative = 1e-12);
    let want = cumulant(&s, 3).unwrap();
    assert!(want > 0.0);
    let x = s.sample(400_000, 77).unwrap();
    let batches: Vec<f64> = x.chunks(20_000).map(|b| k_statistics(b).1).collect();
    let m = mean(&batches);
    let se = (rosenblatt_lab::stats::variance(&batches) / batches.len() as f64).sqrt();
    assert!((m - want).abs() < 4.0 * se, "{m} vs {want} (se {se})");
}

#[test]
fn sampling_is_reproducible_across_thread_counts() {
    let s = interval_series();
    let run = |t: usize| rayon::ThreadPoolBuilder::new().num_threads(t).build().unwrap().install(|| s.sample(10_000, 9).unwrap());
    let (a, b) = (run(1), run(8));
    assert_eq!(a, b);
    assert_ne!(a, s.sample(10_000, 10).unwrap());
}

#[test]
fn disk_kernel_and_variance_oracle() {
    let disk = DomainSet::ball(2, 1.0).unwrap();
    let alpha = 0.4;
    let oracle = variance_oracle(&disk, alpha).unwrap();
    // 2|B|² E|U - V|^{-2α} with U, V uniform on the disk.
    let n = 200_000;
    let u = uniform_sample(&disk, 1.0, n, 1).unwrap();
    let v = uniform_sample(&disk, 1.0, n, 2).unwrap();
    let vals: Vec<f64> = u.iter().zip(&v).map(|(a, b)| ((a[0] - b[0]).hypot(a[1] - b[1])).powf(-2.0 * alpha)).collect();
    let vb = volume(&disk, 1.0).unwrap();
    let mc = 2.0 * vb * vb * mean(&vals);
    let se = 2.0 * vb * vb * (rosenblatt_lab::stats::variance(&vals) / n as f64).sqrt();
    assert!((mc - oracle).abs() < 4.0 * se, "{mc} vs {oracle} (se {se})");

    let k = build_kernel(&disk, alpha, &KernelOptions::default()).unwrap();
    assert!(k.blocks.iter().skip(1).all(|b| b.multiplicity == 2));
    let s = eigen_series(&k, None).unwrap();
    assert!((s.variance() / oracle - 1.0).abs() < 0.01, "{} vs {oracle}", s.variance());
    // Non-radial modes come in equal pairs.
    assert_relative_eq!(s.eigenvalues[1], s.eigenvalues[2], max_relative = 1e-12);
}

#[test]
fn rectangle_kernel_variance() {
    let rect = DomainSet::rect(vec![-1.0, -0.5], vec![1.0, 0.5]).unwrap();
    let opts = KernelOptions { max_nodes: 1200, ..KernelOptions::default() };
    let k = build_kernel(&rect, 0.3, &opts).unwrap();
    assert_eq!(k.blocks.len(), 4);
    let s = eigen_series(&k, None).unwrap();
    let oracle = variance_oracle(&rect, 0.3).unwrap();
    assert!((s.variance() / oracle - 1.0).abs() < 0.03, "{} vs {oracle}", s.variance());
}

#[test]
fn unsupported_inputs() {
    let shifted = DomainSet::rect(vec![-0.2], vec![1.0]).unwrap();
    assert!(matches!(build_kernel(&shifted, 0.25, &KernelOptions::default()), Err(Error::Unsupported(_))));
    assert!(matches!(build_kernel(&unit_interval(), 0.5, &KernelOptions::default()), Err(Error::Domain(_))));
    assert!(matches!(build_kernel(&DomainSet::ball(3, 1.0).unwrap(), 0.5, &KernelOptions::default()), Err(Error::Unsupported(_))));
    assert!(matches!(variance_oracle(&unit_interval(), 0.6), Err(Error::Integrability(_))));
    let tiny = KernelOptions { cutoff: Some(1e4), max_nodes: 100, ..KernelOptions::default() };
    assert!(matches!(build_kernel(&unit_interval(), 0.25, &tiny), Err(Error::Parameter(_))));
}

#[test]
fn calibration_rejects_large_corrections() {
    let mut s = EigenSeries::from_eigenvalues(vec![1.0]);
    assert!(matches!(s.calibrate(4.0), Err(Error::Accuracy(_))));
    assert_eq!(s.eigenvalues, vec![1.0]);
    assert_relative_eq!(s.calibrate(2.1).unwrap(), 1.05f64.sqrt());
}

#[test]
fn density_estimate_is_normalised_and_stable() {
    let s = interval_series();
    let a = s.sample(200_000, 1).unwrap();
    let b = s.sample(200_000, 2).unwrap();
    let bw = silverman_bandwidth(&a);
    let da = density_estimate(&a, bw).unwrap();
    let db = density_estimate(&b, bw).unwrap();
    let dx = da.x[1] - da.x[0];
    let integral: f64 = da.density.iter().sum::<f64>() * dx;
    assert!((integral - 1.0).abs() < 1e-3, "integral {integral}");
    assert!((da.max / db.max - 1.0).abs() < 0.03);
    // Positive skew puts the mode left of the mean.
    let mode = da.x[da.density.iter().position(|v| *v == da.max).unwrap()];
    assert!(mode < 0.0);
    assert!(matches!(density_estimate(&a[..100], bw), Err(Error::Input(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn eigenvalues_scale_with_the_set(r in 0.3f64..3.0) {
        let alpha = 0.3;
        let opts = |c: f64| KernelOptions { cutoff: Some(c), ..KernelOptions::default() };
        let base = eigen_series(&build_kernel(&unit_interval(), alpha, &opts(60.0)).unwrap(), Some(5)).unwrap();
        let set = DomainSet::rect(vec![-0.5 * r], vec![0.5 * r]).unwrap();
        let scaled = eigen_series(&build_kernel(&set, alpha, &opts(60.0 / r)).unwrap(), Some(5)).unwrap();
        for (a, b) in base.eigenvalues.iter().zip(&scaled.eigenvalues) {
            prop_assert!((b / (a * r.powf(1.0 - alpha)) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn calibration_hits_the_target(f in 0.95f64..1.05) {
        let mut s = EigenSeries::from_eigenvalues(vec![2.0, 0.5, 0.1]);
        s.gaussian_variance = 0.2;
        let target = s.variance() * f;
        s.calibrate(target).unwrap();
        prop_assert!((s.variance() / target - 1.0).abs() < 1e-12);
    }
}
