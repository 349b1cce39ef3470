use rosenblatt_lab::specfun::*;
use rosenblatt_lab::Error;
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn gamma_examples() {
    assert_eq!(gamma_fn(1.0).unwrap(), 1.0);
    assert!(rel(gamma_fn(0.5).unwrap(), std::f64::consts::PI.sqrt()) < 1e-14);
    assert!(rel(gamma_fn(0.25).unwrap(), 3.6256099082219083) < 1e-13);
    assert!(matches!(gamma_fn(0.0), Err(Error::Domain(_))));
    assert!(matches!(gamma_fn(-1.5), Err(Error::Domain(_))));
}

#[test]
fn digamma_examples() {
    let p1 = digamma_fn(1.0).unwrap();
    assert!((digamma_fn(2.0).unwrap() - (p1 + 1.0)).abs() < 1e-14);
    assert!((p1 + 0.5772156649015329).abs() < 1e-13, "{p1}");
    assert!((digamma_fn(0.5).unwrap() + 1.9635100260214235).abs() < 1e-13);
    assert!((digamma_fn(0.25).unwrap() + 4.2274535333762654).abs() < 1e-13);
    assert!((digamma_fn(7.3).unwrap() - 1.9178203356379861).abs() < 1e-13);
    assert!(digamma_fn(-1.0).is_err());
}

#[test]
fn bessel_j_examples() {
    assert_eq!(bessel_j(0.0, 0.0).unwrap(), 1.0);
    assert_eq!(bessel_j(1.0, 0.0).unwrap(), 0.0);
    let v = bessel_j(0.5, std::f64::consts::FRAC_PI_2).unwrap();
    assert!(rel(v, 2.0 / std::f64::consts::PI) < 1e-13);
    assert!(bessel_j(0.0, -1.0).is_err());
    assert!(bessel_j(-0.7, 1.0).is_err());
}

#[test]
fn bessel_j_against_reference_values() {
    let cases = [
        (0.0, 1.0, 0.76519768655796655),
        (0.3, 5.5, -0.15791538292094962),
        (2.5, 7.0, -0.2834366512016992),
        (-0.5, 3.3, -0.43372184717936262),
        (10.0, 3.0, 1.2928351645715884e-5),
        (0.75, 25.0, -0.079188973880180657),
        (4.2, 30.5, -0.023027979094920932),
        (7.0, 12.0, -0.17025380412720805),
        (-0.5, 0.4, 1.1619794743664474),
        (0.25, 2.7, 0.039439016264558607),
        (20.0, 35.0, -0.10927417397178037),
    ];
    for (nu, z, want) in cases {
        let got = bessel_j(nu, z).unwrap();
        assert!((got - want).abs() < 1e-12 * want.abs().max(1e-3), "J_{nu}({z}) = {got}, want {want}");
    }
}

#[test]
fn bessel_k_examples() {
    assert_eq!(bessel_k(-0.3, 1.0).unwrap(), bessel_k(0.3, 1.0).unwrap());
    let half = (std::f64::consts::PI / 2.0).sqrt();
    assert!(rel(bessel_k(0.5, 1.0).unwrap(), half * (-1.0f64).exp()) < 1e-13);
    assert!(rel(bessel_k(0.5, 2.0).unwrap(), (std::f64::consts::PI / 4.0).sqrt() * (-2.0f64).exp()) < 1e-13);
    assert!(matches!(bessel_k(0.5, 0.0), Err(Error::Domain(_))));
}

#[test]
fn bessel_k_against_reference_values() {
    let cases = [
        (0.0, 0.1, 2.4270690247020166),
        (0.3, 1.5, 0.21893795473217302),
        (1.7, 3.0, 0.052605504084725399),
        (0.25, 0.01, 6.1657412641392401),
        (5.5, 2.0, 21.090307589508805),
        (2.0, 25.0, 3.7467838080691091e-12),
        (0.6, 50.0, 3.4223457187542741e-23),
        (0.5, 0.7, 0.74388325232069379),
        (3.25, 10.0, 2.9335327355711768e-5),
    ];
    for (nu, z, want) in cases {
        let got = bessel_k(nu, z).unwrap();
        assert!(rel(got, want) < 1e-12, "K_{nu}({z}) = {got}, want {want}");
    }
}

#[test]
fn incomplete_beta_examples() {
    assert!((incomplete_beta(1.0, 2.3, 0.7).unwrap() - 1.0).abs() < 1e-15);
    assert!((incomplete_beta(0.37, 1.0, 1.0).unwrap() - 0.37).abs() < 1e-14);
    assert!((incomplete_beta(0.75, 1.0, 0.5).unwrap() - 0.5).abs() < 1e-14);
    for (x, p, q, want) in [
        (0.3, 2.5, 0.5, 0.018927124071945652),
        (0.9, 0.7, 3.2, 0.99965989676977621),
        (0.999, 2.0, 0.5, 0.95258164648577513),
        (1e-3, 1.5, 0.5, 1.3425151723196837e-5),
    ] {
        assert!(rel(incomplete_beta(x, p, q).unwrap(), want) < 1e-12);
    }
    assert!(incomplete_beta(0.0, 1.0, 1.0).is_err());
    assert!(incomplete_beta(1.2, 1.0, 1.0).is_err());
}

#[test]
fn hyp1f2_examples() {
    assert_eq!(hyp1f2(0.3, 0.5, 1.3, 0.0).unwrap(), 1.0);
    assert!(rel(hyp1f2(1.0, 1.0, 1.0, 1.0).unwrap(), 2.2795853023360673) < 1e-14);
    assert!(rel(hyp1f2(0.3, 0.5, 1.3, -0.25).unwrap(), 0.88992561944157863) < 1e-14);
    assert!(hyp1f2(0.3, -2.0, 1.3, 1.0).is_err());
}

#[test]
fn hyp1f2_large_arguments() {
    for (a, b1, b2, z, want) in [
        (0.375, 0.5, 1.375, -50.0, 0.10118474959202028),
        (0.6, 0.5, 1.6, -399.0, 0.019186805948549338),
        (0.375, 0.5, 1.375, -4000.0, 0.01368176643917836),
        (0.3, 0.5, 1.3, -1e5, 0.010161678582585169),
        (1.0, 1.0, 1.0, 30.0, 6978.7824975252103),
    ] {
        let got = hyp1f2(a, b1, b2, z).unwrap();
        assert!(rel(got, want) < 1e-11, "1F2({a};{b1},{b2};{z}) = {got}, want {want}");
    }
}

#[test]
fn hyp1f2_reduces_to_bessel() {
    // 1F2(a; b, a; -x^2/4) = Γ(b) (x/2)^{1-b} J_{b-1}(x)
    let b = 1.7;
    for x in [0.5, 3.0, 9.0, 30.0, 45.0] {
        let lhs = hyp1f2(0.9, b, 0.9, -x * x / 4.0).unwrap();
        let rhs = gamma_fn(b).unwrap() * (x / 2.0).powf(1.0 - b) * bessel_j(b - 1.0, x).unwrap();
        assert!((lhs - rhs).abs() < 1e-11, "x={x}: {lhs} vs {rhs}");
    }
}

#[test]
fn hyp1f2_reports_nonconvergence() {
    let opts = EvalOptions { rel_tol: 1e-14, max_terms: 32 };
    assert!(matches!(hyp1f2_with(0.5, 0.5, 1.5, -300.0, &opts), Err(Error::Accuracy(_))));
    assert!(hyp1f2_with(0.5, 0.5, 1.5, -300.0, &EvalOptions::default()).is_ok());
}

#[test]
fn eval_options_validation() {
    assert!(gamma_fn_with(1.0, &EvalOptions { rel_tol: 0.1, max_terms: 64 }).is_err());
    assert!(gamma_fn_with(1.0, &EvalOptions { rel_tol: 1e-8, max_terms: 8 }).is_err());
}

#[test]
fn hermite_poly_examples() {
    assert_eq!(hermite_poly(2, 0.0), -1.0);
    assert_eq!(hermite_poly(3, 2.0), 2.0);
    let w: f64 = 1.5;
    let explicit = w.powi(5) - 10.0 * w.powi(3) + 15.0 * w;
    assert!((hermite_poly(5, 1.5) - explicit).abs() < 1e-13);
    assert!((hermite_poly(5, 1.5) + 3.65625).abs() < 1e-13);
}

#[test]
fn y_d_examples() {
    for d in 1..=4 {
        assert_eq!(y_d_kernel(d, 0.0).unwrap(), 1.0);
    }
    assert!((y_d_kernel(1, std::f64::consts::PI).unwrap() + 1.0).abs() < 1e-12);
    assert!(y_d_kernel(3, std::f64::consts::PI).unwrap().abs() < 1e-12);
}

#[test]
fn y_d_matches_closed_forms() {
    for i in 0..400 {
        let z = 0.05 * i as f64;
        assert!((y_d_kernel(1, z).unwrap() - z.cos()).abs() < 1e-10, "z={z}");
        let sinc = if z == 0.0 { 1.0 } else { z.sin() / z };
        assert!((y_d_kernel(3, z).unwrap() - sinc).abs() < 1e-10, "z={z}");
    }
}

#[test]
fn gauss_hermite_orthogonality() {
    let (x, w) = rosenblatt_lab::quad::gauss_hermite_normal(40);
    let fact = |n: usize| (1..=n).map(|i| i as f64).product::<f64>();
    for j in 0..=10usize {
        for k in 0..=10usize {
            let s: f64 = x.iter().zip(&w).map(|(x, w)| w * hermite_poly(j, *x) * hermite_poly(k, *x)).sum();
            let s = s / (fact(j) * fact(k)).sqrt();
            let want = if j == k { 1.0 } else { 0.0 };
            assert!((s - want).abs() < 1e-8, "j={j} k={k}: {s}");
        }
    }
}

proptest! {
    #[test]
    fn gamma_recurrence(x in 0.1f64..10.0) {
        let lhs = gamma_fn(x + 1.0).unwrap();
        let rhs = x * gamma_fn(x).unwrap();
        prop_assert!(rel(lhs, rhs) < 1e-10);
    }

    #[test]
    fn bessel_k_is_even_in_order(nu in -6.0f64..6.0, z in 0.01f64..60.0) {
        prop_assert_eq!(bessel_k(-nu, z).unwrap(), bessel_k(nu, z).unwrap());
    }

    #[test]
    fn bessel_k_recurrence(nu in 0.0f64..4.0, z in 0.05f64..40.0) {
        // K_{ν+1}(z) = K_{ν-1}(z) + (2ν/z) K_ν(z)
        let lhs = bessel_k(nu + 1.0, z).unwrap();
        let rhs = bessel_k(nu - 1.0, z).unwrap() + 2.0 * nu / z * bessel_k(nu, z).unwrap();
        prop_assert!(rel(lhs, rhs) < 1e-10);
    }

    #[test]
    fn bessel_j_recurrence(nu in 0.5f64..6.0, z in 0.1f64..80.0) {
        // J_{ν-1}(z) + J_{ν+1}(z) = (2ν/z) J_ν(z)
        let lhs = bessel_j(nu - 1.0, z).unwrap() + bessel_j(nu + 1.0, z).unwrap();
        let rhs = 2.0 * nu / z * bessel_j(nu, z).unwrap();
        let scale = bessel_j(nu - 1.0, z).unwrap().abs() + bessel_j(nu + 1.0, z).unwrap().abs();
        prop_assert!((lhs - rhs).abs() < 1e-10 * scale.max(1e-3));
    }

    #[test]
    fn incomplete_beta_is_monotone(p in 0.2f64..5.0, q in 0.2f64..5.0, a in 0.001f64..1.0, b in 0.001f64..1.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let il = incomplete_beta(lo, p, q).unwrap();
        let ih = incomplete_beta(hi, p, q).unwrap();
        prop_assert!(il <= ih + 1e-14);
        prop_assert!((0.0..=1.0).contains(&il));
        prop_assert!((incomplete_beta(1.0, p, q).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn incomplete_beta_symmetry(x in 0.001f64..0.999, p in 0.2f64..5.0, q in 0.2f64..5.0) {
        let s = incomplete_beta(x, p, q).unwrap() + incomplete_beta(1.0 - x, q, p).unwrap();
        prop_assert!((s - 1.0).abs() < 1e-12);
    }
}
