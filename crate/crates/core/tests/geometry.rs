use approx::assert_relative_eq;
use proptest::prelude::*;
use rosenblatt_lab::geometry::*;
use rosenblatt_lab::quad::{integrate_breaks, QuadOptions};
use rosenblatt_lab::Error;
use std::f64::consts::PI;

fn pdf_mass(set: &DomainSet, r: f64) -> f64 {
    let diam = diameter(set, r).unwrap();
    let mut breaks: Vec<f64> = (1..16).map(|k| diam * k as f64 / 16.0).collect();
    if let DomainSet::Rect { a, b } = set {
        breaks.extend(a.iter().zip(b).map(|(lo, hi)| (hi - lo) * r));
    }
    integrate_breaks(|z| distance_pdf(set, r, z).unwrap(), 0.0, diam, &breaks, &QuadOptions::new(1e-14, 1e-12, 4000)).value
}

#[test]
fn ball_ft_at_pi_in_three_dimensions() {
    let b = DomainSet::ball(3, 1.0).unwrap();
    let k = indicator_ft(&b, &[0.0, PI, 0.0]).unwrap();
    assert_relative_eq!(k.re, 4.0 / PI, max_relative = 1e-13);
    assert_eq!(k.im, 0.0);
}

#[test]
fn ball_ft_at_origin_is_volume() {
    for d in 1..=4 {
        let b = DomainSet::ball(d, 1.3).unwrap();
        let k = indicator_ft(&b, &vec![0.0; d as usize]).unwrap();
        assert_relative_eq!(k.re, volume(&b, 1.0).unwrap(), max_relative = 1e-14);
    }
}

#[test]
fn interval_ft_vanishes_at_pi() {
    let s = DomainSet::centered_box(&[1.0]).unwrap();
    let k = indicator_ft(&s, &[PI]).unwrap();
    assert!(k.norm() < 1e-15, "{k}");
}

#[test]
fn asymmetric_rectangle_ft_matches_direct_formula() {
    let s = DomainSet::rect(vec![-0.3, -1.0], vec![0.7, 2.0]).unwrap();
    let x = [1.7, -0.4];
    let k = indicator_ft(&s, &x).unwrap();
    let i = num_complex::Complex64::i();
    let f = |a: f64, b: f64, t: f64| ((i * b * t).exp() - (i * a * t).exp()) / (i * t);
    let want = f(-0.3, 0.7, 1.7) * f(-1.0, 2.0, -0.4);
    assert!((k - want).norm() < 1e-14);
    assert!(!s.is_origin_symmetric());
}

#[test]
fn ball_in_one_dimension_has_triangular_pdf() {
    let b = DomainSet::ball(1, 1.0).unwrap();
    for z in [0.0, 0.3, 1.0, 1.7, 2.0] {
        assert_relative_eq!(distance_pdf(&b, 1.0, z).unwrap(), 1.0 - z / 2.0, epsilon = 1e-14);
    }
    assert_eq!(distance_pdf(&b, 1.0, 2.5).unwrap(), 0.0);
}

#[test]
fn disk_pdf_matches_closed_form() {
    let b = DomainSet::ball(2, 1.0).unwrap();
    assert_relative_eq!(distance_pdf(&b, 1.0, 0.7).unwrap(), 0.789095275041793948664, max_relative = 1e-12);
    assert_relative_eq!(distance_pdf(&b, 1.0, 1.5).unwrap(), 0.432880838443162434140, max_relative = 1e-12);
}

#[test]
fn ball3_pdf_value() {
    let b = DomainSet::ball(3, 1.0).unwrap();
    assert_relative_eq!(distance_pdf(&b, 1.0, 0.8).unwrap(), 0.82944, max_relative = 1e-12);
}

#[test]
fn rectangle_pdf_in_two_dimensions() {
    let s = DomainSet::centered_box(&[1.0, 0.5]).unwrap();
    for (z, want) in [(0.5, 0.88329632679489661923), (1.3, 0.41157689432587075524), (2.1, 0.0031393551731676207177)] {
        assert_relative_eq!(distance_pdf(&s, 1.0, z).unwrap(), want, max_relative = 1e-12);
    }
}

#[test]
fn pdfs_are_normalised() {
    for d in 1..=3 {
        let b = DomainSet::ball(d, 0.8).unwrap();
        assert!((pdf_mass(&b, 1.5) - 1.0).abs() < 1e-8, "ball d={d}");
    }
    for s in [vec![1.0], vec![1.0, 0.25]] {
        let set = DomainSet::centered_box(&s).unwrap();
        assert!((pdf_mass(&set, 2.0) - 1.0).abs() < 1e-8, "rect {s:?}");
    }
    let cube = DomainSet::rect(vec![-0.5, -0.5, -1.0], vec![0.5, 0.5, 1.0]).unwrap();
    assert!(!distance_pdf_is_exact(&cube));
    assert!((pdf_mass(&cube, 1.0) - 1.0).abs() < 1e-3);
}

#[test]
fn empirical_pair_distances_match_the_pdf() {
    for set in [DomainSet::ball(2, 1.0).unwrap(), DomainSet::centered_box(&[1.0, 0.5]).unwrap()] {
        let pts = uniform_sample(&set, 1.0, 40_000, 11).unwrap();
        let diam = diameter(&set, 1.0).unwrap();
        let bins = 20;
        let mut counts = vec![0usize; bins];
        let n = pts.len() / 2;
        for k in 0..n {
            let (p, q) = (&pts[2 * k], &pts[2 * k + 1]);
            let z = p.iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            counts[((z / diam * bins as f64) as usize).min(bins - 1)] += 1;
        }
        for (i, c) in counts.iter().enumerate() {
            let (lo, hi) = (diam * i as f64 / bins as f64, diam * (i + 1) as f64 / bins as f64);
            let p = integrate_breaks(|z| distance_pdf(&set, 1.0, z).unwrap(), lo, hi, &[1.0, 2.0], &QuadOptions::default()).value;
            let sd = (n as f64 * p * (1.0 - p)).sqrt().max(1.0);
            assert!((*c as f64 - n as f64 * p).abs() < 4.0 * sd, "bin {i}: {c} vs {}", n as f64 * p);
        }
    }
}

#[test]
fn distance_integral_of_inverse_square_root_on_interval() {
    let s = DomainSet::centered_box(&[0.5]).unwrap();
    let v = distance_integral(&s, 1.0, |z| z.powf(-0.5)).unwrap();
    assert_relative_eq!(v, 8.0 / 3.0, max_relative = 1e-9);
}

#[test]
fn distance_integral_oracles_for_balls() {
    let disk = DomainSet::ball(2, 1.0).unwrap();
    assert_relative_eq!(distance_integral(&disk, 1.0, |z| z.powf(-0.5)).unwrap(), 11.834407386243772, max_relative = 1e-9);
    let ball = DomainSet::ball(3, 1.0).unwrap();
    let v = distance_integral(&ball, 1.0, |z| 1.0 / z).unwrap();
    assert_relative_eq!(v, (4.0 * PI / 3.0).powi(2) * 1.2, max_relative = 1e-9);
}

#[test]
fn divergence_is_flagged_at_critical_exponent() {
    for d in 1..=3u32 {
        let b = DomainSet::ball(d, 1.0).unwrap();
        let alpha = d as f64 / 2.0;
        match distance_integral(&b, 1.0, |z| z.powf(-2.0 * alpha)) {
            Err(Error::Integrability(_)) => {}
            other => panic!("d={d}: expected integrability error, got {other:?}"),
        }
        let ok = distance_integral(&b, 1.0, |z| z.powf(-2.0 * (alpha - 0.1)));
        assert!(ok.is_ok(), "d={d}: {ok:?}");
    }
}

#[test]
fn spherical_l2_decay_of_balls() {
    for d in 1..=3u32 {
        let b = DomainSet::ball(d, 1.0).unwrap();
        let slope = spherical_l2_decay_exponent(&b, 10.0, 1000.0).unwrap();
        assert!(-slope >= d as f64 + 1.0 - 0.1, "d={d}: slope {slope}");
    }
}

#[test]
fn json_descriptors_round_trip() {
    let b: DomainSet = serde_json::from_str(r#"{"shape":"ball","R":1.5,"d":2}"#).unwrap();
    assert_eq!(b, DomainSet::Ball { radius: 1.5, d: 2 });
    let r: DomainSet = serde_json::from_str(r#"{"shape":"rect","a":[-1,-2],"b":[1,0.5]}"#).unwrap();
    assert_eq!(r.dim(), 2);
    let back: DomainSet = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
    assert_eq!(back, r);
}

#[test]
fn invalid_sets_are_rejected() {
    assert!(DomainSet::ball(0, 1.0).is_err());
    assert!(DomainSet::ball(2, -1.0).is_err());
    assert!(DomainSet::rect(vec![0.0], vec![1.0]).is_err());
    assert!(DomainSet::rect(vec![-1.0], vec![1.0, 2.0]).is_err());
    let b = DomainSet::ball(2, 1.0).unwrap();
    assert!(matches!(distance_pdf(&b, 1.0, -0.1), Err(Error::Domain(_))));
    assert!(matches!(indicator_ft(&b, &[1.0]), Err(Error::Domain(_))));
    assert!(uniform_sample(&b, 0.0, 5, 1).is_err());
}

#[test]
fn sampling_is_reproducible_and_inside() {
    let b = DomainSet::ball(3, 2.0).unwrap();
    let p = uniform_sample(&b, 1.5, 500, 42).unwrap();
    assert_eq!(p, uniform_sample(&b, 1.5, 500, 42).unwrap());
    assert!(p.iter().all(|x| b.contains(1.5, x)));
}

proptest! {
    #[test]
    fn homothety_for_balls(d in 1u32..4, radius in 0.2f64..3.0, r in 0.1f64..20.0, t in 0.01f64..0.99) {
        let b = DomainSet::ball(d, radius).unwrap();
        let z = t * diameter(&b, r).unwrap();
        let lhs = distance_pdf(&b, r, z).unwrap();
        let rhs = distance_pdf(&b, 1.0, z / r).unwrap() / r;
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1e-300));
    }

    #[test]
    fn ft_is_bounded_by_volume(d in 1u32..4, x in proptest::collection::vec(-30.0f64..30.0, 3)) {
        let b = DomainSet::ball(d, 1.1).unwrap();
        let pt = &x[..d as usize];
        prop_assert!(indicator_ft(&b, pt).unwrap().norm() <= volume(&b, 1.0).unwrap() * (1.0 + 1e-12));
        let rect = DomainSet::rect(vec![-0.4; d as usize], vec![1.3; d as usize]).unwrap();
        prop_assert!(indicator_ft(&rect, pt).unwrap().norm() <= volume(&rect, 1.0).unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn symmetric_sets_have_real_transform(h in proptest::collection::vec(0.1f64..2.0, 2), x in proptest::collection::vec(-10.0f64..10.0, 2)) {
        let s = DomainSet::centered_box(&h).unwrap();
        prop_assert!(indicator_ft(&s, &x).unwrap().im.abs() < 1e-14);
    }
}
