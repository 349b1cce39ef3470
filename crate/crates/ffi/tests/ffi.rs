use std::ffi::CStr;
use std::ptr;

use rosenblatt_lab::Error;
use rosenblatt_lab_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 256];
    let n = unsafe { rl_last_error_message(buf.as_mut_ptr(), buf.len()) };
    let s = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap().to_string();
    assert_eq!(s.len(), n.min(255));
    s
}

#[test]
fn special_functions() {
    let mut v = 0.0;
    assert_eq!(unsafe { rl_gamma(5.0, &mut v) }, RL_OK);
    assert!((v - 24.0).abs() < 1e-12);
    assert_eq!(unsafe { rl_bessel_j(0.5, 1.0, &mut v) }, RL_OK);
    assert!((v - (2.0 / std::f64::consts::PI).sqrt() * 1f64.sin()).abs() < 1e-13);
    assert_eq!(unsafe { rl_bessel_k(0.5, 2.0, &mut v) }, RL_OK);
    assert!((v - (std::f64::consts::PI / 4.0).sqrt() * (-2f64).exp()).abs() < 1e-13);
    assert_eq!(unsafe { rl_gamma(0.0, &mut v) }, RL_ERR_DOMAIN);
    assert!(!last_error().is_empty());
    assert_eq!(unsafe { rl_gamma(1.0, ptr::null_mut()) }, RL_NULL_POINTER);
    assert!(last_error().contains("null"));
}

#[test]
fn error_codes_match_the_library() {
    let cases = [
        (Error::Domain(String::new()), RL_ERR_DOMAIN),
        (Error::Precondition(String::new()), RL_ERR_PRECONDITION),
        (Error::Input(String::new()), RL_ERR_INPUT),
        (Error::Io(std::io::Error::other("x")), RL_ERR_IO),
    ];
    for (e, code) in cases {
        assert_eq!(e.code(), code);
    }
}

#[test]
fn model_handles() {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { rl_model_cauchy(2, 0.5, &mut m) }, RL_OK);
    let (mut b, mut f) = (0.0, 0.0);
    assert_eq!(unsafe { rl_model_covariance(m, 1.0, &mut b) }, RL_OK);
    assert!((b - 0.5f64.sqrt()).abs() < 1e-15);
    assert_eq!(unsafe { rl_model_spectral_density(m, 1.0, &mut f) }, RL_OK);
    assert!((f - (-1f64).exp() / (2.0 * std::f64::consts::PI)).abs() < 1e-12);
    unsafe { rl_model_free(m) };
    unsafe { rl_model_free(ptr::null_mut()) };

    let mut bad = ptr::null_mut();
    assert_ne!(unsafe { rl_model_linnik(1, 3.0, 0.2, &mut bad) }, RL_OK);
    assert!(bad.is_null());
    assert_eq!(unsafe { rl_model_local_global(1, 0.4, 1.0, &mut m) }, RL_OK);
    unsafe { rl_model_free(m) };
    assert_eq!(unsafe { rl_model_covariance(ptr::null(), 1.0, &mut b) }, RL_NULL_POINTER);
}

#[test]
fn set_handles() {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { rl_set_ball(1, 1.0, &mut s) }, RL_OK);
    let mut d = 0u32;
    assert_eq!(unsafe { rl_set_dim(s, &mut d) }, RL_OK);
    assert_eq!(d, 1);
    let mut v = 0.0;
    assert_eq!(unsafe { rl_set_volume(s, 3.0, &mut v) }, RL_OK);
    assert!((v - 6.0).abs() < 1e-14);
    assert_eq!(unsafe { rl_set_distance_pdf(s, 1.0, 0.5, &mut v) }, RL_OK);
    assert!((v - 0.75).abs() < 1e-12);
    let (mut re, mut im) = (0.0, 0.0);
    assert_eq!(unsafe { rl_set_indicator_ft(s, [2.0].as_ptr(), 1, &mut re, &mut im) }, RL_OK);
    assert!((re - 2f64.sin()).abs() < 1e-12 && im.abs() < 1e-14);
    unsafe { rl_set_free(s) };

    let (lo, hi) = ([-1.0, -0.5], [1.0, 0.5]);
    assert_eq!(unsafe { rl_set_rect(lo.as_ptr(), hi.as_ptr(), 2, &mut s) }, RL_OK);
    assert_eq!(unsafe { rl_set_volume(s, 1.0, &mut v) }, RL_OK);
    assert!((v - 2.0).abs() < 1e-14);
    unsafe { rl_set_free(s) };
    assert_eq!(unsafe { rl_set_rect(ptr::null(), hi.as_ptr(), 2, &mut s) }, RL_NULL_POINTER);
}

#[test]
fn rosenblatt_series_round_trip() {
    let mut set = ptr::null_mut();
    let (lo, hi) = ([-0.5], [0.5]);
    assert_eq!(unsafe { rl_set_rect(lo.as_ptr(), hi.as_ptr(), 1, &mut set) }, RL_OK);
    let mut series = ptr::null_mut();
    assert_eq!(unsafe { rl_rosenblatt_build(set, 0.25, &mut series) }, RL_OK);

    let mut n = 0usize;
    assert_eq!(unsafe { rl_series_eigenvalues(series, ptr::null_mut(), 0, &mut n) }, RL_BUFFER_TOO_SMALL);
    assert!(n > 10);
    let mut eig = vec![0.0; n];
    assert_eq!(unsafe { rl_series_eigenvalues(series, eig.as_mut_ptr(), n, &mut n) }, RL_OK);
    assert!(eig.windows(2).all(|w| w[0] >= w[1]));

    let mut var = 0.0;
    assert_eq!(unsafe { rl_series_variance(series, &mut var) }, RL_OK);
    assert!((var - 16.0 / 3.0).abs() < 0.05 * 16.0 / 3.0);
    let mut k2 = 0.0;
    assert_eq!(unsafe { rl_series_cumulant(series, 2, &mut k2) }, RL_OK);
    assert!((k2 - var).abs() < 1e-12 * var);
    assert_eq!(unsafe { rl_series_cumulant(series, 1, &mut k2) }, RL_ERR_DOMAIN);

    let (mut a, mut b) = (vec![0.0; 1000], vec![0.0; 1000]);
    assert_eq!(unsafe { rl_series_sample(series, 1000, 9, a.as_mut_ptr()) }, RL_OK);
    assert_eq!(unsafe { rl_series_sample(series, 1000, 9, b.as_mut_ptr()) }, RL_OK);
    assert_eq!(a, b);
    let mut ks = 1.0;
    assert_eq!(unsafe { rl_ks_distance(a.as_ptr(), a.len(), b.as_ptr(), b.len(), &mut ks) }, RL_OK);
    assert_eq!(ks, 0.0);

    unsafe {
        rl_series_free(series);
        rl_set_free(set);
    }
}

#[test]
fn rate_bound_and_version() {
    let (mut k1, mut kb) = (0.0, 0.0);
    assert_eq!(unsafe { rl_rate_bound(1, 0.25, 0.249, 0.75, &mut k1, &mut kb) }, RL_OK);
    assert!((k1 - 0.3).abs() < 1e-12);
    assert!((kb - 1.0 / 18.0).abs() < 1e-12);
    assert_eq!(unsafe { rl_rate_bound(1, 0.25, 0.249, 0.75, ptr::null_mut(), &mut kb) }, RL_OK);
    assert_eq!(unsafe { rl_rate_bound(1, 0.7, 0.1, 0.75, &mut k1, &mut kb) }, RL_ERR_DOMAIN);
    let v = unsafe { CStr::from_ptr(rl_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn errors_are_thread_local() {
    let mut v = 0.0;
    assert_eq!(unsafe { rl_gamma(-1.0, &mut v) }, RL_ERR_DOMAIN);
    let other = std::thread::spawn(last_error).join().unwrap();
    assert!(other.is_empty());
    assert!(!last_error().is_empty());
    assert_eq!(unsafe { rl_gamma(2.0, &mut v) }, RL_OK);
    assert!(last_error().is_empty());
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/rosenblatt_lab.h")).unwrap();
    for name in [
        "rl_last_error_message", "rl_version", "rl_gamma", "rl_bessel_j", "rl_bessel_k", "rl_model_cauchy", "rl_model_linnik",
        "rl_model_local_global", "rl_model_free", "rl_model_covariance", "rl_model_spectral_density", "rl_set_ball", "rl_set_rect",
        "rl_set_free", "rl_set_dim", "rl_set_volume", "rl_set_distance_pdf", "rl_set_indicator_ft", "rl_rosenblatt_build",
        "rl_series_free", "rl_series_eigenvalues", "rl_series_variance", "rl_series_cumulant", "rl_series_sample", "rl_rate_bound",
        "rl_ks_distance", "typedef struct RlModel RlModel", "RL_ERR_JSON 16", "RL_PANIC 102",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}

#[test]
fn header_compiles_as_c99() {
    let Ok(cc) = std::process::Command::new("cc").arg("--version").output() else {
        eprintln!("no C compiler on PATH; skipping");
        return;
    };
    assert!(cc.status.success());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"rosenblatt_lab.h\"\nint main(void) {\n  RlSet *s = NULL;\n  double v;\n  \
         if (rl_set_ball(1, 1.0, &s) != RL_OK) return 1;\n  rl_set_volume(s, 2.0, &v);\n  rl_set_free(s);\n  return 0;\n}\n",
    )
    .unwrap();
    let out = std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I", concat!(env!("CARGO_MANIFEST_DIR"), "/include")])
        .arg(&src)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
