use std::f64::consts::PI;

use super::gamma::gamma_real;
use super::EvalOptions;
use crate::error::{Error, Result};

/// Bessel function of the first kind `J_ν(z)` for `ν ≥ -1/2` and `z ≥ 0`.
pub fn bessel_j(nu: f64, z: f64) -> Result<f64> {
    bessel_j_with(nu, z, &EvalOptions::default())
}

/// [`bessel_j`] with explicit evaluation options.
pub fn bessel_j_with(nu: f64, z: f64, opts: &EvalOptions) -> Result<f64> {
    opts.validate()?;
    if !(nu >= -0.5) || !nu.is_finite() {
        return Err(Error::Domain(format!("bessel_j requires nu >= -1/2, got {nu}")));
    }
    if !(z >= 0.0) || !z.is_finite() {
        return Err(Error::Domain(format!("bessel_j requires finite z >= 0, got {z}")));
    }
    Ok(j_real(nu, z, opts))
}

pub(crate) fn j_real(nu: f64, z: f64, opts: &EvalOptions) -> f64 {
    if z == 0.0 {
        return if nu == 0.0 {
            1.0
        } else if nu > 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
    }
    if z >= f64::max(20.0, 2.0 * nu * nu) {
        j_hankel(nu, z, opts)
    } else if z <= f64::max(2.0, nu) {
        j_series(nu, z, opts)
    } else {
        j_miller(nu, z)
    }
}

fn j_series(nu: f64, z: f64, opts: &EvalOptions) -> f64 {
    let q = -0.25 * z * z;
    let mut term = 1.0 / gamma_real(nu + 1.0);
    let mut sum = term;
    for k in 1..opts.max_terms.max(200) {
        term *= q / (k as f64 * (nu + k as f64));
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    (0.5 * z).powf(nu) * sum
}

fn j_hankel(nu: f64, z: f64, opts: &EvalOptions) -> f64 {
    let mu = 4.0 * nu * nu;
    let (mut p, mut q) = (1.0, 0.0);
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..opts.max_terms.max(200) {
        let m = (2 * k - 1) as f64;
        term *= (mu - m * m) / (k as f64 * 8.0 * z);
        if term.abs() > last {
            break;
        }
        last = term.abs();
        // Signs follow (-1)^{k/2} for even k and (-1)^{(k-1)/2} for odd k.
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    let chi = z - (0.5 * nu + 0.25) * PI;
    (2.0 / (PI * z)).sqrt() * (p * chi.cos() - q * chi.sin())
}

fn j_miller(nu: f64, z: f64) -> f64 {
    let n = nu.floor() as i64;
    let mu = nu - n as f64;
    let top = nu.max(z);
    let mut big_n = (top + 30.0 + 4.0 * top.sqrt()).ceil() as i64;
    if big_n % 2 == 1 {
        big_n += 1;
    }
    let target = n.max(0);
    let mut f_next = 0.0; // f_{k+1}
    let mut f = 1e-300_f64.sqrt(); // f_k at k = big_n
    let mut f_target = 0.0;
    let mut f_target_next = 0.0;
    // Normalisation coefficients Γ(μ+k)/k! for even k, accumulated as we go down.
    let coef = |k: i64| -> f64 {
        if k == 0 {
            gamma_real(mu + 1.0)
        } else {
            let kf = k as f64;
            (mu + 2.0 * kf) * (super::gamma::lgamma(mu + kf) - super::gamma::lgamma(kf + 1.0)).exp()
        }
    };
    let mut norm = 0.0;
    let mut k = big_n;
    loop {
        if k == target {
            f_target = f;
        }
        if k == target + 1 {
            f_target_next = f;
        }
        if k % 2 == 0 {
            norm += coef(k / 2) * f;
        }
        if k == 0 {
            break;
        }
        let f_prev = 2.0 * (mu + k as f64) / z * f - f_next;
        f_next = f;
        f = f_prev;
        if f.abs() > 1e250 {
            f *= 1e-250;
            f_next *= 1e-250;
            norm *= 1e-250;
            f_target *= 1e-250;
            f_target_next *= 1e-250;
        }
        k -= 1;
    }
    let scale = (0.5 * z).powf(mu) / norm;
    if n >= 0 {
        f_target * scale
    } else {
        // One downward step from J_μ, J_{μ+1} to J_{μ-1}.
        (2.0 * mu / z * f_target - f_target_next) * scale
    }
}

/// Modified Bessel function of the second kind `K_ν(z)` for real `ν` and `z > 0`.
pub fn bessel_k(nu: f64, z: f64) -> Result<f64> {
    bessel_k_with(nu, z, &EvalOptions::default())
}

/// [`bessel_k`] with explicit evaluation options.
pub fn bessel_k_with(nu: f64, z: f64, opts: &EvalOptions) -> Result<f64> {
    opts.validate()?;
    if !nu.is_finite() {
        return Err(Error::Domain(format!("bessel_k requires finite nu, got {nu}")));
    }
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::Domain(format!("bessel_k requires finite z > 0, got {z}")));
    }
    Ok(k_real(nu, z, opts))
}

/// Coefficients of the Maclaurin series of `1/Γ(1+x)`.
const RGAMMA1P: [f64; 26] = [
    1.0,
    0.577_215_664_901_532_9,
    -0.655_878_071_520_253_8,
    -0.042_002_635_034_095_2,
    0.166_538_611_382_291_5,
    -0.042_197_734_555_544_3,
    -0.009_621_971_527_877_0,
    0.007_218_943_246_663_0,
    -0.001_165_167_591_859_1,
    -0.000_215_241_674_114_9,
    0.000_128_050_282_388_2,
    -0.000_020_134_854_780_7,
    -0.000_001_250_493_482_1,
    0.000_001_133_027_232_0,
    -0.000_000_205_633_841_7,
    0.000_000_006_116_095_0,
    0.000_000_005_002_007_5,
    -0.000_000_001_181_274_6,
    0.000_000_000_104_342_7,
    0.000_000_000_007_782_3,
    -0.000_000_000_003_696_8,
    0.000_000_000_000_510_0,
    -0.000_000_000_000_020_6,
    -0.000_000_000_000_005_4,
    0.000_000_000_000_001_4,
    0.000_000_000_000_000_1,
];

/// Temme's auxiliary functions `(Γ1, Γ2, 1/Γ(1+μ), 1/Γ(1-μ))` for `|μ| ≤ 1/2`.
pub(crate) fn temme_gammas(mu: f64) -> (f64, f64, f64, f64) {
    let m2 = mu * mu;
    let mut g1 = 0.0;
    let mut g2 = 0.0;
    let mut p = 1.0;
    for pair in RGAMMA1P.chunks(2) {
        g2 += pair[0] * p;
        if let Some(odd) = pair.get(1) {
            g1 -= odd * p;
        }
        p *= m2;
    }
    (g1, g2, g2 - mu * g1, g2 + mu * g1)
}

pub(crate) fn k_real(nu: f64, z: f64, opts: &EvalOptions) -> f64 {
    let nu = nu.abs();
    if z >= f64::max(20.0, 2.0 * nu * nu) {
        return k_asymptotic(nu, z, opts);
    }
    let nl = (nu + 0.5).floor();
    let mu = nu - nl;
    let mu2 = mu * mu;
    let xi = 1.0 / z;
    let xi2 = 2.0 * xi;
    let (mut kmu, mut k1);
    if z < 2.0 {
        let x2 = 0.5 * z;
        let pimu = PI * mu;
        let fact = if pimu.abs() < 1e-16 { 1.0 } else { pimu / pimu.sin() };
        let d = -x2.ln();
        let e = mu * d;
        let fact2 = if e.abs() < 1e-16 { 1.0 } else { e.sinh() / e };
        let (gam1, gam2, gampl, gammi) = temme_gammas(mu);
        let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
        let mut sum = ff;
        let ee = e.exp();
        let mut p = 0.5 * ee / gampl;
        let mut q = 0.5 / (ee * gammi);
        let mut c = 1.0;
        let dd = x2 * x2;
        let mut sum1 = p;
        for i in 1..10_000 {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi - mu2);
            c *= dd / fi;
            p /= fi - mu;
            q /= fi + mu;
            let del = c * ff;
            sum += del;
            let del1 = c * (p - fi * ff);
            sum1 += del1;
            if del.abs() < sum.abs() * 1e-17 {
                break;
            }
        }
        kmu = sum;
        k1 = sum1 * xi2;
    } else {
        let mut b = 2.0 * (1.0 + z);
        let mut d = 1.0 / b;
        let mut h = d;
        let mut delh = d;
        let mut q1 = 0.0;
        let mut q2 = 1.0;
        let a1 = 0.25 - mu2;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        for i in 2..100_000 {
            let fi = i as f64;
            a -= 2.0 * (fi - 1.0);
            c = -a * c / fi;
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh *= b * d - 1.0;
            h += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < 1e-17 {
                break;
            }
        }
        h *= a1;
        kmu = (PI / (2.0 * z)).sqrt() * (-z).exp() / s;
        k1 = kmu * (mu + z + 0.5 - h) * xi;
    }
    for i in 1..=(nl as i64) {
        let t = (mu + i as f64) * xi2 * k1 + kmu;
        kmu = k1;
        k1 = t;
    }
    kmu
}

fn k_asymptotic(nu: f64, z: f64, opts: &EvalOptions) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..opts.max_terms.max(200) {
        let m = (2 * k - 1) as f64;
        term *= (mu - m * m) / (k as f64 * 8.0 * z);
        if term.abs() > last {
            break;
        }
        last = term.abs();
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    (PI / (2.0 * z)).sqrt() * (-z).exp() * sum
}

/// `J_0(x), …, J_{m_max}(x)` for `x ≥ 0` by Miller's backward recurrence normalised with
/// `J_0 + 2 Σ J_{2k} = 1`.
pub(crate) fn j_int_sequence(x: f64, m_max: usize) -> Vec<f64> {
    let mut out = vec![0.0; m_max + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let top = (m_max as f64).max(x);
    let start = (top + 30.0 + (40.0 * top).sqrt()) as usize;
    let start = start + start % 2;
    let (mut jp1, mut j) = (0.0_f64, 1e-300_f64);
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        let jm1 = 2.0 * k as f64 / x * j - jp1;
        jp1 = j;
        j = jm1;
        if k - 1 <= m_max {
            out[k - 1] = j;
        }
        if (k - 1) % 2 == 0 && k > 1 {
            norm += 2.0 * j;
        }
        if j.abs() > 1e250 {
            let s = 1e-250;
            j *= s;
            jp1 *= s;
            norm *= s;
            for v in out.iter_mut() {
                *v *= s;
            }
        }
    }
    norm += j;
    for v in out.iter_mut() {
        *v /= norm;
    }
    out
}
