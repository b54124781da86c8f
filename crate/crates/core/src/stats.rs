//! Sample summaries and the goodness-of-fit tools of the validation suite.

use num_complex::Complex64;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Gamma};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub stderr: f64,
}

pub fn summary(xs: &[f64]) -> Summary {
    let n = xs.len();
    assert!(n >= 1, "summary of an empty sample");
    let mean = xs.iter().sum::<f64>() / n as f64;
    let variance = if n > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    Summary {
        n,
        mean,
        variance,
        stderr: (variance / n as f64).sqrt(),
    }
}

/// `(mean of xᵏ, its standard error)`.
pub fn raw_moment(xs: &[f64], k: i32) -> (f64, f64) {
    let p: Vec<f64> = xs.iter().map(|x| x.powi(k)).collect();
    let s = summary(&p);
    (s.mean, s.stderr)
}

/// Mean of `aᵢᵏ − bᵢᵏ` over paired samples with its standard error.
pub fn paired_moment_difference(a: &[f64], b: &[f64], k: i32) -> (f64, f64) {
    assert_eq!(a.len(), b.len());
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x.powi(k) - y.powi(k)).collect();
    let s = summary(&d);
    (s.mean, s.stderr)
}

/// Fraction of negative values with a normal-approximation half-width at
/// `z` standard errors.
pub fn negative_fraction(xs: &[f64], z: f64) -> (f64, f64) {
    let n = xs.len() as f64;
    let p = xs.iter().filter(|x| **x < 0.0).count() as f64 / n;
    (p, z * (p * (1.0 - p) / n).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KsResult {
    pub n: usize,
    pub statistic: f64,
    pub p_value: f64,
}

/// `P(K > λ)` for the Kolmogorov distribution.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let t = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        s += if k % 2 == 1 { t } else { -t };
        if t < 1e-17 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// One-sample Kolmogorov–Smirnov test; the p-value uses the asymptotic law
/// with the Stephens small-sample correction.
pub fn ks_test<F: Fn(f64) -> f64>(xs: &[f64], cdf: F) -> KsResult {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in v.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    let sn = n.sqrt();
    KsResult {
        n: v.len(),
        statistic: d,
        p_value: kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d),
    }
}

/// KS test against `Gamma(shape, 1)`.
pub fn ks_gamma(xs: &[f64], shape: f64) -> KsResult {
    let g = Gamma::new(shape, 1.0).expect("positive shape");
    ks_test(xs, |x| if x <= 0.0 { 0.0 } else { g.cdf(x) })
}

/// `(1/N) Σ e^{i x Wⱼ}`.
pub fn empirical_cf(xs: &[f64], x: f64) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for &w in xs {
        let (sin, cos) = (x * w).sin_cos();
        s.re += cos;
        s.im += sin;
    }
    s / xs.len() as f64
}
