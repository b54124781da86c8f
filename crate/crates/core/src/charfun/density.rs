//! Densities of `W^CT`: Fourier inversion of the closed-form characteristic
//! function, and the Gamma scale mixture over `W^DT` samples.
//!
//! Inversion uses `p(x) = Im(∫₀^∞ e^{−itx} φ'(t) dt)/(πx)` with
//! `φ = 𝓕^α 𝓖^β`. On `[0, T₀]` the integrand is tabulated once on fixed
//! Gauss–Kronrod panels. Beyond `T₀` the convergent expansion
//! `φ(t) = Σₖ hₖ t^{−(u+kS)/m}` (from the Taylor series of `J` at `C₀`) is
//! integrated adaptively up to `T(x) = max(T₀, 60/|x|)`, and the rest is
//! obtained by repeated integration by parts.

use super::CharFun;
use crate::error::{Error, Result};
use crate::numeric::quad::{gk15_nodes_weights, integrate};
use crate::numeric::special::gamma;
use crate::params::{Composition, UrnParams};
use crate::simulate::{SampleKind, SampleSet};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DensityMethod {
    FourierInversion,
    Mixture,
}

impl DensityMethod {
    pub fn name(&self) -> &'static str {
        match self {
            DensityMethod::FourierInversion => "fourier",
            DensityMethod::Mixture => "mixture",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityOptions {
    pub init: Composition,
    /// Switch point `T₀` between tabulated and asymptotic integrands.
    pub truncation: f64,
    /// Bound on the per-point error estimate of the inversion.
    pub tol: f64,
}

impl Default for DensityOptions {
    fn default() -> Self {
        Self {
            init: Composition::new(1, 0),
            truncation: 20.0,
            tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    pub m: i64,
    #[serde(rename = "S")]
    pub s: i64,
    pub b: i64,
    pub alpha: u64,
    pub beta: u64,
    pub method: DensityMethod,
    pub truncation_t: f64,
    pub tol: f64,
    pub points: Vec<f64>,
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    /// Free-form `key=value` facts about the construction.
    pub metadata: Vec<(String, String)>,
}

impl DensityGrid {
    fn u(&self) -> f64 {
        (self.alpha + self.beta) as f64
    }

    /// Trapezoid integral over the grid. Near `0` the density behaves like
    /// `C|x|^{u/m−1}`, so the mass of `(0, δ)` is `(m/u)·δ·p(δ)`; that term is
    /// added for the innermost point on each side.
    pub fn integral(&self) -> f64 {
        let mut idx: Vec<usize> = (0..self.points.len()).collect();
        idx.sort_by(|&i, &j| self.points[i].total_cmp(&self.points[j]));
        let mut total = 0.0;
        for w in idx.windows(2) {
            let (i, j) = (w[0], w[1]);
            if self.points[i] < 0.0 && self.points[j] > 0.0 {
                continue;
            }
            total += 0.5 * (self.values[i] + self.values[j]) * (self.points[j] - self.points[i]);
        }
        let zero = self.m as f64 / self.u();
        if let Some(&i) = idx.iter().find(|&&i| self.points[i] > 0.0) {
            total += zero * self.points[i] * self.values[i];
        }
        if let Some(&i) = idx.iter().rev().find(|&&i| self.points[i] < 0.0) {
            total += zero * self.points[i].abs() * self.values[i];
        }
        total
    }

    /// `p` increases on `(−∞, 0)` and decreases on `(0, ∞)`, up to `slack`.
    pub fn monotone_each_side(&self, slack: f64) -> bool {
        let mut pos: Vec<(f64, f64)> = Vec::new();
        let mut neg: Vec<(f64, f64)> = Vec::new();
        for (&x, &p) in self.points.iter().zip(&self.values) {
            if x > 0.0 {
                pos.push((x, p));
            } else {
                neg.push((-x, p));
            }
        }
        [pos, neg].into_iter().all(|mut side| {
            side.sort_by(|a, b| a.0.total_cmp(&b.0));
            side.windows(2).all(|w| w[1].1 <= w[0].1 + slack)
        })
    }

    /// `(x, p(x))` at the innermost positive point.
    pub fn innermost_positive(&self) -> Option<(f64, f64)> {
        let i = (0..self.points.len())
            .filter(|&i| self.points[i] > 0.0)
            .min_by(|&i, &j| self.points[i].total_cmp(&self.points[j]))?;
        Some((self.points[i], self.values[i]))
    }

    pub fn value_at(&self, x: f64) -> Option<f64> {
        self.points.iter().position(|&p| p == x).map(|i| self.values[i])
    }
}

/// Geometric grid on `±[lo, hi]` with `n` points per side, refined toward 0.
pub fn symmetric_log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let side: Vec<f64> = (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
        .collect();
    let mut g: Vec<f64> = side.iter().rev().map(|x| -x).collect();
    g.extend(side);
    g
}

/// Tabulated `φ'` on fixed panels of `[0, T₀]`, plus the expansion beyond.
struct Integrand {
    /// `(t, Kronrod weight, Gauss weight or 0, φ'(t))`.
    nodes: Vec<(f64, f64, f64, Complex64)>,
    t0: f64,
    /// `(hₖ, exponent νₖ = (u + kS)/m)` of `φ(t) = Σ hₖ t^{−νₖ}`.
    series: Vec<(Complex64, f64)>,
    /// First omitted term of the expansion at `T₀`, relative.
    series_error: f64,
}

fn series_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let n = a.len();
    (0..n)
        .map(|k| (0..=k).map(|j| a[j] * b[k - j]).sum())
        .collect()
}

fn series_pow(a: &[Complex64], e: u64) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len()];
    out[0] = Complex64::new(1.0, 0.0);
    for _ in 0..e {
        out = series_mul(&out, a);
    }
    out
}

/// Terms of the large-`t` expansion kept; the ratio of consecutive terms at
/// `T₀ = 20` is of order `10⁻²` for the small urns.
const SERIES_TERMS: usize = 12;

impl Integrand {
    fn build(cf: &CharFun, init: Composition, t0: f64, x_max: f64) -> Result<Self> {
        let p = &cf.params;
        let (mf, sf) = (p.m as f64, p.s as f64);
        let width = 0.25f64.min(6.0 / x_max.max(1e-300));
        let panels = (t0 / width).ceil() as usize;
        let h = t0 / panels as f64;
        let mut ts = Vec::with_capacity(15 * panels);
        let mut ws = Vec::with_capacity(15 * panels);
        for i in 0..panels {
            for (t, wk, wg) in gk15_nodes_weights(i as f64 * h, (i + 1) as f64 * h) {
                ts.push(t);
                ws.push((wk, wg));
            }
        }
        let sweep = cf.eval_fg_sweep(&ts)?;
        let nodes = sweep
            .iter()
            .zip(&ws)
            .map(|(pt, &(wk, wg))| {
                (pt.x, wk, wg, cf.general_prime_from_values(pt.x, pt.f, pt.g, init))
            })
            .collect();

        let (jb, _) = cf.ab_b.taylor_coefficients()?;
        let (jc, _) = cf.ab_c.taylor_coefficients()?;
        let k = cf.k();
        let ks = k.powi(p.s as i32) / sf;
        let n = SERIES_TERMS.min(jb.len()).min(jc.len());
        let mut f = Vec::with_capacity(n);
        let mut g = Vec::with_capacity(n);
        let mut pw = Complex64::new(1.0, 0.0);
        for i in 0..n {
            f.push(k * jb[i] * pw);
            g.push((k * jc[i] * pw).conj());
            pw *= ks;
        }
        let hs = series_mul(&series_pow(&f, init.red), &series_pow(&g, init.black));
        let u = init.total() as f64;
        let series: Vec<(Complex64, f64)> = hs
            .iter()
            .enumerate()
            .map(|(k, &h)| (h, (u + k as f64 * sf) / mf))
            .collect();
        let (hl, nl) = series[n - 1];
        let (h0, n0) = series[0];
        let series_error = hl.norm() * t0.powf(-nl) / (h0.norm() * t0.powf(-n0));
        Ok(Integrand {
            nodes,
            t0,
            series,
            series_error,
        })
    }

    fn phi_prime_asym(&self, t: f64) -> Complex64 {
        self.series
            .iter()
            .map(|&(h, nu)| h * (-nu * t.powf(-nu - 1.0)))
            .sum()
    }

    fn phi_asym(&self, t: f64) -> Complex64 {
        self.series.iter().map(|&(h, nu)| h * t.powf(-nu)).sum()
    }

    /// `∫_T^∞ e^{−ixt} t^{−ν} dt` by integration by parts, with the size of
    /// the last term as error.
    fn tail_power(x: f64, t: f64, nu: f64) -> (Complex64, f64) {
        let ix = Complex64::new(0.0, x);
        let mut term = (Complex64::new(0.0, -x * t)).exp() * t.powf(-nu) / ix;
        let mut sum = term;
        let mut k = nu;
        let mut last = term.norm();
        for _ in 0..200 {
            let next = term * (-k / (ix * t));
            if next.norm() >= last || next.norm() < 1e-18 * sum.norm() {
                last = next.norm();
                break;
            }
            sum += next;
            last = next.norm();
            term = next;
            k += 1.0;
        }
        (sum, last)
    }

    /// `(∫₀^∞ e^{−ixt}φ'(t) dt, error estimate)`.
    fn transform(&self, x: f64) -> (Complex64, f64) {
        let mut kron = Complex64::new(0.0, 0.0);
        let mut gauss = Complex64::new(0.0, 0.0);
        for &(t, wk, wg, d) in &self.nodes {
            let v = Complex64::from_polar(1.0, -x * t) * d;
            kron += v * wk;
            gauss += v * wg;
        }
        let mut err = (kron - gauss).norm();
        let t1 = self.t0.max(60.0 / x.abs());
        let mut total = kron;
        if t1 > self.t0 {
            let r = integrate(
                |t| Complex64::from_polar(1.0, -x * t) * self.phi_prime_asym(t),
                self.t0,
                t1,
                1e-13,
                1e-12,
                4000,
            );
            total += r.value;
            err += r.error;
        }
        for &(h, nu) in &self.series {
            let (v, e) = Self::tail_power(x, t1, nu + 1.0);
            total += h * (-nu) * v;
            err += h.norm() * nu * e;
        }
        // Truncation of the expansion, bounded by the omitted term's integral.
        err += self.series_error * self.series[0].0.norm() * self.t0.powf(-self.series[0].1);
        (total, err)
    }
}

/// Density by Fourier inversion on nonzero grid points.
pub fn density_fourier(p: &UrnParams, grid: &[f64], opts: DensityOptions) -> Result<DensityGrid> {
    let cf = CharFun::new(p)?;
    density_fourier_with(&cf, grid, opts)
}

pub fn density_fourier_with(cf: &CharFun, grid: &[f64], opts: DensityOptions) -> Result<DensityGrid> {
    if let Some(&x) = grid.iter().find(|x| **x == 0.0 || !x.is_finite()) {
        return Err(Error::DomainError {
            z: Complex64::new(x, 0.0),
            reason: "density grids exclude 0 and non-finite points",
        });
    }
    if opts.init.total() == 0 {
        return Err(Error::Format("initial composition must be nonzero".into()));
    }
    let x_max = grid.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let ig = Integrand::build(cf, opts.init, opts.truncation, x_max)?;
    let res: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&x| {
            let (v, e) = ig.transform(x);
            let scale = PI * x.abs();
            (v.im / (PI * x), e / scale)
        })
        .collect();
    if let Some((i, &(_, e))) = res
        .iter()
        .enumerate()
        .find(|(_, (_, e))| !(*e <= opts.tol))
    {
        return Err(Error::TailBoundExceeded {
            x: grid[i],
            estimate: e,
            tol: opts.tol,
        });
    }
    let p = &cf.params;
    let seam = (cf.general_prime_from_values(
        ig.t0,
        cf.eval_f(ig.t0)?,
        cf.eval_g(ig.t0)?,
        opts.init,
    ) - ig.phi_prime_asym(ig.t0))
    .norm();
    let phi_seam = (cf.eval_general(ig.t0, opts.init)? - ig.phi_asym(ig.t0)).norm();
    Ok(DensityGrid {
        m: p.m,
        s: p.s,
        b: p.b,
        alpha: opts.init.red,
        beta: opts.init.black,
        method: DensityMethod::FourierInversion,
        truncation_t: opts.truncation,
        tol: opts.tol,
        points: grid.to_vec(),
        values: res.iter().map(|r| r.0).collect(),
        errors: res.iter().map(|r| r.1).collect(),
        metadata: vec![
            ("nodes".into(), ig.nodes.len().to_string()),
            ("series_terms".into(), ig.series.len().to_string()),
            ("seam_phi_prime".into(), format!("{seam:.3e}")),
            ("seam_phi".into(), format!("{phi_seam:.3e}")),
        ],
    })
}

/// Density of the scale mixture `ξ^σ V`, `ξ ~ Gamma(u/S)`, over the empirical
/// law of `V` given by `W^DT` samples.
pub fn density_mixture(samples: &SampleSet, grid: &[f64]) -> Result<DensityGrid> {
    if samples.kind != SampleKind::Wdt {
        return Err(Error::WrongKind {
            found: samples.kind.name(),
            expected: "wdt",
        });
    }
    let p = samples.params()?;
    if let Some(&x) = grid.iter().find(|x| **x == 0.0 || !x.is_finite()) {
        return Err(Error::DomainError {
            z: Complex64::new(x, 0.0),
            reason: "density grids exclude 0 and non-finite points",
        });
    }
    let u = (samples.alpha + samples.beta) as f64;
    let (mf, sf) = (p.m as f64, p.s as f64);
    let sigma = p.sigma_f64();
    let inv_sigma = 1.0 / sigma;
    let norm = 1.0 / (sigma * gamma(u / sf));
    let total = samples.values.len() as f64;
    let mut pos: Vec<f64> = samples.values.iter().copied().filter(|v| *v > 0.0).collect();
    let mut neg: Vec<f64> = samples.values.iter().filter(|v| **v < 0.0).map(|v| -v).collect();
    pos.sort_by(|a, b| b.total_cmp(a));
    neg.sort_by(|a, b| b.total_cmp(a));
    let res: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&x| {
            let side = if x > 0.0 { &pos } else { &neg };
            let w = x.abs();
            let pre = norm * w.powf(u / mf - 1.0);
            let (mut s1, mut s2) = (0.0, 0.0);
            for &v in side {
                let e = (w / v).powf(inv_sigma);
                // Samples are sorted by |v| descending, so e only grows.
                if e > 745.0 {
                    break;
                }
                let k = pre * v.powf(-u / mf) * (-e).exp();
                s1 += k;
                s2 += k * k;
            }
            let mean = s1 / total;
            let var = (s2 / total - mean * mean).max(0.0);
            (mean, (var / total).sqrt())
        })
        .collect();
    let mut metadata = vec![
        ("samples".into(), samples.values.len().to_string()),
        ("positive_samples".into(), pos.len().to_string()),
        ("negative_samples".into(), neg.len().to_string()),
    ];
    if pos.is_empty() {
        metadata.push(("empty_side".into(), "positive".into()));
    }
    if neg.is_empty() {
        metadata.push(("empty_side".into(), "negative".into()));
    }
    Ok(DensityGrid {
        m: p.m,
        s: p.s,
        b: p.b,
        alpha: samples.alpha,
        beta: samples.beta,
        method: DensityMethod::Mixture,
        truncation_t: f64::NAN,
        tol: f64::NAN,
        points: grid.to_vec(),
        values: res.iter().map(|r| r.0).collect(),
        errors: res.iter().map(|r| r.1).collect(),
        metadata,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::validate_params;

    fn p() -> UrnParams {
        validate_params(4, 7, 1).unwrap()
    }

    #[test]
    fn expansion_matches_closed_form_at_switch() {
        let cf = CharFun::new(&p()).unwrap();
        let ig = Integrand::build(&cf, Composition::new(1, 0), 20.0, 1.0).unwrap();
        for t in [20.0, 35.0, 100.0] {
            let d = cf.eval_general_prime(t, Composition::new(1, 0)).unwrap();
            assert!((d - ig.phi_prime_asym(t)).norm() < 1e-12 * d.norm(), "t={t}");
            let f = cf.eval_f(t).unwrap();
            assert!((f - ig.phi_asym(t)).norm() < 1e-12 * f.norm(), "t={t}");
        }
    }

    #[test]
    fn ibp_tail_matches_quadrature() {
        let (x, t, nu) = (0.7, 90.0, 2.25);
        let (v, e) = Integrand::tail_power(x, t, nu);
        let upper = t + 2.0 * PI / x * 4000.0;
        let r = integrate(
            |s| Complex64::from_polar(1.0, -x * s) * s.powf(-nu),
            t,
            upper,
            1e-16,
            1e-13,
            20000,
        );
        // Leading endpoint term of the remaining range; the rest is
        // O(ν T^{−ν−1}/x²).
        let rest = Complex64::from_polar(1.0, -x * upper) * upper.powf(-nu) / Complex64::new(0.0, x);
        let oracle = r.value + rest;
        assert!((v - oracle).norm() < 1e-9 * v.norm(), "{v} vs {oracle}");
        assert!(e < 1e-10);
    }

    #[test]
    fn mixture_kernel_at_single_ball() {
        // u = 1: kernel is g(w/v)/v with g(x) = x^{1/m−1}e^{−x^{1/σ}}/(σΓ(1/S)).
        let s = SampleSet {
            kind: SampleKind::Wdt,
            m: 4,
            s: 7,
            b: 1,
            alpha: 1,
            beta: 0,
            n_steps: 0,
            replicas: 1,
            seed: 0,
            completion: crate::simulate::Completion::None,
            values: vec![0.8],
        };
        let d = density_mixture(&s, &[0.3, -0.3]).unwrap();
        let sigma = 4.0 / 7.0;
        let g = |x: f64| x.powf(0.25 - 1.0) * (-x.powf(1.0 / sigma)).exp() / (sigma * gamma(1.0 / 7.0));
        assert!((d.values[0] - g(0.3 / 0.8) / 0.8).abs() < 1e-14);
        assert_eq!(d.values[1], 0.0);
        assert!(d.metadata.iter().any(|(k, v)| k == "empty_side" && v == "negative"));
    }

    #[test]
    fn zero_is_rejected() {
        let r = density_fourier(&p(), &[0.5, 0.0], DensityOptions::default());
        assert!(matches!(r, Err(Error::DomainError { .. })));
    }
}
