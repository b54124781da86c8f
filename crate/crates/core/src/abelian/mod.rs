//! The Abelian integral `I(z) = ∫_{[z, z∞)} (1+u^m)^{b/m} u^{−S−1} du` on the
//! open set `𝒪_m` (the plane minus the rays through the `m`-th roots of `−1`),
//! its derivative, its boundary values and (in [`inverse`]) its inverse `J`.
//!
//! On the principal sector `𝒮_m = {|arg z| < π/m}`:
//! - `|z| ≥ 1.05`: `I(z) = Σ binom(b/m, n) z^{−a−mn}/(a+mn)`;
//! - `|z| ≤ 0.95`: `I(z) = C₀ − Σ binom(b/m, n) z^{mn−S}/(mn−S)`;
//! - in between: Gauss–Kronrod quadrature of
//!   `z^{−S} ∫₀¹ (s^m + z^m)^{b/m} s^{a−1} ds`.
//!
//! Other sectors reduce to `𝒮_m` by `I(ωz) = ω^{−S} I(z)`, `ω = e^{2iπ/m}`.

mod inverse;

pub use inverse::Side;

use crate::error::{Error, Result};
use crate::numeric::quad;
use crate::params;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::OnceLock;

const ANNULUS_INNER: f64 = 0.95;
const ANNULUS_OUTER: f64 = 1.05;
const SERIES_MAX_TERMS: usize = 4000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AbelianParams {
    pub m: i64,
    pub s: i64,
    pub b: i64,
    pub a: i64,
}

impl AbelianParams {
    /// Requires `S ≥ 5`, `S/2 < m < S` and `1 ≤ b < S/2`.
    pub fn new(m: i64, s: i64, b: i64) -> Result<Self> {
        let ok = s >= 5 && 2 * m > s && m < s && b >= 1 && 2 * b < s;
        if !ok {
            return Err(Error::NotLargeNonTriangular(format!(
                "Abelian integral needs S >= 5, S/2 < m < S, 1 <= b < S/2; got (m, S, b) = ({m}, {s}, {b})"
            )));
        }
        Ok(Self { m, s, b, a: s - b })
    }
}

/// Evaluator for `I = I_{m,S,b}` and its inverse.
#[derive(Debug)]
pub struct Abelian {
    pub ap: AbelianParams,
    c0: f64,
    i1: Complex64,
    x: f64,
    mf: f64,
    sf: f64,
    af: f64,
    taylor: OnceLock<Result<inverse::TaylorAtC0, String>>,
}

impl Clone for Abelian {
    fn clone(&self) -> Self {
        let out = Abelian::with_constants(self.ap, self.c0, self.i1);
        if let Some(t) = self.taylor.get() {
            let _ = out.taylor.set(t.clone());
        }
        out
    }
}

impl Abelian {
    pub fn new(ap: AbelianParams) -> Result<Self> {
        let c0 = params::c0_series(ap.m, ap.s, ap.b)?;
        Ok(Self::with_constants(ap, c0, params::i1(ap.m, ap.s, ap.b)))
    }

    fn with_constants(ap: AbelianParams, c0: f64, i1: Complex64) -> Self {
        Self {
            ap,
            c0,
            i1,
            x: ap.b as f64 / ap.m as f64,
            mf: ap.m as f64,
            sf: ap.s as f64,
            af: ap.a as f64,
            taylor: OnceLock::new(),
        }
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn i1(&self) -> Complex64 {
        self.i1
    }

    /// Half-opening `π/m` of the principal sector.
    pub fn half_angle(&self) -> f64 {
        PI / self.mf
    }

    /// Writes `z = ω^k z₀` with `z₀ ∈ 𝒮_m`.
    pub fn sector_reduce(&self, z: Complex64) -> Result<(Complex64, i64)> {
        if !(z.re.is_finite() && z.im.is_finite()) || z.norm() == 0.0 {
            return Err(Error::DomainError {
                z,
                reason: "I is defined on the punctured plane",
            });
        }
        let arg = z.arg();
        let k = (arg * self.mf / (2.0 * PI)).round() as i64;
        let theta = arg - 2.0 * PI * k as f64 / self.mf;
        if theta.abs() >= self.half_angle() * (1.0 - 1e-14) {
            return Err(Error::DomainError {
                z,
                reason: "point lies on an excluded ray",
            });
        }
        Ok((Complex64::from_polar(z.norm(), theta), k))
    }

    fn rotation(&self, k: i64) -> Complex64 {
        // ω^{−kS}
        let e = (-k * self.ap.s).rem_euclid(self.ap.m);
        Complex64::from_polar(1.0, 2.0 * PI * e as f64 / self.mf)
    }

    /// `I(z)` for `z ∈ 𝒪_m`.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let (z0, k) = self.sector_reduce(z)?;
        Ok(self.rotation(k) * self.eval_sector(z0))
    }

    /// `I(z)` for `z` already in `𝒮_m`.
    pub(crate) fn eval_sector(&self, z: Complex64) -> Complex64 {
        let r = z.norm();
        let v = if r >= ANNULUS_OUTER {
            self.series_infinity(z, SERIES_MAX_TERMS)
        } else if r <= ANNULUS_INNER {
            self.series_zero(z, SERIES_MAX_TERMS)
        } else {
            None
        };
        v.unwrap_or_else(|| self.quadrature(z))
    }

    /// `Σ binom(b/m, n) z^{−a−mn}/(a+mn)`; `None` if not converged in
    /// `max_terms`.
    pub fn series_infinity(&self, z: Complex64, max_terms: usize) -> Option<Complex64> {
        let zi = z.inv();
        let q = zi.powi(self.ap.m as i32);
        let mut p = zi.powi(self.ap.a as i32);
        let mut binom = 1.0;
        let mut sum = Complex64::new(0.0, 0.0);
        for n in 0..max_terms {
            let nf = n as f64;
            let t = p * (binom / (self.af + self.mf * nf));
            sum += t;
            if n >= 2 && t.norm() <= 1e-17 * sum.norm() {
                return Some(sum);
            }
            binom *= (self.x - nf) / (nf + 1.0);
            p *= q;
        }
        None
    }

    /// `C₀ − Σ binom(b/m, n) z^{mn−S}/(mn−S)`; `None` if not converged.
    pub fn series_zero(&self, z: Complex64, max_terms: usize) -> Option<Complex64> {
        let q = z.powi(self.ap.m as i32);
        let mut p = z.powi(-(self.ap.s as i32));
        let mut binom = 1.0;
        let mut sum = Complex64::new(0.0, 0.0);
        for n in 0..max_terms {
            let nf = n as f64;
            let t = p * (binom / (self.mf * nf - self.sf));
            sum -= t;
            if n >= 2 && t.norm() <= 1e-17 * sum.norm() {
                return Some(sum + self.c0);
            }
            binom *= (self.x - nf) / (nf + 1.0);
            p *= q;
        }
        None
    }

    /// Quadrature of `z^{−S} ∫₀¹ (s^m + z^m)^{b/m} s^{a−1} ds`, `z ∈ 𝒮_m`.
    pub fn quadrature(&self, z: Complex64) -> Complex64 {
        let zm = z.powi(self.ap.m as i32);
        let (m, a1, x) = (self.ap.m as i32, self.ap.a as i32 - 1, self.x);
        let r = quad::integrate(
            |s| (zm + s.powi(m)).powf(x) * s.powi(a1),
            0.0,
            1.0,
            1e-300,
            2e-15,
            400,
        );
        r.value * z.powi(-(self.ap.s as i32))
    }

    /// Independent oracle on the defining ray: quadrature of
    /// `z^{−S} ∫₁^T (1 + z^m t^m)^{b/m} t^{−S−1} dt` plus the remainder
    /// `I(zT)` from the series at infinity, with `|zT| ≥ 4`.
    pub fn ray_quadrature(&self, z: Complex64) -> Result<Complex64> {
        let (z0, k) = self.sector_reduce(z)?;
        let t_max = (4.0 / z0.norm()).max(2.0);
        let zm = z0.powi(self.ap.m as i32);
        let (m, s1, x) = (self.ap.m, self.ap.s + 1, self.x);
        let r = quad::integrate(
            |t| (1.0 + zm * t.powi(m as i32)).powf(x) * t.powi(-(s1 as i32)),
            1.0,
            t_max,
            1e-300,
            2e-15,
            2000,
        );
        let tail = self
            .series_infinity(z0 * t_max, SERIES_MAX_TERMS)
            .expect("series at |z| >= 4 converges");
        Ok(self.rotation(k) * (r.value * z0.powi(-(self.ap.s as i32)) + tail))
    }

    /// `I'(z) = −(1+z^m)^{b/m}/z^{S+1}` with the principal power.
    pub fn derivative(&self, z: Complex64) -> Result<Complex64> {
        self.sector_reduce(z)?;
        Ok(self.derivative_unchecked(z))
    }

    pub(crate) fn derivative_unchecked(&self, z: Complex64) -> Complex64 {
        -(1.0 + z.powi(self.ap.m as i32)).powf(self.x) * z.powi(-(self.ap.s as i32) - 1)
    }

    /// `I` along the upper edge `r e^{iπ/m}`, `r ≥ 1`:
    /// `(1/m) ζ^{−a} ∫₀^{1/r^m} (1−u)^{b/m} u^{c/m} du`, `ζ = e^{iπ/m}`.
    pub fn boundary_outer(&self, r: f64) -> Complex64 {
        assert!(r >= 1.0, "outer boundary map needs r >= 1");
        let y = r.powf(-self.mf);
        let d = (self.ap.m + self.ap.b) as f64;
        let v = crate::numeric::special::beta_inc(self.af / self.mf, d / self.mf, y) / self.mf;
        Complex64::from_polar(v, -self.af * PI / self.mf)
    }

    /// `I` along the upper edge for `0 < r ≤ 1`:
    /// `I₁ + (1/m) ζ^{−S} ∫₁^{1/r^m} (u−1)^{b/m} u^{c/m} du`.
    pub fn boundary_inner(&self, r: f64) -> Complex64 {
        assert!(r > 0.0 && r <= 1.0, "inner boundary map needs 0 < r <= 1");
        let top = r.powf(-self.mf) - 1.0;
        let cm = (self.ap.s - self.ap.m - self.ap.b) as f64 / self.mf;
        let x = self.x;
        let (v, _) = quad::integrate_real(
            |t| t.powf(x) * (1.0 + t).powf(cm),
            0.0,
            top,
            1e-300,
            1e-15,
            2000,
        );
        self.i1 + Complex64::from_polar(v / self.mf, -self.sf * PI / self.mf)
    }
}
