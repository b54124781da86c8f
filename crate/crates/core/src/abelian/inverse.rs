//! The inverse `J` of `I` on the slit plane `ℂ∖(−∞, 0]`.
//!
//! For `Im w ≤ 0`, `J(w)` is the solution of `I(z) = w` in the closed upper
//! half of `𝒮_m` reached by continuation from `w = +∞` (where
//! `J(w) ~ (Sw)^{−1/S}`); on the upper half-plane `J(w) = conj J(conj w)`.

use super::Abelian;
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Final residual accepted by Newton, relative to `max(1, |w|)`.
const RESIDUAL_TOL: f64 = 1e-12;
/// `|t|` of the Puiseux variable `t = (Sw)^{−1/S}` below which the three-term
/// expansion is a safe Newton seed.
const PUISEUX_T: f64 = 0.3;
/// `|z|` above which `(a w)^{−1/a}` is a safe seed.
const LARGE_Z: f64 = 3.0;
const TAYLOR_POINTS: usize = 64;

/// Side from which a point of the cut `(−∞, 0)` is approached.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// Limit from the open lower half-plane; lands in `𝒮_m ∩ {Im z > 0}`.
    FromBelow,
    /// Limit from the open upper half-plane; the conjugate of `FromBelow`.
    FromAbove,
}

#[derive(Clone, Copy)]
enum Guard {
    /// Closed upper half of `𝒮_m`.
    UpperHalfSector,
    /// All of `𝒮_m`.
    Sector,
}

/// Taylor coefficients at `C₀` of the branch of `J` coming from the lower
/// half-plane.
#[derive(Clone, Debug)]
pub(crate) struct TaylorAtC0 {
    pub coeffs: Vec<Complex64>,
    /// Radius of the sampling circle; the series is used well inside it.
    pub radius: f64,
}

fn dist_to_segment(p: Complex64, q: Complex64) -> f64 {
    let t = ((p * q.conj()).re / q.norm_sqr()).clamp(0.0, 1.0);
    (p - q * t).norm()
}

impl Abelian {
    fn in_guard(&self, z: Complex64, guard: Guard) -> bool {
        let arg = z.arg();
        let h = self.half_angle();
        match guard {
            Guard::UpperHalfSector => arg >= -1e-12 && arg < h * (1.0 - 1e-13),
            Guard::Sector => arg.abs() < h * (1.0 - 1e-13),
        }
    }

    /// Damped Newton on `I(z) = w`; returns `(last iterate, residual)` on
    /// failure.
    fn newton(
        &self,
        w: Complex64,
        z0: Complex64,
        guard: Guard,
        max_iter: usize,
    ) -> std::result::Result<Complex64, (Complex64, f64)> {
        let scale = w.norm().max(1.0);
        if !self.in_guard(z0, guard) {
            return Err((z0, f64::INFINITY));
        }
        let mut z = z0;
        let mut r = self.eval_sector(z) - w;
        for _ in 0..max_iter {
            if r.norm() <= 1e-15 * scale {
                return Ok(z);
            }
            let dz = r / self.derivative_unchecked(z);
            let mut lambda = 1.0;
            let mut accepted = false;
            while lambda > 1e-6 {
                let zn = z - dz * lambda;
                if self.in_guard(zn, guard) {
                    let rn = self.eval_sector(zn) - w;
                    if rn.norm() < r.norm() {
                        z = zn;
                        r = rn;
                        accepted = true;
                        break;
                    }
                }
                lambda *= 0.5;
            }
            if !accepted || (dz * lambda).norm() <= 1e-16 * z.norm() {
                break;
            }
        }
        if r.norm() <= RESIDUAL_TOL * scale {
            Ok(z)
        } else {
            Err((z, r.norm() / scale))
        }
    }

    /// Three-term Puiseux expansion of `J` at infinity.
    pub fn puiseux(&self, w: Complex64) -> Complex64 {
        let t = (self.sf * w).inv().powf(1.0 / self.sf);
        let coef = self.x / (self.sf - self.mf);
        t + coef * t.powi(self.ap.m as i32 + 1) + self.c0 * t.powi(self.ap.s as i32 + 1)
    }

    /// `J(w)` for `w ∉ (−∞, 0]`.
    pub fn inverse(&self, w: Complex64) -> Result<Complex64> {
        if !(w.re.is_finite() && w.im.is_finite()) || (w.im == 0.0 && w.re <= 0.0) {
            return Err(Error::DomainError {
                z: w,
                reason: "J is defined on the plane slit along (-inf, 0]",
            });
        }
        if w.im > 0.0 {
            return Ok(self.inverse_lower(w.conj(), true)?.conj());
        }
        self.inverse_lower(w, true)
    }

    /// `J(w)` reusing a nearby solution as the Newton seed.
    pub fn inverse_seeded(&self, w: Complex64, guess: Complex64) -> Result<Complex64> {
        if w.im <= 0.0 && !(w.im == 0.0 && w.re <= 0.0) {
            if let Ok(z) = self.newton(w, guess, Guard::UpperHalfSector, 30) {
                return Ok(z);
            }
        } else if w.im > 0.0 {
            if let Ok(z) = self.newton(w.conj(), guess.conj(), Guard::UpperHalfSector, 30) {
                return Ok(z.conj());
            }
        }
        self.inverse(w)
    }

    fn inverse_lower(&self, w: Complex64, use_taylor: bool) -> Result<Complex64> {
        let guard = Guard::UpperHalfSector;
        let t = (self.sf * w.norm()).powf(-1.0 / self.sf);
        if t <= PUISEUX_T {
            if let Ok(z) = self.newton(w, self.puiseux(w), guard, 40) {
                return Ok(z);
            }
        }
        let big = (self.af * w).inv().powf(1.0 / self.af);
        if big.norm() >= LARGE_Z {
            if let Ok(z) = self.newton(w, big, guard, 40) {
                return Ok(z);
            }
        }
        if let Some(seed) = use_taylor.then(|| self.taylor_seed(w)).flatten() {
            if let Ok(z) = self.newton(w, seed, guard, 40) {
                return Ok(z);
            }
        }
        self.continuation(w)
    }

    /// Follows `λw` from a Puiseux anchor down to `λ = 1`.
    fn continuation(&self, w: Complex64) -> Result<Complex64> {
        let guard = Guard::UpperHalfSector;
        let anchor = 1.0 / (self.sf * PUISEUX_T.powf(self.sf));
        let mut lam = (anchor / w.norm()).max(1.0);
        let wa = w * lam;
        let mut z = self
            .newton(wa, self.puiseux(wa), guard, 40)
            .map_err(|(last, residual)| Error::NewtonDivergence { w: wa, last, residual })?;
        let mut ratio: f64 = 0.5;
        while lam > 1.0 {
            let next = (lam * ratio).max(1.0);
            let wn = w * next;
            let pred = z + (wn - w * lam) / self.derivative_unchecked(z);
            let seed = if self.in_guard(pred, guard) { pred } else { z };
            match self.newton(wn, seed, guard, 12) {
                Ok(zn) => {
                    z = zn;
                    lam = next;
                    ratio = (ratio * ratio).max(0.01);
                }
                Err((last, residual)) => {
                    ratio = ratio.sqrt();
                    if ratio > 0.9999 {
                        return Err(Error::NewtonDivergence { w: wn, last, residual });
                    }
                }
            }
        }
        Ok(z)
    }

    /// One-sided limit of `J` at a point `x < 0` of the cut.
    pub fn inverse_boundary(&self, x: f64, side: Side) -> Result<Complex64> {
        if !(x < 0.0) || !x.is_finite() {
            return Err(Error::DomainError {
                z: Complex64::new(x, 0.0),
                reason: "boundary values of J exist on (-inf, 0)",
            });
        }
        let below = self.boundary_from_below(x)?;
        Ok(match side {
            Side::FromBelow => below,
            Side::FromAbove => below.conj(),
        })
    }

    fn boundary_from_below(&self, x: f64) -> Result<Complex64> {
        // Richardson extrapolation of J(x − iδ) over δ, δ/2, δ/4, δ/8.
        let d0 = 1e-2 * x.abs().clamp(1e-3, 1.0);
        let mut row: Vec<Complex64> = Vec::new();
        let mut guess: Option<Complex64> = None;
        for k in 0..4 {
            let w = Complex64::new(x, -d0 / f64::powi(2.0, k));
            let z = match guess {
                Some(g) => self.inverse_seeded(w, g)?,
                None => self.inverse(w)?,
            };
            guess = Some(z);
            row.push(z);
        }
        for level in 1..row.len() {
            let f = f64::powi(2.0, level as i32);
            for i in (level..row.len()).rev() {
                row[i] = (row[i] * f - row[i - 1]) / (f - 1.0);
            }
        }
        let extrap = row[row.len() - 1];
        let target = Complex64::new(x, 0.0);
        let polished = self
            .newton(target, extrap, Guard::Sector, 40)
            .map_err(|(last, residual)| Error::NewtonDivergence {
                w: target,
                last,
                residual,
            })?;
        let gap = (polished - extrap).norm();
        if gap > 1e-9 * polished.norm().max(1.0) {
            return Err(Error::ConvergenceFailure(format!(
                "boundary value of J at {x}: extrapolation {extrap} and polished root {polished} differ by {gap:.2e}"
            )));
        }
        Ok(polished)
    }

    /// `J(C₀−)`, the endpoint of the lower branch at the Laurent constant.
    pub fn j_at_c0(&self) -> Result<Complex64> {
        Ok(self.taylor()?.coeffs[0])
    }

    pub(crate) fn taylor(&self) -> Result<&TaylorAtC0> {
        self.taylor
            .get_or_init(|| self.build_taylor().map_err(|e| e.to_string()))
            .as_ref()
            .map_err(|e| Error::ConvergenceFailure(e.clone()))
    }

    /// Taylor coefficients `J_k` of the lower branch at `C₀` (continued across
    /// the cut), together with the sampling radius.
    pub fn taylor_coefficients(&self) -> Result<(Vec<Complex64>, f64)> {
        let t = self.taylor()?;
        Ok((t.coeffs.clone(), t.radius))
    }

    fn taylor_seed(&self, w: Complex64) -> Option<Complex64> {
        let t = self.taylor().ok()?;
        let h = w - self.c0;
        if h.norm() > 0.8 * t.radius {
            return None;
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for c in t.coeffs.iter().rev() {
            acc = acc * h + c;
        }
        Some(acc)
    }

    /// Cauchy integrals on a circle around `C₀`. The lower branch continues
    /// analytically across the cut until the image `[0, I₁]` of the sector's
    /// edge; the circle has half that distance as radius.
    fn build_taylor(&self) -> Result<TaylorAtC0> {
        let c0 = Complex64::new(self.c0, 0.0);
        let radius = 0.5 * dist_to_segment(c0, self.i1).min(self.c0.abs());
        let n = TAYLOR_POINTS;
        let point = |theta: f64| c0 + Complex64::from_polar(radius, theta);
        let start = -PI / 2.0;
        // Not `inverse`: that would consult the table being built.
        let mut z = self.inverse_lower(point(start), false)?;
        let mut values = vec![z];
        let substeps = 4;
        for j in 1..n {
            for s in 1..=substeps {
                let theta = start + 2.0 * PI * ((j - 1) * substeps + s) as f64 / (n * substeps) as f64;
                let w = point(theta);
                z = self
                    .newton(w, z, Guard::Sector, 40)
                    .map_err(|(last, residual)| Error::NewtonDivergence { w, last, residual })?;
            }
            values.push(z);
        }
        let mut coeffs = Vec::with_capacity(n / 2);
        for k in 0..n / 2 {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, v) in values.iter().enumerate() {
                let theta = start + 2.0 * PI * j as f64 / n as f64;
                acc += v * Complex64::from_polar(radius.powi(-(k as i32)), -(k as f64) * theta);
            }
            coeffs.push(acc / n as f64);
        }
        Ok(TaylorAtC0 { coeffs, radius })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abelian::AbelianParams;

    fn default() -> Abelian {
        Abelian::new(AbelianParams::new(4, 7, 1).unwrap()).unwrap()
    }

    #[test]
    fn j_at_c0_reference() {
        let ab = default();
        let z = ab.j_at_c0().unwrap();
        let r = Complex64::new(0.917043805690370684907673249484, 0.503275630707523158723699846197);
        assert!((z - r).norm() < 1e-11, "{z}");
        let b = ab.inverse_boundary(ab.c0(), Side::FromBelow).unwrap();
        assert!((b - r).norm() < 1e-11, "{b}");
    }

    #[test]
    fn positive_reals_map_to_positive_reals() {
        let ab = default();
        let mut prev = f64::INFINITY;
        for w in [1e-3, 0.05, 0.2, 1.0, 4.0, 100.0, 1e6] {
            let z = ab.inverse(Complex64::new(w, 0.0)).unwrap();
            assert!(z.im.abs() < 1e-14 && z.re > 0.0);
            assert!(z.re < prev);
            prev = z.re;
        }
    }

    #[test]
    fn cut_is_rejected() {
        let ab = default();
        assert!(ab.inverse(Complex64::new(-0.1, 0.0)).is_err());
        assert!(ab.inverse(Complex64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn taylor_series_reproduces_inverse() {
        let ab = default();
        let (c, r) = ab.taylor_coefficients().unwrap();
        let h = Complex64::from_polar(0.5 * r, -1.0);
        let mut acc = Complex64::new(0.0, 0.0);
        for ck in c.iter().rev() {
            acc = acc * h + ck;
        }
        let direct = ab.inverse(Complex64::new(ab.c0(), 0.0) + h).unwrap();
        assert!((acc - direct).norm() < 1e-12, "{acc} {direct}");
    }
}
