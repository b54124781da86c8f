//! Closed-form characteristic functions of `X` (one red ball) and `Y` (one
//! black ball):
//!
//! ```text
//! 𝓕(x) = K x^{−1/m} J_b(C₀ᵇ + K^S x^{−S/m}/S)
//! 𝓖(x) = K̄ x^{−1/m} J_c(C₀ᶜ + K̄^S x^{−S/m}/S)        (x > 0)
//! ```
//!
//! with `K = κ e^{−iπ/2m}`, extended by `𝓕(0) = 1` and `𝓕(−x) = conj 𝓕(x)`.
//! The law of `W^CT` started from `(α, β)` has characteristic function
//! `𝓕^α 𝓖^β`.

pub mod density;

pub use density::{density_fourier, density_mixture, DensityGrid, DensityMethod, DensityOptions};

use crate::abelian::{Abelian, AbelianParams};
use crate::error::{Error, Result};
use crate::params::{spectral_constants, Composition, SpectralConstants, UrnParams};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Which of the two Abelian parameters (`b` for `𝓕`, `c` for `𝓖`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    B,
    C,
}

/// Values of `𝓕`, `𝓖` at a positive point together with the `J` values used,
/// which seed the next evaluation on a grid.
#[derive(Clone, Copy, Debug)]
pub struct FgPoint {
    pub x: f64,
    pub f: Complex64,
    pub g: Complex64,
    pub zb: Complex64,
    pub zc: Complex64,
}

#[derive(Clone, Debug)]
pub struct CharFun {
    pub params: UrnParams,
    pub constants: SpectralConstants,
    pub ab_b: Abelian,
    pub ab_c: Abelian,
    mf: f64,
    sf: f64,
    ks_over_s: Complex64,
}

fn at_point(x: f64, e: Error) -> Error {
    match e {
        Error::NewtonDivergence { w, last, residual } => Error::ConvergenceFailure(format!(
            "J did not converge while evaluating the characteristic function at x = {x} \
             (w = {w}, last iterate {last}, residual {residual:.2e})"
        )),
        other => other,
    }
}

impl CharFun {
    pub fn new(p: &UrnParams) -> Result<Self> {
        let constants = spectral_constants(p)?;
        let ab_b = Abelian::new(AbelianParams::new(p.m, p.s, p.b)?)?;
        let ab_c = Abelian::new(AbelianParams::new(p.m, p.s, p.c)?)?;
        let sf = p.s as f64;
        Ok(Self {
            params: *p,
            ks_over_s: constants.k.powi(p.s as i32) / sf,
            constants,
            ab_b,
            ab_c,
            mf: p.m as f64,
            sf,
        })
    }

    pub fn k(&self) -> Complex64 {
        self.constants.k
    }

    /// Arguments of `J_b`, `J_c` at `x > 0`.
    pub fn j_arguments(&self, x: f64) -> (Complex64, Complex64) {
        let s = x.powf(-self.sf / self.mf);
        (
            self.constants.fb.c0 + self.ks_over_s * s,
            self.constants.gc.c0 + self.ks_over_s.conj() * s,
        )
    }

    fn fg_positive(&self, x: f64, seed: Option<(Complex64, Complex64)>) -> Result<FgPoint> {
        let (wb, wc) = self.j_arguments(x);
        let (zb, zc) = match seed {
            Some((sb, sc)) => (self.ab_b.inverse_seeded(wb, sb), self.ab_c.inverse_seeded(wc, sc)),
            None => (self.ab_b.inverse(wb), self.ab_c.inverse(wc)),
        };
        let zb = zb.map_err(|e| at_point(x, e))?;
        let zc = zc.map_err(|e| at_point(x, e))?;
        let scale = x.powf(-1.0 / self.mf);
        Ok(FgPoint {
            x,
            f: self.k() * scale * zb,
            g: self.k().conj() * scale * zc,
            zb,
            zc,
        })
    }

    /// `(𝓕(x), 𝓖(x))`.
    pub fn eval_fg(&self, x: f64) -> Result<(Complex64, Complex64)> {
        if x == 0.0 {
            let one = Complex64::new(1.0, 0.0);
            return Ok((one, one));
        }
        let p = self.fg_positive(x.abs(), None)?;
        Ok(if x > 0.0 {
            (p.f, p.g)
        } else {
            (p.f.conj(), p.g.conj())
        })
    }

    pub fn eval_f(&self, x: f64) -> Result<Complex64> {
        Ok(self.eval_fg(x)?.0)
    }

    pub fn eval_g(&self, x: f64) -> Result<Complex64> {
        Ok(self.eval_fg(x)?.1)
    }

    /// `𝓕, 𝓖` on positive points in increasing order, each `J` solve seeded by
    /// the previous one.
    pub fn eval_fg_sweep(&self, xs: &[f64]) -> Result<Vec<FgPoint>> {
        let mut out = Vec::with_capacity(xs.len());
        let mut seed = None;
        for &x in xs {
            assert!(x > 0.0, "sweep points must be positive");
            let p = self.fg_positive(x, seed)?;
            seed = Some((p.zb, p.zc));
            out.push(p);
        }
        Ok(out)
    }

    /// `𝓕'(x) = 𝓕(𝓕^a 𝓖^b − 1)/(m x)`, `𝓖'(x) = 𝓖(𝓕^c 𝓖^d − 1)/(m x)`.
    pub fn eval_fg_prime(&self, x: f64) -> Result<(Complex64, Complex64)> {
        if x == 0.0 {
            return Err(Error::DomainError {
                z: Complex64::new(0.0, 0.0),
                reason: "the algebraic derivative formula needs x != 0",
            });
        }
        let (f, g) = self.eval_fg(x)?;
        Ok(self.prime_from_values(x, f, g))
    }

    pub(crate) fn prime_from_values(&self, x: f64, f: Complex64, g: Complex64) -> (Complex64, Complex64) {
        let p = &self.params;
        let mx = self.mf * x;
        let fp = f * (f.powi(p.a as i32) * g.powi(p.b as i32) - 1.0) / mx;
        let gp = g * (f.powi(p.c as i32) * g.powi(p.d as i32) - 1.0) / mx;
        (fp, gp)
    }

    pub fn eval_f_prime(&self, x: f64) -> Result<Complex64> {
        Ok(self.eval_fg_prime(x)?.0)
    }

    /// `(𝓕', 𝓖')` at `x > 0` by the chain rule through `J' = 1/I'(J)`,
    /// independent of the differential system.
    pub fn eval_fg_prime_chain(&self, x: f64) -> Result<(Complex64, Complex64)> {
        assert!(x > 0.0, "chain-rule derivative is implemented for x > 0");
        let p = self.fg_positive(x, None)?;
        let m = self.mf;
        let xm = x.powf(-1.0 / m);
        // d/dx of x^{−S/m}
        let ds = -(self.sf / m) * x.powf(-self.sf / m - 1.0);
        let one = |k: Complex64, z: Complex64, ab: &Abelian, ks: Complex64| -> Result<Complex64> {
            let jp = ab.derivative(z)?.inv();
            Ok(k * (-(1.0 / m) * xm / x * z + xm * jp * ks * ds))
        };
        let ks = self.ks_over_s;
        Ok((
            one(self.k(), p.zb, &self.ab_b, ks)?,
            one(self.k().conj(), p.zc, &self.ab_c, ks.conj())?,
        ))
    }

    /// `𝓕(x)^α 𝓖(x)^β`.
    pub fn eval_general(&self, x: f64, init: Composition) -> Result<Complex64> {
        let (f, g) = self.eval_fg(x)?;
        Ok(f.powi(init.red as i32) * g.powi(init.black as i32))
    }

    /// Derivative of `𝓕^α 𝓖^β`; at `x = 0` the limit `i(bα − cβ)/S`.
    pub fn eval_general_prime(&self, x: f64, init: Composition) -> Result<Complex64> {
        if x == 0.0 {
            let p = &self.params;
            let mean = (p.b * init.red as i64 - p.c * init.black as i64) as f64 / self.sf;
            return Ok(Complex64::new(0.0, mean));
        }
        let (f, g) = self.eval_fg(x)?;
        Ok(self.general_prime_from_values(x, f, g, init))
    }

    pub(crate) fn general_prime_from_values(
        &self,
        x: f64,
        f: Complex64,
        g: Complex64,
        init: Composition,
    ) -> Complex64 {
        let p = &self.params;
        let (al, be) = (init.red as i32, init.black as i32);
        let phi = f.powi(al) * g.powi(be);
        let inner = (f.powi(p.a as i32) * g.powi(p.b as i32) - 1.0) * al as f64
            + (f.powi(p.c as i32) * g.powi(p.d as i32) - 1.0) * be as f64;
        phi * inner / (self.mf * x)
    }

    /// `𝓕` at `x < 0` straight from the closed form, without conjugation:
    /// `K e^{iπ/m} |x|^{−1/m} J_b(C₀ + (K^S/S) e^{iπS/m} |x|^{−S/m})`.
    pub fn eval_f_negative_direct(&self, x: f64) -> Result<Complex64> {
        assert!(x < 0.0);
        let rot = Complex64::from_polar(1.0, PI / self.mf);
        let w = self.constants.fb.c0
            + self.ks_over_s * rot.powi(self.params.s as i32) * x.abs().powf(-self.sf / self.mf);
        let z = self.ab_b.inverse(w).map_err(|e| at_point(x, e))?;
        Ok(self.k() * rot * x.abs().powf(-1.0 / self.mf) * z)
    }

    /// `φ(z) = κ z^{−1/m} J(C₀ + (κ^S/S)(z^{−1/m})^S)` on `ℂ∖((−∞,0] ∪ [ρ,∞))`.
    /// `𝓕(x) = φ_b(ix)` and `𝓖(x) = φ_c(−ix)`.
    pub fn phi(&self, branch: Branch, z: Complex64) -> Result<Complex64> {
        let (ab, c0) = match branch {
            Branch::B => (&self.ab_b, self.constants.fb.c0),
            Branch::C => (&self.ab_c, self.constants.gc.c0),
        };
        if z.im == 0.0 && z.re <= 0.0 {
            return Err(Error::DomainError {
                z,
                reason: "phi is not defined on (-inf, 0]",
            });
        }
        let kappa = self.constants.kappa;
        let r = z.powf(-1.0 / self.mf);
        let w = c0 + kappa.powi(self.params.s as i32) / self.sf * r.powi(self.params.s as i32);
        let j = ab.inverse(w).map_err(|e| match e {
            Error::DomainError { .. } => Error::DomainError {
                z,
                reason: "phi is not defined on [rho, inf)",
            },
            other => other,
        })?;
        Ok(kappa * r * j)
    }

    /// `lim_{x→+∞} 𝓕(x) x^{1/m} = K·J_b(C₀−)`.
    pub fn tail_constant_f(&self) -> Result<Complex64> {
        Ok(self.k() * self.ab_b.j_at_c0()?)
    }

    /// Cross-checks the closed forms against the differential system on
    /// `n` log-spaced points of `[x_min, x_max] ⊂ (0, ∞)`.
    pub fn ode_crosscheck(&self, x_min: f64, x_max: f64, n: usize) -> Result<OdeReport> {
        assert!(x_min > 0.0 && x_max >= x_min && n >= 1);
        let p = &self.params;
        let target = Complex64::new(0.0, self.mf / self.sf * (p.b + p.c) as f64);
        let k_inv_m = self.k().powi(p.m as i32).inv();
        let mut rep = OdeReport {
            points: n,
            max_residual: 0.0,
            worst_x: x_min,
            max_first_integral_dev: 0.0,
            first_integral_spread: 0.0,
            first_integral_value: Complex64::new(0.0, 0.0),
            k_inv_m,
            expected_first_integral: target,
        };
        let mut first: Option<Complex64> = None;
        for i in 0..n {
            let x = if n == 1 {
                x_min
            } else {
                x_min * (x_max / x_min).powf(i as f64 / (n - 1) as f64)
            };
            let (f, g) = self.eval_fg(x)?;
            let (fp, gp) = self.eval_fg_prime_chain(x)?;
            let rf = f + self.mf * x * fp - f.powi(p.a as i32 + 1) * g.powi(p.b as i32);
            let rg = g + self.mf * x * gp - f.powi(p.c as i32) * g.powi(p.d as i32 + 1);
            let res = rf.norm().max(rg.norm());
            if res > rep.max_residual {
                rep.max_residual = res;
                rep.worst_x = x;
            }
            // f = x^{1/m} 𝓕, g = x^{1/m} 𝓖.
            let xm = x.powf(1.0 / self.mf);
            let (fw, gw) = (f * xm, g * xm);
            let c = gw.powi(p.m as i32).inv() - fw.powi(p.m as i32).inv();
            let f0 = *first.get_or_insert(c);
            rep.first_integral_spread = rep.first_integral_spread.max((c - f0).norm() / f0.norm());
            rep.max_first_integral_dev = rep
                .max_first_integral_dev
                .max((c - target).norm() / target.norm());
            rep.first_integral_value = c;
        }
        Ok(rep)
    }
}

#[derive(Clone, Debug)]
pub struct OdeReport {
    pub points: usize,
    /// Largest `|𝓕 + m x 𝓕' − 𝓕^{a+1}𝓖^b|` (or its `𝓖` twin).
    pub max_residual: f64,
    pub worst_x: f64,
    /// Largest relative distance of `1/g^m − 1/f^m` from `i(m/S)(b+c)`.
    pub max_first_integral_dev: f64,
    /// Largest relative spread of `1/g^m − 1/f^m` across the grid.
    pub first_integral_spread: f64,
    pub first_integral_value: Complex64,
    pub k_inv_m: Complex64,
    pub expected_first_integral: Complex64,
}

impl OdeReport {
    pub fn check(&self, tol: f64) -> Result<()> {
        if self.max_residual > tol {
            return Err(Error::ToleranceExceeded {
                what: "ODE residual",
                x: self.worst_x,
                value: self.max_residual,
                tol,
            });
        }
        if self.max_first_integral_dev > tol {
            return Err(Error::ToleranceExceeded {
                what: "first integral",
                x: self.worst_x,
                value: self.max_first_integral_dev,
                tol,
            });
        }
        Ok(())
    }
}

/// `𝓕`, `𝓖` and `𝓕^α 𝓖^β` on a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CfTable {
    pub m: i64,
    #[serde(rename = "S")]
    pub s: i64,
    pub b: i64,
    pub alpha: u64,
    pub beta: u64,
    pub rows: Vec<CfRow>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CfRow {
    pub x: f64,
    pub f_re: f64,
    pub f_im: f64,
    pub g_re: f64,
    pub g_im: f64,
    pub phi_re: f64,
    pub phi_im: f64,
}

impl CharFun {
    pub fn tabulate(&self, xs: &[f64], init: Composition) -> Result<CfTable> {
        let rows = xs
            .par_iter()
            .map(|&x| {
                let (f, g) = self.eval_fg(x)?;
                let phi = f.powi(init.red as i32) * g.powi(init.black as i32);
                Ok(CfRow {
                    x,
                    f_re: f.re,
                    f_im: f.im,
                    g_re: g.re,
                    g_im: g.im,
                    phi_re: phi.re,
                    phi_im: phi.im,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let p = &self.params;
        Ok(CfTable {
            m: p.m,
            s: p.s,
            b: p.b,
            alpha: init.red,
            beta: init.black,
            rows,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::validate_params;

    fn cf() -> CharFun {
        CharFun::new(&validate_params(4, 7, 1).unwrap()).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn reference_values() {
        let cf = cf();
        let table = [
            (0.1, c(0.997081981419906007, 0.0141105620845360756), c(0.995602607476304378, -0.0280419031557600254)),
            (1.0, c(0.862071948645457624, 0.0732757317852342355), c(0.829584111542335832, -0.122699602102818802)),
            (2.0, c(0.751016114616374065, 0.0755347021404147315), c(0.715674011546780550, -0.120167724922024026)),
            (10.0, c(0.510472608407406127, 0.0556720420238156039), c(0.483998918829317119, -0.0861297906693231264)),
            (100.0, c(0.287365422198093278, 0.0315095320947791824), c(0.272369155787057760, -0.0486539821642122471)),
            (1e4, c(0.0908746802066026404, 0.00996535812969460919), c(0.0861318170735785082, -0.0153870034574409535)),
        ];
        for (x, f, g) in table {
            let (ff, gg) = cf.eval_fg(x).unwrap();
            assert!((ff - f).norm() < 1e-12, "F({x}) = {ff}");
            assert!((gg - g).norm() < 1e-12, "G({x}) = {gg}");
        }
    }

    #[test]
    fn origin_and_symmetry() {
        let cf = cf();
        assert_eq!(cf.eval_fg(0.0).unwrap(), (c(1.0, 0.0), c(1.0, 0.0)));
        let f = cf.eval_f(1.7).unwrap();
        assert_eq!(cf.eval_f(-1.7).unwrap(), f.conj());
        let d = cf.eval_f_negative_direct(-1.7).unwrap();
        assert!((d - f.conj()).norm() < 1e-12, "{d} vs {}", f.conj());
    }

    #[test]
    fn phi_restricts_to_f_and_g() {
        let cf = cf();
        for x in [0.3, 2.0, 40.0] {
            let (f, g) = cf.eval_fg(x).unwrap();
            assert!((cf.phi(Branch::B, c(0.0, x)).unwrap() - f).norm() < 1e-13);
            assert!((cf.phi(Branch::C, c(0.0, -x)).unwrap() - g).norm() < 1e-13);
        }
    }

    #[test]
    fn phi_jumps_across_negative_axis() {
        let cf = cf();
        let above = cf.phi(Branch::B, c(-0.5, 1e-12)).unwrap();
        let below = cf.phi(Branch::B, c(-0.5, -1e-12)).unwrap();
        assert!((above - below.conj()).norm() < 1e-9);
        assert!(above.im.abs() > 1e-3);
    }

    #[test]
    fn chain_derivative_matches_algebraic() {
        let cf = cf();
        for x in [0.05, 1.0, 30.0] {
            let (a, b) = cf.eval_fg_prime(x).unwrap();
            let (ca, cb) = cf.eval_fg_prime_chain(x).unwrap();
            assert!((a - ca).norm() < 1e-12 * a.norm().max(1e-3), "{x}: {a} {ca}");
            assert!((b - cb).norm() < 1e-12 * b.norm().max(1e-3), "{x}: {b} {cb}");
        }
    }

    #[test]
    fn ode_and_first_integral() {
        let rep = cf().ode_crosscheck(1e-2, 1e2, 25).unwrap();
        assert!(rep.max_residual < 1e-12, "{rep:?}");
        assert!(rep.max_first_integral_dev < 1e-12, "{rep:?}");
        assert!((rep.k_inv_m - c(0.0, 12.0 / 7.0)).norm() < 1e-14);
    }

    #[test]
    fn general_init_mean() {
        let cf = cf();
        let init = Composition::new(2, 3);
        let d = cf.eval_general_prime(0.0, init).unwrap();
        assert!((d.im - (2.0 - 6.0) / 7.0).abs() < 1e-15);
        let h = 1e-6;
        let fd = (cf.eval_general(h, init).unwrap() - cf.eval_general(-h, init).unwrap()) / (2.0 * h);
        assert!((fd - d).norm() < 1e-6, "{fd}");
    }
}
