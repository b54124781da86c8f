//! Moments of `X` (one red ball) and `Y` (one black ball) from the formal
//! Laplace-series system
//!
//! ```text
//! F + mT F' = F^{a+1} G^b,   G + mT G' = F^c G^{d+1},
//! F'(0) = b/S,               G'(0) = −c/S,
//! ```
//!
//! with `F(T) = Σ aₙ Tⁿ/n!`, `aₙ = E[Xⁿ]` (same for `G`, `bₙ = E[Yⁿ]`).
//! At order `n ≥ 2` the unknown coefficients enter linearly through the
//! matrix `(1+mn)I − (R + I)`, whose determinant is `(mn−S)(mn−m) ≠ 0`.

use crate::error::{Error, Result};
use crate::numeric::dd::{Dd, Scalar};
use crate::numeric::series::{miller_pow, TruncatedSeries};
use crate::numeric::special::gamma_ratio;
use crate::params::{Composition, UrnParams};
use serde::Serialize;

pub const DOUBLE_TOL: f64 = 1e-12;
pub const EXTENDED_TOL: f64 = 1e-25;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PrecisionMode {
    Double,
    Extended,
}

#[derive(Clone, Debug)]
pub struct MomentTable {
    pub params: UrnParams,
    pub order: usize,
    /// `aₙ = E[Xⁿ]`.
    pub a_seq: Vec<f64>,
    /// `bₙ = E[Yⁿ]`.
    pub b_seq: Vec<f64>,
    /// EGF coefficients `aₙ/n!`.
    pub a_egf: Vec<f64>,
    pub b_egf: Vec<f64>,
    /// Relative residual of order `n` in both coefficient equations.
    pub residuals: Vec<f64>,
    pub precision: PrecisionMode,
}

struct Solved<T> {
    c: Vec<T>,
    d: Vec<T>,
}

fn solve<T: Scalar>(p: &UrnParams, order: usize) -> Result<Solved<T>> {
    let t = |v: i64| T::from_f64(v as f64);
    let (a, b, c, d, m, s) = (p.a, p.b, p.c, p.d, p.m, p.s);
    let mut cs = vec![T::one()];
    let mut ds = vec![T::one()];
    if order >= 1 {
        cs.push(t(b) / t(s));
        ds.push(-(t(c) / t(s)));
    }
    // Powers F^{a+1}, G^b, F^c, G^{d+1}, kept in step with cs/ds.
    let exps = [a + 1, b, c, d + 1];
    let mut pw: Vec<Vec<T>> = vec![
        miller_pow(&cs, t(exps[0]), T::one()),
        miller_pow(&ds, t(exps[1]), T::one()),
        miller_pow(&cs, t(exps[2]), T::one()),
        miller_pow(&ds, t(exps[3]), T::one()),
    ];
    for n in 2..=order {
        let nn = T::from_f64(n as f64);
        // n-th Miller coefficient with the unknown top coefficient set to 0.
        let partial = |f: &[T], p: &[T], e: i64| -> T {
            let mut acc = T::zero();
            for j in 1..n {
                let jj = T::from_f64(j as f64);
                acc = acc + (t(e + 1) * jj - nn) * f[j] * p[n - j];
            }
            acc / nn
        };
        let p0 = partial(&cs, &pw[0], exps[0]);
        let q0 = partial(&ds, &pw[1], exps[1]);
        let r0 = partial(&cs, &pw[2], exps[2]);
        let s0 = partial(&ds, &pw[3], exps[3]);
        let conv = |x: &[T], xn: T, y: &[T], yn: T| -> T {
            let mut acc = xn * y[0] + x[0] * yn;
            for j in 1..n {
                acc = acc + x[j] * y[n - j];
            }
            acc
        };
        let rhs1 = conv(&pw[0], p0, &pw[1], q0);
        let rhs2 = conv(&pw[2], r0, &pw[3], s0);
        let k = t(1 + m * n as i64);
        let (m11, m12) = (k - t(a + 1), -t(b));
        let (m21, m22) = (-t(c), k - t(d + 1));
        let det = m11 * m22 - m12 * m21;
        if det.to_f64() == 0.0 {
            return Err(Error::SingularSystem(n));
        }
        let cn = (rhs1 * m22 - m12 * rhs2) / det;
        let dn = (m11 * rhs2 - m21 * rhs1) / det;
        if !(cn.is_finite() && dn.is_finite()) {
            return Err(Error::ConvergenceFailure(format!(
                "non-finite moment coefficient at order {n}"
            )));
        }
        cs.push(cn);
        ds.push(dn);
        pw[0].push(p0 + t(exps[0]) * cn);
        pw[1].push(q0 + t(exps[1]) * dn);
        pw[2].push(r0 + t(exps[2]) * cn);
        pw[3].push(s0 + t(exps[3]) * dn);
    }
    Ok(Solved { c: cs, d: ds })
}

/// Relative residuals of both coefficient equations, recomputing the powers
/// by repeated squaring. The scale of order `n` is the sum of the absolute
/// values of all terms entering it.
fn residuals<T: Scalar>(p: &UrnParams, c: &[T], d: &[T]) -> Vec<f64> {
    let f = TruncatedSeries::new(c.to_vec());
    let g = TruncatedSeries::new(d.to_vec());
    let fa = TruncatedSeries::new(c.iter().map(|v| v.abs()).collect());
    let ga = TruncatedSeries::new(d.iter().map(|v| v.abs()).collect());
    let (a, b, cc, dd) = (p.a as u32, p.b as u32, p.c as u32, p.d as u32);
    let e1 = f.pow(a + 1).mul(&g.pow(b));
    let e2 = f.pow(cc).mul(&g.pow(dd + 1));
    let s1 = fa.pow(a + 1).mul(&ga.pow(b));
    let s2 = fa.pow(cc).mul(&ga.pow(dd + 1));
    (0..c.len())
        .map(|n| {
            let k = T::from_f64((1 + p.m * n as i64) as f64);
            let r1 = (k * c[n] - e1.coeffs[n]).abs().to_f64();
            let r2 = (k * d[n] - e2.coeffs[n]).abs().to_f64();
            let n1 = (k * c[n].abs() + s1.coeffs[n]).to_f64();
            let n2 = (k * d[n].abs() + s2.coeffs[n]).to_f64();
            (r1 / n1).max(r2 / n2)
        })
        .collect()
}

fn table_from<T: Scalar>(p: &UrnParams, order: usize, s: Solved<T>, mode: PrecisionMode) -> MomentTable {
    let residuals = residuals(p, &s.c, &s.d);
    let mut fact = T::one();
    let mut a_seq = Vec::with_capacity(order + 1);
    let mut b_seq = Vec::with_capacity(order + 1);
    for n in 0..=order {
        if n > 0 {
            fact = fact * T::from_f64(n as f64);
        }
        a_seq.push((s.c[n] * fact).to_f64());
        b_seq.push((s.d[n] * fact).to_f64());
    }
    MomentTable {
        params: *p,
        order,
        a_seq,
        b_seq,
        a_egf: s.c.iter().map(|v| v.to_f64()).collect(),
        b_egf: s.d.iter().map(|v| v.to_f64()).collect(),
        residuals,
        precision: mode,
    }
}

/// `E[Xⁿ]`, `E[Yⁿ]` for `n ≤ order`. Runs in double precision and falls back
/// to double-double when a residual exceeds `1e−12` or a value overflows.
pub fn moment_recursion(p: &UrnParams, order: usize) -> Result<MomentTable> {
    p.require_large()?;
    if let Ok(s) = solve::<f64>(p, order) {
        let t = table_from(p, order, s, PrecisionMode::Double);
        let ok = t.residuals.iter().all(|r| *r < DOUBLE_TOL)
            && t.a_seq.iter().chain(&t.b_seq).all(|v| v.is_finite());
        if ok {
            return Ok(t);
        }
    }
    moment_recursion_extended(p, order)
}

pub fn moment_recursion_extended(p: &UrnParams, order: usize) -> Result<MomentTable> {
    p.require_large()?;
    let s = solve::<Dd>(p, order)?;
    let t = table_from(p, order, s, PrecisionMode::Extended);
    if let Some((n, r)) = t
        .residuals
        .iter()
        .copied()
        .enumerate()
        .find(|(_, r)| !(*r < EXTENDED_TOL))
    {
        return Err(Error::ResidualExceeded {
            n,
            residual: r,
            tol: EXTENDED_TOL,
        });
    }
    Ok(t)
}

impl MomentTable {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    /// `|aₙ/n!|^{1/n}`; grows without bound since the series has radius 0.
    pub fn root_growth(&self, n: usize) -> f64 {
        self.a_egf[n].abs().powf(1.0 / n as f64)
    }

    pub fn var_x(&self) -> f64 {
        self.a_seq[2] - self.a_seq[1].powi(2)
    }

    pub fn var_y(&self) -> f64 {
        self.b_seq[2] - self.b_seq[1].powi(2)
    }

    /// Third cumulants of `X` and `Y`.
    pub fn k3(&self) -> (f64, f64) {
        let k3 = |m: &[f64]| m[3] - 3.0 * m[1] * m[2] + 2.0 * m[1].powi(3);
        (k3(&self.a_seq), k3(&self.b_seq))
    }

    /// `E[(W^CT)ⁿ]` from `(α, β)`: the EGF is `F^α G^β` by branching.
    pub fn wct_moments(&self, init: Composition) -> Vec<f64> {
        let fa = miller_pow(&self.a_egf, init.red as f64, 1.0);
        let gb = miller_pow(&self.b_egf, init.black as f64, 1.0);
        let prod = TruncatedSeries::new(fa).mul(&TruncatedSeries::new(gb));
        let mut fact = 1.0;
        prod.coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| {
                if n > 0 {
                    fact *= n as f64;
                }
                c * fact
            })
            .collect()
    }
}

/// `E[ξᵖ] = Γ(u/S + p)/Γ(u/S)` for `ξ ~ Gamma(u/S)`.
pub fn gamma_moment(u_over_s: f64, p: f64) -> f64 {
    gamma_ratio(u_over_s, p)
}

/// `E[(W^DT)ⁿ] = E[(W^CT)ⁿ]/E[ξ^{nσ}]` from `W^CT = ξ^σ W^DT`.
pub fn wdt_moments(table: &MomentTable, init: Composition) -> Vec<f64> {
    let p = &table.params;
    let uos = init.total() as f64 / p.s as f64;
    let sigma = p.sigma_f64();
    table
        .wct_moments(init)
        .into_iter()
        .enumerate()
        .map(|(n, w)| w / gamma_moment(uos, n as f64 * sigma))
        .collect()
}

/// `E[ξ W^CT] = (α+β+m)(bα − cβ)/S²`.
pub fn joint_moment_q11(init: Composition, p: &UrnParams) -> f64 {
    let (al, be) = (init.red as i64, init.black as i64);
    ((al + be + p.m) * (p.b * al - p.c * be)) as f64 / (p.s * p.s) as f64
}
