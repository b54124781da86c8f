//! Urn parameters, eigenstructure and the analytic constants of the closed forms.
//!
//! An urn is described by the triple `(m, S, b)`: `S` is the balance, `m` the
//! second eigenvalue and `b` the off-diagonal entry of the first row. The
//! replacement matrix is `R = [[a, b], [c, d]]` with `a = S−b`, `c = S−m−b`,
//! `d = m+b`.

use crate::error::{Error, Result};
use crate::numeric::special;
use num_complex::Complex64;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub type Rational = Ratio<i64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ValidityClass {
    LargeNonTriangular,
    SimulationOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UrnParams {
    pub m: i64,
    pub s: i64,
    pub b: i64,
    pub a: i64,
    pub c: i64,
    pub d: i64,
    pub sigma: Rational,
    pub class: ValidityClass,
}

/// Initial composition, or any urn state: numbers of red and black balls.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Composition {
    pub red: u64,
    pub black: u64,
}

impl Composition {
    pub const fn new(red: u64, black: u64) -> Self {
        Self { red, black }
    }

    pub fn total(&self) -> u64 {
        self.red + self.black
    }
}

/// Checks `(m, S, b)` and derives the rest of the replacement matrix.
pub fn validate_params(m: i64, s: i64, b: i64) -> Result<UrnParams> {
    if s < 1 {
        return Err(Error::NonBalancedOrNegativeEntry(format!(
            "balance S = {s} must be at least 1"
        )));
    }
    if m < 1 {
        return Err(Error::NonBalancedOrNegativeEntry(format!(
            "eigenvalue m = {m} must be at least 1"
        )));
    }
    if b < 0 {
        return Err(Error::NonBalancedOrNegativeEntry(format!("b = {b} is negative")));
    }
    let a = s - b;
    let c = s - m - b;
    let d = m + b;
    if a < 0 {
        return Err(Error::NonBalancedOrNegativeEntry(format!(
            "a = S-b = {a} is negative"
        )));
    }
    if c < 0 {
        return Err(Error::NonBalancedOrNegativeEntry(format!(
            "c = S-m-b = {c} is negative"
        )));
    }
    let class = if large_violation(m, s, b).is_none() {
        ValidityClass::LargeNonTriangular
    } else {
        ValidityClass::SimulationOnly
    };
    Ok(UrnParams {
        m,
        s,
        b,
        a,
        c,
        d,
        sigma: Rational::new(m, s),
        class,
    })
}

/// Names the first violated inequality of `m+2 ≤ S ≤ 2m−1`, `1 ≤ b ≤ S−m−1`.
fn large_violation(m: i64, s: i64, b: i64) -> Option<String> {
    if s < m + 2 {
        Some(format!("m+2 <= S violated (m = {m}, S = {s})"))
    } else if s > 2 * m - 1 {
        Some(format!("S <= 2m-1 violated (m = {m}, S = {s}): urn is not large"))
    } else if b < 1 {
        Some(format!("1 <= b violated (b = {b}): triangular matrix"))
    } else if b > s - m - 1 {
        Some(format!(
            "b <= S-m-1 violated (b = {b}, S-m-1 = {}): triangular matrix",
            s - m - 1
        ))
    } else {
        None
    }
}

impl UrnParams {
    pub fn replacement_matrix(&self) -> [[i64; 2]; 2] {
        [[self.a, self.b], [self.c, self.d]]
    }

    pub fn sigma_f64(&self) -> f64 {
        self.m as f64 / self.s as f64
    }

    pub fn is_large(&self) -> bool {
        self.class == ValidityClass::LargeNonTriangular
    }

    pub fn require_large(&self) -> Result<()> {
        match large_violation(self.m, self.s, self.b) {
            None => Ok(()),
            Some(msg) => Err(Error::NotLargeNonTriangular(msg)),
        }
    }

    /// The same urn with the colours exchanged: `R' = [[d, c], [b, a]]`.
    pub fn swapped(&self) -> UrnParams {
        validate_params(self.m, self.s, self.c).expect("colour swap preserves validity")
    }

    /// `u₂(x, y) = (b x − c y)/S` as a float.
    pub fn u2(&self, red: f64, black: f64) -> f64 {
        (self.b as f64 * red - self.c as f64 * black) / self.s as f64
    }
}

/// Eigen-forms and dual eigenvectors of `A = Rᵀ`, exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Eigenstructure {
    pub u1: [Rational; 2],
    pub u2: [Rational; 2],
    pub v1: [Rational; 2],
    pub v2: [Rational; 2],
}

/// Requires `b + c > 0` (otherwise `R` is a multiple of the identity).
pub fn eigenstructure(p: &UrnParams) -> Option<Eigenstructure> {
    let s = p.s;
    let bc = p.b + p.c;
    if bc == 0 {
        return None;
    }
    let r = |n: i64, d: i64| Rational::new(n, d);
    Some(Eigenstructure {
        u1: [r(1, s), r(1, s)],
        u2: [r(p.b, s), r(-p.c, s)],
        v1: [r(s * p.c, bc), r(s * p.b, bc)],
        v2: [r(s, bc), r(-s, bc)],
    })
}

/// Constants attached to one parameter choice `β ∈ {b, c}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BranchConstants {
    pub beta: i64,
    pub c0: f64,
    pub i1: Complex64,
    pub rho: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralConstants {
    pub eigen: Eigenstructure,
    pub kappa: f64,
    pub k: Complex64,
    /// Parameter `b`, entering `𝓕`.
    pub fb: BranchConstants,
    /// Parameter `c`, entering `𝓖`.
    pub gc: BranchConstants,
}

impl SpectralConstants {
    pub fn c0_b(&self) -> f64 {
        self.fb.c0
    }
    pub fn c0_c(&self) -> f64 {
        self.gc.c0
    }
    pub fn i1_b(&self) -> Complex64 {
        self.fb.i1
    }
    pub fn i1_c(&self) -> Complex64 {
        self.gc.i1
    }
    pub fn rho_b(&self) -> f64 {
        self.fb.rho
    }
    pub fn rho_c(&self) -> f64 {
        self.gc.rho
    }
}

pub fn spectral_constants(p: &UrnParams) -> Result<SpectralConstants> {
    p.require_large()?;
    let eigen = eigenstructure(p).expect("large urns have b + c > 0");
    let kappa = kappa(p.m, p.s);
    let k = Complex64::from_polar(kappa, -PI / (2.0 * p.m as f64));
    let branch = |beta: i64| -> Result<BranchConstants> {
        let c0 = c0_series(p.m, p.s, beta)?;
        Ok(BranchConstants {
            beta,
            c0,
            i1: i1(p.m, p.s, beta),
            rho: rho(p.m, p.s, c0),
        })
    };
    Ok(SpectralConstants {
        eigen,
        kappa,
        k,
        fb: branch(p.b)?,
        gc: branch(p.c)?,
    })
}

/// `κ = (S/(m(S−m)))^{1/m}`.
pub fn kappa(m: i64, s: i64) -> f64 {
    (s as f64 / (m * (s - m)) as f64).powf(1.0 / m as f64)
}

const C0_MAX_TERMS: usize = 1_000_000;

/// Constant term of the Laurent expansion at 0 of the Abelian integral with
/// parameter `beta`:
/// `C₀ = Σ_{n≥0} binom(β/m, n)(1/(S−β+mn) + 1/(mn−S))`.
///
/// Terms are summed in pairs, which are eventually of constant sign, until a
/// pair drops below `1e−16` of the partial sum. The pairs decay like
/// `n^{−3−β/m}`, so the neglected tail is about `pair·n/(2(2+β/m))` and is
/// added back.
pub fn c0_series(m: i64, s: i64, beta: i64) -> Result<f64> {
    let x = beta as f64 / m as f64;
    let a = (s - beta) as f64;
    let (mf, sf) = (m as f64, s as f64);
    let term = |bn: f64, n: f64| bn * (1.0 / (a + mf * n) + 1.0 / (mf * n - sf));
    let mut sum = 0.0;
    let mut binom = 1.0;
    let mut n = 0usize;
    while n < C0_MAX_TERMS {
        let nf = n as f64;
        let t0 = term(binom, nf);
        binom *= (x - nf) / (nf + 1.0);
        let t1 = term(binom, nf + 1.0);
        binom *= (x - nf - 1.0) / (nf + 2.0);
        let pair = t0 + t1;
        sum += pair;
        n += 2;
        if n > 4 && pair.abs() < 1e-16 * sum.abs() {
            return Ok(sum + pair * n as f64 / (2.0 * (2.0 + x)));
        }
    }
    Err(Error::ConvergenceFailure(format!(
        "C0 series for (m, S, beta) = ({m}, {s}, {beta}) not converged after {C0_MAX_TERMS} terms"
    )))
}

/// Corner value `I₁ = (1/m) B((S−β)/m, (m+β)/m) e^{−i(S−β)π/m}`.
pub fn i1(m: i64, s: i64, beta: i64) -> Complex64 {
    let mf = m as f64;
    let a = (s - beta) as f64;
    let d = (m + beta) as f64;
    let modulus = special::beta(a / mf, d / mf) / mf;
    Complex64::from_polar(modulus, -a * PI / mf)
}

/// `C₀` from `|I₁|`: `C₀ = (sin(πβ/m)/sin(πS/m))·|I₁|`.
///
/// Both sines are taken as `sin π(1+·)`, which flips both signs and leaves
/// the ratio unchanged.
pub fn c0_from_i1(m: i64, s: i64, beta: i64) -> f64 {
    let mf = m as f64;
    let num = (PI * (1.0 + beta as f64 / mf)).sin();
    let den = (PI * (1.0 + s as f64 / mf)).sin();
    num / den * i1(m, s, beta).norm()
}

/// Radius `ρ` with `C₀ + K^S ρ^{−S/m}/S = 0`:
/// `ρ = S^{1−m/S} |C₀|^{−m/S} / (m(S−m))`.
pub fn rho(m: i64, s: i64, c0: f64) -> f64 {
    let (mf, sf) = (m as f64, s as f64);
    sf.powf(1.0 - mf / sf) * c0.abs().powf(-mf / sf) / (mf * (sf - mf))
}

/// Every large non-triangular `(m, S, b)` with `S ≤ s_max`.
pub fn large_triples(s_max: i64) -> Vec<(i64, i64, i64)> {
    let mut out = Vec::new();
    for s in 5..=s_max {
        for m in (s + 2) / 2..=s - 2 {
            for b in 1..=s - m - 1 {
                if large_violation(m, s, b).is_none() {
                    out.push((m, s, b));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_urn() {
        let p = validate_params(4, 7, 1).unwrap();
        assert_eq!(p.class, ValidityClass::LargeNonTriangular);
        assert_eq!(p.replacement_matrix(), [[6, 1], [2, 5]]);
        assert_eq!(p.sigma, Rational::new(4, 7));
    }

    #[test]
    fn smallest_large_urn() {
        let p = validate_params(3, 5, 1).unwrap();
        assert!(p.is_large());
        assert_eq!(p.replacement_matrix(), [[4, 1], [1, 4]]);
    }

    #[test]
    fn triangular_is_simulation_only() {
        let p = validate_params(4, 7, 3).unwrap();
        assert_eq!(p.class, ValidityClass::SimulationOnly);
        assert_eq!(p.replacement_matrix(), [[4, 3], [0, 7]]);
        let msg = p.require_large().unwrap_err().to_string();
        assert!(msg.contains("b <= S-m-1"), "{msg}");
    }

    #[test]
    fn small_urn_message_names_inequality() {
        let p = validate_params(3, 4, 1).unwrap();
        let msg = p.require_large().unwrap_err().to_string();
        assert!(msg.contains("m+2 <= S"), "{msg}");
    }

    #[test]
    fn negative_entries_rejected() {
        assert!(matches!(
            validate_params(4, 7, 4),
            Err(Error::NonBalancedOrNegativeEntry(_))
        ));
        assert!(matches!(
            validate_params(4, 7, 8),
            Err(Error::NonBalancedOrNegativeEntry(_))
        ));
    }

    #[test]
    fn kappa_default() {
        let k = kappa(4, 7);
        assert!((k - (7.0f64 / 12.0).powf(0.25)).abs() < 1e-15);
        assert!((k.powi(4) * 12.0 / 7.0 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn c0_reference_values() {
        // 30-digit references.
        let b = c0_series(4, 7, 1).unwrap();
        let c = c0_series(4, 7, 2).unwrap();
        assert!((b / -0.124859883537719990974516170947 - 1.0).abs() < 1e-12, "{b}");
        assert!((c / -0.176578540695368754136557175923 - 1.0).abs() < 1e-12, "{c}");
    }

    #[test]
    fn c0_pair_sum_is_negative_for_default() {
        // First pair α₀+α₁ in closed form.
        let (m, s, a) = (4.0f64, 7.0f64, 6.0f64);
        let closed = (s - a) * (m * m + a * s) * (s - a - m) / (a * m * s * (a + m) * (s - m));
        let direct = (1.0 / a - 1.0 / s) + 0.25 * (1.0 / (a + m) + 1.0 / (m - s));
        assert!(closed < 0.0);
        assert!((closed - direct).abs() < 1e-15);
    }

    #[test]
    fn literal_remark_sign_is_opposite() {
        let c0 = c0_series(4, 7, 1).unwrap();
        let literal = -c0_from_i1(4, 7, 1);
        assert!(literal > 0.0 && c0 < 0.0);
        assert!(((c0_from_i1(4, 7, 1) - c0) / c0).abs() < 1e-12);
    }

    #[test]
    fn rho_solves_cut_condition() {
        let p = validate_params(4, 7, 1).unwrap();
        let sc = spectral_constants(&p).unwrap();
        for br in [sc.fb, sc.gc] {
            let v = br.c0 + (sc.k.powi(7) * br.rho.powf(-7.0 / 4.0) / 7.0).norm();
            assert!(v.abs() < 1e-14, "{v}");
        }
    }

    #[test]
    fn large_triples_up_to_seven() {
        assert_eq!(large_triples(7), vec![(3, 5, 1), (4, 6, 1), (4, 7, 1), (4, 7, 2), (5, 7, 1)]);
    }
}
