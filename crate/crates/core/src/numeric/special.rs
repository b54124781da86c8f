//! Gamma-family helpers on top of `statrs`.

use statrs::function::{beta as sbeta, gamma as sgamma};

pub fn ln_gamma(x: f64) -> f64 {
    sgamma::ln_gamma(x)
}

pub fn gamma(x: f64) -> f64 {
    sgamma::gamma(x)
}

/// Complete Beta function `B(p, q)`.
pub fn beta(p: f64, q: f64) -> f64 {
    sbeta::beta(p, q)
}

/// Unregularized incomplete Beta `∫₀ˣ t^{p−1}(1−t)^{q−1} dt`.
pub fn beta_inc(p: f64, q: f64, x: f64) -> f64 {
    sbeta::beta_inc(p, q, x)
}

/// `Γ(x+s)/Γ(x)` for `x > 0`, `x + s > 0`.
///
/// Large `x` uses the Stirling difference so that the ratio stays accurate when
/// `s ≪ x` (plain `ln Γ` subtraction loses about `log10(x ln x)` digits).
pub fn gamma_ratio(x: f64, s: f64) -> f64 {
    ln_gamma_ratio(x, s).exp()
}

pub fn ln_gamma_ratio(x: f64, s: f64) -> f64 {
    if s == 0.0 {
        return 0.0;
    }
    if x < 12.0 || x + s < 12.0 {
        return ln_gamma(x + s) - ln_gamma(x);
    }
    let y = x + s;
    // Bernoulli terms B_{2k}/(2k(2k−1)).
    const C: [f64; 6] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360360.0,
    ];
    let mut corr = 0.0;
    let (mut py, mut px) = (1.0 / y, 1.0 / x);
    let (iy2, ix2) = (py * py, px * px);
    for c in C {
        corr += c * (py - px);
        py *= iy2;
        px *= ix2;
    }
    (x - 0.5) * (s / x).ln_1p() + s * y.ln() - s + corr
}

/// Generalized binomial coefficients `binom(x, n)` for `n = 0..len`.
pub fn binomials(x: f64, len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let mut b = 1.0;
    for n in 0..len {
        out.push(b);
        b *= (x - n as f64) / (n as f64 + 1.0);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_ratio_small_and_large_agree_with_products() {
        // Γ(x+3)/Γ(x) = x(x+1)(x+2)
        for x in [0.3, 2.5, 11.0, 13.0, 250.0, 1e6] {
            let exact = x * (x + 1.0) * (x + 2.0);
            assert!((gamma_ratio(x, 3.0) / exact - 1.0).abs() < 1e-13, "{x}");
        }
    }

    #[test]
    fn gamma_ratio_fractional_large() {
        // Γ(x+1/2)/Γ(x) ~ √x (1 − 1/(8x) + 1/(128x²) + 5/(1024x³))
        let x: f64 = 1e4;
        let approx = x.sqrt() * (1.0 - 1.0 / (8.0 * x) + 1.0 / (128.0 * x * x));
        assert!((gamma_ratio(x, 0.5) / approx - 1.0).abs() < 1e-12);
    }

    #[test]
    fn binomial_recurrence() {
        let b = binomials(0.25, 4);
        assert_eq!(b[0], 1.0);
        assert!((b[1] - 0.25).abs() < 1e-16);
        assert!((b[2] - 0.25 * -0.75 / 2.0).abs() < 1e-16);
        assert!((b[3] - 0.25 * -0.75 * -1.75 / 6.0).abs() < 1e-16);
    }
}
