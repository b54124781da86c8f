//! Truncated power series over a [`Scalar`].

use super::dd::Scalar;

/// Coefficients `c₀..c_N` of a power series modulo `T^{N+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSeries<T> {
    pub coeffs: Vec<T>,
}

impl<T: Scalar> TruncatedSeries<T> {
    pub fn new(coeffs: Vec<T>) -> Self {
        assert!(!coeffs.is_empty(), "a truncated series needs at least c0");
        Self { coeffs }
    }

    pub fn one(order: usize) -> Self {
        let mut c = vec![T::zero(); order + 1];
        c[0] = T::one();
        Self { coeffs: c }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Truncated Cauchy product; the result has the smaller of the two orders.
    pub fn mul(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        let mut out = vec![T::zero(); n + 1];
        for (i, &x) in self.coeffs.iter().take(n + 1).enumerate() {
            for (j, &y) in other.coeffs.iter().take(n + 1 - i).enumerate() {
                out[i + j] = out[i + j] + x * y;
            }
        }
        Self { coeffs: out }
    }

    /// Integer power by repeated squaring.
    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.order());
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }
}

/// Coefficients of `f^α` from those of `f` (`f₀ ≠ 0`) by Miller's recurrence
/// `n f₀ p_n = Σ_{j=1}^{n} ((α+1) j − n) f_j p_{n−j}`, with `p₀ = f₀^α`
/// required to be supplied by the caller (`α` may be any real).
pub fn miller_pow<T: Scalar>(f: &[T], alpha: T, p0: T) -> Vec<T> {
    let mut p = Vec::with_capacity(f.len());
    p.push(p0);
    for n in 1..f.len() {
        let nn = T::from_f64(n as f64);
        let mut acc = T::zero();
        for j in 1..=n {
            let jj = T::from_f64(j as f64);
            acc = acc + ((alpha + T::one()) * jj - nn) * f[j] * p[n - j];
        }
        p.push(acc / (nn * f[0]));
    }
    p
}
