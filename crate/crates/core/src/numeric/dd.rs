//! Double-double arithmetic (about 31 significant digits) and the [`Scalar`]
//! trait shared with `f64` so that series code is written once.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

pub trait Scalar:
    Copy
    + fmt::Debug
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn zero() -> Self {
        Self::from_f64(0.0)
    }
    fn one() -> Self {
        Self::from_f64(1.0)
    }
    fn abs(self) -> Self {
        if self < Self::zero() {
            -self
        } else {
            self
        }
    }
    fn is_finite(self) -> bool {
        self.to_f64().is_finite()
    }
    /// Unit roundoff of the representation.
    const EPS: f64;
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(self) -> f64 {
        self
    }
    const EPS: f64 = f64::EPSILON;
}

/// Unevaluated sum `hi + lo` with `|lo| ≤ ulp(hi)/2`.
#[derive(Clone, Copy, Default, PartialEq, PartialOrd)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

impl fmt::Debug for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dd({:e} + {:e})", self.hi, self.lo)
    }
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const fn new(hi: f64) -> Self {
        Self { hi, lo: 0.0 }
    }

    /// Exact ratio of two integers (to double-double accuracy).
    pub fn ratio(n: i64, d: i64) -> Self {
        Dd::from_i64(n) / Dd::from_i64(d)
    }

    pub fn from_i64(n: i64) -> Self {
        let hi = n as f64;
        let lo = (n - hi as i64) as f64;
        let (h, l) = quick_two_sum(hi, lo);
        Dd { hi: h, lo: l }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self - o * Dd::new(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * Dd::new(q2);
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::new(q3)
    }
}

impl Scalar for Dd {
    fn from_f64(x: f64) -> Self {
        Dd::new(x)
    }
    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
    fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }
    const EPS: f64 = 4.93e-32;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_third_times_three() {
        let t = Dd::ratio(1, 3);
        let r = t * Dd::new(3.0) - Dd::new(1.0);
        assert!(r.to_f64().abs() < 1e-31);
    }

    #[test]
    fn captures_low_order_bits() {
        let x = Dd::new(1.0) + Dd::new(1e-20);
        let y = x - Dd::new(1.0);
        assert!((y.to_f64() - 1e-20).abs() < 1e-35);
    }

    #[test]
    fn division_accuracy() {
        let x = Dd::ratio(22, 7);
        let back = x * Dd::new(7.0);
        assert!((back - Dd::new(22.0)).to_f64().abs() < 1e-29);
    }
}
