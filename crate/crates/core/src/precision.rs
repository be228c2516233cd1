//! Double-double arithmetic (~31 significant digits).
//!
//! Only the operations needed by the phase reductions and threshold
//! comparisons are provided: add/sub/mul/div, integer powers, k-th roots,
//! and floor. Transcendentals stay in `f64`; callers reduce arguments in
//! double-double first and hand a small remainder to `f64` routines.

use std::cmp::Ordering;
use std::ops::{Add, Div, Mul, Neg, Sub};

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
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

/// An unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

impl DoubleDouble {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };
    pub const ONE: Self = Self { hi: 1.0, lo: 0.0 };

    pub fn new(hi: f64, lo: f64) -> Self {
        let (hi, lo) = quick_two_sum(hi, lo);
        Self { hi, lo }
    }

    pub fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    /// Exact for `|n| < 2^106`.
    pub fn from_i128(n: i128) -> Self {
        let hi = n as f64;
        // `hi` is within half an ulp of n, so the remainder fits i128 comfortably.
        let rest = n - hi as i128;
        Self::new(hi, rest as f64)
    }

    pub fn from_u128(n: u128) -> Self {
        if n <= i128::MAX as u128 {
            Self::from_i128(n as i128)
        } else {
            let hi = n as f64;
            let rest = (n as i128).wrapping_sub(hi as u128 as i128);
            Self::new(hi, rest as f64)
        }
    }

    /// `a * b` with no rounding loss.
    pub fn product(a: f64, b: f64) -> Self {
        let (p, e) = two_prod(a, b);
        Self::new(p, e)
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    pub fn is_zero(self) -> bool {
        self.hi == 0.0 && self.lo == 0.0
    }

    pub fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        let e = e + self.lo * b;
        Self::new(p, e)
    }

    pub fn sqr(self) -> Self {
        self * self
    }

    pub fn powi(self, mut k: u32) -> Self {
        let mut base = self;
        let mut acc = Self::ONE;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base;
            }
            base = base.sqr();
            k >>= 1;
        }
        acc
    }

    /// Positive real k-th root, refined by two Newton steps from the `f64` root.
    pub fn root(self, k: u32) -> Self {
        assert!(k >= 1);
        if k == 1 || self.is_zero() {
            return self;
        }
        debug_assert!(self.hi > 0.0, "root of a negative value");
        let mut y = Self::from_f64(self.hi.powf(1.0 / k as f64));
        for _ in 0..2 {
            let yk1 = y.powi(k - 1);
            let resid = self - yk1 * y;
            let step = resid.to_f64() / (k as f64 * yk1.to_f64());
            y = y + Self::from_f64(step);
        }
        y
    }

    pub fn floor(self) -> Self {
        let fh = self.hi.floor();
        if fh == self.hi {
            Self::new(fh, self.lo.floor())
        } else {
            Self { hi: fh, lo: 0.0 }
        }
    }

    /// Fractional part in `[0, 1)`, rounded to `f64`.
    pub fn fract(self) -> f64 {
        let f = (self - self.floor()).to_f64();
        if f >= 1.0 {
            0.0
        } else {
            f
        }
    }

    pub fn cmp_dd(self, other: Self) -> Ordering {
        let d = self - other;
        if d.hi > 0.0 || (d.hi == 0.0 && d.lo > 0.0) {
            Ordering::Greater
        } else if d.is_zero() {
            Ordering::Equal
        } else {
            Ordering::Less
        }
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, b: Self) -> Self {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let s2 = s2 + t1;
        let (s1, s2) = quick_two_sum(s1, s2);
        let s2 = s2 + t2;
        Self::new(s1, s2)
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, b: Self) -> Self {
        self + (-b)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, b: Self) -> Self {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        Self::new(p, e)
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, b: Self) -> Self {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        Self::new(q1, q2) + Self::from_f64(q3)
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, t: f64) {
        let y = self.sum + t;
        if self.sum.abs() >= t.abs() {
            self.comp += (self.sum - y) + t;
        } else {
            self.comp += (t - y) + self.sum;
        }
        self.sum = y;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt2_to_thirty_digits() {
        let r = DoubleDouble::from_f64(2.0).root(2);
        // sqrt(2) = 1.41421356237309504880168872420969807...
        let hi_ref = std::f64::consts::SQRT_2;
        let lo_ref = -9.667293313452913e-17_f64;
        let d = r - DoubleDouble::new(hi_ref, lo_ref);
        assert!(d.to_f64().abs() < 1e-31, "{d:?}");
        let sq = r.sqr() - DoubleDouble::from_f64(2.0);
        assert!(sq.to_f64().abs() < 1e-30);
    }

    #[test]
    fn cube_root_of_large_integer() {
        let n: u128 = 123_456_789_012_345_678_901;
        let r = DoubleDouble::from_u128(n).root(3);
        let back = r.powi(3) - DoubleDouble::from_u128(n);
        assert!((back.to_f64() / n as f64).abs() < 1e-30);
    }

    #[test]
    fn division_and_floor() {
        let third = DoubleDouble::ONE / DoubleDouble::from_f64(3.0);
        let back = third.mul_f64(3.0) - DoubleDouble::ONE;
        assert!(back.to_f64().abs() < 1e-31);

        let x = DoubleDouble::new(1e17, 0.25);
        assert_eq!(x.floor().to_f64(), 1e17);
        assert!((x.fract() - 0.25).abs() < 1e-15);
        let y = DoubleDouble::new(1e17, -0.25);
        assert!((y.fract() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn compensated_sum_keeps_small_terms() {
        let mut s = CompensatedSum::new();
        s.add(1e16);
        for _ in 0..1000 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.value(), 1000.0);
    }

    #[test]
    fn from_u128_is_exact() {
        let n: u128 = (1u128 << 100) + 12345;
        let d = DoubleDouble::from_u128(n);
        assert_eq!(d.hi as u128 as i128 + d.lo as i128, n as i128);
        assert_eq!(
            DoubleDouble::from_i128(-7).cmp_dd(DoubleDouble::ZERO),
            Ordering::Less
        );
    }
}
