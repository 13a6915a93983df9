//! Double-double arithmetic: a real stored as the unevaluated sum `hi + lo`
//! of two non-overlapping doubles, good for about 31 significant digits.
//!
//! Besides the four field operations there is a natural logarithm, needed by
//! the split sum where its logarithmic term nearly cancels the series.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DDReal {
    hi: f64,
    lo: f64,
}

/// `s + e == a + b` exactly.
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let v = s - a;
    let e = (a - (s - v)) + (b - v);
    (s, e)
}

/// Same as [`two_sum`] but requires `|a| >= |b|`.
#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

/// `p + e == a * b` exactly (FMA).
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let e = a.mul_add(b, -p);
    (p, e)
}

impl DDReal {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };
    pub const ONE: Self = Self { hi: 1.0, lo: 0.0 };

    /// ln 2 = 0.693147180559945309417232121458176568...
    pub const LN_2: Self = Self {
        hi: std::f64::consts::LN_2,
        lo: 2.3190468138462996e-17,
    };

    /// pi = 3.14159265358979323846264338327950288...
    pub const PI: Self = Self {
        hi: std::f64::consts::PI,
        lo: 1.2246467991473532e-16,
    };

    /// Builds a value from two components, renormalizing them.
    pub fn new(hi: f64, lo: f64) -> Self {
        let (hi, lo) = two_sum(hi, lo);
        Self { hi, lo }
    }

    /// Exact promotion of a double.
    #[inline]
    pub const fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn hi(self) -> f64 {
        self.hi
    }

    #[inline]
    pub fn lo(self) -> f64 {
        self.lo
    }

    /// Nearest double to the stored value.
    #[inline]
    pub fn to_f64(self) -> f64 {
        if self.lo == 0.0 {
            self.hi
        } else {
            self.hi + self.lo
        }
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    #[inline]
    pub fn add_f64(self, b: f64) -> Self {
        let (s, e) = two_sum(self.hi, b);
        let e = e + self.lo;
        let (hi, lo) = quick_two_sum(s, e);
        Self { hi, lo }
    }

    #[inline]
    pub fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        let e = self.lo.mul_add(b, e);
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }

    #[inline]
    pub fn div_f64(self, b: f64) -> Self {
        let q1 = self.hi / b;
        let (p, e) = two_prod(q1, b);
        let (s, t) = two_sum(self.hi, -p);
        let t = t - e + self.lo;
        let q2 = (s + t) / b;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo }
    }

    #[inline]
    pub fn square(self) -> Self {
        self * self
    }

    /// Natural logarithm; NaN for non-positive or non-finite arguments.
    pub fn ln(self) -> Self {
        if !(self.hi > 0.0 && self.is_finite()) {
            return Self::from_f64(f64::NAN);
        }
        // x = 2^k m with m in [sqrt(1/2), sqrt(2)); the scaling is exact
        let mut k = self.hi.log2().round() as i32;
        let mut scale = 2f64.powi(-k);
        if self.hi * scale >= std::f64::consts::SQRT_2 {
            k += 1;
            scale *= 0.5;
        } else if self.hi * scale < std::f64::consts::FRAC_1_SQRT_2 {
            k -= 1;
            scale *= 2.0;
        }
        let m = self.mul_f64(scale);
        // ln m = 2 atanh z = 2 (z + z^3/3 + z^5/5 + ...), |z| < 0.172
        let z = (m - Self::ONE) / (m + Self::ONE);
        let z2 = z * z;
        let mut power = z;
        let mut sum = z;
        let mut n = 1.0;
        loop {
            power = power * z2;
            n += 2.0;
            let term = power.div_f64(n);
            sum += term;
            if term.hi.abs() <= 1e-33 * sum.hi.abs() {
                break;
            }
        }
        Self::LN_2.mul_f64(k as f64) + sum.mul_f64(2.0)
    }

    /// Division that reports a zero divisor instead of producing infinities.
    pub fn checked_div(self, rhs: Self) -> Result<Self> {
        if rhs.hi == 0.0 && rhs.lo == 0.0 {
            return Err(Error::DivByZero);
        }
        Ok(self / rhs)
    }
}

impl From<f64> for DDReal {
    fn from(x: f64) -> Self {
        Self::from_f64(x)
    }
}

impl Neg for DDReal {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for DDReal {
    type Output = Self;
    #[inline]
    fn add(self, b: Self) -> Self {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let s2 = s2 + t1;
        let (s1, s2) = quick_two_sum(s1, s2);
        let s2 = s2 + t2;
        let (hi, lo) = quick_two_sum(s1, s2);
        Self { hi, lo }
    }
}

impl Sub for DDReal {
    type Output = Self;
    #[inline]
    fn sub(self, b: Self) -> Self {
        self + (-b)
    }
}

impl Mul for DDReal {
    type Output = Self;
    #[inline]
    fn mul(self, b: Self) -> Self {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = self.hi.mul_add(b.lo, self.lo.mul_add(b.hi, e));
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }
}

impl Div for DDReal {
    type Output = Self;
    /// Long division with three partial quotients.
    #[inline]
    fn div(self, b: Self) -> Self {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (q1, q2) = quick_two_sum(q1, q2);
        Self { hi: q1, lo: q2 }.add_f64(q3)
    }
}

impl AddAssign for DDReal {
    #[inline]
    fn add_assign(&mut self, b: Self) {
        *self = *self + b;
    }
}

impl SubAssign for DDReal {
    #[inline]
    fn sub_assign(&mut self, b: Self) {
        *self = *self - b;
    }
}

impl PartialOrd for DDReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi)? {
            Ordering::Equal => self.lo.partial_cmp(&other.lo),
            ord => Some(ord),
        }
    }
}

impl fmt::Display for DDReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e} + {:e}", self.hi, self.lo)
    }
}

/// Constants needed by the log kernel of the Poisson Green's function.
#[derive(Debug, Clone, Copy)]
pub struct DdConstants {
    pub log2: DDReal,
    /// `ln(e/2) = 1 - ln 2`.
    pub log_e_half: DDReal,
}

pub fn dd_constants() -> DdConstants {
    DdConstants {
        log2: DDReal::LN_2,
        log_e_half: DDReal::ONE - DDReal::LN_2,
    }
}
