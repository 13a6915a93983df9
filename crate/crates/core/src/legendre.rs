//! Legendre polynomials by upward three-term recurrence,
//!
//! ```text
//! (l+1) P_{l+1}(x) = (2l+1) x P_l(x) - l P_{l-1}(x),
//! ```
//!
//! generic over the scalar so the same kernel runs in `f64` and [`DDReal`].

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::highprec::DDReal;

/// Scalar arithmetic shared by the `f64` and double-double kernels.
pub trait Real:
    Copy
    + Debug
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn mul_f64(self, b: f64) -> Self;
    fn div_f64(self, b: f64) -> Self;
    fn add_f64(self, b: f64) -> Self;
    fn abs(self) -> Self;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn one() -> Self {
        Self::from_f64(1.0)
    }
}

impl Real for f64 {
    #[inline]
    fn from_f64(x: f64) -> Self {
        x
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
    #[inline]
    fn mul_f64(self, b: f64) -> Self {
        self * b
    }
    #[inline]
    fn div_f64(self, b: f64) -> Self {
        self / b
    }
    #[inline]
    fn add_f64(self, b: f64) -> Self {
        self + b
    }
    #[inline]
    fn abs(self) -> Self {
        f64::abs(self)
    }
}

impl Real for DDReal {
    #[inline]
    fn from_f64(x: f64) -> Self {
        DDReal::from_f64(x)
    }
    #[inline]
    fn to_f64(self) -> f64 {
        DDReal::to_f64(self)
    }
    #[inline]
    fn mul_f64(self, b: f64) -> Self {
        DDReal::mul_f64(self, b)
    }
    #[inline]
    fn div_f64(self, b: f64) -> Self {
        DDReal::div_f64(self, b)
    }
    #[inline]
    fn add_f64(self, b: f64) -> Self {
        DDReal::add_f64(self, b)
    }
    #[inline]
    fn abs(self) -> Self {
        DDReal::abs(self)
    }
}

const ARG_SLACK: f64 = 1e-14;

fn check_arg(x: f64) -> Result<()> {
    if x.is_nan() || x.abs() > 1.0 + ARG_SLACK {
        return Err(Error::ArgOutOfRange { x });
    }
    Ok(())
}

/// `P_0(x), ..., P_L(x)` at one argument.
#[derive(Debug, Clone, PartialEq)]
pub struct LegendreSweep<T> {
    x: T,
    values: Vec<T>,
}

impl<T: Real> LegendreSweep<T> {
    pub fn x(&self) -> T {
        self.x
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Highest degree in the sweep.
    pub fn degree(&self) -> usize {
        self.values.len() - 1
    }

    pub fn get(&self, l: usize) -> Option<T> {
        self.values.get(l).copied()
    }
}

/// Streams `(l, P_l(x))` for `l = 0, 1, 2, ...` in constant memory.
#[derive(Debug, Clone)]
pub struct LegendreIter<T> {
    x: T,
    l: usize,
    prev: T,
    curr: T,
}

impl<T: Real> LegendreIter<T> {
    pub fn new(x: T) -> Result<Self> {
        check_arg(x.to_f64())?;
        Ok(Self::new_unchecked(x))
    }

    pub(crate) fn new_unchecked(x: T) -> Self {
        Self {
            x,
            l: 0,
            prev: T::zero(),
            curr: T::one(),
        }
    }
}

impl<T: Real> Iterator for LegendreIter<T> {
    type Item = (usize, T);

    #[inline]
    fn next(&mut self) -> Option<(usize, T)> {
        let out = (self.l, self.curr);
        let l = self.l as f64;
        // P_{l+1} = ((2l+1) x P_l - l P_{l-1}) / (l+1); at l = 0 this gives x.
        let next = ((self.x * self.curr).mul_f64(2.0 * l + 1.0) - self.prev.mul_f64(l)).div_f64(l + 1.0);
        self.prev = self.curr;
        self.curr = next;
        self.l += 1;
        Some(out)
    }
}

/// All Legendre polynomials up to degree `l_max` at `x`.
pub fn legendre_all<T: Real>(x: T, l_max: usize) -> Result<LegendreSweep<T>> {
    check_arg(x.to_f64())?;
    let values = LegendreIter::new_unchecked(x)
        .take(l_max + 1)
        .map(|(_, p)| p)
        .collect();
    Ok(LegendreSweep { x, values })
}

/// `P_l(x)` for a single degree.
pub fn legendre<T: Real>(l: usize, x: T) -> Result<T> {
    check_arg(x.to_f64())?;
    Ok(LegendreIter::new_unchecked(x).nth(l).map(|(_, p)| p).unwrap())
}

/// Distance between the truncated generating-function series
/// `sum_{l<=L} u^l P_l(x)` and its closed form `(1 - 2xu + u^2)^{-1/2}`.
pub fn generating_function_check(x: f64, u: f64, l_max: usize) -> Result<f64> {
    check_arg(x)?;
    if !(u.abs() < 1.0) {
        return Err(Error::ArgOutOfRange { x: u });
    }
    let mut sum = 0.0;
    let mut upow = 1.0;
    for (_, p) in LegendreIter::new_unchecked(x).take(l_max + 1) {
        sum += upow * p;
        upow *= u;
    }
    let closed = 1.0 / (u * u - 2.0 * x * u + 1.0).sqrt();
    Ok((sum - closed).abs())
}

/// Largest `|sum_{l<=n} P_l(x)|` over `n <= n_max`.
pub fn partial_sum_bound_scan(x: f64, n_max: usize) -> Result<f64> {
    check_arg(x)?;
    let mut sum = 0.0f64;
    let mut max = 0.0f64;
    for (_, p) in LegendreIter::new_unchecked(x).take(n_max + 1) {
        sum += p;
        max = max.max(sum.abs());
    }
    Ok(max)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes in decreasing order
/// (increasing colatitude when used as `cos(theta)`).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi's initial guess, then Newton.
        let k = i as f64 + 1.0;
        let theta = std::f64::consts::PI * (k - 0.25) / (nf + 0.5);
        let mut x = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                let (_, d) = legendre_with_derivative(n, x);
                dp = d;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = x;
        nodes[n - 1 - i] = -x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut prev = 1.0;
    let mut curr = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for l in 1..n {
        let lf = l as f64;
        let next = ((2.0 * lf + 1.0) * x * curr - lf * prev) / (lf + 1.0);
        prev = curr;
        curr = next;
    }
    let d = n as f64 * (x * curr - prev) / (x * x - 1.0);
    (curr, d)
}
