//! Series evaluation of the screened Poisson Green's function
//!
//! ```text
//! G(gamma) = -1/(4pi) sum_{l>=0} (2l+1) / (l(l+1) + w) P_l(cos gamma),   w = R²/L_d²
//! ```
//!
//! either truncated directly or in split form, where the Poisson kernel
//!
//! ```text
//! G*(gamma) = 1/(4pi) log(e/2 (1 - cos gamma)) = -1/(4pi) sum_{l>=1} (2l+1)/(l(l+1)) P_l
//! ```
//!
//! is subtracted term by term and added back in closed form. The bracketed
//! coefficients of the remainder decay like `-2w / l³`, so the split sum
//! converges far faster than the direct one and carries no singularity.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{EvalPoint, ShellParams};
use crate::highprec::{dd_constants, DDReal};
use crate::legendre::{LegendreIter, Real};

/// Hard ceiling on the number of series terms a single evaluation may use.
pub const MAX_TERMS: u64 = 2_000_000_000;

/// How a [`GreenResult`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Direct,
    Split,
    SplitDd,
    Quadrature,
    ClosedForm,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Direct => "direct",
            Method::Split => "split",
            Method::SplitDd => "split_dd",
            Method::Quadrature => "quadrature",
            Method::ClosedForm => "closed_form",
        }
    }
}

/// A Green's function value with its provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenResult {
    pub value: f64,
    pub method: Method,
    /// Series terms or integrand evaluations spent.
    pub terms_used: u64,
    /// Heuristic error estimate; not a rigorous bound.
    pub est_error: f64,
}

/// Where the split sum stops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TruncationPolicy {
    /// Sum the bracket terms `1..l'-1`.
    Fixed(usize),
    /// Smallest `l'` whose bracket coefficient is at most `epsilon` in magnitude.
    Auto { epsilon: f64 },
}

impl TruncationPolicy {
    pub fn auto(epsilon: f64) -> Self {
        TruncationPolicy::Auto { epsilon }
    }

    /// Resolves the policy to a concrete `l'`.
    pub fn resolve(&self, gamma_star: f64) -> Result<usize> {
        let l_prime = match *self {
            TruncationPolicy::Fixed(l) if l >= 1 => l,
            TruncationPolicy::Fixed(_) => {
                return Err(Error::InvalidPolicy("fixed truncation must be >= 1".into()))
            }
            TruncationPolicy::Auto { epsilon } if epsilon.is_finite() && epsilon > 0.0 => {
                choose_truncation(epsilon, gamma_star)
            }
            TruncationPolicy::Auto { epsilon } => {
                return Err(Error::InvalidPolicy(format!(
                    "epsilon must be positive, got {epsilon}"
                )))
            }
        };
        if l_prime as u64 > MAX_TERMS {
            return Err(Error::TruncationTooLarge {
                requested: l_prime as u64,
                limit: MAX_TERMS,
            });
        }
        Ok(l_prime)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Precision {
    Double,
    DoubleDouble,
}

/// Bracket coefficient of the split sum,
/// `(2l+1)/(l(l+1)+w) - (2l+1)/(l(l+1)) = -(2l+1) w / (l(l+1) (l(l+1)+w))`,
/// evaluated in the cancellation-free right-hand form.
#[inline]
fn bracket<T: Real>(l: f64, w: T) -> T {
    let ll = l * (l + 1.0);
    -(w.mul_f64(2.0 * l + 1.0) / w.add_f64(ll).mul_f64(ll))
}

/// Split-sum bracket coefficient at degree `l >= 1` for characteristic angle
/// `gamma_star`.
pub fn bracket_coefficient(l: usize, gamma_star: f64) -> f64 {
    bracket(l as f64, 1.0 / (gamma_star * gamma_star))
}

/// Number of split-sum terms for a bracket cutoff `eps`.
///
/// Starts from the asymptotic estimate `cbrt(2 / (eps gamma*²))` and settles
/// on the smallest `l'` whose coefficient magnitude is at most `eps`.
pub fn choose_truncation(eps: f64, gamma_star: f64) -> usize {
    let w = 1.0 / (gamma_star * gamma_star);
    let estimate = (2.0 * w / eps).cbrt().ceil().max(1.0);
    let within = |l: f64| bracket(l, w).abs() <= eps;

    let mut hi = estimate;
    while !within(hi) {
        hi *= 2.0;
    }
    let mut lo = 1.0f64;
    if within(lo) {
        return 1;
    }
    // invariant: !within(lo) && within(hi)
    while hi - lo > 1.0 {
        let mid = (0.5 * (lo + hi)).floor();
        if within(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi as usize
}

/// Poisson Green's function on the unit sphere,
/// `G*(gamma) = 1/(4pi) log(e/2 (1 - cos gamma))`.
pub fn g_star(p: &EvalPoint) -> Result<f64> {
    let u = p.one_minus_cos();
    if !(u > 0.0) {
        return Err(Error::Singular { gamma: p.gamma() });
    }
    Ok((1.0 + (0.5 * u).ln()) / (4.0 * PI))
}

/// Directly truncated series, degrees `0..=l_trunc`.
pub fn green_direct(params: &ShellParams, p: &EvalPoint, l_trunc: usize) -> GreenResult {
    let w = params.w();
    let sum: f64 = LegendreIter::new_unchecked(p.cos_gamma())
        .take(l_trunc + 1)
        .map(|(l, pl)| {
            let l = l as f64;
            (2.0 * l + 1.0) / (l * (l + 1.0) + w) * pl
        })
        .sum();
    let next = (l_trunc + 1) as f64;
    GreenResult {
        value: -sum / (4.0 * PI),
        method: Method::Direct,
        terms_used: l_trunc as u64 + 1,
        est_error: (2.0 * next + 1.0) / (next * (next + 1.0) + w) / (4.0 * PI),
    }
}

/// `sum_{l=1}^{l'-1} c_l P_l(x)`.
fn bracket_sum<T: Real>(x: T, w: T, l_prime: usize) -> T {
    let mut acc = T::zero();
    for (l, pl) in LegendreIter::new_unchecked(x).take(l_prime).skip(1) {
        acc = acc + bracket(l as f64, w) * pl;
    }
    acc
}

/// `w = (R / L_d)²` carried in double-double.
fn w_dd(params: &ShellParams) -> DDReal {
    (DDReal::from_f64(params.radius_km()) / DDReal::from_f64(params.rossby_km())).square()
}

/// `ln(1 - cos gamma)` in double-double.
///
/// Near the source the log kernel dominates and `1 - cos gamma` comes from
/// the half-angle form, which is accurate for the true angle. Farther out
/// `G` is a small remainder of `G*` and the bracket sum, and both must see
/// the same argument, so `1 - x` is formed exactly from the double `x` used
/// by the Legendre recurrence. `u = 2` and `u = 1` are exact either way.
fn log_one_minus_cos_dd(p: &EvalPoint, gamma_star: f64) -> DDReal {
    let u = if p.gamma() >= 2.0 * gamma_star {
        DDReal::ONE - DDReal::from_f64(p.cos_gamma())
    } else {
        DDReal::from_f64(p.one_minus_cos())
    };
    u.ln()
}

/// Split-sum approximation
///
/// ```text
/// G_l'(gamma) = -gamma*²/(4pi) - 1/(4pi) sum_{l=1}^{l'-1} c_l P_l(cos gamma) + G*(gamma)
/// ```
///
/// with `l'` from `policy`. The `l = 0` term is kept in closed form. In
/// [`Precision::DoubleDouble`] every term, coefficient and the final
/// combination are carried in double-double; `cos gamma` enters as the exact
/// promotion of its double value.
pub fn green_split(
    params: &ShellParams,
    p: &EvalPoint,
    policy: TruncationPolicy,
    precision: Precision,
) -> Result<GreenResult> {
    let l_prime = policy.resolve(params.gamma_star())?;
    let est_error = if l_prime >= 1 {
        bracket_coefficient(l_prime, params.gamma_star()).abs() / (4.0 * PI)
    } else {
        f64::NAN
    };
    let (value, method) = match precision {
        Precision::Double => {
            let w = params.w();
            let s = bracket_sum(p.cos_gamma(), w, l_prime);
            let gs2 = params.gamma_star() * params.gamma_star();
            ((-gs2 - s) / (4.0 * PI) + g_star(p)?, Method::Split)
        }
        Precision::DoubleDouble => {
            let u = p.one_minus_cos();
            if !(u > 0.0) {
                return Err(Error::Singular { gamma: p.gamma() });
            }
            let w = w_dd(params);
            let s = bracket_sum(DDReal::from_f64(p.cos_gamma()), w, l_prime);
            let log_term = dd_constants().log_e_half + log_one_minus_cos_dd(p, params.gamma_star());
            let gs2 = DDReal::ONE / w;
            let total = (log_term - gs2 - s) / DDReal::PI.mul_f64(4.0);
            (total.to_f64(), Method::SplitDd)
        }
    };
    Ok(GreenResult {
        value,
        method,
        terms_used: l_prime as u64,
        est_error,
    })
}

/// Double-precision partial sums `(n, G_n)` of the direct series, where `G_n`
/// keeps degrees `0..=n`.
pub fn direct_partial_sums(
    params: &ShellParams,
    p: &EvalPoint,
) -> impl Iterator<Item = (usize, f64)> {
    let w = params.w();
    let mut acc = 0.0;
    LegendreIter::new_unchecked(p.cos_gamma()).map(move |(l, pl)| {
        let lf = l as f64;
        acc += (2.0 * lf + 1.0) / (lf * (lf + 1.0) + w) * pl;
        (l, -acc / (4.0 * PI))
    })
}

/// Double-double partial sums `(l', G_l')` of the split series for
/// `l' = 1, 2, ...`, returned as doubles.
pub fn split_partial_sums(
    params: &ShellParams,
    p: &EvalPoint,
) -> impl Iterator<Item = (usize, f64)> {
    let w = w_dd(params);
    let base = dd_constants().log_e_half + log_one_minus_cos_dd(p, params.gamma_star())
        - DDReal::ONE / w;
    let four_pi = DDReal::PI.mul_f64(4.0);
    let mut acc = DDReal::ZERO;
    LegendreIter::new_unchecked(DDReal::from_f64(p.cos_gamma()))
        .skip(1)
        .map(move |(l, pl)| {
            let g = (base - acc) / four_pi;
            acc += bracket(l as f64, w) * pl;
            (l, g.to_f64())
        })
}

/// Double-precision split sum for many separations on one shell.
///
/// The bracket coefficients and the recurrence factors are tabulated once
/// and several arguments advance through the recurrence together, which is
/// what the convolution solver needs: tens of thousands of kernel values
/// with the same `l'`. Results agree with [`green_split`] in double
/// precision up to rounding.
#[derive(Debug, Clone)]
pub struct SplitTable {
    gamma_star: f64,
    // per degree l >= 1: (c_l, (2l+1)/(l+1), l/(l+1))
    terms: Vec<(f64, f64, f64)>,
    est_error: f64,
}

const LANES: usize = 8;

impl SplitTable {
    pub fn new(params: &ShellParams, policy: TruncationPolicy) -> Result<Self> {
        let l_prime = policy.resolve(params.gamma_star())?;
        let w = params.w();
        let terms = (1..l_prime.max(1))
            .map(|l| {
                let lf = l as f64;
                (bracket(lf, w), (2.0 * lf + 1.0) / (lf + 1.0), lf / (lf + 1.0))
            })
            .collect();
        Ok(Self {
            gamma_star: params.gamma_star(),
            terms,
            est_error: bracket_coefficient(l_prime.max(1), params.gamma_star()).abs() / (4.0 * PI),
        })
    }

    /// Number of terms `l'`.
    pub fn terms_used(&self) -> usize {
        self.terms.len() + 1
    }

    pub fn est_error(&self) -> f64 {
        self.est_error
    }

    /// `G` at each point.
    pub fn eval_many(&self, points: &[EvalPoint]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(points.len());
        for chunk in points.chunks(LANES) {
            let mut x = [0.0; LANES];
            for (xi, p) in x.iter_mut().zip(chunk) {
                *xi = p.cos_gamma();
            }
            let sums = self.lane_sums(&x);
            let gs2 = self.gamma_star * self.gamma_star;
            for (p, s) in chunk.iter().zip(sums) {
                out.push((-gs2 - s) / (4.0 * PI) + g_star(p)?);
            }
        }
        Ok(out)
    }

    pub fn eval(&self, p: &EvalPoint) -> Result<f64> {
        Ok(self.eval_many(std::slice::from_ref(p))?[0])
    }

    fn lane_sums(&self, x: &[f64; LANES]) -> [f64; LANES] {
        let mut prev = [1.0; LANES];
        let mut curr = *x;
        let mut acc = [0.0; LANES];
        for &(c, a, b) in &self.terms {
            for k in 0..LANES {
                acc[k] += c * curr[k];
                let next = a * x[k] * curr[k] - b * prev[k];
                prev[k] = curr[k];
                curr[k] = next;
            }
        }
        acc
    }
}

/// Limit of `G - G*` as `gamma -> 0`, the regular part of the kernel at the
/// source point: `-gamma*²/(4pi) - 1/(4pi) sum_{l>=1} c_l`.
pub fn regular_part_at_origin(params: &ShellParams) -> f64 {
    // sum c_l with c_l = -w (1/l² - 1/(l+1)²) l(l+1)/(l(l+1)+w); the tail
    // beyond N telescopes to -w/(N+1)² up to O(w²/N⁴).
    const N: usize = 200_000;
    let w = w_dd(params);
    let mut acc = DDReal::ZERO;
    for l in (1..=N).rev() {
        acc += bracket(l as f64, w);
    }
    let n1 = (N + 1) as f64;
    let tail = -(w.div_f64(n1 * n1));
    let total = -(DDReal::ONE / w) - (acc + tail);
    (total / DDReal::PI.mul_f64(4.0)).to_f64()
}

/// One sample of the split-sum error curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorPoint {
    /// Truncation index `l'`.
    pub l: usize,
    /// `|G_ref - G_l|`.
    pub abs_error: f64,
    /// Largest `|G_ref - G_k|` for `k` in `(previous sample, l]`.
    pub envelope: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorCurve {
    pub reference: GreenResult,
    pub points: Vec<ErrorPoint>,
}

impl ErrorCurve {
    /// Least-squares slope of `log E` against `log l` using the envelope
    /// samples with `l` in `[l_lo, l_hi]`.
    pub fn fitted_slope(&self, l_lo: usize, l_hi: usize) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .points
            .iter()
            .filter(|p| p.l >= l_lo && p.l <= l_hi && p.envelope > 0.0)
            .map(|p| ((p.l as f64).ln(), p.envelope.ln()))
            .collect();
        if pts.len() < 3 {
            return None;
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        Some(sxy / sxx)
    }
}

/// Samples per decade of the error curve.
const CURVE_DENSITY: f64 = 20.0;

/// The reference value uses this many times `l_max` terms.
pub const REFERENCE_FACTOR: usize = 64;

/// Reference cutoff on the bracket coefficient, double-double epsilon class.
pub const REFERENCE_EPSILON: f64 = 1e-30;

/// Absolute error `E(l) = |G_ref - G_l|` of the split sum for log-spaced
/// `l <= l_max`.
///
/// The reference is the double-double split sum truncated where the bracket
/// coefficient falls below [`REFERENCE_EPSILON`], capped at
/// [`REFERENCE_FACTOR`]` * l_max` terms; beyond that the cap keeps the
/// reference error a factor `64^-3.5` below `E(l_max)`.
pub fn error_curve(params: &ShellParams, p: &EvalPoint, l_max: usize) -> Result<ErrorCurve> {
    if l_max < 2 {
        return Err(Error::InvalidPolicy(format!("l_max must be >= 2, got {l_max}")));
    }
    let by_eps = choose_truncation(REFERENCE_EPSILON, params.gamma_star());
    let l_ref = by_eps.min(REFERENCE_FACTOR * l_max).max(l_max);
    error_curve_with_reference(params, p, l_max, l_ref)
}

/// [`error_curve`] against a reference truncated at `l_ref >= l_max`.
pub fn error_curve_with_reference(
    params: &ShellParams,
    p: &EvalPoint,
    l_max: usize,
    l_ref: usize,
) -> Result<ErrorCurve> {
    if l_max < 2 {
        return Err(Error::InvalidPolicy(format!("l_max must be >= 2, got {l_max}")));
    }
    if l_ref < l_max {
        return Err(Error::InvalidPolicy(format!(
            "reference truncation {l_ref} below l_max {l_max}"
        )));
    }
    let reference = green_split(
        params,
        p,
        TruncationPolicy::Fixed(l_ref),
        Precision::DoubleDouble,
    )?;
    let w = w_dd(params);
    let x = DDReal::from_f64(p.cos_gamma());
    let s_ref = bracket_sum(x, w, l_ref);
    let four_pi = DDReal::PI.mul_f64(4.0);

    let samples = log_spaced(l_max);
    let mut points = Vec::with_capacity(samples.len());
    let mut next = samples.iter().copied().peekable();
    let mut acc = DDReal::ZERO;
    let mut envelope = 0.0f64;
    // acc holds the bracket sum up to l'-1 when l' is visited.
    for (l, pl) in LegendreIter::new_unchecked(x).take(l_max + 1).skip(1) {
        let err = ((s_ref - acc) / four_pi).abs().to_f64();
        envelope = envelope.max(err);
        if next.peek() == Some(&l) {
            next.next();
            points.push(ErrorPoint {
                l,
                abs_error: err,
                envelope,
            });
            envelope = 0.0;
        }
        acc += bracket(l as f64, w) * pl;
    }
    Ok(ErrorCurve { reference, points })
}

fn log_spaced(l_max: usize) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    let steps = ((l_max as f64).log10() * CURVE_DENSITY).ceil() as usize;
    for k in 0..=steps {
        let l = (10f64.powf(k as f64 / CURVE_DENSITY).round() as usize).clamp(1, l_max);
        if out.last() != Some(&l) {
            out.push(l);
        }
    }
    if out.last() != Some(&l_max) {
        out.push(l_max);
    }
    out
}
