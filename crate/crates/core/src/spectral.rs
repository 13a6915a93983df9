//! The screened Poisson equation `lap psi - psi / L_d² = f` on a sphere of
//! radius `R`, solved by spherical-harmonic inversion and by convolution with
//! the Green's function.
//!
//! Fields live on a Gauss-Legendre x uniform-longitude grid. Harmonics are
//! the real orthonormal ones on the unit sphere:
//!
//! ```text
//! Y_l0  = N_l0 P_l(cos theta)
//! Y_lm  = sqrt(2) N_lm P_l^m(cos theta) cos(m phi)      m > 0
//! Y_l-m = sqrt(2) N_lm P_l^m(cos theta) sin(m phi)      m > 0
//! ```
//!
//! with `N_lm² = (2l+1)/(4pi) (l-m)!/(l+m)!` and no Condon-Shortley phase.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{central_angle, EvalPoint, ShellParams, SphericalPoint};
use crate::integral::{green_quadrature, QuadratureSpec};
use crate::legendre::gauss_legendre;
use crate::series::{regular_part_at_origin, SplitTable, TruncationPolicy};

/// Product grid of Gauss-Legendre colatitudes and equispaced longitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereGrid {
    n_theta: usize,
    n_phi: usize,
    radius_km: f64,
    theta: Vec<f64>,
    phi: Vec<f64>,
    // Gauss weight times 2pi/n_phi times R², one per ring
    ring_weight: Vec<f64>,
}

impl SphereGrid {
    pub fn new(n_theta: usize, n_phi: usize, radius_km: f64) -> Result<Self> {
        if n_theta == 0 || n_phi == 0 {
            return Err(Error::InvalidField(format!(
                "grid needs at least one node per direction, got {n_theta}x{n_phi}"
            )));
        }
        if !(radius_km.is_finite() && radius_km > 0.0) {
            return Err(Error::InvalidParams(format!(
                "radius must be positive and finite, got {radius_km}"
            )));
        }
        let (x, w) = gauss_legendre(n_theta);
        let dphi = 2.0 * PI / n_phi as f64;
        let r2 = radius_km * radius_km;
        Ok(Self {
            n_theta,
            n_phi,
            radius_km,
            theta: x.iter().map(|x| x.acos()).collect(),
            phi: (0..n_phi).map(|j| j as f64 * dphi).collect(),
            ring_weight: w.iter().map(|w| w * dphi * r2).collect(),
        })
    }

    /// Smallest grid that resolves degree `l_max` without aliasing, with an
    /// even longitude count.
    pub fn for_degree(l_max: usize, radius_km: f64) -> Result<Self> {
        Self::new(l_max + 1, 2 * l_max + 2, radius_km)
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn radius_km(&self) -> f64 {
        self.radius_km
    }

    pub fn len(&self) -> usize {
        self.n_theta * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn theta(&self, i: usize) -> f64 {
        self.theta[i]
    }

    pub fn phi(&self, j: usize) -> f64 {
        self.phi[j]
    }

    /// Node `k` in theta-major order.
    pub fn node(&self, k: usize) -> (f64, f64) {
        (self.theta[k / self.n_phi], self.phi[k % self.n_phi])
    }

    pub fn point(&self, k: usize) -> SphericalPoint {
        let (t, p) = self.node(k);
        SphericalPoint::new(t, p).expect("grid nodes are valid points")
    }

    /// Area weight of node `k` in km².
    pub fn weight(&self, k: usize) -> f64 {
        self.ring_weight[k / self.n_phi]
    }

    pub fn total_area(&self) -> f64 {
        self.ring_weight.iter().sum::<f64>() * self.n_phi as f64
    }

    /// Whether the grid integrates products of degree-`l_max` harmonics exactly.
    pub fn resolves(&self, l_max: usize) -> bool {
        self.n_theta > l_max && self.n_phi > 2 * l_max
    }

    fn check(&self, l_max: usize) -> Result<()> {
        if self.resolves(l_max) {
            Ok(())
        } else {
            Err(Error::UnderResolved {
                n_theta: self.n_theta,
                n_phi: self.n_phi,
                l_max,
            })
        }
    }
}

/// Real samples on every node of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereField {
    grid: Arc<SphereGrid>,
    samples: Vec<f64>,
}

impl SphereField {
    pub fn new(grid: Arc<SphereGrid>, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::InvalidField(format!(
                "expected {} samples, got {}",
                grid.len(),
                samples.len()
            )));
        }
        if let Some(k) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidField(format!(
                "sample {k} is not finite ({})",
                samples[k]
            )));
        }
        Ok(Self { grid, samples })
    }

    pub fn zeros(grid: Arc<SphereGrid>) -> Self {
        let n = grid.len();
        Self {
            grid,
            samples: vec![0.0; n],
        }
    }

    /// Samples `f(theta, phi)` at every node.
    pub fn from_fn(grid: Arc<SphereGrid>, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let samples = (0..grid.len())
            .map(|k| {
                let (t, p) = grid.node(k);
                f(t, p)
            })
            .collect();
        Self::new(grid, samples)
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    /// Grid inner product `sum_k w_k f_k g_k` (km² times the field units).
    pub fn inner(&self, other: &Self) -> f64 {
        self.samples
            .iter()
            .zip(&other.samples)
            .enumerate()
            .map(|(k, (a, b))| self.grid.weight(k) * a * b)
            .sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    /// `||self - other|| / ||other||` in the grid norm.
    pub fn relative_l2_diff(&self, other: &Self) -> f64 {
        let diff: f64 = self
            .samples
            .iter()
            .zip(&other.samples)
            .enumerate()
            .map(|(k, (a, b))| self.grid.weight(k) * (a - b) * (a - b))
            .sum();
        (diff / other.inner(other)).sqrt()
    }
}

/// Real spherical-harmonic coefficients `f_lm`, `0 <= l <= l_max`,
/// `-l <= m <= l`, stored at index `l² + l + m`.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicCoeffs {
    l_max: usize,
    coeffs: Vec<f64>,
}

impl HarmonicCoeffs {
    pub fn zeros(l_max: usize) -> Self {
        Self {
            l_max,
            coeffs: vec![0.0; (l_max + 1) * (l_max + 1)],
        }
    }

    pub fn from_vec(l_max: usize, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != (l_max + 1) * (l_max + 1) {
            return Err(Error::InvalidField(format!(
                "degree {l_max} needs {} coefficients, got {}",
                (l_max + 1) * (l_max + 1),
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidField("non-finite coefficient".into()));
        }
        Ok(Self { l_max, coeffs })
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn get(&self, l: usize, m: i64) -> f64 {
        assert!(l <= self.l_max && m.unsigned_abs() as usize <= l);
        self.coeffs[idx(l, m)]
    }

    pub fn set(&mut self, l: usize, m: i64, value: f64) {
        assert!(l <= self.l_max && m.unsigned_abs() as usize <= l);
        self.coeffs[idx(l, m)] = value;
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, i64, f64)> + '_ {
        (0..=self.l_max).flat_map(move |l| {
            (-(l as i64)..=l as i64).map(move |m| (l, m, self.coeffs[idx(l, m)]))
        })
    }
}

fn idx(l: usize, m: i64) -> usize {
    ((l * l + l) as i64 + m) as usize
}

/// Normalized associated Legendre functions `N_lm P_l^m(x)` for
/// `0 <= m <= l <= l_max`, stored at `l(l+1)/2 + m`. `s = sqrt(1 - x²)`.
fn normalized_alf(x: f64, s: f64, l_max: usize) -> Vec<f64> {
    let tri = |l: usize, m: usize| l * (l + 1) / 2 + m;
    let mut p = vec![0.0; (l_max + 1) * (l_max + 2) / 2];
    let mut pmm = (0.25 / PI).sqrt();
    for m in 0..=l_max {
        if m > 0 {
            let mf = m as f64;
            pmm *= s * ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt();
        }
        p[tri(m, m)] = pmm;
        if m == l_max {
            break;
        }
        let mf = m as f64;
        p[tri(m + 1, m)] = (2.0 * mf + 3.0).sqrt() * x * pmm;
        for l in m + 2..=l_max {
            let lf = l as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
            p[tri(l, m)] = a * (x * p[tri(l - 1, m)] - b * p[tri(l - 2, m)]);
        }
    }
    p
}

/// Real orthonormal spherical harmonic `Y_lm(theta, phi)`.
pub fn real_sph_harm(l: usize, m: i64, theta: f64, phi: f64) -> f64 {
    let am = m.unsigned_abs() as usize;
    assert!(am <= l, "|m| must not exceed l");
    let p = normalized_alf(theta.cos(), theta.sin(), l);
    let v = p[l * (l + 1) / 2 + am];
    match m.cmp(&0) {
        std::cmp::Ordering::Equal => v,
        std::cmp::Ordering::Greater => std::f64::consts::SQRT_2 * v * (am as f64 * phi).cos(),
        std::cmp::Ordering::Less => std::f64::consts::SQRT_2 * v * (am as f64 * phi).sin(),
    }
}

/// Projections `f_lm = (1/R²) int Y_lm f dS` by grid quadrature.
pub fn analyze(field: &SphereField, l_max: usize) -> Result<HarmonicCoeffs> {
    let grid = field.grid();
    grid.check(l_max)?;
    let n_phi = grid.n_phi;
    let r2 = grid.radius_km * grid.radius_km;
    let mut out = HarmonicCoeffs::zeros(l_max);
    for i in 0..grid.n_theta {
        let row = &field.samples[i * n_phi..(i + 1) * n_phi];
        let (cos_sums, sin_sums) = fourier_sums(row, &grid.phi, l_max);
        let t = grid.theta[i];
        let p = normalized_alf(t.cos(), t.sin(), l_max);
        let w = grid.ring_weight[i] / r2;
        for l in 0..=l_max {
            for m in 0..=l {
                let v = w * p[l * (l + 1) / 2 + m];
                if m == 0 {
                    out.coeffs[idx(l, 0)] += v * cos_sums[0];
                } else {
                    let v = v * std::f64::consts::SQRT_2;
                    out.coeffs[idx(l, m as i64)] += v * cos_sums[m];
                    out.coeffs[idx(l, -(m as i64))] += v * sin_sums[m];
                }
            }
        }
    }
    Ok(out)
}

fn fourier_sums(row: &[f64], phi: &[f64], m_max: usize) -> (Vec<f64>, Vec<f64>) {
    let mut c = vec![0.0; m_max + 1];
    let mut s = vec![0.0; m_max + 1];
    for m in 0..=m_max {
        let mf = m as f64;
        for (v, p) in row.iter().zip(phi) {
            let (sn, cs) = (mf * p).sin_cos();
            c[m] += v * cs;
            s[m] += v * sn;
        }
    }
    (c, s)
}

/// Pointwise `sum f_lm Y_lm` on the nodes of `grid`.
pub fn synthesize(coeffs: &HarmonicCoeffs, grid: &Arc<SphereGrid>) -> SphereField {
    let l_max = coeffs.l_max;
    let n_phi = grid.n_phi;
    let mut samples = vec![0.0; grid.len()];
    for i in 0..grid.n_theta {
        let t = grid.theta[i];
        let p = normalized_alf(t.cos(), t.sin(), l_max);
        let mut a = vec![0.0; l_max + 1];
        let mut b = vec![0.0; l_max + 1];
        for l in 0..=l_max {
            for m in 0..=l {
                let v = p[l * (l + 1) / 2 + m];
                a[m] += v * coeffs.coeffs[idx(l, m as i64)];
                if m > 0 {
                    b[m] += v * coeffs.coeffs[idx(l, -(m as i64))];
                }
            }
        }
        for j in 0..n_phi {
            let ph = grid.phi[j];
            let mut v = a[0];
            for m in 1..=l_max {
                let (sn, cs) = (m as f64 * ph).sin_cos();
                v += std::f64::consts::SQRT_2 * (a[m] * cs + b[m] * sn);
            }
            samples[i * n_phi + j] = v;
        }
    }
    SphereField {
        grid: grid.clone(),
        samples,
    }
}

/// Eigenvalue of `lap - 1/L_d²` on degree `l`, in km⁻².
pub fn screened_eigenvalue(params: &ShellParams, l: usize) -> f64 {
    let r = params.radius_km();
    let ld = params.rossby_km();
    let lf = l as f64;
    -lf * (lf + 1.0) / (r * r) - 1.0 / (ld * ld)
}

fn check_radius(grid: &SphereGrid, params: &ShellParams) -> Result<()> {
    let (a, b) = (grid.radius_km, params.radius_km());
    if (a - b).abs() > 1e-12 * b {
        return Err(Error::InvalidParams(format!(
            "grid radius {a} km differs from shell radius {b} km"
        )));
    }
    Ok(())
}

fn scale_coeffs(c: &mut HarmonicCoeffs, params: &ShellParams, f: impl Fn(f64, f64) -> f64) {
    for l in 0..=c.l_max {
        let e = screened_eigenvalue(params, l);
        for m in -(l as i64)..=l as i64 {
            let k = idx(l, m);
            c.coeffs[k] = f(c.coeffs[k], e);
        }
    }
}

/// `psi` with `psi_lm = f_lm / (-l(l+1)/R² - 1/L_d²)`, truncated at `l_max`.
pub fn solve_spectral(f: &SphereField, params: &ShellParams, l_max: usize) -> Result<SphereField> {
    check_radius(f.grid(), params)?;
    let mut c = analyze(f, l_max)?;
    scale_coeffs(&mut c, params, |v, e| v / e);
    Ok(synthesize(&c, f.grid()))
}

/// `lap psi - psi / L_d²` through the harmonic expansion truncated at `l_max`.
pub fn apply_screened_laplacian(
    psi: &SphereField,
    params: &ShellParams,
    l_max: usize,
) -> Result<SphereField> {
    check_radius(psi.grid(), params)?;
    let mut c = analyze(psi, l_max)?;
    scale_coeffs(&mut c, params, |v, e| v * e);
    Ok(synthesize(&c, psi.grid()))
}

/// Source of Green's function values for the convolution solver.
pub trait KernelEvaluator: Sync {
    /// `G` on the unit sphere at each separation.
    fn kernel(&self, params: &ShellParams, points: &[EvalPoint]) -> Result<Vec<f64>>;
}

/// Double-precision split sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitEvaluator {
    pub policy: TruncationPolicy,
}

impl Default for SplitEvaluator {
    fn default() -> Self {
        Self {
            policy: TruncationPolicy::auto(1e-14),
        }
    }
}

impl KernelEvaluator for SplitEvaluator {
    fn kernel(&self, params: &ShellParams, points: &[EvalPoint]) -> Result<Vec<f64>> {
        let table = SplitTable::new(params, self.policy)?;
        let chunks: Vec<Result<Vec<f64>>> = points
            .par_chunks(256)
            .map(|c| table.eval_many(c))
            .collect();
        let mut out = Vec::with_capacity(points.len());
        for c in chunks {
            out.extend(c?);
        }
        Ok(out)
    }
}

/// Adaptive quadrature of the integral form.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QuadratureEvaluator {
    pub spec: QuadratureSpec,
}

impl KernelEvaluator for QuadratureEvaluator {
    fn kernel(&self, params: &ShellParams, points: &[EvalPoint]) -> Result<Vec<f64>> {
        points
            .par_iter()
            .map(|p| green_quadrature(params, p, &self.spec).map(|r| r.value))
            .collect()
    }
}

/// Mean of `G` over a geodesic disk of area `area_km2` centred on the source.
///
/// Uses `G ~ G* + (G - G*)(0+)` inside the disk; the disk mean of
/// `G* = (1 + ln(u/2)) / 4pi` over `u in [0, U]` is `ln(U/2) / 4pi`.
pub fn self_cell_mean(params: &ShellParams, area_km2: f64) -> f64 {
    let r = params.radius_km();
    let u = area_km2 / (2.0 * PI * r * r);
    (0.5 * u).ln() / (4.0 * PI) + regular_part_at_origin(params)
}

/// Treatment of the singular `k' = k` term of the convolution sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SelfTerm {
    /// The node's own cell is replaced by a geodesic disk of equal area over
    /// which `G` is averaged analytically ([`self_cell_mean`]).
    DiskMean,
    /// Singularity subtraction: `sum_k' G_kk' (f_k' - f_k) w_k' + f_k int G`,
    /// using `int G dOmega = -gamma*²` on the unit sphere. Constant fields
    /// are reproduced exactly and the self term drops out.
    #[default]
    Subtracted,
}

/// `psi(x_k) = sum_k' G(gamma(x_k, x_k')) f_k' w_k'` with the singular self
/// term handled by [`SelfTerm::default`].
pub fn solve_convolution(
    f: &SphereField,
    params: &ShellParams,
    evaluator: &dyn KernelEvaluator,
) -> Result<SphereField> {
    solve_convolution_with(f, params, evaluator, SelfTerm::default())
}

/// Convolution sum with an explicit self-term rule.
///
/// Kernel values depend only on the pair of rings and the longitude offset,
/// so each distinct separation is evaluated once.
pub fn solve_convolution_with(
    f: &SphereField,
    params: &ShellParams,
    evaluator: &dyn KernelEvaluator,
    self_term: SelfTerm,
) -> Result<SphereField> {
    let grid = f.grid().clone();
    check_radius(&grid, params)?;
    let (nt, np) = (grid.n_theta, grid.n_phi);
    let nd = np / 2 + 1;
    let r2 = grid.radius_km * grid.radius_km;

    // unique separations: rings i <= i', offsets 0..nd
    let slot = |i: usize, ip: usize, d: usize| {
        let (a, b) = if i <= ip { (i, ip) } else { (ip, i) };
        (a * nt - a * (a + 1) / 2 + b) * nd + d
    };
    let n_slots = nt * (nt + 1) / 2 * nd;
    let mut points = Vec::with_capacity(n_slots);
    let mut slots = Vec::with_capacity(n_slots);
    for i in 0..nt {
        let a = SphericalPoint::new(grid.theta[i], 0.0)?;
        for ip in i..nt {
            for d in 0..nd {
                if i == ip && d == 0 {
                    continue;
                }
                let b = SphericalPoint::new(grid.theta[ip], grid.phi[d])?;
                points.push(central_angle(&a, &b)?);
                slots.push(slot(i, ip, d));
            }
        }
    }
    let values = evaluator.kernel(params, &points)?;
    let mut table = vec![0.0; n_slots];
    for (s, v) in slots.into_iter().zip(values) {
        table[s] = v;
    }
    let self_terms: Vec<f64> = match self_term {
        SelfTerm::DiskMean => (0..nt)
            .map(|i| self_cell_mean(params, grid.ring_weight[i]))
            .collect(),
        SelfTerm::Subtracted => vec![0.0; nt],
    };
    let mean_kernel = -params.gamma_star() * params.gamma_star();

    let samples: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / np, k % np);
            let shift = match self_term {
                SelfTerm::DiskMean => 0.0,
                SelfTerm::Subtracted => f.samples[k],
            };
            let mut acc = 0.0;
            for ip in 0..nt {
                let w = grid.ring_weight[ip] / r2;
                let mut ring = 0.0;
                for jp in 0..np {
                    let fv = f.samples[ip * np + jp] - shift;
                    let g = if ip == i && jp == j {
                        self_terms[i]
                    } else {
                        let dj = j.abs_diff(jp);
                        table[slot(i, ip, dj.min(np - dj))]
                    };
                    ring += g * fv;
                }
                acc += w * ring;
            }
            // the kernel is tabulated on the unit sphere; dS = R² dOmega
            (acc + shift * mean_kernel) * r2
        })
        .collect();
    SphereField::new(grid, samples)
}

/// `Y_lm` sampled on a grid.
pub fn harmonic_field(grid: &Arc<SphereGrid>, l: usize, m: i64) -> Result<SphereField> {
    SphereField::from_fn(grid.clone(), |t, p| real_sph_harm(l, m, t, p))
}

/// `exp(-(gamma / width)²)` around `center`.
pub fn gaussian_bump(
    grid: &Arc<SphereGrid>,
    center: &SphericalPoint,
    width: f64,
) -> Result<SphereField> {
    let samples = (0..grid.len())
        .map(|k| {
            let g = match central_angle(center, &grid.point(k)) {
                Ok(p) => p.gamma(),
                Err(_) => 0.0,
            };
            (-(g / width).powi(2)).exp()
        })
        .collect();
    SphereField::new(grid.clone(), samples)
}

/// Centre of the bump preset, away from the poles and the grid seam.
pub fn bump_center() -> SphericalPoint {
    SphericalPoint::new(1.0, 0.7).expect("valid point")
}

/// Relative L2 discrepancy between the two solvers on one forcing.
pub fn cross_validate(
    f: &SphereField,
    params: &ShellParams,
    l_max: usize,
    evaluator: &dyn KernelEvaluator,
) -> Result<f64> {
    let spectral = solve_spectral(f, params, l_max)?;
    let conv = solve_convolution(f, params, evaluator)?;
    Ok(conv.relative_l2_diff(&spectral))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::legendre::legendre;
    use proptest::prelude::*;

    fn grid(l_max: usize) -> Arc<SphereGrid> {
        Arc::new(SphereGrid::for_degree(l_max, 6371.0).unwrap())
    }

    #[test]
    fn weights_sum_to_area() {
        for (nt, np) in [(5, 11), (33, 66), (64, 129)] {
            let g = SphereGrid::new(nt, np, 6371.0).unwrap();
            let area = 4.0 * PI * 6371.0 * 6371.0;
            assert!((g.total_area() - area).abs() < 1e-12 * area);
        }
    }

    #[test]
    fn single_harmonic_is_recovered() {
        let g = grid(4);
        let f = harmonic_field(&g, 2, 1).unwrap();
        let c = analyze(&f, 4).unwrap();
        for (l, m, v) in c.iter() {
            let want = if (l, m) == (2, 1) { 1.0 } else { 0.0 };
            assert!((v - want).abs() < 1e-12, "({l},{m}) {v}");
        }
    }

    #[test]
    fn constant_field() {
        let g = grid(6);
        let f = SphereField::from_fn(g.clone(), |_, _| 2.5).unwrap();
        let c = analyze(&f, 6).unwrap();
        assert!((c.get(0, 0) - 2.5 * (4.0 * PI).sqrt()).abs() < 1e-12);
        assert!(c.iter().skip(1).all(|(_, _, v)| v.abs() < 1e-12));
    }

    #[test]
    fn linear_combination() {
        let g = grid(5);
        let f = SphereField::from_fn(g.clone(), |t, p| {
            real_sph_harm(3, -2, t, p) + 0.5 * real_sph_harm(1, 0, t, p)
        })
        .unwrap();
        let c = analyze(&f, 5).unwrap();
        assert!((c.get(1, 0) - 0.5).abs() < 1e-12);
        assert!((c.get(3, -2) - 1.0).abs() < 1e-12);
        // against a brute-force projection
        for (l, m, v) in c.iter() {
            let y = harmonic_field(&g, l, m).unwrap();
            let brute = f.inner(&y) / (6371.0 * 6371.0);
            assert!((v - brute).abs() < 1e-12);
        }
    }

    #[test]
    fn synthesis_of_one_mode() {
        let g = grid(7);
        let mut c = HarmonicCoeffs::zeros(7);
        c.set(5, 3, 2.0);
        let f = synthesize(&c, &g);
        for k in 0..g.len() {
            let (t, p) = g.node(k);
            assert!((f.samples()[k] - 2.0 * real_sph_harm(5, 3, t, p)).abs() < 1e-12);
        }
    }

    #[test]
    fn under_resolved_grid() {
        let g = Arc::new(SphereGrid::new(4, 20, 6371.0).unwrap());
        let f = SphereField::zeros(g.clone());
        assert!(matches!(analyze(&f, 4), Err(Error::UnderResolved { .. })));
        let g = Arc::new(SphereGrid::new(10, 8, 6371.0).unwrap());
        let f = SphereField::zeros(g);
        assert!(matches!(analyze(&f, 4), Err(Error::UnderResolved { .. })));
    }

    #[test]
    fn field_validation() {
        let g = grid(3);
        assert!(SphereField::new(g.clone(), vec![0.0; 3]).is_err());
        let mut v = vec![0.0; g.len()];
        v[5] = f64::NAN;
        assert!(matches!(SphereField::new(g, v), Err(Error::InvalidField(_))));
    }

    #[test]
    fn addition_theorem() {
        let mut rng = 0x2545f4914f6cdd1du64;
        let mut next = move || {
            rng ^= rng << 13;
            rng ^= rng >> 7;
            rng ^= rng << 17;
            (rng >> 11) as f64 / (1u64 << 53) as f64
        };
        let g = grid(16);
        for _ in 0..50 {
            let a = g.point((next() * g.len() as f64) as usize % g.len());
            let b = g.point((next() * g.len() as f64) as usize % g.len());
            let x = central_angle(&a, &b).map(|p| p.cos_gamma()).unwrap_or(1.0);
            for l in 0..=8 {
                let s: f64 = (-(l as i64)..=l as i64)
                    .map(|m| {
                        real_sph_harm(l, m, a.theta(), a.phi()) * real_sph_harm(l, m, b.theta(), b.phi())
                    })
                    .sum();
                let lhs = 4.0 * PI / (2 * l + 1) as f64 * s;
                assert!((lhs - legendre(l, x).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn spectral_single_mode() {
        let params = ShellParams::earth(1000.0).unwrap();
        let g = grid(8);
        let f = harmonic_field(&g, 2, 0).unwrap();
        let psi = solve_spectral(&f, &params, 8).unwrap();
        let e = -6.0 / (6371.0f64 * 6371.0) - 1.0 / (1000.0 * 1000.0);
        for (a, b) in psi.samples().iter().zip(f.samples()) {
            assert!((a - b / e).abs() < 1e-10 * (b / e).abs().max(1.0));
        }
    }

    #[test]
    fn spectral_constant() {
        let params = ShellParams::earth(800.0).unwrap();
        let g = grid(4);
        let f = SphereField::from_fn(g, |_, _| 3.0).unwrap();
        let psi = solve_spectral(&f, &params, 4).unwrap();
        for v in psi.samples() {
            assert!((v + 3.0 * 800.0 * 800.0).abs() < 1e-9 * 3.0 * 800.0 * 800.0);
        }
    }

    #[test]
    fn radius_mismatch() {
        let params = ShellParams::new(1000.0, 100.0).unwrap();
        let f = SphereField::zeros(grid(4));
        assert!(matches!(solve_spectral(&f, &params, 4), Err(Error::InvalidParams(_))));
    }

    fn random_field(g: &Arc<SphereGrid>, l_max: usize, seed: u64) -> (HarmonicCoeffs, SphereField) {
        let mut s = seed | 1;
        let mut c = HarmonicCoeffs::zeros(l_max);
        for l in 0..=l_max {
            for m in -(l as i64)..=l as i64 {
                s ^= s << 13;
                s ^= s >> 7;
                s ^= s << 17;
                c.set(l, m, (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5);
            }
        }
        let f = synthesize(&c, g);
        (c, f)
    }

    #[test]
    fn screened_residual() {
        let params = ShellParams::earth(1000.0).unwrap();
        let g = grid(32);
        let (_, f) = random_field(&g, 32, 7);
        let psi = solve_spectral(&f, &params, 32).unwrap();
        let back = apply_screened_laplacian(&psi, &params, 32).unwrap();
        assert!(back.relative_l2_diff(&f) < 1e-10);
    }

    #[test]
    fn l0_component_is_negative() {
        let params = ShellParams::earth(500.0).unwrap();
        let g = grid(16);
        let f = gaussian_bump(&g, &bump_center(), 0.3).unwrap();
        let psi = solve_spectral(&f, &params, 16).unwrap();
        assert!(analyze(&psi, 0).unwrap().get(0, 0) < 0.0);
    }

    #[test]
    fn zero_forcing() {
        let params = ShellParams::earth(1000.0).unwrap();
        let f = SphereField::zeros(grid(6));
        let psi = solve_convolution(&f, &params, &SplitEvaluator { policy: TruncationPolicy::auto(1e-8) }).unwrap();
        assert!(psi.samples().iter().all(|&v| v == 0.0));
    }

    fn cap_mean(params: &ShellParams, cap: f64) -> f64 {
        // mean of G over a cap by radial quadrature of the split sum; the
        // substitution u = U s² removes the log singularity
        let table = SplitTable::new(params, TruncationPolicy::auto(1e-13)).unwrap();
        let (x, w) = gauss_legendre(40);
        let u_max = 1.0 - cap.cos();
        x.iter()
            .zip(&w)
            .map(|(xi, wi)| {
                let s = 0.5 * (xi + 1.0);
                let p = EvalPoint::from_cos(1.0 - u_max * s * s).unwrap();
                wi * s * table.eval(&p).unwrap()
            })
            .sum()
    }

    #[test]
    fn self_cell_mean_matches_quadrature() {
        let params = ShellParams::earth(1000.0).unwrap();
        let r = 6371.0f64;
        let mut last = f64::INFINITY;
        for cap in [0.04f64, 0.02, 0.01, 0.005] {
            let area = 2.0 * PI * r * r * (1.0 - cap.cos());
            let closed = self_cell_mean(&params, area);
            let err = ((cap_mean(&params, cap) - closed) / closed).abs();
            assert!(err < 2e-2 && err < 0.5 * last, "{cap}: {err}");
            last = err;
        }
    }

    #[test]
    fn convolution_single_mode() {
        let params = ShellParams::earth(1000.0).unwrap();
        let g = grid(24);
        let f = harmonic_field(&g, 2, 0).unwrap();
        let ev = SplitEvaluator { policy: TruncationPolicy::auto(1e-10) };
        let d = cross_validate(&f, &params, 24, &ev).unwrap();
        assert!(d < 1e-3, "{d}");
    }

    #[test]
    fn convolution_converges_under_refinement() {
        let params = ShellParams::earth(1000.0).unwrap();
        let ev = SplitEvaluator { policy: TruncationPolicy::auto(1e-10) };
        for scheme in [SelfTerm::DiskMean, SelfTerm::Subtracted] {
            let d: Vec<f64> = [12, 24]
                .iter()
                .map(|&l| {
                    let g = grid(l);
                    let f = gaussian_bump(&g, &bump_center(), 5.0 * params.gamma_star()).unwrap();
                    let exact = solve_spectral(&f, &params, l).unwrap();
                    solve_convolution_with(&f, &params, &ev, scheme)
                        .unwrap()
                        .relative_l2_diff(&exact)
                })
                .collect();
            assert!(d[0] / d[1] >= 1.5, "{scheme:?}: {d:?}");
        }
    }

    #[test]
    fn constant_forcing_is_exact_with_subtraction() {
        let params = ShellParams::earth(1000.0).unwrap();
        let g = grid(10);
        let f = SphereField::from_fn(g, |_, _| 1.0).unwrap();
        let ev = SplitEvaluator { policy: TruncationPolicy::auto(1e-8) };
        let psi = solve_convolution(&f, &params, &ev).unwrap();
        for v in psi.samples() {
            assert!((v + 1000.0 * 1000.0).abs() < 1e-9 * 1e6);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn round_trip(seed in any::<u64>()) {
            let g = grid(16);
            let (c, f) = random_field(&g, 16, seed);
            let back = analyze(&f, 16).unwrap();
            for (a, b) in c.as_slice().iter().zip(back.as_slice()) {
                prop_assert!((a - b).abs() < 1e-11);
            }
            let f2 = synthesize(&back, &g);
            for (a, b) in f.samples().iter().zip(f2.samples()) {
                prop_assert!((a - b).abs() < 1e-11);
            }
        }

        #[test]
        fn spectral_is_self_adjoint(s1 in any::<u64>(), s2 in any::<u64>()) {
            let params = ShellParams::earth(1000.0).unwrap();
            let g = grid(12);
            let (_, f) = random_field(&g, 12, s1);
            let (_, h) = random_field(&g, 12, s2);
            let a = solve_spectral(&f, &params, 12).unwrap().inner(&h);
            let b = f.inner(&solve_spectral(&h, &params, 12).unwrap());
            prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(b.abs()));
        }
    }
}
