//! Shell parameters and the central angle between two points on the shell.
//!
//! Angles are radians throughout; kilometres appear only in [`ShellParams`].

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Mean Earth radius in km, the default shell radius.
pub const DEFAULT_RADIUS_KM: f64 = 6371.0;

/// Separations with `1 - cos(gamma)` below this are treated as coincident.
pub const COINCIDENT_TOL: f64 = 1e-15;

/// Physical configuration of the shell: radius `R`, Rossby radius `L_d` and
/// the derived dimensionless constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShellParams {
    radius_km: f64,
    rossby_km: f64,
    gamma_star: f64,
    w: f64,
    beta: f64,
}

impl ShellParams {
    /// Builds the parameter set for a shell of radius `radius_km` and a
    /// Rossby radius `rossby_km`.
    pub fn new(radius_km: f64, rossby_km: f64) -> Result<Self> {
        if !(radius_km.is_finite() && radius_km > 0.0) {
            return Err(Error::InvalidParams(format!(
                "radius must be positive and finite, got {radius_km}"
            )));
        }
        if !(rossby_km.is_finite() && rossby_km > 0.0) {
            return Err(Error::InvalidParams(format!(
                "Rossby radius must be positive and finite, got {rossby_km}"
            )));
        }
        let ratio = radius_km / rossby_km;
        if ratio <= 0.5 {
            return Err(Error::BetaImaginary { ratio });
        }
        let gamma_star = rossby_km / radius_km;
        let w = 1.0 / (gamma_star * gamma_star);
        let beta = (w - 0.25).sqrt();
        Ok(Self {
            radius_km,
            rossby_km,
            gamma_star,
            w,
            beta,
        })
    }

    /// Earth-radius shell with the given Rossby radius.
    pub fn earth(rossby_km: f64) -> Result<Self> {
        Self::new(DEFAULT_RADIUS_KM, rossby_km)
    }

    pub fn radius_km(&self) -> f64 {
        self.radius_km
    }

    pub fn rossby_km(&self) -> f64 {
        self.rossby_km
    }

    /// Characteristic angle `L_d / R`.
    pub fn gamma_star(&self) -> f64 {
        self.gamma_star
    }

    /// Screening constant `R² / L_d²` in units of the unit sphere.
    pub fn w(&self) -> f64 {
        self.w
    }

    /// `sqrt(R²/L_d² - 1/4)`, the oscillation rate of the integral form.
    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// A point on the shell in colatitude/longitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalPoint {
    theta: f64,
    phi: f64,
}

impl SphericalPoint {
    /// `theta` is the colatitude in `[0, pi]`, `phi` the longitude in `[0, 2pi]`.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::InvalidPoint(format!(
                "colatitude {theta} outside [0, pi]"
            )));
        }
        if !(0.0..=2.0 * PI).contains(&phi) {
            return Err(Error::InvalidPoint(format!(
                "longitude {phi} outside [0, 2pi]"
            )));
        }
        Ok(Self { theta, phi })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// The diametrically opposite point.
    pub fn antipode(&self) -> Self {
        let mut phi = self.phi + PI;
        if phi > 2.0 * PI {
            phi -= 2.0 * PI;
        }
        Self {
            theta: PI - self.theta,
            phi,
        }
    }
}

/// The Green's function's only geometric argument: the central angle between
/// source and target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalPoint {
    gamma: f64,
    cos_gamma: f64,
    // 1 - cos(gamma), kept separately so the log kernel stays accurate for
    // small separations.
    one_minus_cos: f64,
}

impl EvalPoint {
    /// Evaluation point at central angle `gamma` in `(0, pi]`.
    pub fn from_gamma(gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0 && gamma <= PI) {
            return Err(Error::InvalidPoint(format!(
                "central angle {gamma} outside (0, pi]"
            )));
        }
        let half = (0.5 * gamma).sin();
        let one_minus_cos = 2.0 * half * half;
        let cos_gamma = if gamma == PI { -1.0 } else { gamma.cos() };
        Self::checked(gamma, cos_gamma, one_minus_cos)
    }

    /// Evaluation point with the given cosine of the central angle.
    pub fn from_cos(cos_gamma: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&cos_gamma) {
            return Err(Error::InvalidPoint(format!(
                "cos gamma {cos_gamma} outside [-1, 1]"
            )));
        }
        Self::checked(cos_gamma.acos(), cos_gamma, 1.0 - cos_gamma)
    }

    /// Evaluation point at `gamma = ratio * gamma_star`.
    pub fn from_ratio(ratio: f64, params: &ShellParams) -> Result<Self> {
        Self::from_gamma(ratio * params.gamma_star())
    }

    fn checked(gamma: f64, cos_gamma: f64, one_minus_cos: f64) -> Result<Self> {
        if one_minus_cos < COINCIDENT_TOL {
            return Err(Error::DegenerateSeparation { cos_gamma });
        }
        Ok(Self {
            gamma,
            cos_gamma,
            one_minus_cos,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn cos_gamma(&self) -> f64 {
        self.cos_gamma
    }

    /// `1 - cos(gamma)` computed without cancellation.
    pub fn one_minus_cos(&self) -> f64 {
        self.one_minus_cos
    }
}

/// Central angle between two points on the shell.
///
/// `cos_gamma` comes from the spherical law of cosines; `gamma` and
/// `1 - cos_gamma` use the haversine form, which keeps full relative accuracy
/// for nearby points. Both are symmetric in `a` and `b` bit for bit.
pub fn central_angle(a: &SphericalPoint, b: &SphericalPoint) -> Result<EvalPoint> {
    let dphi = a.phi - b.phi;
    let cos_gamma = (a.theta.cos() * b.theta.cos()
        + a.theta.sin() * b.theta.sin() * dphi.cos())
    .clamp(-1.0, 1.0);

    let s_theta = (0.5 * (a.theta - b.theta)).sin();
    let s_phi = (0.5 * dphi).sin();
    let hav = (s_theta * s_theta + a.theta.sin() * b.theta.sin() * s_phi * s_phi).min(1.0);
    let one_minus_cos = 2.0 * hav;
    if one_minus_cos < COINCIDENT_TOL {
        return Err(Error::DegenerateSeparation { cos_gamma });
    }
    let gamma = 2.0 * hav.sqrt().asin();
    Ok(EvalPoint {
        gamma,
        cos_gamma,
        one_minus_cos,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn antipodal_points_on_equator() {
        let a = SphericalPoint::new(PI / 2.0, 0.0).unwrap();
        let b = SphericalPoint::new(PI / 2.0, PI).unwrap();
        let p = central_angle(&a, &b).unwrap();
        assert!((p.gamma() - PI).abs() < 1e-15);
        assert_eq!(p.cos_gamma(), -1.0);
    }

    #[test]
    fn pole_to_equator() {
        let a = SphericalPoint::new(0.0, 0.0).unwrap();
        let b = SphericalPoint::new(PI / 2.0, 1.3).unwrap();
        let p = central_angle(&a, &b).unwrap();
        assert!((p.gamma() - PI / 2.0).abs() < 1e-15);
        assert!(p.cos_gamma().abs() < 1e-16);
    }

    #[test]
    fn law_of_cosines_example() {
        let a = SphericalPoint::new(1.0, 0.2).unwrap();
        let b = SphericalPoint::new(0.7, 1.1).unwrap();
        let p = central_angle(&a, &b).unwrap();
        // cos1 cos0.7 + sin1 sin0.7 cos0.9, evaluated at 50 digits
        assert!((p.cos_gamma() - 0.7502148507670741).abs() < 2e-16);
        assert!((p.gamma().cos() - p.cos_gamma()).abs() < 4e-16);
    }

    #[test]
    fn coincident_points_are_rejected() {
        let a = SphericalPoint::new(0.4, 2.0).unwrap();
        assert!(matches!(
            central_angle(&a, &a),
            Err(Error::DegenerateSeparation { .. })
        ));
        assert!(matches!(
            EvalPoint::from_cos(1.0),
            Err(Error::DegenerateSeparation { .. })
        ));
        assert!(EvalPoint::from_gamma(0.0).is_err());
        assert!(EvalPoint::from_gamma(1e-9).is_err());
        assert!(EvalPoint::from_gamma(3.2).is_err());
    }

    #[test]
    fn earth_params_match_table_caption() {
        let p = ShellParams::new(6371.0, 1000.0).unwrap();
        assert!((p.gamma_star() - 0.15696123).abs() < 1e-8);
        assert!((p.beta() - 6.351349541632865).abs() < 1e-14);
        assert!(((p.beta() * p.beta() + 0.25) - p.w()).abs() <= 1e-14 * p.w());
    }

    #[test]
    fn equal_radii() {
        let p = ShellParams::new(1000.0, 1000.0).unwrap();
        assert_eq!(p.gamma_star(), 1.0);
        assert_eq!(p.w(), 1.0);
        assert!((p.beta() - 0.75f64.sqrt()).abs() < 1e-16);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(matches!(
            ShellParams::new(-1.0, 100.0),
            Err(Error::InvalidParams(_))
        ));
        assert!(matches!(
            ShellParams::new(100.0, 0.0),
            Err(Error::InvalidParams(_))
        ));
        assert!(matches!(
            ShellParams::new(100.0, 200.0),
            Err(Error::BetaImaginary { .. })
        ));
        assert!(SphericalPoint::new(3.5, 0.0).is_err());
        assert!(SphericalPoint::new(1.0, -0.1).is_err());
    }

    fn point() -> impl Strategy<Value = SphericalPoint> {
        (0.0..=PI, 0.0..=2.0 * PI).prop_map(|(t, p)| SphericalPoint::new(t, p).unwrap())
    }

    proptest! {
        #[test]
        fn central_angle_is_symmetric(a in point(), b in point()) {
            match (central_angle(&a, &b), central_angle(&b, &a)) {
                (Ok(x), Ok(y)) => prop_assert_eq!(x, y),
                (Err(_), Err(_)) => {}
                _ => prop_assert!(false, "asymmetric error"),
            }
        }

        #[test]
        fn antipode_has_cos_minus_one(a in point()) {
            let p = central_angle(&a, &a.antipode()).unwrap();
            prop_assert!((p.cos_gamma() + 1.0).abs() < 1e-14);
        }

        #[test]
        fn gamma_star_is_scale_free(r in 10.0f64..1e5, ratio in 0.6f64..500.0, k in 1e-3f64..1e3) {
            let a = ShellParams::new(r, r / ratio).unwrap();
            let b = ShellParams::new(k * r, k * r / ratio).unwrap();
            prop_assert!((a.gamma_star() - b.gamma_star()).abs() <= 1e-15 * a.gamma_star());
            prop_assert!((a.w() - b.w()).abs() <= 1e-15 * a.w());
        }
    }
}
