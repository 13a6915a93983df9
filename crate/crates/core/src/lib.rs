//! Green's function of the screened Poisson equation
//!
//! ```text
//! ∇²ψ - ψ / L_d² = f
//! ```
//!
//! on a spherical shell of radius `R`, evaluated by a split Legendre series
//! (in double or double-double precision), the direct series, adaptive
//! quadrature of an integral representation, and closed forms at the equator
//! and antipode. The [`spectral`] module solves the PDE itself, by
//! spherical-harmonic inversion and by convolution with the Green's function.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fieldio;
pub mod geometry;
pub mod highprec;
pub mod integral;
pub mod legendre;
pub mod series;
pub mod spectral;

pub use error::{Error, Result};
pub use geometry::{central_angle, EvalPoint, ShellParams, SphericalPoint, DEFAULT_RADIUS_KM};
pub use highprec::DDReal;
pub use series::{GreenResult, Method, Precision, TruncationPolicy};
