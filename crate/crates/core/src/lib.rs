//! Moments, diffusion tensors and fractional anisotropy of spherical
//! distributions on `S^{n-1}`.
//!
//! The closed forms for the von Mises-Fisher family and the peanut
//! distribution live in [`moments`] and [`anisotropy`]. Everything they
//! return can be checked against the numerical engine in [`oracle`], which
//! integrates densities from [`distributions`] directly by quadrature
//! (n = 2, 3) or seeded Monte Carlo (any n).

pub mod anisotropy;
pub mod distributions;
pub mod error;
pub mod linalg;
pub mod moments;
pub mod oracle;
pub mod specfun;
pub mod validation;

pub use anisotropy::{AnisotropyReport, BoundFlags, DiffusionTensor, MotilityParams, Ratio};
pub use distributions::{AnisotropyMatrix, DistKind, DistSpec, SphericalDistribution, UnitVector, Violation};
pub use error::{Error, Result};
pub use moments::{MomentReport, MomentSource};
pub use oracle::{McSpec, QuadratureScheme, QuadratureSpec};

pub use nalgebra::{DMatrix, DVector};
