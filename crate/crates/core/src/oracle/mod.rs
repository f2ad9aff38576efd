//! Numerical reference engine: moments computed by integrating densities
//! directly, independent of the Bessel-ratio closed forms.
//!
//! * n = 2: periodic trapezoid rule on `[0, 2π)`.
//! * n = 3: Gauss–Legendre in the polar cosine × trapezoid in azimuth.
//! * any n: Monte Carlo with directions drawn uniformly (normalized standard
//!   normals) and per-entry standard errors.
//!
//! Monte Carlo work is split into fixed-size blocks, each driven by its own
//! ChaCha8 stream, so results depend only on `(seed, samples)` and not on
//! the number of threads.

mod montecarlo;
mod quadrature;
mod sampling;

use serde::Serialize;

use crate::error::{Error, Result};

pub use montecarlo::{mc_integrate, mc_moments, McEstimate, GENERATOR};
pub use quadrature::{gauss_legendre, quad_integrate, quad_moments, quad_third_moment, CONVERGENCE_TOL};
pub use sampling::{empirical_moments, sample_peanut, sample_vmf, EmpiricalMoments, SampleSet};

pub const DEFAULT_RESOLUTION: usize = 256;
pub const MIN_MC_SAMPLES: usize = 10_000;
pub const ACCEPTANCE_MC_SAMPLES: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureScheme {
    CircleTrapezoid,
    SphereProduct,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureSpec {
    pub n: usize,
    pub scheme: QuadratureScheme,
    /// Points per dimension.
    pub resolution: usize,
    /// Re-run at twice the resolution and record the change.
    pub check_convergence: bool,
}

impl QuadratureSpec {
    pub fn new(n: usize, resolution: usize) -> Result<Self> {
        let scheme = match n {
            2 => QuadratureScheme::CircleTrapezoid,
            3 => QuadratureScheme::SphereProduct,
            _ => return Err(Error::Unsupported(format!("quadrature is available for n = 2, 3 only (n = {n})"))),
        };
        if resolution < 16 || !resolution.is_power_of_two() {
            return Err(Error::Domain(format!("resolution must be a power of two >= 16, got {resolution}")));
        }
        Ok(Self { n, scheme, resolution, check_convergence: true })
    }

    pub fn default_for(n: usize) -> Result<Self> {
        Self::new(n, DEFAULT_RESOLUTION)
    }

    pub fn without_convergence_check(mut self) -> Self {
        self.check_convergence = false;
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct McSpec {
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
}

impl McSpec {
    pub fn new(n: usize, samples: usize, seed: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("n must be >= 2, got {n}")));
        }
        if samples < MIN_MC_SAMPLES {
            return Err(Error::Domain(format!("Monte Carlo needs at least {MIN_MC_SAMPLES} samples, got {samples}")));
        }
        Ok(Self { n, samples, seed })
    }
}
