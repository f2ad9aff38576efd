//! Closed-form first and second moments.
//!
//! For the von Mises-Fisher distribution with `ρ = I_{n/2}(k) / I_{n/2-1}(k)`:
//!
//! ```text
//! E[q]      = ρ u
//! E[θθᵀ]    = (ρ/k) 𝕀 + (I_{n/2+1}/I_{n/2-1}) uuᵀ
//! Var[q]    = (ρ/k) 𝕀 + (I_{n/2+1}/I_{n/2-1} - ρ²) uuᵀ
//! ```
//!
//! The bimodal mixture shares the second moment and has zero mean. For the
//! peanut distribution `Var[q] = 𝕀/(n+2) + (A+Aᵀ)/((n+2) tr A)`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::distributions::{AnisotropyMatrix, DistKind, SphericalDistribution, UnitVector};
use crate::error::{Error, Result};
use crate::linalg;
use crate::oracle::{self, McSpec, QuadratureSpec};
use crate::specfun;

/// Below this concentration the analytic `k -> 0` limits are returned.
pub const SMALL_CONCENTRATION: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum MomentSource {
    ClosedForm,
    Quadrature {
        scheme: oracle::QuadratureScheme,
        resolution: usize,
        /// Largest change in any moment entry when the resolution is doubled.
        doubling_delta: f64,
        converged: bool,
    },
    MonteCarlo { samples: usize, seed: u64, generator: &'static str },
}

/// Per-entry standard errors of a Monte Carlo estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentStdErr {
    pub mass: f64,
    pub mean: DVector<f64>,
    pub second_moment: DMatrix<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentReport {
    /// `∫ q dθ`; exactly 1 for closed forms.
    pub mass: f64,
    pub mean: DVector<f64>,
    pub second_moment: DMatrix<f64>,
    pub covariance: DMatrix<f64>,
    pub source: MomentSource,
    pub stderr: Option<MomentStdErr>,
}

impl MomentReport {
    pub fn new(mass: f64, mean: DVector<f64>, second_moment: DMatrix<f64>, source: MomentSource) -> Self {
        let covariance = &second_moment - &mean * mean.transpose();
        Self { mass, mean, second_moment, covariance, source, stderr: None }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Largest absolute difference in mean or covariance entries.
    pub fn max_abs_deviation(&self, other: &MomentReport) -> f64 {
        let mean = (&self.mean - &other.mean).amax();
        let cov = (&self.covariance - &other.covariance).amax();
        mean.max(cov)
    }
}

/// Bessel ratios shared by the vMF moment formulas and diffusion tensors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VmfCoefficients {
    /// `I_{n/2}(k) / I_{n/2-1}(k)`, the mean resultant length.
    pub mean_length: f64,
    /// `I_{n/2}(k) / (k I_{n/2-1}(k))`, the isotropic part of the second moment.
    pub isotropic: f64,
    /// `I_{n/2+1}(k) / I_{n/2-1}(k)`, the `uuᵀ` part of the second moment.
    pub aligned: f64,
}

pub fn vmf_coefficients(n: usize, k: f64) -> Result<VmfCoefficients> {
    if n < 2 {
        return Err(Error::Domain(format!("n must be >= 2, got {n}")));
    }
    if !k.is_finite() || k < 0.0 {
        return Err(Error::Domain(format!("k must be finite and >= 0, got {k}")));
    }
    if k < SMALL_CONCENTRATION {
        return Ok(VmfCoefficients { mean_length: 0.0, isotropic: 1.0 / n as f64, aligned: 0.0 });
    }
    let half = n as f64 / 2.0;
    let mean_length = specfun::bessel_ratio(half, k)?;
    let upper = specfun::bessel_ratio(half + 1.0, k)?;
    Ok(VmfCoefficients { mean_length, isotropic: mean_length / k, aligned: upper * mean_length })
}

fn outer(u: &UnitVector) -> DMatrix<f64> {
    let v = u.as_vector();
    v * v.transpose()
}

pub fn vmf_mean(k: f64, u: &UnitVector) -> Result<DVector<f64>> {
    let c = vmf_coefficients(u.dim(), k)?;
    Ok(u.as_vector() * c.mean_length)
}

pub fn vmf_second_moment(k: f64, u: &UnitVector) -> Result<DMatrix<f64>> {
    let n = u.dim();
    let c = vmf_coefficients(n, k)?;
    Ok(DMatrix::identity(n, n) * c.isotropic + outer(u) * c.aligned)
}

pub fn vmf_covariance(k: f64, u: &UnitVector) -> Result<DMatrix<f64>> {
    Ok(vmf_moments(k, u)?.covariance)
}

pub fn vmf_moments(k: f64, u: &UnitVector) -> Result<MomentReport> {
    Ok(MomentReport::new(1.0, vmf_mean(k, u)?, vmf_second_moment(k, u)?, MomentSource::ClosedForm))
}

pub fn bimodal_vmf_moments(k: f64, u: &UnitVector) -> Result<MomentReport> {
    let mean = DVector::zeros(u.dim());
    Ok(MomentReport::new(1.0, mean, vmf_second_moment(k, u)?, MomentSource::ClosedForm))
}

/// Accepts any `A` with positive-definite symmetric part.
pub fn peanut_moments(a: &AnisotropyMatrix) -> Result<MomentReport> {
    SphericalDistribution::Peanut { a: a.clone() }.ensure_valid()?;
    let n = a.dim();
    let m = n as f64 + 2.0;
    let second = DMatrix::identity(n, n) / m + linalg::sym_sum(a.matrix()) / (m * a.trace());
    Ok(MomentReport::new(1.0, DVector::zeros(n), second, MomentSource::ClosedForm))
}

/// Closed-form moments where they exist (vMF, bimodal vMF, peanut).
pub fn closed_form_moments(dist: &SphericalDistribution) -> Result<MomentReport> {
    dist.ensure_valid()?;
    match dist {
        SphericalDistribution::Vmf { u, k } => vmf_moments(*k, u),
        SphericalDistribution::BimodalVmf { u, k } => bimodal_vmf_moments(*k, u),
        SphericalDistribution::Peanut { a } => peanut_moments(a),
        other => Err(Error::Unsupported(format!("no closed-form moments for kind {}", other.kind()))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum OddOrder {
    First = 1,
    Third = 3,
}

#[derive(Clone, Debug)]
pub enum OddMomentOracle {
    Quadrature(QuadratureSpec),
    MonteCarlo(McSpec),
}

#[derive(Clone, Debug, Serialize)]
pub struct OddMomentCheck {
    pub order: OddOrder,
    /// Largest `|entry|` of the oracle moment vector or tensor.
    pub max_abs: f64,
    /// Largest `|entry| / SE` (Monte Carlo only).
    pub max_abs_z: Option<f64>,
}

impl OddMomentCheck {
    pub fn within(&self, quad_tol: f64, n_se: f64) -> bool {
        match self.max_abs_z {
            Some(z) => z <= n_se,
            None => self.max_abs <= quad_tol,
        }
    }
}

/// Oracle magnitude of the first or third moment of an antipodally
/// symmetric density, which should vanish.
pub fn odd_moments_zero_check(
    dist: &SphericalDistribution,
    order: OddOrder,
    oracle: &OddMomentOracle,
) -> Result<OddMomentCheck> {
    dist.ensure_valid()?;
    if dist.kind() == DistKind::Vmf {
        match dist {
            SphericalDistribution::Vmf { k, .. } if *k > 0.0 => {
                return Err(Error::Precondition("a vMF distribution with k > 0 has a nonzero first moment".into()))
            }
            _ => {}
        }
    }
    let n = dist.dim();
    let features = match order {
        OddOrder::First => n,
        OddOrder::Third => n * n * n,
    };
    let fill = |theta: &[f64], out: &mut [f64]| match order {
        OddOrder::First => out.copy_from_slice(theta),
        OddOrder::Third => {
            let mut idx = 0;
            for a in theta {
                for b in theta {
                    for c in theta {
                        out[idx] = a * b * c;
                        idx += 1;
                    }
                }
            }
        }
    };
    let density = dist.prepare()?;
    match oracle {
        OddMomentOracle::Quadrature(spec) => {
            let values = oracle::quad_integrate(&density, spec, features, fill)?;
            let max_abs = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            Ok(OddMomentCheck { order, max_abs, max_abs_z: None })
        }
        OddMomentOracle::MonteCarlo(spec) => {
            let est = oracle::mc_integrate(&density, spec, features, fill)?;
            let max_abs = est.mean.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let max_z = est
                .mean
                .iter()
                .zip(&est.stderr)
                .map(|(m, se)| if *se > 0.0 { m.abs() / se } else if *m == 0.0 { 0.0 } else { f64::INFINITY })
                .fold(0.0f64, f64::max);
            Ok(OddMomentCheck { order, max_abs, max_abs_z: Some(max_z) })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn uniform_limit() {
        let u = UnitVector::basis(3, 0);
        let m = vmf_moments(0.0, &u).unwrap();
        assert_eq!(m.mean, DVector::zeros(3));
        assert_eq!(m.covariance, DMatrix::identity(3, 3) / 3.0);
    }

    #[test]
    fn three_dimensional_mean_is_langevin() {
        let u = UnitVector::basis(3, 0);
        let mean = vmf_mean(2.0, &u).unwrap();
        let langevin = 1.0 / 2f64.tanh() - 0.5;
        assert_relative_eq!(mean[0], langevin, max_relative = 1e-14);
        assert_relative_eq!(mean[0], 0.537_314_720_727_548, max_relative = 1e-14);
        assert_eq!(mean[1], 0.0);
    }

    #[test]
    fn bimodal_minus_unimodal_is_mean_outer_product() {
        let u = UnitVector::normalize(vec![1.0, 2.0, -2.0, 0.5]).unwrap();
        let k = 3.7;
        let bi = bimodal_vmf_moments(k, &u).unwrap();
        let uni = vmf_moments(k, &u).unwrap();
        let rho = vmf_coefficients(4, k).unwrap().mean_length;
        let expected = u.as_vector() * u.as_vector().transpose() * (rho * rho);
        assert!((bi.covariance - uni.covariance - expected).amax() < 1e-15);
        assert_eq!(bi.mean, DVector::zeros(4));
    }

    #[test]
    fn peanut_isotropic() {
        for n in 2..=8 {
            let m = peanut_moments(&AnisotropyMatrix::identity(n).unwrap()).unwrap();
            assert!((m.covariance - DMatrix::identity(n, n) / n as f64).amax() < 1e-15);
        }
    }

    #[test]
    fn peanut_planar_example() {
        let m = peanut_moments(&AnisotropyMatrix::diagonal(&[3.0, 1.0]).unwrap()).unwrap();
        assert_relative_eq!(m.covariance[(0, 0)], 0.625, max_relative = 1e-15);
        assert_relative_eq!(m.covariance[(1, 1)], 0.375, max_relative = 1e-15);
        assert_eq!(m.covariance[(0, 1)], 0.0);
    }

    #[test]
    fn peanut_rejects_indefinite() {
        let err = peanut_moments(&AnisotropyMatrix::diagonal(&[1.0, -1.0]).unwrap()).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn continuity_at_small_k() {
        let u = UnitVector::basis(5, 2);
        let at_zero = vmf_moments(0.0, &u).unwrap();
        let near = vmf_moments(1e-6, &u).unwrap();
        assert!(at_zero.max_abs_deviation(&near) < 1e-6);
    }

    #[test]
    fn no_closed_form_for_odf() {
        let d = SphericalDistribution::Odf { a: AnisotropyMatrix::identity(3).unwrap() };
        assert!(matches!(closed_form_moments(&d), Err(Error::Unsupported(_))));
    }

    #[test]
    fn odd_check_rejects_vmf() {
        let d = SphericalDistribution::Vmf { u: UnitVector::basis(3, 0), k: 1.0 };
        let oracle = OddMomentOracle::Quadrature(QuadratureSpec::new(3, 32).unwrap());
        assert!(matches!(odd_moments_zero_check(&d, OddOrder::First, &oracle), Err(Error::Precondition(_))));
    }
}
