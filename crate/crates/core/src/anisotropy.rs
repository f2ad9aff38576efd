//! Diffusion tensors `D = (s²/μ) Var[q]` and their anisotropy measures.
//!
//! Two routes produce an [`AnisotropyReport`]:
//!
//! * the generic path builds `D`, eigen-decomposes it and applies the FA and
//!   ratio definitions to the numerical eigenvalues;
//! * the closed-form paths use the known spectra: `(s²/(μ(n+2)))(1 + 2λ̂ᵢ/tr A)`
//!   for the peanut distribution and `(α+β, α, …, α)` for the bimodal vMF.

use nalgebra::DMatrix;
use serde::{Serialize, Serializer};

use crate::distributions::{AnisotropyMatrix, DistKind, SphericalDistribution, UnitVector};
use crate::error::{Error, Result};
use crate::linalg::{self, SymmetricEigen};
use crate::moments;

/// Supremum of FA₂ over all peanut distributions, `2/√10`.
pub const FA2_PEANUT_MAX: f64 = 0.632_455_532_033_675_9;
/// Supremum of FA₃ over all peanut distributions, `2/√11`.
pub const FA3_PEANUT_MAX: f64 = 0.603_022_689_155_527;
/// Largest-to-smallest eigenvalue ratio is at most 3 for every peanut distribution.
pub const RATIO_PEANUT_MAX: f64 = 3.0;
/// Rounding slack allowed when checking the peanut bounds.
pub const BOUND_SLACK: f64 = 1e-12;

const FA_CLAMP_SLACK: f64 = 1e-14;

/// Speed `s` and turning rate `μ` of the velocity-jump process.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MotilityParams {
    pub s: f64,
    pub mu: f64,
}

impl MotilityParams {
    pub fn new(s: f64, mu: f64) -> Result<Self> {
        if !(s.is_finite() && s > 0.0 && mu.is_finite() && mu > 0.0) {
            return Err(Error::Domain(format!("speed and turning rate must be positive and finite (s = {s}, mu = {mu})")));
        }
        Ok(Self { s, mu })
    }

    pub fn unit() -> Self {
        Self { s: 1.0, mu: 1.0 }
    }

    /// `s² / μ`
    pub fn factor(&self) -> f64 {
        self.s * self.s / self.mu
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiffusionTensor {
    pub d: DMatrix<f64>,
    pub params: MotilityParams,
}

impl DiffusionTensor {
    pub fn dim(&self) -> usize {
        self.d.nrows()
    }
}

/// Max/min eigenvalue ratio; `Infinite` once the smallest eigenvalue underflows.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Ratio {
    Finite(f64),
    Infinite,
}

impl Ratio {
    pub fn value(self) -> f64 {
        match self {
            Ratio::Finite(r) => r,
            Ratio::Infinite => f64::INFINITY,
        }
    }
}

impl Serialize for Ratio {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Ratio::Finite(r) => serializer.serialize_f64(*r),
            Ratio::Infinite => serializer.serialize_str("inf"),
        }
    }
}

/// Which of the peanut bounds hold for a report.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundFlags {
    /// The bounds are a property of the peanut family only.
    pub peanut: bool,
    pub fa_within: Option<bool>,
    pub ratio_within: Option<bool>,
}

impl BoundFlags {
    fn none() -> Self {
        Self { peanut: false, fa_within: None, ratio_within: None }
    }

    fn peanut(n: usize, fa: Option<f64>, ratio: Ratio) -> Self {
        let fa_max = match n {
            2 => Some(FA2_PEANUT_MAX),
            3 => Some(FA3_PEANUT_MAX),
            _ => None,
        };
        Self {
            peanut: true,
            fa_within: fa.zip(fa_max).map(|(fa, max)| fa <= max + BOUND_SLACK),
            ratio_within: Some(ratio.value() >= 1.0 - BOUND_SLACK && ratio.value() <= RATIO_PEANUT_MAX + BOUND_SLACK),
        }
    }

    /// False only when a bound applies and is violated.
    pub fn all_hold(&self) -> bool {
        self.fa_within != Some(false) && self.ratio_within != Some(false)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnisotropyReport {
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// FA₂ or FA₃; `None` for n ≥ 4.
    pub fa: Option<f64>,
    pub ratio: Ratio,
    pub bound_flags: BoundFlags,
}

impl AnisotropyReport {
    /// Largest difference in eigenvalues or FA (absolute) and ratio (relative).
    pub fn deviation(&self, other: &AnisotropyReport) -> f64 {
        let eig = self
            .eigenvalues
            .iter()
            .zip(&other.eigenvalues)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let fa = match (self.fa, other.fa) {
            (Some(a), Some(b)) => (a - b).abs(),
            (None, None) => 0.0,
            _ => f64::INFINITY,
        };
        let ratio = match (self.ratio, other.ratio) {
            (Ratio::Finite(a), Ratio::Finite(b)) => (a - b).abs() / b.abs().max(1.0),
            (Ratio::Infinite, Ratio::Infinite) => 0.0,
            _ => f64::INFINITY,
        };
        eig.max(fa).max(ratio)
    }
}

/// `D = (s²/μ) Var[q]` for kinds with closed-form covariance.
pub fn diffusion_tensor(dist: &SphericalDistribution, params: MotilityParams) -> Result<DiffusionTensor> {
    if matches!(dist.kind(), DistKind::Odf | DistKind::Bingham) {
        return Err(Error::Unsupported(format!("no closed-form diffusion tensor for kind {}", dist.kind())));
    }
    let cov = moments::closed_form_moments(dist)?.covariance;
    Ok(DiffusionTensor { d: cov * params.factor(), params })
}

/// Eigenvalues descending, eigenvectors as columns with a fixed sign convention.
pub fn symmetric_eigen(m: &DMatrix<f64>) -> Result<SymmetricEigen> {
    linalg::symmetric_eigen(m)
}

/// FA₂ (two eigenvalues) or FA₃ (three).
pub fn fractional_anisotropy(eigenvalues: &[f64]) -> Result<f64> {
    let n = eigenvalues.len();
    if n != 2 && n != 3 {
        return Err(Error::Unsupported(format!("fractional anisotropy is defined for n = 2, 3 only (n = {n})")));
    }
    let max = eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if eigenvalues.iter().any(|v| !v.is_finite() || *v < -1e-12 * max) {
        return Err(Error::Domain(format!("eigenvalues must be finite and nonnegative: {eigenvalues:?}")));
    }
    let sum_sq: f64 = eigenvalues.iter().map(|v| v * v).sum();
    if sum_sq == 0.0 {
        return Err(Error::DegenerateTensor);
    }
    let mean = eigenvalues.iter().sum::<f64>() / n as f64;
    let spread: f64 = eigenvalues.iter().map(|v| (v - mean) * (v - mean)).sum();
    let fa = if n == 2 { (2.0 * spread / sum_sq).sqrt() } else { (3.0 * spread / (2.0 * sum_sq)).sqrt() };
    Ok(clamp_fa(fa))
}

fn clamp_fa(fa: f64) -> f64 {
    if fa > 1.0 && fa <= 1.0 + FA_CLAMP_SLACK {
        1.0
    } else {
        fa
    }
}

/// Largest over smallest eigenvalue.
pub fn anisotropy_ratio(eigenvalues: &[f64]) -> Result<f64> {
    let max = eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min > 0.0) {
        return Err(Error::UnboundedRatio { min, max });
    }
    Ok(max / min)
}

fn ratio_or_infinite(eigenvalues: &[f64]) -> Result<Ratio> {
    match anisotropy_ratio(eigenvalues) {
        Ok(r) => Ok(Ratio::Finite(r)),
        Err(Error::UnboundedRatio { min, max }) if min >= 0.0 && max > 0.0 => Ok(Ratio::Infinite),
        Err(e) => Err(e),
    }
}

/// Eigen-decomposes `D` and applies the FA and ratio definitions.
pub fn tensor_report(tensor: &DiffusionTensor, peanut: bool) -> Result<AnisotropyReport> {
    let eig = symmetric_eigen(&tensor.d)?;
    let eigenvalues: Vec<f64> = eig.values.iter().copied().collect();
    let n = eigenvalues.len();
    let fa = if n <= 3 { Some(fractional_anisotropy(&eigenvalues)?) } else { None };
    let ratio = ratio_or_infinite(&eigenvalues)?;
    let bound_flags = if peanut { BoundFlags::peanut(n, fa, ratio) } else { BoundFlags::none() };
    Ok(AnisotropyReport { eigenvalues, fa, ratio, bound_flags })
}

/// Generic path: tensor → eigensolve → FA/ratio. Asymmetric peanut matrices
/// enter only through `A + Aᵀ`.
pub fn generic_report(dist: &SphericalDistribution, params: MotilityParams) -> Result<AnisotropyReport> {
    let tensor = diffusion_tensor(dist, params)?;
    tensor_report(&tensor, dist.kind() == DistKind::Peanut)
}

/// Closed-form peanut spectrum, FA and ratio. `A` must be symmetric.
pub fn peanut_closed_form_report(a: &AnisotropyMatrix, params: MotilityParams) -> Result<AnisotropyReport> {
    SphericalDistribution::Peanut { a: a.clone() }.ensure_valid()?;
    if !a.is_symmetric() {
        return Err(Error::Validation(vec![crate::distributions::Violation::NotSymmetric]));
    }
    let n = a.dim();
    let hat: Vec<f64> = symmetric_eigen(a.matrix())?.values.iter().copied().collect();
    let tr: f64 = a.trace();
    let scale = params.factor() / (n as f64 + 2.0);
    let eigenvalues: Vec<f64> = hat.iter().map(|l| scale * (1.0 + 2.0 * l / tr)).collect();

    let shifted: Vec<f64> = hat.iter().map(|l| tr + 2.0 * l).collect();
    let fa = match n {
        2 => {
            let denom = shifted[0] * shifted[0] + shifted[1] * shifted[1];
            Some(2.0 * (hat[0] - hat[1]).abs() / denom.sqrt())
        }
        3 => {
            let dev = |i: usize, j: usize, k: usize| 2.0 * hat[i] - hat[j] - hat[k];
            let num = dev(0, 1, 2).powi(2) + dev(1, 0, 2).powi(2) + dev(2, 0, 1).powi(2);
            let denom: f64 = shifted.iter().map(|s| s * s).sum();
            Some((2.0 * num / (3.0 * denom)).sqrt())
        }
        _ => None,
    };
    let fa = fa.map(clamp_fa);
    let ratio = Ratio::Finite(shifted[0] / shifted[n - 1]);
    Ok(AnisotropyReport { eigenvalues, fa, ratio, bound_flags: BoundFlags::peanut(n, fa, ratio) })
}

/// `α(k) = (s²/μ) I_{n/2}/(k I_{n/2-1})` and `β(k) = (s²/μ) I_{n/2+1}/I_{n/2-1}`.
pub fn bimodal_vmf_alpha_beta(n: usize, k: f64, params: MotilityParams) -> Result<(f64, f64)> {
    let c = moments::vmf_coefficients(n, k)?;
    Ok((params.factor() * c.isotropic, params.factor() * c.aligned))
}

/// Closed-form report for the bimodal vMF tensor `α𝕀 + βuuᵀ`.
pub fn bimodal_vmf_closed_form_report(k: f64, u: &UnitVector, params: MotilityParams) -> Result<AnisotropyReport> {
    let n = u.dim();
    let (alpha, beta) = bimodal_vmf_alpha_beta(n, k, params)?;
    let mut eigenvalues = vec![alpha; n];
    eigenvalues[0] = alpha + beta;
    let lead = alpha + beta;
    let fa = match n {
        2 => Some(beta.abs() / (lead * lead + alpha * alpha).sqrt()),
        3 => Some(beta.abs() / (lead * lead + 2.0 * alpha * alpha).sqrt()),
        _ => None,
    };
    let ratio = if alpha > 0.0 { Ratio::Finite(1.0 + beta / alpha) } else { Ratio::Infinite };
    Ok(AnisotropyReport { eigenvalues, fa: fa.map(clamp_fa), ratio, bound_flags: BoundFlags::none() })
}
