//! Spherical distributions: parameters, validation and pointwise densities.
//!
//! | kind          | density on `S^{n-1}`                                   |
//! |---------------|--------------------------------------------------------|
//! | `vmf`         | `c e^{k θ·u}`, `c = k^{n/2-1} / ((2π)^{n/2} I_{n/2-1}(k))` |
//! | `bimodal_vmf` | `c/2 (e^{k θ·u} + e^{-k θ·u})`                         |
//! | `peanut`      | `n θᵀAθ / (|S^{n-1}| tr A)`                             |
//! | `odf`         | `1 / (4π |A|^{1/2} (θᵀA⁻¹θ)^{3/2})`, n = 3 only        |
//! | `bingham`     | `e^{-θᵀA⁻¹θ / 4Δ} / sqrt(|A| (4πΔ)³)`; unnormalized for n ≠ 3 |
//!
//! The exponential families are evaluated in log space so that `k` and
//! `1/(4Δ)` up to `1e4` neither overflow nor lose the normalizing constant.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::specfun::{self, BesselOrder};

const UNIT_TOL: f64 = 1e-12;

/// A direction on `S^{n-1}`, `n >= 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitVector(DVector<f64>);

impl UnitVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::Domain(format!("unit vector needs n >= 2, got {}", coords.len())));
        }
        let v = DVector::from_vec(coords);
        let norm = v.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::Domain(format!("vector norm is {norm}, expected 1")));
        }
        Ok(Self(v))
    }

    /// Scales a nonzero vector to unit length.
    pub fn normalize(coords: Vec<f64>) -> Result<Self> {
        let v = DVector::from_vec(coords);
        let norm = v.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::Domain("cannot normalize a zero or non-finite vector".into()));
        }
        Self::new((v / norm).data.into())
    }

    /// Renormalizes a vector that is already unit length up to rounding.
    pub(crate) fn renormalized(coords: Vec<f64>) -> Self {
        let v = DVector::from_vec(coords);
        let norm = v.norm();
        Self(v / norm)
    }

    pub fn basis(n: usize, i: usize) -> Self {
        assert!(n >= 2 && i < n);
        let mut v = DVector::zeros(n);
        v[i] = 1.0;
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn neg(&self) -> Self {
        Self(-&self.0)
    }
}

/// Square anisotropy matrix, `n >= 2`. Definiteness is checked by
/// [`SphericalDistribution::validate`], not at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct AnisotropyMatrix(DMatrix<f64>);

impl AnisotropyMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::Shape { expected: entries.nrows(), found: entries.ncols() });
        }
        if entries.nrows() < 2 {
            return Err(Error::Domain("anisotropy matrix needs n >= 2".into()));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("anisotropy matrix has non-finite entries".into()));
        }
        Ok(Self(entries))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::Shape { expected: n, found: bad.len() });
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(values)))
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(DMatrix::identity(n, n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.0.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    /// Smallest eigenvalue of `(A + Aᵀ)/2`.
    pub fn min_symmetric_eigenvalue(&self) -> Result<f64> {
        let eig = linalg::symmetric_eigen(&linalg::symmetric_part(&self.0))?;
        Ok(eig.values[eig.values.len() - 1])
    }

    pub fn is_symmetric(&self) -> bool {
        linalg::asymmetry(&self.0) <= 1e-12
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistKind {
    Vmf,
    BimodalVmf,
    Peanut,
    Odf,
    Bingham,
}

impl DistKind {
    pub fn name(self) -> &'static str {
        match self {
            DistKind::Vmf => "vmf",
            DistKind::BimodalVmf => "bimodal_vmf",
            DistKind::Peanut => "peanut",
            DistKind::Odf => "odf",
            DistKind::Bingham => "bingham",
        }
    }

    /// Whether `q(θ) = q(-θ)` for every parameter choice.
    pub fn is_antipodal(self) -> bool {
        !matches!(self, DistKind::Vmf)
    }
}

impl fmt::Display for DistKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SphericalDistribution {
    Vmf { u: UnitVector, k: f64 },
    BimodalVmf { u: UnitVector, k: f64 },
    Peanut { a: AnisotropyMatrix },
    Odf { a: AnisotropyMatrix },
    Bingham { a: AnisotropyMatrix, delta: f64 },
}

/// A failed parameter invariant.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    NegativeConcentration { k: f64 },
    NonFiniteConcentration,
    NotPositiveDefinite { min_eigenvalue: f64 },
    NonPositiveTrace { trace: f64 },
    NotSymmetric,
    OdfDimension { n: usize },
    NonPositiveDelta { delta: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NegativeConcentration { .. } => f.write_str("k must be ≥ 0"),
            Violation::NonFiniteConcentration => f.write_str("k must be finite"),
            Violation::NotPositiveDefinite { .. } => f.write_str("A not positive definite"),
            Violation::NonPositiveTrace { .. } => f.write_str("trace of A must be > 0"),
            Violation::NotSymmetric => f.write_str("A must be symmetric"),
            Violation::OdfDimension { n } => write!(f, "ODF requires n = 3, got n = {n}"),
            Violation::NonPositiveDelta { .. } => f.write_str("delta must be > 0"),
        }
    }
}

/// `|S^{n-1}| = 2π^{n/2} / Γ(n/2)`.
pub fn sphere_surface_area(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!("sphere dimension n must be >= 2, got {n}")));
    }
    let half = n as f64 / 2.0;
    Ok(2.0 * PI.powf(half) / specfun::gamma(half)?)
}

impl SphericalDistribution {
    pub fn kind(&self) -> DistKind {
        match self {
            Self::Vmf { .. } => DistKind::Vmf,
            Self::BimodalVmf { .. } => DistKind::BimodalVmf,
            Self::Peanut { .. } => DistKind::Peanut,
            Self::Odf { .. } => DistKind::Odf,
            Self::Bingham { .. } => DistKind::Bingham,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Vmf { u, .. } | Self::BimodalVmf { u, .. } => u.dim(),
            Self::Peanut { a } | Self::Odf { a } | Self::Bingham { a, .. } => a.dim(),
        }
    }

    /// False only for Bingham with `n != 3`, which has no known constant.
    pub fn is_normalized(&self) -> bool {
        !matches!(self, Self::Bingham { a, .. } if a.dim() != 3)
    }

    /// Every violated parameter invariant; empty when the distribution is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        match self {
            Self::Vmf { k, .. } | Self::BimodalVmf { k, .. } => {
                if k.is_nan() || k.is_infinite() {
                    out.push(Violation::NonFiniteConcentration);
                } else if *k < 0.0 {
                    out.push(Violation::NegativeConcentration { k: *k });
                }
            }
            Self::Peanut { a } => check_matrix(a, &mut out),
            Self::Odf { a } => {
                if a.dim() != 3 {
                    out.push(Violation::OdfDimension { n: a.dim() });
                }
                if !a.is_symmetric() {
                    out.push(Violation::NotSymmetric);
                }
                check_matrix(a, &mut out);
            }
            Self::Bingham { a, delta } => {
                if !a.is_symmetric() {
                    out.push(Violation::NotSymmetric);
                }
                check_matrix(a, &mut out);
                if !(delta.is_finite() && *delta > 0.0) {
                    out.push(Violation::NonPositiveDelta { delta: *delta });
                }
            }
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let violations = self.validate();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(violations))
        }
    }

    /// Precomputes normalizing constants for repeated evaluation.
    pub fn prepare(&self) -> Result<Density> {
        self.ensure_valid()?;
        let n = self.dim();
        let form = match self {
            Self::Vmf { u, k } => Form::Vmf { u: u.as_slice().to_vec(), k: *k, log_c_mode: vmf_log_mode(n, *k)? },
            Self::BimodalVmf { u, k } => Form::BimodalVmf {
                u: u.as_slice().to_vec(),
                k: *k,
                log_c_mode: vmf_log_mode(n, *k)? - std::f64::consts::LN_2,
            },
            Self::Peanut { a } => Form::Peanut {
                a: a.matrix().clone(),
                coef: n as f64 / (sphere_surface_area(n)? * a.trace()),
            },
            Self::Odf { a } => {
                let (inverse, det) = inverse_and_det(a)?;
                Form::Odf { inverse, coef: 1.0 / (4.0 * PI * det.sqrt()) }
            }
            Self::Bingham { a, delta } => {
                let (inverse, det) = inverse_and_det(a)?;
                let log_c = if n == 3 { -0.5 * (det * (4.0 * PI * delta).powi(3)).ln() } else { 0.0 };
                Form::Bingham { inverse, log_c, rate: 1.0 / (4.0 * delta) }
            }
        };
        Ok(Density { n, kind: self.kind(), form })
    }

    pub fn density(&self, theta: &UnitVector) -> Result<f64> {
        if theta.dim() != self.dim() {
            return Err(Error::Shape { expected: self.dim(), found: theta.dim() });
        }
        Ok(self.prepare()?.eval(theta.as_slice()))
    }

    pub fn to_spec(&self) -> DistSpec {
        let n = self.dim();
        let mut spec = DistSpec { kind: self.kind(), n, u: None, k: None, a: None, delta: None };
        match self {
            Self::Vmf { u, k } | Self::BimodalVmf { u, k } => {
                spec.u = Some(u.as_slice().to_vec());
                spec.k = Some(*k);
            }
            Self::Peanut { a } | Self::Odf { a } => spec.a = Some(a.rows()),
            Self::Bingham { a, delta } => {
                spec.a = Some(a.rows());
                spec.delta = Some(*delta);
            }
        }
        spec
    }
}

fn check_matrix(a: &AnisotropyMatrix, out: &mut Vec<Violation>) {
    match a.min_symmetric_eigenvalue() {
        Ok(min) if min > 0.0 => {}
        Ok(min) => out.push(Violation::NotPositiveDefinite { min_eigenvalue: min }),
        Err(_) => out.push(Violation::NotPositiveDefinite { min_eigenvalue: f64::NAN }),
    }
    let tr = a.trace();
    if !(tr > 0.0) {
        out.push(Violation::NonPositiveTrace { trace: tr });
    }
}

fn inverse_and_det(a: &AnisotropyMatrix) -> Result<(DMatrix<f64>, f64)> {
    let m = a.matrix();
    let det = m.determinant();
    let inverse = m
        .clone()
        .try_inverse()
        .filter(|_| det > 0.0)
        .ok_or_else(|| Error::Domain("A is not invertible".into()))?;
    Ok((inverse, det))
}

/// `ln c` for the vMF constant `k^{n/2-1} / ((2π)^{n/2} I_{n/2-1}(k))`; the
/// uniform density at `k = 0`.
pub fn vmf_log_constant(n: usize, k: f64) -> Result<f64> {
    if k == 0.0 {
        return Ok(-sphere_surface_area(n)?.ln());
    }
    let p = n as f64 / 2.0 - 1.0;
    let log_power = if p == 0.0 { 0.0 } else { p * k.ln() };
    Ok(log_power - (n as f64 / 2.0) * (2.0 * PI).ln() - specfun::ln_bessel_i(BesselOrder::new(p)?, k)?)
}

// `ln c + k`, the log-density at the mode. For k >= 1 it comes from the
// exponentially scaled Bessel value so large k loses no digits.
fn vmf_log_mode(n: usize, k: f64) -> Result<f64> {
    if k < 1.0 {
        return Ok(vmf_log_constant(n, k)? + k);
    }
    let p = n as f64 / 2.0 - 1.0;
    let scaled = specfun::bessel_i(BesselOrder::new(p)?, k)?.scaled_value;
    if !(scaled > 0.0 && scaled.is_finite()) {
        return Ok(vmf_log_constant(n, k)? + k);
    }
    Ok(p * k.ln() - (n as f64 / 2.0) * (2.0 * PI).ln() - scaled.ln())
}

#[derive(Clone, Debug)]
enum Form {
    Vmf { u: Vec<f64>, k: f64, log_c_mode: f64 },
    BimodalVmf { u: Vec<f64>, k: f64, log_c_mode: f64 },
    Peanut { a: DMatrix<f64>, coef: f64 },
    Odf { inverse: DMatrix<f64>, coef: f64 },
    Bingham { inverse: DMatrix<f64>, log_c: f64, rate: f64 },
}

/// A validated distribution with its constants precomputed.
#[derive(Clone, Debug)]
pub struct Density {
    n: usize,
    kind: DistKind,
    form: Form,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn quadratic_form(m: &DMatrix<f64>, theta: &[f64]) -> f64 {
    let n = theta.len();
    let mut acc = 0.0;
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            row += m[(i, j)] * theta[j];
        }
        acc += theta[i] * row;
    }
    acc
}

impl Density {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> DistKind {
        self.kind
    }

    /// `q(θ)` without shape checks; `theta` must have length `n`.
    pub fn eval(&self, theta: &[f64]) -> f64 {
        match &self.form {
            Form::Peanut { a, coef } => coef * quadratic_form(a, theta),
            Form::Odf { inverse, coef } => coef * quadratic_form(inverse, theta).powf(-1.5),
            _ => self.ln_eval(theta).exp(),
        }
    }

    /// `ln q(θ)`.
    pub fn ln_eval(&self, theta: &[f64]) -> f64 {
        match &self.form {
            Form::Vmf { u, k, log_c_mode } => log_c_mode + k * (dot(theta, u) - 1.0),
            Form::BimodalVmf { u, k, log_c_mode } => {
                let t = (k * dot(theta, u)).abs();
                log_c_mode + (t - k) + (-2.0 * t).exp().ln_1p()
            }
            Form::Bingham { inverse, log_c, rate } => log_c - rate * quadratic_form(inverse, theta),
            Form::Peanut { .. } | Form::Odf { .. } => self.eval(theta).ln(),
        }
    }
}

/// JSON parameter schema:
/// `{"kind": "vmf|bimodal_vmf|peanut|odf|bingham", "n": int, "u": [..], "k": real, "A": [[..]], "delta": real}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistSpec {
    pub kind: DistKind,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

impl DistSpec {
    /// Builds the distribution; parameter-range invariants are left to `validate`.
    pub fn to_distribution(&self) -> Result<SphericalDistribution> {
        let kind = self.kind;
        let unexpected = |field: &str| Error::Domain(format!("field {field} is not used by kind {kind}"));
        let missing = |field: &str| Error::Domain(format!("kind {kind} requires field {field}"));
        if self.n < 2 {
            return Err(Error::Domain(format!("n must be >= 2, got {}", self.n)));
        }
        match kind {
            DistKind::Vmf | DistKind::BimodalVmf => {
                if self.a.is_some() {
                    return Err(unexpected("A"));
                }
                if self.delta.is_some() {
                    return Err(unexpected("delta"));
                }
                let coords = self.u.clone().ok_or_else(|| missing("u"))?;
                if coords.len() != self.n {
                    return Err(Error::Shape { expected: self.n, found: coords.len() });
                }
                let u = UnitVector::new(coords)?;
                let k = self.k.ok_or_else(|| missing("k"))?;
                Ok(if kind == DistKind::Vmf {
                    SphericalDistribution::Vmf { u, k }
                } else {
                    SphericalDistribution::BimodalVmf { u, k }
                })
            }
            DistKind::Peanut | DistKind::Odf | DistKind::Bingham => {
                if self.u.is_some() {
                    return Err(unexpected("u"));
                }
                if self.k.is_some() {
                    return Err(unexpected("k"));
                }
                let rows = self.a.as_ref().ok_or_else(|| missing("A"))?;
                if rows.len() != self.n {
                    return Err(Error::Shape { expected: self.n, found: rows.len() });
                }
                let a = AnisotropyMatrix::from_rows(rows)?;
                match kind {
                    DistKind::Peanut | DistKind::Odf if self.delta.is_some() => Err(unexpected("delta")),
                    DistKind::Peanut => Ok(SphericalDistribution::Peanut { a }),
                    DistKind::Odf => Ok(SphericalDistribution::Odf { a }),
                    _ => {
                        let delta = self.delta.ok_or_else(|| missing("delta"))?;
                        Ok(SphericalDistribution::Bingham { a, delta })
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn vmf(u: Vec<f64>, k: f64) -> SphericalDistribution {
        SphericalDistribution::Vmf { u: UnitVector::new(u).unwrap(), k }
    }

    #[test]
    fn surface_areas() {
        assert_relative_eq!(sphere_surface_area(2).unwrap(), 2.0 * PI, max_relative = 1e-15);
        assert_relative_eq!(sphere_surface_area(3).unwrap(), 4.0 * PI, max_relative = 1e-15);
        assert_relative_eq!(sphere_surface_area(4).unwrap(), 2.0 * PI * PI, max_relative = 1e-15);
        assert!(sphere_surface_area(1).is_err());
    }

    #[test]
    fn uniform_circle() {
        let d = vmf(vec![1.0, 0.0], 0.0);
        let theta = UnitVector::new(vec![0.0, 1.0]).unwrap();
        assert_relative_eq!(d.density(&theta).unwrap(), 1.0 / (2.0 * PI), max_relative = 1e-15);
    }

    #[test]
    fn isotropic_peanut_is_uniform() {
        let d = SphericalDistribution::Peanut { a: AnisotropyMatrix::identity(2).unwrap() };
        for angle in [0.0, 0.3, 2.0, 4.5] {
            let theta = UnitVector::normalize(vec![f64::cos(angle), f64::sin(angle)]).unwrap();
            assert_relative_eq!(d.density(&theta).unwrap(), 1.0 / (2.0 * PI), max_relative = 1e-15);
        }
    }

    #[test]
    fn vmf_density_at_mode() {
        // n = 3: c = k / (4π sinh k), so q(u) = k e^k / (4π sinh k)
        let d = vmf(vec![1.0, 0.0, 0.0], 2.0);
        let q = d.density(&UnitVector::basis(3, 0)).unwrap();
        let expected = 2.0 * 2f64.exp() / (4.0 * PI * 2f64.sinh());
        assert_relative_eq!(q, expected, max_relative = 1e-14);
        assert_relative_eq!(q, 0.324_248_708_437_673_56, max_relative = 1e-14);
    }

    #[test]
    fn large_concentration_stays_finite() {
        let d = vmf(vec![0.0, 0.0, 1.0], 1e4);
        let q = d.density(&UnitVector::basis(3, 2)).unwrap();
        assert_relative_eq!(q, 1e4 / (2.0 * PI), max_relative = 1e-12);
    }

    #[test]
    fn validation_messages() {
        let bad_k = vmf(vec![1.0, 0.0], -1.0);
        let msgs: Vec<String> = bad_k.validate().iter().map(ToString::to_string).collect();
        assert_eq!(msgs, vec!["k must be ≥ 0"]);

        let bad_a = SphericalDistribution::Peanut { a: AnisotropyMatrix::diagonal(&[2.0, -1.0]).unwrap() };
        let msgs: Vec<String> = bad_a.validate().iter().map(ToString::to_string).collect();
        assert_eq!(msgs, vec!["A not positive definite"]);

        let ok = SphericalDistribution::BimodalVmf { u: UnitVector::basis(3, 1), k: 4.0 };
        assert!(ok.validate().is_empty());
    }

    #[test]
    fn odf_needs_three_dimensions() {
        let d = SphericalDistribution::Odf { a: AnisotropyMatrix::identity(2).unwrap() };
        assert_eq!(d.validate(), vec![Violation::OdfDimension { n: 2 }]);
        assert!(matches!(d.prepare(), Err(Error::Validation(_))));
    }

    #[test]
    fn bingham_checks() {
        let d = SphericalDistribution::Bingham { a: AnisotropyMatrix::identity(3).unwrap(), delta: 0.0 };
        assert_eq!(d.validate().len(), 1);
        let d4 = SphericalDistribution::Bingham { a: AnisotropyMatrix::identity(4).unwrap(), delta: 1.0 };
        assert!(!d4.is_normalized());
        assert!(d4.validate().is_empty());
    }

    #[test]
    fn dimension_mismatch() {
        let d = vmf(vec![1.0, 0.0], 1.0);
        assert!(matches!(d.density(&UnitVector::basis(3, 0)), Err(Error::Shape { expected: 2, found: 3 })));
    }

    #[test]
    fn unit_vector_checks() {
        assert!(UnitVector::new(vec![1.0, 1.0]).is_err());
        assert!(UnitVector::new(vec![1.0]).is_err());
        assert!(UnitVector::normalize(vec![0.0, 0.0]).is_err());
        let u = UnitVector::normalize(vec![3.0, 4.0]).unwrap();
        assert_relative_eq!(u.as_slice()[0], 0.6, max_relative = 1e-15);
    }

    #[test]
    fn json_schema() {
        let spec: DistSpec =
            serde_json::from_str(r#"{"kind": "peanut", "n": 2, "A": [[3, 0], [0, 1]]}"#).unwrap();
        let d = spec.to_distribution().unwrap();
        assert_eq!(d.kind(), DistKind::Peanut);
        assert_eq!(d.to_spec(), spec);

        let unknown = serde_json::from_str::<DistSpec>(r#"{"kind": "vmf", "n": 2, "u": [1, 0], "k": 1, "x": 2}"#);
        assert!(unknown.is_err());

        let wrong_field: DistSpec =
            serde_json::from_str(r#"{"kind": "vmf", "n": 2, "u": [1, 0], "k": 1, "A": [[1, 0], [0, 1]]}"#).unwrap();
        assert!(wrong_field.to_distribution().is_err());

        let wrong_n: DistSpec = serde_json::from_str(r#"{"kind": "vmf", "n": 3, "u": [1, 0], "k": 1}"#).unwrap();
        assert!(matches!(wrong_n.to_distribution(), Err(Error::Shape { .. })));
    }
}
