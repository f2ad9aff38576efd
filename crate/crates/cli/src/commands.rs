//! `moments`, `anisotropy` and `validate`.

use serde::Serialize;
use serde_json::value::RawValue;
use sphermoments_core::anisotropy::{self, FA2_PEANUT_MAX, FA3_PEANUT_MAX, RATIO_PEANUT_MAX};
use sphermoments_core::moments::{self, MomentStdErr};
use sphermoments_core::oracle::{self, McSpec, QuadratureSpec};
use sphermoments_core::validation::{self, Level, Summary};
use sphermoments_core::{
    AnisotropyReport, BoundFlags, DMatrix, DistSpec, MomentReport, MomentSource, MotilityParams, Ratio,
    SphericalDistribution,
};

use crate::error::{exit, CliError, CliResult};
use crate::json::{self, BOUND_DIGITS};

/// Text printed on stdout plus the process exit code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

impl Outcome {
    fn json<T: Serialize>(value: &T, code: i32) -> CliResult<Self> {
        let stdout = json::to_string(value).map_err(|e| CliError::Io(e.to_string()))?;
        Ok(Outcome { stdout, code })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleChoice {
    None,
    Quad,
    Mc,
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

#[derive(Serialize)]
struct StdErrJson {
    mass: f64,
    mean: Vec<f64>,
    second_moment: Vec<Vec<f64>>,
}

impl From<&MomentStdErr> for StdErrJson {
    fn from(se: &MomentStdErr) -> Self {
        Self { mass: se.mass, mean: se.mean.iter().copied().collect(), second_moment: rows(&se.second_moment) }
    }
}

#[derive(Serialize)]
pub struct MomentJson {
    mass: f64,
    mean: Vec<f64>,
    second_moment: Vec<Vec<f64>>,
    covariance: Vec<Vec<f64>>,
    provenance: MomentSource,
    #[serde(skip_serializing_if = "Option::is_none")]
    stderr: Option<StdErrJson>,
}

impl From<&MomentReport> for MomentJson {
    fn from(r: &MomentReport) -> Self {
        Self {
            mass: r.mass,
            mean: r.mean.iter().copied().collect(),
            second_moment: rows(&r.second_moment),
            covariance: rows(&r.covariance),
            provenance: r.source.clone(),
            stderr: r.stderr.as_ref().map(StdErrJson::from),
        }
    }
}

#[derive(Serialize)]
struct MomentsOutput {
    schema: &'static str,
    distribution: DistSpec,
    closed_form: Option<MomentJson>,
    oracle: Option<MomentJson>,
    max_abs_dev: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct MomentsArgs {
    pub oracle: OracleChoice,
    pub seed: u64,
    pub samples: usize,
    pub resolution: usize,
}

pub fn oracle_report(dist: &SphericalDistribution, args: &MomentsArgs) -> CliResult<Option<MomentReport>> {
    let n = dist.dim();
    Ok(match args.oracle {
        OracleChoice::None => None,
        OracleChoice::Quad => {
            if n > 3 {
                return Err(CliError::input(format!("quadrature oracle supports n = 2 or 3, got n = {n}; use --oracle mc")));
            }
            Some(oracle::quad_moments(dist, &QuadratureSpec::new(n, args.resolution)?)?)
        }
        OracleChoice::Mc => Some(oracle::mc_moments(dist, &McSpec::new(n, args.samples, args.seed)?)?),
    })
}

pub fn cmd_moments(dist: &SphericalDistribution, args: &MomentsArgs) -> CliResult<Outcome> {
    let closed = match moments::closed_form_moments(dist) {
        Ok(r) => Some(r),
        Err(sphermoments_core::Error::Unsupported(_)) if args.oracle != OracleChoice::None => None,
        Err(sphermoments_core::Error::Unsupported(msg)) => {
            return Err(CliError::input(format!("{msg}; pass --oracle quad or --oracle mc")));
        }
        Err(e) => return Err(e.into()),
    };
    let oracle = oracle_report(dist, args)?;
    let max_abs_dev = closed.as_ref().zip(oracle.as_ref()).map(|(c, o)| c.max_abs_deviation(o));
    let out = MomentsOutput {
        schema: "1",
        distribution: dist.to_spec(),
        closed_form: closed.as_ref().map(MomentJson::from),
        oracle: oracle.as_ref().map(MomentJson::from),
        max_abs_dev,
    };
    Outcome::json(&out, exit::OK)
}

/// The peanut bound constants, emitted to 12 significant digits.
#[derive(Serialize)]
pub struct Bounds {
    fa2_max: Box<RawValue>,
    fa3_max: Box<RawValue>,
    r_max: Box<RawValue>,
}

impl Bounds {
    pub fn peanut() -> Self {
        Self {
            fa2_max: json::raw_number(FA2_PEANUT_MAX, BOUND_DIGITS),
            fa3_max: json::raw_number(FA3_PEANUT_MAX, BOUND_DIGITS),
            r_max: json::raw_number(RATIO_PEANUT_MAX, BOUND_DIGITS),
        }
    }
}

#[derive(Serialize)]
struct AnisotropyOutput {
    schema: &'static str,
    distribution: DistSpec,
    s: f64,
    mu: f64,
    method: &'static str,
    eigenvalues: Vec<f64>,
    fa: Option<f64>,
    ratio: Ratio,
    bounds: Bounds,
    bound_flags: BoundFlags,
}

/// Closed-form report where one exists (symmetric peanut, bimodal vMF),
/// the generic tensor path otherwise.
pub fn anisotropy_report(
    dist: &SphericalDistribution,
    params: MotilityParams,
) -> CliResult<(AnisotropyReport, &'static str)> {
    match dist {
        SphericalDistribution::Peanut { a } if a.is_symmetric() => {
            Ok((anisotropy::peanut_closed_form_report(a, params)?, "closed_form"))
        }
        SphericalDistribution::BimodalVmf { u, k } => {
            Ok((anisotropy::bimodal_vmf_closed_form_report(*k, u, params)?, "closed_form"))
        }
        SphericalDistribution::Odf { .. } | SphericalDistribution::Bingham { .. } => Err(CliError::input(format!(
            "no closed-form covariance for kind {}",
            dist.kind()
        ))),
        _ => Ok((anisotropy::generic_report(dist, params)?, "generic")),
    }
}

pub fn cmd_anisotropy(dist: &SphericalDistribution, s: f64, mu: f64) -> CliResult<Outcome> {
    let params = MotilityParams::new(s, mu)?;
    let (report, method) = anisotropy_report(dist, params)?;
    let code = bounds_exit_code(&report.bound_flags);
    let out = AnisotropyOutput {
        schema: "1",
        distribution: dist.to_spec(),
        s,
        mu,
        method,
        eigenvalues: report.eigenvalues,
        fa: report.fa,
        ratio: report.ratio,
        bounds: Bounds::peanut(),
        bound_flags: report.bound_flags,
    };
    Outcome::json(&out, code)
}

/// 1 when a bound applies and is violated.
pub fn bounds_exit_code(flags: &BoundFlags) -> i32 {
    if flags.all_hold() {
        exit::OK
    } else {
        exit::FAILURE
    }
}

pub fn summary_exit_code(summary: &Summary) -> i32 {
    if summary.passed {
        exit::OK
    } else {
        exit::FAILURE
    }
}

pub fn cmd_validate(level: Level, seed: u64) -> CliResult<Outcome> {
    let summary = validation::run(level, seed)?;
    Outcome::json(&summary, summary_exit_code(&summary))
}
