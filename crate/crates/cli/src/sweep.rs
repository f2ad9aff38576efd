//! Parameter sweeps producing plot-ready CSV or JSON.

use std::str::FromStr;

use serde::Serialize;
use sphermoments_core::linalg;
use sphermoments_core::moments;
use sphermoments_core::validation::log_grid;
use sphermoments_core::{AnisotropyMatrix, DMatrix, DistKind, MotilityParams, Ratio, SphericalDistribution};

use crate::commands::anisotropy_report;
use crate::error::{CliError, CliResult};
use crate::json;

/// CSV columns, in order. `lambda_1..lambda_n` follow `mean_norm`; cells of
/// outputs that were not requested are left empty.
pub const CSV_HEADER: &str = "parameter,value,fa,ratio,mean_norm,lambda_1..lambda_n";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    /// Concentration of a vmf or bimodal_vmf distribution.
    K,
    /// Peanut `A(t) = V diag(t, 1, ..., 1) Vᵀ` in the eigenbasis `V` of the fixed `A`.
    EigenRatio,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::K => "k",
            SweepParameter::EigenRatio => "eigen_ratio",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Outputs {
    pub fa: bool,
    pub ratio: bool,
    pub eigenvalues: bool,
    pub mean_norm: bool,
}

impl Outputs {
    pub fn all() -> Self {
        Self { fa: true, ratio: true, eigenvalues: true, mean_norm: true }
    }
}

impl FromStr for Outputs {
    type Err = CliError;

    /// Comma-separated subset of `fa,ratio,eigenvalues,mean_norm`.
    fn from_str(s: &str) -> CliResult<Self> {
        let mut out = Outputs { fa: false, ratio: false, eigenvalues: false, mean_norm: false };
        for item in s.split(',').map(str::trim) {
            match item {
                "fa" => out.fa = true,
                "ratio" => out.ratio = true,
                "eigenvalues" => out.eigenvalues = true,
                "mean_norm" => out.mean_norm = true,
                other => return Err(CliError::input(format!("unknown sweep output {other:?}"))),
            }
        }
        Ok(out)
    }
}

/// `a,b,c` or `log:START:STOP:COUNT`.
pub fn parse_grid(s: &str) -> CliResult<Vec<f64>> {
    let bad = |what: &str| CliError::input(format!("invalid grid {s:?}: {what}"));
    let grid = if let Some(rest) = s.strip_prefix("log:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected log:START:STOP:COUNT"));
        }
        let start: f64 = parts[0].parse().map_err(|_| bad("START is not a number"))?;
        let stop: f64 = parts[1].parse().map_err(|_| bad("STOP is not a number"))?;
        let count: usize = parts[2].parse().map_err(|_| bad("COUNT is not an integer"))?;
        if !(start > 0.0 && stop > 0.0) || count == 0 {
            return Err(bad("log grids need positive endpoints and COUNT >= 1"));
        }
        log_grid(start, stop, count)
    } else {
        s.split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|_| bad(&format!("{v:?} is not a number"))))
            .collect::<CliResult<_>>()?
    };
    Ok(grid)
}

#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub grid: Vec<f64>,
    pub fixed: SphericalDistribution,
    pub outputs: Outputs,
    pub params: MotilityParams,
}

impl SweepSpec {
    pub fn validate(&self) -> CliResult<()> {
        if self.grid.is_empty() {
            return Err(CliError::input("sweep grid is empty"));
        }
        if self.grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(CliError::input("sweep grid must be strictly increasing"));
        }
        match self.parameter {
            SweepParameter::K => {
                if !matches!(self.fixed.kind(), DistKind::Vmf | DistKind::BimodalVmf) {
                    return Err(CliError::input(format!("parameter k needs a vmf or bimodal_vmf, got {}", self.fixed.kind())));
                }
                if self.grid.iter().any(|k| !(k.is_finite() && *k >= 0.0)) {
                    return Err(CliError::input("k grid values must be finite and >= 0"));
                }
            }
            SweepParameter::EigenRatio => {
                if self.fixed.kind() != DistKind::Peanut {
                    return Err(CliError::input(format!("parameter eigen_ratio needs a peanut, got {}", self.fixed.kind())));
                }
                if self.grid.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
                    return Err(CliError::input("eigen_ratio grid values must be finite and > 0"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fa: Option<Option<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<Ratio>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eigenvalues: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_norm: Option<f64>,
}

// `A(t)` with entries `Σ_k d_k (V_ik V_jk)`, exactly symmetric by construction.
fn eigen_ratio_matrix(basis: &DMatrix<f64>, t: f64) -> CliResult<AnisotropyMatrix> {
    let n = basis.nrows();
    let d: Vec<f64> = (0..n).map(|k| if k == 0 { t } else { 1.0 }).collect();
    let m = DMatrix::from_fn(n, n, |i, j| (0..n).map(|k| d[k] * (basis[(i, k)] * basis[(j, k)])).sum());
    Ok(AnisotropyMatrix::new(m)?)
}

fn point(spec: &SweepSpec, basis: Option<&DMatrix<f64>>, value: f64) -> CliResult<SphericalDistribution> {
    Ok(match (&spec.fixed, spec.parameter) {
        (SphericalDistribution::Vmf { u, .. }, SweepParameter::K) => SphericalDistribution::Vmf { u: u.clone(), k: value },
        (SphericalDistribution::BimodalVmf { u, .. }, SweepParameter::K) => {
            SphericalDistribution::BimodalVmf { u: u.clone(), k: value }
        }
        (SphericalDistribution::Peanut { .. }, SweepParameter::EigenRatio) => {
            SphericalDistribution::Peanut { a: eigen_ratio_matrix(basis.expect("peanut basis"), value)? }
        }
        _ => unreachable!("checked by SweepSpec::validate"),
    })
}

pub fn run(spec: &SweepSpec) -> CliResult<Vec<SweepRow>> {
    spec.validate()?;
    let basis = match &spec.fixed {
        SphericalDistribution::Peanut { a } => Some(linalg::symmetric_eigen(&linalg::symmetric_part(a.matrix()))?.vectors),
        _ => None,
    };
    spec.grid
        .iter()
        .map(|&value| {
            let dist = point(spec, basis.as_ref(), value)?;
            let (report, _) = anisotropy_report(&dist, spec.params)?;
            let mean_norm = match &dist {
                SphericalDistribution::Vmf { k, .. } => moments::vmf_coefficients(dist.dim(), *k)?.mean_length,
                _ => 0.0,
            };
            let o = spec.outputs;
            Ok(SweepRow {
                value,
                fa: o.fa.then_some(report.fa),
                ratio: o.ratio.then_some(report.ratio),
                eigenvalues: o.eigenvalues.then_some(report.eigenvalues),
                mean_norm: o.mean_norm.then_some(mean_norm),
            })
        })
        .collect()
}

fn ratio_cell(r: Ratio) -> String {
    match r {
        Ratio::Finite(v) => json::format_f64(v),
        Ratio::Infinite => "inf".into(),
    }
}

pub fn to_csv(spec: &SweepSpec, rows: &[SweepRow]) -> CliResult<String> {
    let n = spec.fixed.dim();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = ["parameter", "value", "fa", "ratio", "mean_norm"].map(String::from).to_vec();
    header.extend((1..=n).map(|i| format!("lambda_{i}")));
    w.write_record(&header).map_err(|e| CliError::Io(e.to_string()))?;
    for row in rows {
        let mut record = vec![spec.parameter.name().to_string(), json::format_f64(row.value)];
        record.push(match row.fa {
            Some(Some(fa)) => json::format_f64(fa),
            _ => String::new(),
        });
        record.push(row.ratio.map(ratio_cell).unwrap_or_default());
        record.push(row.mean_norm.map(json::format_f64).unwrap_or_default());
        match &row.eigenvalues {
            Some(values) => record.extend(values.iter().map(|v| json::format_f64(*v))),
            None => record.extend(std::iter::repeat_n(String::new(), n)),
        }
        w.write_record(&record).map_err(|e| CliError::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("CSV of ASCII numbers"))
}

#[derive(Serialize)]
struct SweepJson<'a> {
    schema: &'static str,
    parameter: SweepParameter,
    distribution: sphermoments_core::DistSpec,
    s: f64,
    mu: f64,
    rows: &'a [SweepRow],
}

pub fn to_json(spec: &SweepSpec, rows: &[SweepRow]) -> CliResult<String> {
    let doc = SweepJson {
        schema: "1",
        parameter: spec.parameter,
        distribution: spec.fixed.to_spec(),
        s: spec.params.s,
        mu: spec.params.mu,
        rows,
    };
    json::to_string(&doc).map_err(|e| CliError::Io(e.to_string()))
}
