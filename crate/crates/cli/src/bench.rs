//! Wall-time comparison of closed-form vMF covariance against an oracle.

use std::hint::black_box;
use std::time::{Duration, Instant};

use sphermoments_core::moments;
use sphermoments_core::oracle::{self, McSpec, QuadratureSpec};
use sphermoments_core::{SphericalDistribution, UnitVector};

use crate::error::{CliError, CliResult};
use crate::json;

/// CSV columns, in order. Only the two `*_seconds` columns and `speedup` vary between runs.
pub const CSV_HEADER: &str =
    "n,k,oracle,resolution,samples,repeats,closed_form_seconds,oracle_seconds,speedup,max_abs_dev";

// Closed-form calls are batched until a batch takes at least this long.
const MIN_BATCH: Duration = Duration::from_millis(2);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BenchOracle {
    Quad { resolution: usize },
    Mc { samples: usize, seed: u64 },
}

impl BenchOracle {
    fn name(self) -> &'static str {
        match self {
            BenchOracle::Quad { .. } => "quad",
            BenchOracle::Mc { .. } => "mc",
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub n: usize,
    pub k_grid: Vec<f64>,
    pub repeats: usize,
    pub oracle: BenchOracle,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub n: usize,
    pub k: f64,
    pub oracle: BenchOracle,
    pub repeats: usize,
    /// Median seconds per closed-form covariance evaluation.
    pub closed_form_seconds: f64,
    /// Median seconds per oracle evaluation.
    pub oracle_seconds: f64,
    pub speedup: f64,
    /// Largest mean/covariance difference between the two, the accuracy being matched.
    pub max_abs_dev: f64,
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    }
}

fn closed_form_seconds(k: f64, u: &UnitVector) -> CliResult<f64> {
    let mut batch = 1usize;
    loop {
        let start = Instant::now();
        for _ in 0..batch {
            black_box(moments::vmf_covariance(black_box(k), black_box(u))?);
        }
        let elapsed = start.elapsed();
        if elapsed >= MIN_BATCH {
            return Ok(elapsed.as_secs_f64() / batch as f64);
        }
        batch *= 2;
    }
}

fn oracle_run(dist: &SphericalDistribution, oracle: BenchOracle) -> CliResult<sphermoments_core::MomentReport> {
    let n = dist.dim();
    Ok(match oracle {
        BenchOracle::Quad { resolution } => {
            oracle::quad_moments(dist, &QuadratureSpec::new(n, resolution)?.without_convergence_check())?
        }
        BenchOracle::Mc { samples, seed } => oracle::mc_moments(dist, &McSpec::new(n, samples, seed)?)?,
    })
}

pub fn validate(config: &BenchConfig) -> CliResult<()> {
    if config.k_grid.is_empty() || config.k_grid.iter().any(|k| !(k.is_finite() && *k >= 0.0)) {
        return Err(CliError::input("--k-grid needs one or more finite values >= 0"));
    }
    if config.repeats == 0 {
        return Err(CliError::input("--repeats must be >= 1"));
    }
    if config.n < 2 {
        return Err(CliError::input("--n must be >= 2"));
    }
    if matches!(config.oracle, BenchOracle::Quad { .. }) && config.n > 3 {
        return Err(CliError::input("quadrature oracle supports n = 2 or 3; use --oracle mc"));
    }
    Ok(())
}

pub fn run(config: &BenchConfig) -> CliResult<Vec<BenchRow>> {
    validate(config)?;
    let u = UnitVector::basis(config.n, 0);
    config
        .k_grid
        .iter()
        .map(|&k| {
            let dist = SphericalDistribution::Vmf { u: u.clone(), k };
            let exact = moments::vmf_moments(k, &u)?;
            let mut closed = Vec::with_capacity(config.repeats);
            let mut oracle_times = Vec::with_capacity(config.repeats);
            let mut max_abs_dev = 0.0;
            for _ in 0..config.repeats {
                closed.push(closed_form_seconds(k, &u)?);
                let start = Instant::now();
                let report = black_box(oracle_run(&dist, config.oracle)?);
                oracle_times.push(start.elapsed().as_secs_f64());
                max_abs_dev = exact.max_abs_deviation(&report);
            }
            let closed_form_seconds = median(&mut closed);
            let oracle_seconds = median(&mut oracle_times);
            Ok(BenchRow {
                n: config.n,
                k,
                oracle: config.oracle,
                repeats: config.repeats,
                closed_form_seconds,
                oracle_seconds,
                speedup: oracle_seconds / closed_form_seconds,
                max_abs_dev,
            })
        })
        .collect()
}

pub fn to_csv(rows: &[BenchRow]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER.split(',')).map_err(|e| CliError::Io(e.to_string()))?;
    for r in rows {
        let (resolution, samples) = match r.oracle {
            BenchOracle::Quad { resolution } => (resolution.to_string(), String::new()),
            BenchOracle::Mc { samples, .. } => (String::new(), samples.to_string()),
        };
        w.write_record([
            r.n.to_string(),
            json::format_f64(r.k),
            r.oracle.name().to_string(),
            resolution,
            samples,
            r.repeats.to_string(),
            json::format_f64(r.closed_form_seconds),
            json::format_f64(r.oracle_seconds),
            json::format_f64(r.speedup),
            json::format_f64(r.max_abs_dev),
        ])
        .map_err(|e| CliError::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("CSV of ASCII numbers"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_rule() {
        assert_eq!(median(&mut [3.0]), 3.0);
        assert_eq!(median(&mut [5.0, 1.0, 3.0]), 3.0);
        assert_eq!(median(&mut [4.0, 1.0, 3.0, 2.0]), 2.5);
    }

    #[test]
    fn rejects_bad_configs() {
        let base = BenchConfig { n: 3, k_grid: vec![1.0], repeats: 1, oracle: BenchOracle::Quad { resolution: 16 } };
        assert!(validate(&base).is_ok());
        assert!(validate(&BenchConfig { repeats: 0, ..base.clone() }).is_err());
        assert!(validate(&BenchConfig { k_grid: vec![], ..base.clone() }).is_err());
        assert!(validate(&BenchConfig { n: 5, ..base }).is_err());
    }
}
