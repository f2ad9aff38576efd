//! Command-line front end: argument grammar, dispatch and output formatting.

pub mod bench;
pub mod commands;
pub mod error;
pub mod input;
pub mod json;
pub mod sweep;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sphermoments_core::validation::Level;
use sphermoments_core::MotilityParams;

use crate::bench::{BenchConfig, BenchOracle};
use crate::commands::{MomentsArgs, OracleChoice, Outcome};
use crate::error::{exit, CliError, CliResult};
use crate::input::DistSource;
use crate::sweep::{SweepParameter, SweepSpec};

pub const DEFAULT_SEED: u64 = 20_240_601;
pub const SEED_ENV: &str = "SPHERMOMENTS_SEED";

#[derive(Debug, Parser)]
#[command(name = "sphermoments", version, about = "Moments, diffusion tensors and anisotropy of spherical distributions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct DistArgs {
    /// Distribution JSON, e.g. {"kind":"vmf","n":3,"u":[0,0,1],"k":2}
    #[arg(long = "dist-json", value_name = "JSON")]
    pub dist_json: Option<String>,
    /// Distribution JSON read from a file (@PATH) or given inline
    #[arg(long, value_name = "@PATH")]
    pub dist: Option<String>,
}

impl DistArgs {
    fn source(&self) -> CliResult<DistSource> {
        DistSource::from_flags(self.dist_json.as_deref(), self.dist.as_deref())
    }
}

#[derive(Debug, Args)]
pub struct SeedArg {
    /// Random seed for Monte Carlo oracles
    #[arg(long, env = SEED_ENV, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct MotilityArgs {
    /// Particle speed s
    #[arg(long, default_value_t = 1.0)]
    pub s: f64,
    /// Turning rate mu
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OracleArg {
    None,
    Quad,
    Mc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BenchOracleArg {
    Quad,
    Mc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ParamArg {
    K,
    #[value(name = "eigen_ratio")]
    EigenRatio,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LevelArg {
    Smoke,
    Full,
}

const SWEEP_HELP: &str = "CSV columns: parameter,value,fa,ratio,mean_norm,lambda_1,...,lambda_n\n\
  parameter  sweep parameter name (k or eigen_ratio)\n\
  value      grid value\n\
  fa         FA2 (n=2) or FA3 (n=3); empty for n >= 4\n\
  ratio      largest/smallest diffusion eigenvalue, or inf\n\
  mean_norm  length of the mean direction vector\n\
  lambda_i   diffusion tensor eigenvalues, descending\n\
Cells of outputs not listed in --outputs are empty.\n\
eigen_ratio sweeps use A(t) = V diag(t,1,...,1) V^T, V the eigenbasis of the given A.";

const BENCH_HELP: &str = "CSV columns: n,k,oracle,resolution,samples,repeats,closed_form_seconds,oracle_seconds,speedup,max_abs_dev\n\
  closed_form_seconds  median wall time of one closed-form vMF covariance evaluation\n\
  oracle_seconds       median wall time of one oracle moment evaluation\n\
  speedup              oracle_seconds / closed_form_seconds\n\
  max_abs_dev          largest mean/covariance difference between the two";

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mean, second moment and covariance, optionally checked against an oracle
    Moments {
        #[command(flatten)]
        dist: DistArgs,
        #[arg(long, value_enum, default_value_t = OracleArg::None)]
        oracle: OracleArg,
        #[command(flatten)]
        seed: SeedArg,
        /// Monte Carlo sample count
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        /// Quadrature resolution (power of two >= 16)
        #[arg(long, default_value_t = 256)]
        resolution: usize,
    },
    /// Diffusion tensor eigenvalues, fractional anisotropy and anisotropy ratio
    Anisotropy {
        #[command(flatten)]
        dist: DistArgs,
        #[command(flatten)]
        motility: MotilityArgs,
    },
    /// Anisotropy over a parameter grid, as CSV or JSON
    #[command(after_help = SWEEP_HELP)]
    Sweep {
        #[command(flatten)]
        dist: DistArgs,
        #[arg(long, value_enum)]
        param: ParamArg,
        /// Grid values: "a,b,c" or "log:START:STOP:COUNT"
        #[arg(long)]
        grid: String,
        /// Comma-separated subset of fa,ratio,eigenvalues,mean_norm
        #[arg(long, default_value = "fa,ratio,eigenvalues,mean_norm")]
        outputs: String,
        #[command(flatten)]
        motility: MotilityArgs,
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
        /// Output file (stdout if omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the self-check suites; exit 1 if any fails
    Validate {
        #[arg(long, value_enum, default_value_t = LevelArg::Smoke)]
        level: LevelArg,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Time closed-form vMF covariance against an oracle
    #[command(after_help = BENCH_HELP)]
    Bench {
        #[arg(long, default_value_t = 3)]
        n: usize,
        /// Comma-separated concentrations
        #[arg(long = "k-grid", default_value = "0.1,1,10,100")]
        k_grid: String,
        #[arg(long, default_value_t = 5)]
        repeats: usize,
        /// Oracle to time; quad for n <= 3 and mc otherwise when omitted
        #[arg(long, value_enum)]
        oracle: Option<BenchOracleArg>,
        #[arg(long, default_value_t = 256)]
        resolution: usize,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[command(flatten)]
        seed: SeedArg,
    },
}

fn write_output(out: Option<&PathBuf>, text: String) -> CliResult<Outcome> {
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            Ok(Outcome { stdout: String::new(), code: exit::OK })
        }
        None => Ok(Outcome { stdout: text, code: exit::OK }),
    }
}

fn dispatch(command: &Command) -> CliResult<Outcome> {
    match command {
        Command::Moments { dist, oracle, seed, samples, resolution } => {
            let d = input::load(&dist.source()?)?;
            let oracle = match oracle {
                OracleArg::None => OracleChoice::None,
                OracleArg::Quad => OracleChoice::Quad,
                OracleArg::Mc => OracleChoice::Mc,
            };
            commands::cmd_moments(&d, &MomentsArgs { oracle, seed: seed.seed, samples: *samples, resolution: *resolution })
        }
        Command::Anisotropy { dist, motility } => {
            let d = input::load(&dist.source()?)?;
            commands::cmd_anisotropy(&d, motility.s, motility.mu)
        }
        Command::Sweep { dist, param, grid, outputs, motility, format, out } => {
            let spec = SweepSpec {
                parameter: match param {
                    ParamArg::K => SweepParameter::K,
                    ParamArg::EigenRatio => SweepParameter::EigenRatio,
                },
                grid: sweep::parse_grid(grid)?,
                fixed: input::load(&dist.source()?)?,
                outputs: outputs.parse()?,
                params: MotilityParams::new(motility.s, motility.mu)?,
            };
            let rows = sweep::run(&spec)?;
            let text = match format {
                FormatArg::Csv => sweep::to_csv(&spec, &rows)?,
                FormatArg::Json => sweep::to_json(&spec, &rows)?,
            };
            write_output(out.as_ref(), text)
        }
        Command::Validate { level, seed } => {
            let level = match level {
                LevelArg::Smoke => Level::Smoke,
                LevelArg::Full => Level::Full,
            };
            commands::cmd_validate(level, seed.seed)
        }
        Command::Bench { n, k_grid, repeats, oracle, resolution, samples, seed } => {
            let k_grid = k_grid
                .split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|_| CliError::input(format!("invalid --k-grid value {v:?}"))))
                .collect::<CliResult<Vec<_>>>()?;
            let oracle = match oracle.unwrap_or(if *n <= 3 { BenchOracleArg::Quad } else { BenchOracleArg::Mc }) {
                BenchOracleArg::Quad => BenchOracle::Quad { resolution: *resolution },
                BenchOracleArg::Mc => BenchOracle::Mc { samples: *samples, seed: seed.seed },
            };
            let rows = bench::run(&BenchConfig { n: *n, k_grid, repeats: *repeats, oracle })?;
            Ok(Outcome { stdout: bench::to_csv(&rows)?, code: exit::OK })
        }
    }
}

/// Runs a parsed command; failures become the JSON error envelope.
pub fn run(cli: &Cli) -> Outcome {
    match dispatch(&cli.command) {
        Ok(outcome) => outcome,
        Err(err) => Outcome { stdout: err.to_json(), code: err.exit_code() },
    }
}
