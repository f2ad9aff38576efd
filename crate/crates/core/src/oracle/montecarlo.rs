use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::quadrature::report_from_features;
use super::McSpec;
use crate::distributions::{sphere_surface_area, Density, SphericalDistribution};
use crate::error::{Error, Result};
use crate::moments::{MomentReport, MomentSource, MomentStdErr};

pub(crate) const BLOCK: usize = 1 << 14;

/// Recorded in every Monte Carlo report so results can be reproduced.
pub const GENERATOR: &str = "ChaCha8Rng::seed_from_u64(seed), stream = block index, 16384 samples per block";

pub(crate) fn block_rng(seed: u64, block: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block as u64);
    rng
}

/// Fills `out` with a direction uniform on `S^{out.len()-1}`.
pub(crate) fn uniform_direction<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    loop {
        let mut norm2 = 0.0;
        for x in out.iter_mut() {
            *x = rng.sample(StandardNormal);
            norm2 += *x * *x;
        }
        if norm2 > 0.0 {
            let inv = 1.0 / norm2.sqrt();
            out.iter_mut().for_each(|x| *x *= inv);
            return;
        }
    }
}

/// Running mean and centered sum of squares per feature.
#[derive(Clone, Debug)]
struct Moments {
    count: f64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Moments {
    fn from_sums(count: usize, sum: &[f64], sum_sq: &[f64]) -> Self {
        let c = count as f64;
        let mean: Vec<f64> = sum.iter().map(|s| s / c).collect();
        let m2 = sum_sq.iter().zip(&mean).map(|(sq, mu)| (sq - c * mu * mu).max(0.0)).collect();
        Self { count: c, mean, m2 }
    }

    // Chan et al. pairwise combination.
    fn merge(&mut self, other: &Moments) {
        let total = self.count + other.count;
        for i in 0..self.mean.len() {
            let delta = other.mean[i] - self.mean[i];
            self.mean[i] += delta * other.count / total;
            self.m2[i] += other.m2[i] + delta * delta * self.count * other.count / total;
        }
        self.count = total;
    }
}

/// Monte Carlo estimate of `∫ q f dθ` with per-component standard errors.
#[derive(Clone, Debug, PartialEq)]
pub struct McEstimate {
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub samples: usize,
}

pub fn mc_integrate<F>(density: &Density, spec: &McSpec, m: usize, fill: F) -> Result<McEstimate>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    let n = spec.n;
    if density.dim() != n {
        return Err(Error::Shape { expected: n, found: density.dim() });
    }
    let area = sphere_surface_area(n)?;
    let blocks = spec.samples.div_ceil(BLOCK);
    let partials: Vec<Moments> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let count = BLOCK.min(spec.samples - b * BLOCK);
            let mut rng = block_rng(spec.seed, b);
            let mut theta = vec![0.0; n];
            let mut buf = vec![0.0; m];
            let mut sum = vec![0.0; m];
            let mut sum_sq = vec![0.0; m];
            for _ in 0..count {
                uniform_direction(&mut rng, &mut theta);
                let weight = area * density.eval(&theta);
                fill(&theta, &mut buf);
                for i in 0..m {
                    let y = weight * buf[i];
                    sum[i] += y;
                    sum_sq[i] += y * y;
                }
            }
            Moments::from_sums(count, &sum, &sum_sq)
        })
        .collect();

    let mut iter = partials.into_iter();
    let mut total = iter.next().expect("at least one block");
    for p in iter {
        total.merge(&p);
    }
    let c = total.count;
    let stderr = total.m2.iter().map(|m2| (m2 / (c - 1.0) / c).sqrt()).collect();
    Ok(McEstimate { mean: total.mean, stderr, samples: spec.samples })
}

/// Mass, mean and second moment with standard errors, from uniform directions.
pub fn mc_moments(dist: &SphericalDistribution, spec: &McSpec) -> Result<MomentReport> {
    let density = dist.prepare()?;
    let n = spec.n;
    let m = 1 + n + n * n;
    let est = mc_integrate(&density, spec, m, |theta, out| {
        out[0] = 1.0;
        out[1..=n].copy_from_slice(theta);
        for i in 0..n {
            for j in 0..n {
                out[1 + n + i * n + j] = theta[i] * theta[j];
            }
        }
    })?;
    let source = MomentSource::MonteCarlo { samples: spec.samples, seed: spec.seed, generator: GENERATOR };
    let mut report = report_from_features(n, &est.mean, source);
    let se = &est.stderr;
    report.stderr = Some(MomentStdErr {
        mass: se[0],
        mean: nalgebra::DVector::from_column_slice(&se[1..=n]),
        second_moment: nalgebra::DMatrix::from_row_slice(n, n, &se[1 + n..]),
    });
    Ok(report)
}
