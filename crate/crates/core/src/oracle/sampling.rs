use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Beta, Distribution};
use rayon::prelude::*;

use super::montecarlo::{block_rng, uniform_direction};
use crate::distributions::{AnisotropyMatrix, SphericalDistribution, UnitVector};
use crate::error::{Error, Result};
use crate::linalg;

const SAMPLE_BLOCK: usize = 4096;

#[derive(Clone, Debug)]
pub struct SampleSet {
    pub samples: Vec<UnitVector>,
    pub proposals: usize,
    pub acceptance_rate: f64,
    pub seed: u64,
}

fn run_blocks<F>(count: usize, seed: u64, draw_block: F) -> SampleSet
where
    F: Fn(&mut rand_chacha::ChaCha8Rng, usize) -> (Vec<UnitVector>, usize) + Sync,
{
    let blocks = count.div_ceil(SAMPLE_BLOCK);
    let parts: Vec<(Vec<UnitVector>, usize)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = block_rng(seed, b);
            draw_block(&mut rng, SAMPLE_BLOCK.min(count - b * SAMPLE_BLOCK))
        })
        .collect();
    let mut samples = Vec::with_capacity(count);
    let mut proposals = 0;
    for (s, p) in parts {
        samples.extend(s);
        proposals += p;
    }
    let acceptance_rate = if proposals == 0 { 1.0 } else { count as f64 / proposals as f64 };
    SampleSet { samples, proposals, acceptance_rate, seed }
}

/// Exact vMF sampler (Wood's rejection scheme for the component along `u`).
pub fn sample_vmf(u: &UnitVector, k: f64, count: usize, seed: u64) -> Result<SampleSet> {
    if !k.is_finite() || k < 0.0 {
        return Err(Error::Domain(format!("k must be finite and >= 0, got {k}")));
    }
    let n = u.dim();
    let dof = (n - 1) as f64;
    let b = dof / (2.0 * k + (4.0 * k * k + dof * dof).sqrt());
    let x0 = (1.0 - b) / (1.0 + b);
    // 1 - x0² = 4b / (1+b)², avoiding cancellation at large k
    let c = k * x0 + dof * (4.0 * b / ((1.0 + b) * (1.0 + b))).ln();
    let beta = Beta::new(dof / 2.0, dof / 2.0).map_err(|e| Error::Domain(e.to_string()))?;
    let mean_dir = u.as_slice();

    Ok(run_blocks(count, seed, |rng, size| {
        let mut out = Vec::with_capacity(size);
        let mut proposals = 0;
        let mut tangent = vec![0.0; n];
        while out.len() < size {
            proposals += 1;
            let z: f64 = beta.sample(rng);
            let w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
            let accept: f64 = rng.random();
            if k * w + dof * (1.0 - x0 * w).ln() - c < accept.ln() {
                continue;
            }
            // uniform direction orthogonal to u
            let mut norm2 = 0.0;
            while norm2 < 1e-20 {
                uniform_direction(rng, &mut tangent);
                let along: f64 = tangent.iter().zip(mean_dir).map(|(t, m)| t * m).sum();
                tangent.iter_mut().zip(mean_dir).for_each(|(t, m)| *t -= along * m);
                norm2 = tangent.iter().map(|t| t * t).sum();
            }
            let scale = (1.0 - w * w).max(0.0).sqrt() / norm2.sqrt();
            let theta: Vec<f64> = mean_dir.iter().zip(&tangent).map(|(m, t)| w * m + scale * t).collect();
            out.push(UnitVector::renormalized(theta));
        }
        (out, proposals)
    }))
}

/// Rejection sampler for the peanut density against the uniform sphere.
///
/// The envelope constant is `n λ_max / tr A`, with `λ_max` the largest
/// eigenvalue of the symmetric part of `A`.
pub fn sample_peanut(a: &AnisotropyMatrix, count: usize, seed: u64) -> Result<SampleSet> {
    SphericalDistribution::Peanut { a: a.clone() }.ensure_valid()?;
    let n = a.dim();
    let sym = linalg::symmetric_part(a.matrix());
    let lambda_max = linalg::symmetric_eigen(&sym)?.values[0];
    Ok(run_blocks(count, seed, |rng, size| {
        let mut out = Vec::with_capacity(size);
        let mut proposals = 0;
        let mut theta = vec![0.0; n];
        while out.len() < size {
            proposals += 1;
            uniform_direction(rng, &mut theta);
            let form: f64 = (0..n).map(|i| theta[i] * (0..n).map(|j| sym[(i, j)] * theta[j]).sum::<f64>()).sum();
            let accept: f64 = rng.random();
            if accept * lambda_max <= form {
                out.push(UnitVector::renormalized(theta.clone()));
            }
        }
        (out, proposals)
    }))
}

/// Sample mean and covariance with per-entry standard errors.
#[derive(Clone, Debug)]
pub struct EmpiricalMoments {
    pub mean: DVector<f64>,
    pub mean_se: DVector<f64>,
    pub second_moment: DMatrix<f64>,
    pub second_moment_se: DMatrix<f64>,
    pub covariance: DMatrix<f64>,
    pub covariance_se: DMatrix<f64>,
}

pub fn empirical_moments(samples: &[UnitVector]) -> Result<EmpiricalMoments> {
    let count = samples.len();
    if count < 2 {
        return Err(Error::Domain("need at least two samples".into()));
    }
    let n = samples[0].dim();
    let c = count as f64;
    let mut mean = DVector::zeros(n);
    for s in samples {
        mean += s.as_vector();
    }
    mean /= c;

    let mut mean_sq = DVector::zeros(n);
    let mut second = DMatrix::zeros(n, n);
    let mut cov = DMatrix::zeros(n, n);
    for s in samples {
        let x = s.as_vector();
        let d = x - &mean;
        mean_sq += d.component_mul(&d);
        second += x * x.transpose();
        cov += &d * d.transpose();
    }
    second /= c;
    cov /= c - 1.0;

    // variances of the per-sample products
    let mut second_var = DMatrix::zeros(n, n);
    let mut cov_var = DMatrix::zeros(n, n);
    for s in samples {
        let x = s.as_vector();
        let d = x - &mean;
        for i in 0..n {
            for j in 0..n {
                let e = x[i] * x[j] - second[(i, j)];
                second_var[(i, j)] += e * e;
                let f = d[i] * d[j] - cov[(i, j)];
                cov_var[(i, j)] += f * f;
            }
        }
    }
    let se = |v: f64| (v / (c - 1.0) / c).sqrt();
    Ok(EmpiricalMoments {
        mean,
        mean_se: mean_sq.map(se),
        second_moment: second,
        second_moment_se: second_var.map(se),
        covariance: cov,
        covariance_se: cov_var.map(se),
    })
}
