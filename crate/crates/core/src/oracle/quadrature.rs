use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::{QuadratureScheme, QuadratureSpec};
use crate::distributions::{Density, SphericalDistribution};
use crate::error::{Error, Result};
use crate::moments::{MomentReport, MomentSource};

/// Doubling the resolution must move every moment entry by less than this.
pub const CONVERGENCE_TOL: f64 = 1e-10;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
///
/// Nodes are placed in exactly antipodal pairs.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let nf = order as f64;
    for i in 0..order.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut deriv = 0.0;
        for _ in 0..100 {
            let (p, p_prev) = legendre(order, x);
            deriv = nf * (x * p - p_prev) / (x * x - 1.0);
            let dx = p / deriv;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        let (p, p_prev) = legendre(order, x);
        deriv = if x == 0.0 { deriv } else { nf * (x * p - p_prev) / (x * x - 1.0) };
        let w = 2.0 / ((1.0 - x * x) * deriv * deriv);
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

// (P_n(x), P_{n-1}(x)) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p_prev, mut p) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let jf = j as f64;
        let next = ((2.0 * jf - 1.0) * x * p - (jf - 1.0) * p_prev) / jf;
        p_prev = p;
        p = next;
    }
    (p, p_prev)
}

/// `∫ q(θ) f(θ) dθ` for an `m`-component feature map `f`.
pub fn quad_integrate<F>(density: &Density, spec: &QuadratureSpec, m: usize, fill: F) -> Result<Vec<f64>>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    if density.dim() != spec.n {
        return Err(Error::Shape { expected: spec.n, found: density.dim() });
    }
    Ok(integrate(density, spec.scheme, spec.resolution, m, &fill))
}

fn integrate<F>(density: &Density, scheme: QuadratureScheme, res: usize, m: usize, fill: &F) -> Vec<f64>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    let azimuth_weight = 2.0 * PI / res as f64;
    let ring = |z: Option<(f64, f64)>| -> Vec<f64> {
        let mut acc = vec![0.0; m];
        let mut buf = vec![0.0; m];
        let mut theta = match z {
            None => vec![0.0; 2],
            Some(_) => vec![0.0; 3],
        };
        for j in 0..res {
            let phi = azimuth_weight * j as f64;
            let (sin, cos) = phi.sin_cos();
            let w = match z {
                None => {
                    theta[0] = cos;
                    theta[1] = sin;
                    azimuth_weight
                }
                Some((t, wt)) => {
                    let s = (1.0 - t * t).sqrt();
                    theta[0] = s * cos;
                    theta[1] = s * sin;
                    theta[2] = t;
                    wt * azimuth_weight
                }
            };
            let q = density.eval(&theta);
            fill(&theta, &mut buf);
            for (a, b) in acc.iter_mut().zip(&buf) {
                *a += w * q * b;
            }
        }
        acc
    };

    match scheme {
        QuadratureScheme::CircleTrapezoid => ring(None),
        QuadratureScheme::SphereProduct => {
            let (nodes, weights) = gauss_legendre(res);
            let partials: Vec<Vec<f64>> =
                nodes.par_iter().zip(weights.par_iter()).map(|(&t, &w)| ring(Some((t, w)))).collect();
            let mut total = vec![0.0; m];
            for p in partials {
                for (a, b) in total.iter_mut().zip(p) {
                    *a += b;
                }
            }
            total
        }
    }
}

fn moment_features(n: usize) -> (usize, impl Fn(&[f64], &mut [f64]) + Sync) {
    let m = 1 + n + n * n;
    let fill = move |theta: &[f64], out: &mut [f64]| {
        out[0] = 1.0;
        out[1..=n].copy_from_slice(theta);
        for i in 0..n {
            for j in 0..n {
                out[1 + n + i * n + j] = theta[i] * theta[j];
            }
        }
    };
    (m, fill)
}

pub(super) fn report_from_features(n: usize, values: &[f64], source: MomentSource) -> MomentReport {
    let mean = DVector::from_column_slice(&values[1..=n]);
    let second = DMatrix::from_row_slice(n, n, &values[1 + n..]);
    MomentReport::new(values[0], mean, second, source)
}

/// Mass, mean and second moment of `dist` by deterministic quadrature.
pub fn quad_moments(dist: &SphericalDistribution, spec: &QuadratureSpec) -> Result<MomentReport> {
    let density = dist.prepare()?;
    let n = spec.n;
    let (m, fill) = moment_features(n);
    let values = quad_integrate(&density, spec, m, &fill)?;
    let doubling_delta = if spec.check_convergence {
        let fine = integrate(&density, spec.scheme, 2 * spec.resolution, m, &fill);
        values.iter().zip(&fine).fold(0.0f64, |d, (a, b)| d.max((a - b).abs()))
    } else {
        f64::NAN
    };
    let source = MomentSource::Quadrature {
        scheme: spec.scheme,
        resolution: spec.resolution,
        doubling_delta,
        converged: doubling_delta < CONVERGENCE_TOL,
    };
    Ok(report_from_features(n, &values, source))
}

/// Third-moment tensor `∫ θ_i θ_j θ_l q dθ`, flattened row-major.
pub fn quad_third_moment(dist: &SphericalDistribution, spec: &QuadratureSpec) -> Result<Vec<f64>> {
    let density = dist.prepare()?;
    let n = spec.n;
    quad_integrate(&density, spec, n * n * n, |theta, out| {
        let mut idx = 0;
        for a in theta {
            for b in theta {
                for c in theta {
                    out[idx] = a * b * c;
                    idx += 1;
                }
            }
        }
    })
}
