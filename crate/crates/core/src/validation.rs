//! Self-check suites comparing every closed form with the oracle, plus the
//! Bessel identities and anisotropy bounds. Used by `sphermoments validate`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::anisotropy::{self, MotilityParams, Ratio, FA2_PEANUT_MAX, FA3_PEANUT_MAX};
use crate::distributions::{AnisotropyMatrix, SphericalDistribution, UnitVector};
use crate::error::Result;
use crate::moments::{self, MomentReport};
use crate::oracle::{self, McSpec, QuadratureSpec};
use crate::specfun;

/// Agreement threshold in standard errors for Monte Carlo comparisons.
pub const SE_THRESHOLD: f64 = 3.0;
/// Threshold applied to the single retry of a case that missed [`SE_THRESHOLD`].
pub const SE_RETRY_THRESHOLD: f64 = 4.0;
pub const QUAD_MOMENT_TOL: f64 = 1e-8;
pub const NORMALIZATION_TOL: f64 = 1e-8;
pub const CONSISTENCY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Smoke,
    Full,
}

impl Level {
    fn mc_samples(self) -> usize {
        match self {
            Level::Smoke => oracle::MIN_MC_SAMPLES,
            Level::Full => oracle::ACCEPTANCE_MC_SAMPLES,
        }
    }

    fn resolution(self) -> usize {
        match self {
            Level::Smoke => 64,
            Level::Full => oracle::DEFAULT_RESOLUTION,
        }
    }

    fn draws(self, full: usize) -> usize {
        match self {
            Level::Smoke => full.div_ceil(10).max(1),
            Level::Full => full,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub checks: usize,
    /// Largest absolute deviation among deterministic comparisons.
    pub max_deviation: f64,
    /// Largest |z| among Monte Carlo comparisons (after retries).
    pub max_z: Option<f64>,
    pub retries: usize,
    pub notes: Vec<String>,
}

impl SuiteResult {
    fn new(name: &'static str) -> Self {
        Self { name, passed: true, checks: 0, max_deviation: 0.0, max_z: None, retries: 0, notes: Vec::new() }
    }

    fn deterministic(&mut self, deviation: f64, tol: f64) {
        self.checks += 1;
        self.max_deviation = self.max_deviation.max(deviation);
        if !(deviation <= tol) {
            self.passed = false;
        }
    }

    fn condition(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.passed = false;
            self.notes.push(what());
        }
    }

    fn statistical(&mut self, verdict: McVerdict) {
        self.checks += 1;
        self.max_z = Some(self.max_z.unwrap_or(0.0).max(verdict.max_z));
        self.retries += verdict.retried as usize;
        if !verdict.passed {
            self.passed = false;
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub schema: &'static str,
    pub level: Level,
    pub seed: u64,
    pub passed: bool,
    pub suites: Vec<SuiteResult>,
}

/// Outcome of a Monte Carlo comparison under the retry rule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McVerdict {
    pub max_z: f64,
    pub retried: bool,
    pub passed: bool,
}

/// Seed for the single retry of a Monte Carlo case.
pub fn retry_seed(seed: u64) -> u64 {
    seed ^ 0x9e37_79b9_7f4a_7c15
}

/// Runs `max_z_for(seed)`; a case above 3 SE is re-run once with a derived
/// seed and must then land within 4 SE.
pub fn se_check_with_retry(seed: u64, mut max_z_for: impl FnMut(u64) -> Result<f64>) -> Result<McVerdict> {
    let first = max_z_for(seed)?;
    if first <= SE_THRESHOLD {
        return Ok(McVerdict { max_z: first, retried: false, passed: true });
    }
    let second = max_z_for(retry_seed(seed))?;
    Ok(McVerdict { max_z: second, retried: true, passed: second <= SE_RETRY_THRESHOLD })
}

fn z(diff: f64, se: f64) -> f64 {
    if se > 0.0 {
        diff.abs() / se
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Largest |z| over mass, mean entries and upper-triangle second-moment
/// entries of a Monte Carlo report against exact moments.
pub fn mc_max_z(mc: &MomentReport, exact: &MomentReport) -> f64 {
    let se = mc.stderr.as_ref().expect("Monte Carlo report carries standard errors");
    let n = mc.dim();
    let mut worst = z(mc.mass - exact.mass, se.mass);
    for i in 0..n {
        worst = worst.max(z(mc.mean[i] - exact.mean[i], se.mean[i]));
        for j in i..n {
            worst = worst.max(z(mc.second_moment[(i, j)] - exact.second_moment[(i, j)], se.second_moment[(i, j)]));
        }
    }
    worst
}

/// Largest absolute deviation in mass, mean or second moment.
pub fn max_abs_moment_deviation(a: &MomentReport, b: &MomentReport) -> f64 {
    let mean = (&a.mean - &b.mean).amax();
    let second = (&a.second_moment - &b.second_moment).amax();
    (a.mass - b.mass).abs().max(mean).max(second)
}

/// Random parameter generators shared by the suites.
pub mod random {
    use super::*;

    pub fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    pub fn unit_vector<R: Rng>(rng: &mut R, n: usize) -> UnitVector {
        loop {
            let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            if let Ok(u) = UnitVector::normalize(v) {
                return u;
            }
        }
    }

    /// Random orthogonal matrix from Gram-Schmidt on Gaussian columns.
    pub fn orthogonal<R: Rng>(rng: &mut R, n: usize) -> DMatrix<f64> {
        let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
        g.qr().q()
    }

    /// Symmetric positive definite with log-eigenvalues uniform in `[-spread, spread]`.
    pub fn spd<R: Rng>(rng: &mut R, n: usize, spread: f64) -> AnisotropyMatrix {
        let q = orthogonal(rng, n);
        let eig = DVector::from_fn(n, |_, _| rng.random_range(-spread..=spread).exp());
        let a = &q * DMatrix::from_diagonal(&eig) * q.transpose();
        let sym = (&a + a.transpose()) * 0.5;
        AnisotropyMatrix::new(sym).expect("finite square matrix")
    }

    /// Asymmetric matrix whose symmetric part is positive definite.
    pub fn asymmetric_pd<R: Rng>(rng: &mut R, n: usize) -> AnisotropyMatrix {
        let s = spd(rng, n, 1.5);
        let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let skew = (&g - g.transpose()) * 0.5;
        AnisotropyMatrix::new(s.matrix() + skew).expect("finite square matrix")
    }
}

fn normalization(level: Level, seed: u64) -> Result<SuiteResult> {
    let mut suite = SuiteResult::new("normalization");
    let mut rng = random::rng(seed);
    let draws = level.draws(5);
    for n in [2usize, 3] {
        let spec = QuadratureSpec::new(n, level.resolution())?.without_convergence_check();
        let mut dists = Vec::new();
        for _ in 0..draws {
            let k = rng.random_range(0.0..30.0);
            dists.push(SphericalDistribution::Vmf { u: random::unit_vector(&mut rng, n), k });
            dists.push(SphericalDistribution::BimodalVmf { u: random::unit_vector(&mut rng, n), k });
            dists.push(SphericalDistribution::Peanut { a: random::spd(&mut rng, n, 2.0) });
            if n == 3 {
                dists.push(SphericalDistribution::Odf { a: random::spd(&mut rng, n, 1.0) });
            }
        }
        for d in &dists {
            let mass = oracle::quad_moments(d, &spec)?.mass;
            suite.deterministic((mass - 1.0).abs(), NORMALIZATION_TOL);
        }
        let bingham = SphericalDistribution::Bingham { a: random::spd(&mut rng, n, 1.0), delta: 0.5 };
        let mass = oracle::quad_moments(&bingham, &spec)?.mass;
        suite.notes.push(format!("bingham n={n}: integral {mass:.6} (reported, not asserted)"));
    }
    for n in 4..=8 {
        let dists = [
            SphericalDistribution::Vmf { u: random::unit_vector(&mut rng, n), k: 2.0 },
            SphericalDistribution::BimodalVmf { u: random::unit_vector(&mut rng, n), k: 2.0 },
            SphericalDistribution::Peanut { a: random::spd(&mut rng, n, 1.0) },
        ];
        for (i, d) in dists.iter().enumerate() {
            let case_seed = seed.wrapping_add((100 * n + i) as u64);
            let verdict = se_check_with_retry(case_seed, |s| {
                let mc = oracle::mc_moments(d, &McSpec::new(n, level.mc_samples(), s)?)?;
                Ok(z(mc.mass - 1.0, mc.stderr.as_ref().map_or(0.0, |e| e.mass)))
            })?;
            suite.statistical(verdict);
        }
    }
    Ok(suite)
}

fn oracle_equivalence(level: Level, seed: u64) -> Result<SuiteResult> {
    let mut suite = SuiteResult::new("oracle_equivalence");
    let mut rng = random::rng(seed.wrapping_add(1));
    let per_k = level.draws(10);
    for n in [2usize, 3] {
        let spec = QuadratureSpec::new(n, level.resolution())?.without_convergence_check();
        let mut dists = Vec::new();
        for k in [0.1, 1.0, 5.0, 20.0, 100.0] {
            if level == Level::Smoke && k > 20.0 {
                continue;
            }
            for _ in 0..per_k {
                dists.push(SphericalDistribution::Vmf { u: random::unit_vector(&mut rng, n), k });
            }
            dists.push(SphericalDistribution::BimodalVmf { u: random::unit_vector(&mut rng, n), k });
        }
        for _ in 0..level.draws(20) {
            dists.push(SphericalDistribution::Peanut { a: random::spd(&mut rng, n, 2.0) });
        }
        for d in &dists {
            let exact = moments::closed_form_moments(d)?;
            let quad = oracle::quad_moments(d, &spec)?;
            suite.deterministic(max_abs_moment_deviation(&exact, &quad), QUAD_MOMENT_TOL);
        }
    }
    for n in 4..=8 {
        let mut dists = Vec::new();
        for k in [1.0, 5.0] {
            dists.push(SphericalDistribution::Vmf { u: random::unit_vector(&mut rng, n), k });
        }
        dists.push(SphericalDistribution::Peanut { a: random::spd(&mut rng, n, 1.5) });
        for (i, d) in dists.iter().enumerate() {
            let exact = moments::closed_form_moments(d)?;
            let verdict = se_check_with_retry(seed.wrapping_add((1000 + 10 * n + i) as u64), |s| {
                Ok(mc_max_z(&oracle::mc_moments(d, &McSpec::new(n, level.mc_samples(), s)?)?, &exact))
            })?;
            suite.statistical(verdict);
        }
    }
    Ok(suite)
}

/// `I_{3/2}/I_{1/2} = coth k - 1/k` and the matching second-moment identity.
pub fn identity_deviations(k: f64) -> Result<(f64, f64)> {
    let coth = 1.0 / k.tanh();
    let r32 = specfun::bessel_ratio(1.5, k)?;
    let r52_over_12 = specfun::bessel_ratio(2.5, k)? * r32;
    let first = (r32 - (coth - 1.0 / k)).abs();
    let second = (r52_over_12 - r32 * r32 - (1.0 - coth / k + 2.0 / (k * k) - coth * coth)).abs();
    Ok((first, second))
}

pub fn log_grid(start: f64, stop: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![start];
    }
    let (a, b) = (start.ln(), stop.ln());
    (0..count).map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp()).collect()
}

fn identities() -> Result<SuiteResult> {
    let mut suite = SuiteResult::new("bessel_identities");
    for k in log_grid(0.05, 50.0, 200) {
        let (first, second) = identity_deviations(k)?;
        suite.deterministic(first, 1e-10);
        suite.deterministic(second, 1e-9);
    }
    Ok(suite)
}

fn bounds(level: Level, seed: u64) -> Result<SuiteResult> {
    let mut suite = SuiteResult::new("anisotropy_bounds");
    let mut rng = random::rng(seed.wrapping_add(2));
    let params = MotilityParams::unit();
    for n in [2usize, 3] {
        let fa_max = if n == 2 { FA2_PEANUT_MAX } else { FA3_PEANUT_MAX };
        for _ in 0..level.draws(1000) {
            let a = random::spd(&mut rng, n, 8.0);
            let closed = anisotropy::peanut_closed_form_report(&a, params)?;
            let fa = closed.fa.unwrap_or(f64::NAN);
            let r = closed.ratio.value();
            suite.condition(fa <= fa_max + anisotropy::BOUND_SLACK, || format!("n={n}: FA {fa} above bound"));
            suite.condition((1.0..=3.0 + anisotropy::BOUND_SLACK).contains(&r), || format!("n={n}: R {r} out of [1, 3]"));
            let generic = anisotropy::generic_report(&SphericalDistribution::Peanut { a }, params)?;
            suite.deterministic(closed.deviation(&generic), CONSISTENCY_TOL);
        }
    }
    let extreme = AnisotropyMatrix::diagonal(&[1e6, 1.0])?;
    let fa = anisotropy::peanut_closed_form_report(&extreme, params)?.fa.unwrap_or(f64::NAN);
    let gap = (fa - FA2_PEANUT_MAX).abs();
    suite.condition(gap <= 1e-4, || format!("A = diag(1e6, 1): FA {fa} is {gap:e} from the bound"));

    for n in [2usize, 3] {
        let u = random::unit_vector(&mut rng, n);
        let report = |k: f64| anisotropy::bimodal_vmf_closed_form_report(k, &u, params);
        let low = report(1e-3)?;
        let high = report(500.0)?;
        let fa_low = low.fa.unwrap_or(f64::NAN);
        let fa_high = high.fa.unwrap_or(f64::NAN);
        suite.condition(fa_low < 1e-2, || format!("n={n}: FA(1e-3) = {fa_low}"));
        suite.condition(fa_high > 0.99, || format!("n={n}: FA(500) = {fa_high}"));
        suite.condition(low.ratio.value() < 1.01, || format!("n={n}: R(1e-3) = {:?}", low.ratio));
        let mut previous: Option<(f64, f64)> = None;
        for k in log_grid(1e-3, 500.0, 50) {
            let r = report(k)?;
            let current = (r.fa.unwrap_or(f64::NAN), r.ratio.value());
            if let Some((fa_prev, r_prev)) = previous {
                suite.condition(current.0 >= fa_prev && current.1 >= r_prev, || format!("n={n}: not monotone at k={k}"));
            }
            previous = Some(current);
            let d = SphericalDistribution::BimodalVmf { u: u.clone(), k };
            let generic = anisotropy::generic_report(&d, params)?;
            suite.deterministic(r.deviation(&generic), CONSISTENCY_TOL);
            if matches!(r.ratio, Ratio::Infinite) {
                suite.notes.push(format!("n={n}: ratio infinite at k={k}"));
            }
        }
    }
    Ok(suite)
}

/// Runs every suite; identical `(level, seed)` give identical summaries.
pub fn run(level: Level, seed: u64) -> Result<Summary> {
    let suites = vec![normalization(level, seed)?, oracle_equivalence(level, seed)?, identities()?, bounds(level, seed)?];
    let passed = suites.iter().all(|s| s.passed);
    Ok(Summary { schema: "1", level, seed, passed, suites })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn retry_rule() {
        let v = se_check_with_retry(1, |_| Ok(1.0)).unwrap();
        assert!(v.passed && !v.retried);
        let v = se_check_with_retry(1, |s| Ok(if s == 1 { 3.5 } else { 3.9 })).unwrap();
        assert!(v.passed && v.retried);
        let v = se_check_with_retry(1, |_| Ok(4.5)).unwrap();
        assert!(!v.passed);
    }

    #[test]
    fn grid_endpoints() {
        let g = log_grid(1e-3, 1e3, 7);
        assert_eq!(g.len(), 7);
        assert!((g[0] - 1e-3).abs() < 1e-18 && (g[6] - 1e3).abs() < 1e-9);
        assert!((g[3] - 1.0).abs() < 1e-14);
    }
}
