//! Gamma function and modified Bessel functions of the first kind `I_p(x)`
//! for real order `p >= 0` and real argument `x >= 0`.
//!
//! Bessel values are carried internally as `mantissa * exp(log_scale)` so
//! that ratios such as `I_{n/2}(k) / I_{n/2-1}(k)` stay finite long after
//! `I_p(k)` itself has overflowed (`k` beyond roughly 700).

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

const SERIES_MAX_TERMS: usize = 500;
const SERIES_REL_TOL: f64 = 1e-17;
const ASYMPTOTIC_MAX_TERMS: usize = 500;

/// Arguments above this make `exp(x)` overflow; unscaled values are flagged.
pub const OVERFLOW_ARGUMENT: f64 = 700.0;

/// Order `p` of a modified Bessel function. Finite and nonnegative.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize)]
pub struct BesselOrder(f64);

impl BesselOrder {
    pub fn new(p: f64) -> Result<Self> {
        if !p.is_finite() || p < 0.0 {
            return Err(Error::Domain(format!("Bessel order must be finite and >= 0, got {p}")));
        }
        Ok(Self(p))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BesselMethod {
    Series,
    Asymptotic,
    ClosedFormHalfInteger,
}

/// Result of evaluating `I_p(x)`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BesselEval {
    /// `I_p(x)`, or `+inf` when it is not representable (see `overflow`).
    pub value: f64,
    /// `I_p(x) * exp(-x)`.
    pub scaled_value: f64,
    pub method: BesselMethod,
    pub overflow: bool,
}

/// `Γ(x)` for finite `x > 0`.
pub fn gamma(x: f64) -> Result<f64> {
    check_gamma_arg(x)?;
    if x == x.floor() && x <= 171.0 {
        // exact for x <= 23, correctly rounded products beyond
        return Ok((1..x as u64).fold(1.0, |acc, i| acc * i as f64));
    }
    if x < 0.5 {
        return Ok(lanczos(x + 1.0) / x);
    }
    Ok(lanczos(x))
}

/// `ln Γ(x)` for finite `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    check_gamma_arg(x)?;
    if x < 0.5 {
        return Ok(ln_lanczos(x + 1.0) - x.ln());
    }
    Ok(ln_lanczos(x))
}

fn check_gamma_arg(x: f64) -> Result<()> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain(format!("gamma requires finite x > 0, got {x}")));
    }
    Ok(())
}

fn lanczos_sum(z: f64) -> f64 {
    LANCZOS_COEFFS[1..]
        .iter()
        .enumerate()
        .fold(LANCZOS_COEFFS[0], |acc, (i, c)| acc + c / (z + (i + 1) as f64))
}

// Valid for x >= 0.5.
fn lanczos(x: f64) -> f64 {
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    // split the power so t^(z+1/2) cannot overflow before exp(-t) pulls it back
    let half = t.powf(0.5 * (z + 0.5));
    (2.0 * PI).sqrt() * half * (half * (-t).exp()) * lanczos_sum(z)
}

fn ln_lanczos(x: f64) -> f64 {
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln()
}

/// `mantissa * exp(log_scale)`.
#[derive(Clone, Copy, Debug)]
struct LogScaled {
    mantissa: f64,
    log_scale: f64,
}

impl LogScaled {
    fn zero() -> Self {
        Self { mantissa: 0.0, log_scale: 0.0 }
    }

    fn value(self) -> f64 {
        if self.mantissa == 0.0 {
            return 0.0;
        }
        self.mantissa * self.log_scale.exp()
    }

    fn scaled(self, x: f64) -> f64 {
        if self.mantissa == 0.0 {
            return 0.0;
        }
        self.mantissa * (self.log_scale - x).exp()
    }

    fn ln(self) -> f64 {
        self.mantissa.ln() + self.log_scale
    }
}

fn half_integer_index(p: f64) -> Option<i32> {
    // -1/2 is only reached internally as the lower order of a ratio
    [-0.5, 0.5, 1.5, 2.5].iter().position(|&h| h == p).map(|i| i as i32)
}

fn series_limit(p: f64) -> f64 {
    f64::max(30.0, 0.5 * p * p + 10.0)
}

fn select_method(p: f64, x: f64) -> BesselMethod {
    match half_integer_index(p) {
        Some(i) if i <= 1 && x > 0.0 => return BesselMethod::ClosedFormHalfInteger,
        Some(_) if x >= 1.0 => return BesselMethod::ClosedFormHalfInteger,
        _ => {}
    }
    if x <= series_limit(p) {
        BesselMethod::Series
    } else {
        BesselMethod::Asymptotic
    }
}

// Power series in (x/2)^2. Orders down to -1/2 are accepted (Γ(p+m+1) stays
// positive for p > -1), which the ratio I_p / I_{p-1} needs at p = 1/2.
fn series(p: f64, x: f64) -> Result<LogScaled> {
    debug_assert!(p > -1.0);
    if x == 0.0 {
        return Ok(match p {
            0.0 => LogScaled { mantissa: 1.0, log_scale: 0.0 },
            p if p > 0.0 => LogScaled::zero(),
            _ => LogScaled { mantissa: f64::INFINITY, log_scale: 0.0 },
        });
    }
    let q = 0.25 * x * x;
    let mut log_scale = p * (0.5 * x).ln() - ln_gamma(p + 1.0)?;
    let mut term = 1.0;
    let mut sum = 1.0;
    for m in 1..=SERIES_MAX_TERMS {
        let m = m as f64;
        term *= q / (m * (m + p));
        sum += term;
        if term < SERIES_REL_TOL * sum {
            return Ok(LogScaled { mantissa: sum, log_scale });
        }
        if sum > 1e280 {
            sum *= 1e-280;
            term *= 1e-280;
            log_scale += 280.0 * std::f64::consts::LN_10;
        }
    }
    Err(Error::Convergence { what: "Bessel I power series", iterations: SERIES_MAX_TERMS })
}

// Large-argument expansion, truncated at the smallest term.
fn asymptotic(p: f64, x: f64) -> LogScaled {
    let mu = 4.0 * p * p;
    let mut term: f64 = 1.0;
    let mut sum = 1.0;
    for m in 1..=ASYMPTOTIC_MAX_TERMS {
        let odd = (2 * m - 1) as f64;
        let next = -term * (mu - odd * odd) / (m as f64 * 8.0 * x);
        if next.abs() >= term.abs() {
            break;
        }
        sum += next;
        term = next;
        if term == 0.0 || term.abs() < SERIES_REL_TOL * sum.abs() {
            break;
        }
    }
    LogScaled { mantissa: sum / (2.0 * PI * x).sqrt(), log_scale: x }
}

// sinh/cosh forms of I_{-1/2}, I_{1/2}, I_{3/2}, I_{5/2}, carried with e^x factored out.
fn half_integer(index: i32, x: f64) -> LogScaled {
    let e = (-2.0 * x).exp();
    let sh = -0.5 * (-2.0 * x).exp_m1();
    let ch = 0.5 * (1.0 + e);
    let pref = (2.0 / (PI * x)).sqrt();
    let body = match index {
        0 => ch,
        1 => sh,
        2 => ch - sh / x,
        _ => (1.0 + 3.0 / (x * x)) * sh - 3.0 * ch / x,
    };
    LogScaled { mantissa: pref * body, log_scale: x }
}

fn evaluate(p: f64, x: f64, method: BesselMethod) -> Result<LogScaled> {
    match method {
        BesselMethod::Series => series(p, x),
        BesselMethod::Asymptotic => Ok(asymptotic(p, x)),
        BesselMethod::ClosedFormHalfInteger => match half_integer_index(p) {
            Some(i) if x > 0.0 => Ok(half_integer(i, x)),
            _ => Err(Error::Domain(format!("no closed form for I_{p} at x = {x}"))),
        },
    }
}

fn check_argument(x: f64) -> Result<()> {
    if x.is_nan() || x < 0.0 || x.is_infinite() {
        return Err(Error::Domain(format!("Bessel argument must be finite and >= 0, got {x}")));
    }
    Ok(())
}

/// `I_p(x)` with automatic method selection.
pub fn bessel_i(p: BesselOrder, x: f64) -> Result<BesselEval> {
    check_argument(x)?;
    let method = select_method(p.value(), x);
    bessel_i_with(p, x, method)
}

/// `I_p(x)` forced through a specific evaluation path.
///
/// The closed form only exists for `p` in `{1/2, 3/2, 5/2}`; the asymptotic
/// expansion is only meaningful for large `x`.
pub fn bessel_i_with(p: BesselOrder, x: f64, method: BesselMethod) -> Result<BesselEval> {
    check_argument(x)?;
    if method == BesselMethod::Asymptotic && x == 0.0 {
        return Err(Error::Domain("asymptotic expansion needs x > 0".into()));
    }
    let rep = evaluate(p.value(), x, method)?;
    let value = rep.value();
    Ok(BesselEval {
        value: if value.is_finite() { value } else { f64::INFINITY },
        scaled_value: rep.scaled(x),
        method,
        overflow: !value.is_finite(),
    })
}

/// `ln I_p(x)`; `-inf` at `x = 0` for `p > 0`.
pub fn ln_bessel_i(p: BesselOrder, x: f64) -> Result<f64> {
    check_argument(x)?;
    let rep = evaluate(p.value(), x, select_method(p.value(), x))?;
    Ok(if rep.mantissa == 0.0 { f64::NEG_INFINITY } else { rep.ln() })
}

/// `I_p(x) / I_{p-1}(x)` for `p >= 1/2`, `x >= 0`. Lies in `[0, 1)`.
pub fn bessel_ratio(p: f64, x: f64) -> Result<f64> {
    if !p.is_finite() || p < 0.5 {
        return Err(Error::Domain(format!("bessel_ratio requires order p >= 1/2, got {p}")));
    }
    check_argument(x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    let num = evaluate(p, x, select_method(p, x))?;
    let den = evaluate(p - 1.0, x, select_method(p - 1.0, x))?;
    if num.mantissa == 0.0 {
        return Ok(0.0);
    }
    Ok(num.mantissa / den.mantissa * (num.log_scale - den.log_scale).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn order(p: f64) -> BesselOrder {
        BesselOrder::new(p).unwrap()
    }

    #[test]
    fn gamma_trivial_values() {
        assert_eq!(gamma(1.0).unwrap(), 1.0);
        assert_eq!(gamma(5.0).unwrap(), 24.0);
        assert_relative_eq!(gamma(0.5).unwrap(), PI.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn gamma_rejects_bad_input() {
        for x in [0.0, -1.0, -0.5, f64::NAN, f64::INFINITY] {
            assert!(matches!(gamma(x), Err(Error::Domain(_))), "{x}");
        }
    }

    #[test]
    fn order_must_be_nonnegative() {
        assert!(BesselOrder::new(-0.1).is_err());
        assert!(BesselOrder::new(f64::NAN).is_err());
    }

    #[test]
    fn bessel_at_zero() {
        assert_eq!(bessel_i(order(0.0), 0.0).unwrap().value, 1.0);
        assert_eq!(bessel_i(order(1.5), 0.0).unwrap().value, 0.0);
        assert_eq!(bessel_i(order(3.0), 0.0).unwrap().value, 0.0);
    }

    #[test]
    fn bessel_rejects_bad_argument() {
        assert!(bessel_i(order(1.0), -1e-3).is_err());
        assert!(bessel_i(order(1.0), f64::NAN).is_err());
    }

    #[test]
    fn half_order_at_one() {
        let closed = (2.0 / PI).sqrt() * 1f64.sinh();
        let eval = bessel_i(order(0.5), 1.0).unwrap();
        assert_relative_eq!(eval.value, closed, max_relative = 1e-15);
        assert_relative_eq!(eval.value, 0.937_674_888_245_487_6, max_relative = 1e-14);
        let series = bessel_i_with(order(0.5), 1.0, BesselMethod::Series).unwrap();
        assert_relative_eq!(series.value, closed, max_relative = 1e-14);
    }

    #[test]
    fn overflow_is_flagged() {
        let eval = bessel_i(order(1.0), 1e4).unwrap();
        assert!(eval.overflow);
        assert!(eval.value.is_infinite());
        assert!(eval.scaled_value.is_finite() && eval.scaled_value > 0.0);
        assert!(!bessel_i(order(1.0), 500.0).unwrap().overflow);
    }

    #[test]
    fn method_selection() {
        assert_eq!(bessel_i(order(0.0), 30.0).unwrap().method, BesselMethod::Series);
        assert_eq!(bessel_i(order(0.0), 30.5).unwrap().method, BesselMethod::Asymptotic);
        assert_eq!(bessel_i(order(20.0), 210.0).unwrap().method, BesselMethod::Series);
        assert_eq!(bessel_i(order(20.0), 211.0).unwrap().method, BesselMethod::Asymptotic);
        assert_eq!(bessel_i(order(1.5), 2.0).unwrap().method, BesselMethod::ClosedFormHalfInteger);
        assert_eq!(bessel_i(order(1.5), 0.5).unwrap().method, BesselMethod::Series);
    }

    #[test]
    fn series_exhaustion_is_an_error() {
        let err = bessel_i_with(order(1.0), 2000.0, BesselMethod::Series).unwrap_err();
        assert!(matches!(err, Error::Convergence { .. }));
    }

    #[test]
    fn ratio_domain() {
        assert!(bessel_ratio(0.4, 1.0).is_err());
        assert!(bessel_ratio(1.0, -1.0).is_err());
        assert_eq!(bessel_ratio(1.5, 0.0).unwrap(), 0.0);
        assert_eq!(bessel_ratio(0.5, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn ratio_small_argument() {
        let r = bessel_ratio(1.5, 1e-9).unwrap();
        assert!((0.0..1e-9).contains(&r));
        // I_1(x)/I_0(x) ~ x/2 without underflow
        assert_relative_eq!(bessel_ratio(1.0, 1e-300).unwrap(), 5e-301, max_relative = 1e-12);
    }

    #[test]
    fn ratio_at_half_order_uses_tanh() {
        // I_{1/2}/I_{-1/2} = tanh x
        for x in [0.01, 0.3, 1.0, 7.0, 50.0] {
            assert_relative_eq!(bessel_ratio(0.5, x).unwrap(), x.tanh(), max_relative = 1e-13);
        }
    }

    #[test]
    fn ln_bessel_matches_value() {
        let v = bessel_i(order(2.0), 3.0).unwrap().value;
        assert_relative_eq!(ln_bessel_i(order(2.0), 3.0).unwrap(), v.ln(), max_relative = 1e-14);
        assert_eq!(ln_bessel_i(order(2.0), 0.0).unwrap(), f64::NEG_INFINITY);
        // stays finite where the value itself overflows
        assert!(ln_bessel_i(order(0.0), 1e5).unwrap().is_finite());
    }
}
