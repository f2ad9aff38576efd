//! JSON output with round-trip float formatting.

use std::io;

use serde::Serialize;
use serde_json::ser::Formatter;
use serde_json::value::RawValue;

/// Significant digits for every emitted double.
pub const SIGNIFICANT_DIGITS: usize = 17;
/// Significant digits for the bound constants.
pub const BOUND_DIGITS: usize = 12;

/// Formats `v` with `digits` significant digits; positional notation for
/// moderate exponents, scientific otherwise. Non-finite values become `null`.
pub fn format_sig(v: f64, digits: usize) -> String {
    if !v.is_finite() {
        return "null".into();
    }
    if v == 0.0 {
        return "0.0".into();
    }
    let sci = format!("{:.*e}", digits - 1, v);
    let exp: i32 = sci[sci.find('e').expect("exponent") + 1..].parse().expect("integer exponent");
    if (-5..digits as i32).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(1) as usize;
        format!("{v:.decimals$}")
    } else {
        sci
    }
}

pub fn format_f64(v: f64) -> String {
    format_sig(v, SIGNIFICANT_DIGITS)
}

/// `format_sig` with trailing zeros removed, so `3.0` prints as `3`.
pub fn format_trimmed(v: f64, digits: usize) -> String {
    let s = format_sig(v, digits);
    if s.contains('e') || !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// A number emitted verbatim, bypassing the 17-digit formatter.
pub fn raw_number(v: f64, digits: usize) -> Box<RawValue> {
    RawValue::from_string(format_trimmed(v, digits)).expect("formatted number is valid JSON")
}

struct Precise;

impl Formatter for Precise {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Compact JSON with 17 significant digits per double.
pub fn to_string<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Precise);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(out).expect("serde_json writes UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [1.0 / 3.0, 5.0 / 3.0, 0.1, 1e-7, 6.02e23, -2.5e-300, 123456.789] {
            let s = format_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
            let digits: String = s.split('e').next().unwrap().chars().filter(char::is_ascii_digit).collect();
            assert_eq!(digits.trim_start_matches('0').len(), 17, "{s}");
        }
        assert_eq!(format_f64(1.0 / 3.0), "0.33333333333333331");
        assert_eq!(format_f64(1.0), "1.0000000000000000");
    }

    #[test]
    fn bound_constants() {
        assert_eq!(format_trimmed(2.0 / 10f64.sqrt(), BOUND_DIGITS), "0.632455532034");
        assert_eq!(format_trimmed(2.0 / 11f64.sqrt(), BOUND_DIGITS), "0.603022689156");
        assert_eq!(format_trimmed(3.0, BOUND_DIGITS), "3");
    }

    #[test]
    fn non_finite_is_null() {
        assert_eq!(to_string(&vec![f64::NAN, 0.5]).unwrap(), "[null,0.50000000000000000]");
    }
}
