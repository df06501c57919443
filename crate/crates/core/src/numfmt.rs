//! Fixed-precision float printing for JSON and CSV output.
//!
//! JSON numbers carry 17 significant digits and CSV cells 12. Output is
//! positional for moderate magnitudes and exponential otherwise; both forms
//! are valid JSON number literals.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

pub const JSON_DIGITS: usize = 17;
pub const CSV_DIGITS: usize = 12;

/// Format `v` with `digits` significant digits.
pub fn sig(v: f64, digits: usize) -> String {
    assert!(digits >= 1);
    if !v.is_finite() {
        return if v.is_nan() {
            "NaN".to_string()
        } else if v > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        };
    }
    if v == 0.0 {
        return format!("{:.*}", digits - 1, 0.0);
    }
    // Round first so that the exponent reflects the printed mantissa.
    let sci = format!("{:.*e}", digits - 1, v);
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if (-5..16).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        format!("{:.*}", decimals, v)
    } else {
        sci
    }
}

/// Pretty JSON formatter that writes every float with [`JSON_DIGITS`]
/// significant digits.
pub struct SigFormatter {
    inner: PrettyFormatter<'static>,
}

impl Default for SigFormatter {
    fn default() -> Self {
        Self {
            inner: PrettyFormatter::with_indent(b"  "),
        }
    }
}

impl Formatter for SigFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            writer.write_all(sig(value, JSON_DIGITS).as_bytes())
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_array(writer)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + io::Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.inner.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object(writer)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + io::Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.inner.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object_value(writer)
    }
}

/// Serialize `value` as pretty JSON with 17-digit floats and a trailing newline.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigFormatter::default());
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(sig(1.0, 17), "1.0000000000000000");
        assert_eq!(sig(0.5, 17), "0.50000000000000000");
        assert_eq!(sig(-12.0 / 11.0, 12), "-1.09090909091");
        assert_eq!(sig(0.0, 3), "0.00");
        assert_eq!(sig(1.5e-9, 3), "1.50e-9");
        assert_eq!(sig(9.996e15, 3), "1.00e16");
    }

    #[test]
    fn rounding_carries_into_exponent() {
        assert_eq!(sig(9.9996, 4), "10.00");
        assert_eq!(sig(0.099999, 2), "0.10");
    }

    #[test]
    fn sig_round_trips_through_parse() {
        for &v in &[std::f64::consts::PI, 1.0 / 3.0, 1e-7, 123456.789, -2.5e20] {
            let back: f64 = sig(v, 17).parse().unwrap();
            assert_eq!(back, v);
        }
    }

    #[test]
    fn json_output_is_parseable() {
        #[derive(Serialize)]
        struct P {
            a: f64,
            b: [f64; 2],
            n: usize,
        }
        let s = to_json_string(&P {
            a: 0.1,
            b: [1e-20, 3.0],
            n: 4,
        })
        .unwrap();
        assert!(s.ends_with("}\n"));
        assert!(s.contains("0.10000000000000001"));
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["n"], 4);
        assert_eq!(v["b"][1].as_f64().unwrap(), 3.0);
    }
}
