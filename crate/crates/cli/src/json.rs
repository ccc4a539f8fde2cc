//! JSON emission with a fixed float format: every f64 is written with 17
//! significant digits, so equal values serialize to identical bytes and
//! reports are byte-reproducible.

use serde::Serialize;
use serde_json::ser::Formatter;
use std::io;

pub struct SigDigitFormatter;

impl Formatter for SigDigitFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        // one leading digit plus 16 fractional digits = 17 significant
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

pub fn to_vec_pretty17<T: Serialize>(value: &T) -> anyhow::Result<Vec<u8>> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SigDigitFormatter);
    value.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_carry_seventeen_significant_digits() {
        #[derive(Serialize)]
        struct S {
            x: f64,
        }
        let bytes = to_vec_pretty17(&S { x: 1.0 / 3.0 }).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        assert!(text.contains("3.3333333333333331e-1"), "{text}");
    }

    #[test]
    fn non_finite_serializes_as_null() {
        #[derive(Serialize)]
        struct S {
            x: f64,
        }
        let bytes = to_vec_pretty17(&S { x: f64::INFINITY }).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        assert!(text.contains("null"), "{text}");
    }
}
