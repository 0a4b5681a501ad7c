//! JSON and CSV output with fixed float formatting.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::Formatter;

pub const SCHEMA: &str = "ultra-hardy/1";

/// Compact JSON with every f64 written at 17 significant digits.
struct FixedFloat;

impl Formatter for FixedFloat {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{}", fixed(value))
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// `{:.16e}`; callers handle non-finite values.
pub fn fixed(value: f64) -> String {
    format!("{value:.16e}")
}

pub fn to_json<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedFloat);
    value.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("serde_json emits UTF-8"))
}

/// One row of the sweep table.
#[derive(Debug, Clone, Serialize)]
pub struct TableRow {
    pub lambda: f64,
    pub sigma: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    pub deficit_min: f64,
    pub ratio: f64,
}

pub const CSV_HEADER: &str = "lambda,sigma,Q,deficit_min,ratio";

pub fn to_csv(rows: &[TableRow]) -> String {
    let cell = |v: f64| if v.is_finite() { fixed(v) } else { String::new() };
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let fields = [r.lambda, r.sigma, r.q, r.deficit_min, r.ratio].map(cell);
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_use_seventeen_digits() {
        let s = to_json(&serde_json::json!({"a": 0.1, "b": [1.0, f64::NAN]})).unwrap();
        assert_eq!(s, "{\"a\":1.0000000000000001e-1,\"b\":[1.0000000000000000e0,null]}\n");
        let back: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["a"].as_f64(), Some(0.1));
    }

    #[test]
    fn csv_layout() {
        let rows = [TableRow { lambda: 1.0, sigma: 0.5, q: 0.8, deficit_min: 0.1, ratio: f64::NAN }];
        let csv = to_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert_eq!(lines.next().unwrap().split(',').count(), 5);
        assert!(csv.trim_end().ends_with(','));
    }
}
