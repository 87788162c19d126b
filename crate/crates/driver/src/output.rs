//! Report writers: CSV for trajectories, JSON for verdicts and summaries.
//!
//! JSON objects come out with sorted keys and floats in shortest round-trip
//! form, so identical runs produce identical bytes.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::error::Result;

/// Destination named by the `out` key, or stdout.
pub fn sink(out: Option<&str>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) if path != "-" => Box::new(BufWriter::new(File::create(Path::new(path))?)),
        _ => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn write_json(out: Option<&str>, value: &Value) -> Result<()> {
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Writes a header row followed by `rows`.
pub fn write_csv<I, R>(out: Option<&str>, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(sink(out)?);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// A float as JSON; non-finite values become the strings `inf`, `-inf`, `nan`.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

pub fn complex(z: Complex64) -> Value {
    json!([num(z.re), num(z.im)])
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

/// A float as a CSV field, shortest round-trip form.
pub fn field(x: f64) -> String {
    format!("{x:?}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_finite_numbers() {
        assert_eq!(num(f64::INFINITY), json!("inf"));
        assert_eq!(num(f64::NEG_INFINITY), json!("-inf"));
        assert_eq!(num(0.5), json!(0.5));
        assert_eq!(field(0.1), "0.1");
        assert_eq!(field(3.0), "3.0");
    }
}
