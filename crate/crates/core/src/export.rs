//! CSV helpers shared by every exporter.
//!
//! Floats are written with 17 significant digits so that a parsed value is
//! bit-identical to the one in memory. Files may open with `#`-prefixed
//! metadata lines (engine version, config hash, seeds) ahead of the column
//! header.

use std::io::{self, Write};

pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

pub fn join_f64(xs: &[f64]) -> String {
    xs.iter().map(|&x| fmt_f64(x)).collect::<Vec<_>>().join(",")
}

/// Metadata stamped at the top of an exported CSV.
#[derive(Debug, Clone, Default)]
pub struct CsvMeta {
    pub entries: Vec<(String, String)>,
}

impl CsvMeta {
    pub fn new() -> Self {
        let mut meta = Self::default();
        meta.push("engine", crate::ENGINE_VERSION);
        meta
    }

    pub fn push(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.entries.push((key.to_string(), value.to_string()));
        self
    }

    pub fn write<W: Write>(&self, w: &mut W) -> io::Result<()> {
        for (k, v) in &self.entries {
            writeln!(w, "# {k}={v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_bits() {
        for x in [0.1, 1.0 / 3.0, 2.161_276_767_665_082e-5, -7.5e300, 5e-324] {
            let back: f64 = fmt_f64(x).parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits());
        }
        assert_eq!(fmt_f64(f64::NEG_INFINITY), "-inf");
    }
}
