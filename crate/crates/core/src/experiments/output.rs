//! Figure-ready CSV and JSON writers with `.meta.json` sidecars.
//!
//! Sidecars carry the configuration hash and the fully resolved parameters but
//! never paths or wall-clock times, so outputs are byte-identical across runs.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::Config;
use crate::error::Result;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// `x` with 12 significant digits, in fixed notation when the decimal
/// exponent lies in [−5, 12) and scientific otherwise; trailing zeros are
/// trimmed. Infinities print as `inf`/`-inf`.
pub fn format_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exponent) = sci.split_once('e').expect("scientific format");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    if (-5..12).contains(&exponent) {
        let decimals = (11 - exponent).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exponent}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Writes experiment outputs into one directory and remembers what was written.
pub struct OutputWriter<'a> {
    dir: PathBuf,
    experiment: &'a str,
    config: &'a Config,
    dispersion_fingerprint: String,
    written: Vec<PathBuf>,
}

impl<'a> OutputWriter<'a> {
    pub fn new(dir: &Path, experiment: &'a str, config: &'a Config, dispersion_fingerprint: String) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            experiment,
            config,
            dispersion_fingerprint,
            written: Vec::new(),
        })
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    fn meta(&self, file: &str, columns: Option<&[&str]>, details: Value) -> Value {
        let mut meta = json!({
            "file": file,
            "experiment": self.experiment,
            "tool_version": TOOL_VERSION,
            "config_hash": self.config.hash(),
            "dispersion_fingerprint": self.dispersion_fingerprint,
            "rate_convention": "kappa is the total energy decay rate (full linewidth); reported as kappa/2pi",
            "details": details,
            "config": self.config,
        });
        if let Some(columns) = columns {
            meta["columns"] = json!(columns);
        }
        meta
    }

    fn put(&mut self, name: &str, contents: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents)?;
        self.written.push(path);
        Ok(())
    }

    fn put_meta(&mut self, name: &str, meta: Value) -> Result<()> {
        let mut text = serde_json::to_string_pretty(&meta).expect("metadata serialises");
        text.push('\n');
        self.put(&format!("{name}.meta.json"), text.as_bytes())
    }

    /// CSV with a header row and 12-significant-digit numbers.
    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<f64>], details: Value) -> Result<()> {
        let mut text = header.join(",");
        text.push('\n');
        for row in rows {
            let cells: Vec<String> = row.iter().map(|&x| format_sig(x)).collect();
            text.push_str(&cells.join(","));
            text.push('\n');
        }
        self.put(name, text.as_bytes())?;
        let meta = self.meta(name, Some(header), details);
        self.put_meta(name, meta)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T, details: Value) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).expect("output serialises");
        text.push('\n');
        self.put(name, text.as_bytes())?;
        let meta = self.meta(name, None, details);
        self.put_meta(name, meta)
    }

    /// Plain text output without a sidecar (used for the calibration block).
    pub fn text(&mut self, name: &str, contents: &str, details: Value) -> Result<()> {
        self.put(name, contents.as_bytes())?;
        let meta = self.meta(name, None, details);
        self.put_meta(name, meta)
    }
}

#[cfg(test)]
mod tests {
    use super::format_sig;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_sig(1.0), "1");
        assert_eq!(format_sig(0.1), "0.1");
        assert_eq!(format_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_sig(1623.123456789012), "1623.12345679");
        assert_eq!(format_sig(1.5e-9), "1.5e-9");
        assert_eq!(format_sig(2.5e14), "2.5e14");
        assert_eq!(format_sig(-0.000123), "-0.000123");
        assert_eq!(format_sig(9.9999999999999), "10");
        assert_eq!(format_sig(f64::INFINITY), "inf");
    }
}
