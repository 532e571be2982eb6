//! Ingestion of externally simulated dispersion tables.
//!
//! File layout: UTF-8 text, `#` comment lines, a header row
//! `wavelength_nm,width_nm,temperature_K,n_eff`, then one sample per row.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use super::{DispersionModel, IndexPolynomial, ThermoOptic, ValidityWindow, WidthDispersion};
use crate::error::{Error, Result};

pub const TABLE_HEADER: &str = "wavelength_nm,width_nm,temperature_K,n_eff";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TableRow {
    pub wavelength_nm: f64,
    pub width_nm: u32,
    pub temperature_k: f64,
    pub n_eff: f64,
}

impl TableRow {
    fn key(&self) -> (u32, f64, f64) {
        (self.width_nm, self.temperature_k, self.wavelength_nm)
    }
}

/// Rows strictly sorted by (width, temperature, wavelength) with no duplicate keys.
#[derive(Clone, Debug, PartialEq)]
pub struct DispersionTable {
    rows: Vec<TableRow>,
    source: String,
}

#[derive(Clone, Debug)]
pub struct FitOptions {
    pub order: usize,
    pub reference_temperature_k: f64,
    /// Used when a width has samples at a single temperature only.
    pub fallback_thermo_optic: ThermoOptic,
    /// Temperature validity window for single-temperature tables.
    pub temperature_window_k: Option<(f64, f64)>,
    pub max_residual: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            order: 6,
            reference_temperature_k: 300.0,
            fallback_thermo_optic: ThermoOptic::default(),
            temperature_window_k: None,
            max_residual: 1e-3,
        }
    }
}

impl DispersionTable {
    pub fn new(mut rows: Vec<TableRow>, source: impl Into<String>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Parse {
                line: 0,
                message: "table has no data rows".into(),
            });
        }
        for r in &rows {
            if !(r.n_eff > 1.0 && r.n_eff < 3.0) {
                return Err(Error::Parse {
                    line: 0,
                    message: format!("n_eff {} outside (1, 3)", r.n_eff),
                });
            }
        }
        rows.sort_by(|a, b| a.key().partial_cmp(&b.key()).expect("finite keys"));
        if let Some(w) = rows.windows(2).find(|w| w[0].key() == w[1].key()) {
            return Err(Error::Parse {
                line: 0,
                message: format!(
                    "duplicate key (width {} nm, {} K, {} nm)",
                    w[0].width_nm, w[0].temperature_k, w[0].wavelength_nm
                ),
            });
        }
        Ok(Self {
            rows,
            source: source.into(),
        })
    }

    pub fn parse(text: &str, source: impl Into<String>) -> Result<Self> {
        let mut rows = Vec::new();
        let mut seen_header = false;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !seen_header {
                let header: Vec<&str> = line.split(',').map(str::trim).collect();
                if header.join(",") != TABLE_HEADER {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("expected header `{TABLE_HEADER}`"),
                    });
                }
                seen_header = true;
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 4 {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected 4 fields, found {}", fields.len()),
                });
            }
            let num = |i: usize, name: &str| -> Result<f64> {
                fields[i]
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Parse {
                        line: line_no,
                        message: format!("invalid {name} `{}`", fields[i]),
                    })
            };
            let wavelength_nm = num(0, "wavelength_nm")?;
            let width = num(1, "width_nm")?;
            let temperature_k = num(2, "temperature_K")?;
            let n_eff = num(3, "n_eff")?;
            if width <= 0.0 || width.fract() != 0.0 || width > u32::MAX as f64 {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("width_nm must be a positive integer, got {width}"),
                });
            }
            if !(n_eff > 1.0 && n_eff < 3.0) {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("n_eff {n_eff} outside (1, 3)"),
                });
            }
            rows.push(TableRow {
                wavelength_nm,
                width_nm: width as u32,
                temperature_k,
                n_eff,
            });
        }
        if !seen_header {
            return Err(Error::Parse {
                line: 0,
                message: "missing header row".into(),
            });
        }
        Self::new(rows, source)
    }

    pub fn rows(&self) -> &[TableRow] {
        &self.rows
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# source: {}", self.source).unwrap();
        writeln!(out, "{TABLE_HEADER}").unwrap();
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{:.12}",
                r.wavelength_nm, r.width_nm, r.temperature_k, r.n_eff
            )
            .unwrap();
        }
        out
    }

    /// Per-width least-squares polynomial fit plus a linear thermo-optic fit.
    pub fn fit(&self, options: &FitOptions) -> Result<DispersionModel> {
        let mut by_width: BTreeMap<u32, Vec<&TableRow>> = BTreeMap::new();
        for r in &self.rows {
            by_width.entry(r.width_nm).or_default().push(r);
        }

        let mut lambda_lo = f64::NEG_INFINITY;
        let mut lambda_hi = f64::INFINITY;
        let mut temps: Vec<f64> = self.rows.iter().map(|r| r.temperature_k).collect();
        temps.sort_by(|a, b| a.partial_cmp(b).unwrap());
        temps.dedup();

        let mut widths = Vec::new();
        for (&width_nm, rows) in &by_width {
            let (lo, hi) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
                (lo.min(r.wavelength_nm), hi.max(r.wavelength_nm))
            });
            lambda_lo = lambda_lo.max(lo);
            lambda_hi = lambda_hi.min(hi);
            widths.push(fit_width(width_nm, rows, lo, hi, options)?);
        }

        let temperature_k = if temps.len() >= 2 {
            (temps[0], temps[temps.len() - 1])
        } else {
            options.temperature_window_k.ok_or_else(|| {
                Error::Domain("single-temperature table needs an explicit temperature window".into())
            })?
        };
        if !(lambda_hi > lambda_lo) {
            return Err(Error::Domain("widths share no common wavelength range".into()));
        }
        DispersionModel::new(
            widths,
            ValidityWindow {
                wavelength_nm: (lambda_lo, lambda_hi),
                temperature_k,
            },
            options.reference_temperature_k,
            self.source.clone(),
        )
    }
}

fn fit_width(
    width_nm: u32,
    rows: &[&TableRow],
    lambda_lo: f64,
    lambda_hi: f64,
    options: &FitOptions,
) -> Result<WidthDispersion> {
    let order = options.order;
    let mut distinct: Vec<f64> = rows.iter().map(|r| r.wavelength_nm).collect();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distinct.dedup();
    if distinct.len() < order + 1 {
        return Err(Error::Domain(format!(
            "width {width_nm} nm has {} distinct wavelengths, order {order} needs {}",
            distinct.len(),
            order + 1
        )));
    }
    let multi_temperature = rows.iter().any(|r| r.temperature_k != rows[0].temperature_k);

    let center_nm = 0.5 * (lambda_lo + lambda_hi);
    let half_span_nm = 0.5 * (lambda_hi - lambda_lo);
    let tref = options.reference_temperature_k;
    let thermo_columns = if multi_temperature { 2 } else { 0 };
    let ncols = order + 1 + thermo_columns;

    let design = DMatrix::from_fn(rows.len(), ncols, |i, j| {
        let r = rows[i];
        let x = (r.wavelength_nm - center_nm) / half_span_nm;
        if j <= order {
            x.powi(j as i32)
        } else if j == order + 1 {
            r.temperature_k - tref
        } else {
            (r.temperature_k - tref) * x
        }
    });
    let target = DVector::from_iterator(
        rows.len(),
        rows.iter().map(|r| {
            if multi_temperature {
                r.n_eff
            } else {
                r.n_eff - options.fallback_thermo_optic.at(r.wavelength_nm) * (r.temperature_k - tref)
            }
        }),
    );
    let solution = design
        .clone()
        .svd(true, true)
        .solve(&target, 1e-14)
        .map_err(|e| Error::Domain(format!("least-squares solve failed: {e}")))?;

    let residual = (&design * &solution - &target).amax();
    if residual > options.max_residual {
        return Err(Error::Fit {
            width_nm,
            residual,
            bound: options.max_residual,
        });
    }

    let coefficients: Vec<f64> = solution.iter().take(order + 1).copied().collect();
    let thermo_optic = if multi_temperature {
        ThermoOptic {
            coefficient_per_k: solution[order + 1],
            slope_per_k_nm: solution[order + 2] / half_span_nm,
            reference_nm: center_nm,
        }
    } else {
        options.fallback_thermo_optic.clone()
    };
    Ok(WidthDispersion {
        width_nm,
        index: IndexPolynomial {
            center_nm,
            half_span_nm,
            coefficients,
        },
        thermo_optic,
        fit_residual: residual,
    })
}

/// Read and fit a dispersion table file.
pub fn load_dispersion_table(path: impl AsRef<Path>, options: &FitOptions) -> Result<DispersionModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let label = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    DispersionTable::parse(&text, label)?.fit(options)
}
