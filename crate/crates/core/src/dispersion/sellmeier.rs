//! Reference effective-index data for x-cut TFLN ridge waveguides.
//!
//! Bulk extraordinary index of congruent LiNbO3 from a three-term Sellmeier
//! equation (Zelmon et al., JOSA B 14, 3319, 1997), minus a width-dependent
//! geometric offset that is linear in wavelength. The offsets are documented
//! assumptions standing in for mode-solver output; they are not fitted to any
//! measured device.

use super::table::{DispersionTable, TableRow};
use super::ThermoOptic;

/// Widths with a committed default dispersion set.
pub const TFLN_DEFAULT_WIDTHS: [u32; 3] = [1400, 1500, 1600];

/// Sampling used for the committed reference table.
pub const REFERENCE_WAVELENGTH_NM: (f64, f64) = (700.0, 1700.0);
pub const REFERENCE_STEP_NM: f64 = 5.0;
pub const REFERENCE_TEMPERATURES_K: [f64; 2] = [290.0, 410.0];
pub const REFERENCE_TEMPERATURE_K: f64 = 300.0;

/// Bulk extraordinary index n_e(λ) of congruent lithium niobate at room temperature.
pub fn ln_extraordinary_index(wavelength_nm: f64) -> f64 {
    let l2 = (wavelength_nm * 1e-3).powi(2);
    (1.0 + 2.9804 * l2 / (l2 - 0.02047) + 0.5981 * l2 / (l2 - 0.0666) + 8.9543 * l2 / (l2 - 416.08))
        .sqrt()
}

/// (offset at 1.2 µm, offset slope per µm); narrower ridges confine less.
fn geometric_offset(width_nm: u32) -> Option<(f64, f64)> {
    match width_nm {
        1400 => Some((0.245, 0.215)),
        1500 => Some((0.235, 0.205)),
        1600 => Some((0.225, 0.195)),
        _ => None,
    }
}

/// Reference effective index at the reference temperature.
pub fn tfln_effective_index(wavelength_nm: f64, width_nm: u32) -> Option<f64> {
    let (a, b) = geometric_offset(width_nm)?;
    Some(ln_extraordinary_index(wavelength_nm) - (a + b * (wavelength_nm * 1e-3 - 1.2)))
}

/// Tabulate the reference index on the committed grid, adding the given
/// thermo-optic law about [`REFERENCE_TEMPERATURE_K`].
pub fn tfln_reference_table(widths: &[u32], thermo_optic: &ThermoOptic) -> DispersionTable {
    let (lo, hi) = REFERENCE_WAVELENGTH_NM;
    let samples = ((hi - lo) / REFERENCE_STEP_NM).round() as usize;
    let mut rows = Vec::new();
    for &w in widths {
        for &t in &REFERENCE_TEMPERATURES_K {
            for i in 0..=samples {
                let lambda = lo + REFERENCE_STEP_NM * i as f64;
                let Some(n0) = tfln_effective_index(lambda, w) else {
                    continue;
                };
                rows.push(TableRow {
                    wavelength_nm: lambda,
                    width_nm: w,
                    temperature_k: t,
                    n_eff: n0 + thermo_optic.at(lambda) * (t - REFERENCE_TEMPERATURE_K),
                });
            }
        }
    }
    DispersionTable::new(rows, "tfln-sellmeier-reference").expect("reference table is well formed")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bulk_index_matches_tabulated_value_at_1550() {
        // n_e(1550 nm) of congruent LN is 2.138 to three decimals.
        assert!((ln_extraordinary_index(1550.0) - 2.138).abs() < 1e-3);
    }

    #[test]
    fn narrower_ridge_has_lower_index() {
        for lambda in [737.0, 1350.0, 1623.0] {
            let n14 = tfln_effective_index(lambda, 1400).unwrap();
            let n15 = tfln_effective_index(lambda, 1500).unwrap();
            let n16 = tfln_effective_index(lambda, 1600).unwrap();
            assert!(n14 < n15 && n15 < n16);
        }
        assert!(tfln_effective_index(1550.0, 1450).is_none());
    }
}
