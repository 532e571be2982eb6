//! Effective-index model of the thin-film lithium niobate waveguide.
//!
//! Each supported top width carries a polynomial `n_eff(λ)` about a centre
//! wavelength plus a linear thermo-optic law. The model never extrapolates:
//! queries outside the validity window return [`Error::OutOfDomain`], and
//! widths without a coefficient set return [`Error::UnknownWidth`] (there is
//! no interpolation between widths).

mod sellmeier;
mod table;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::constants::SPEED_OF_LIGHT;
use crate::error::{Error, Result};
use crate::numeric::poly_eval_with_derivative;

pub use sellmeier::{
    ln_extraordinary_index, tfln_effective_index, tfln_reference_table, TFLN_DEFAULT_WIDTHS,
};
pub use table::{load_dispersion_table, DispersionTable, FitOptions, TableRow};

/// Default thermo-optic coefficient dn/dT (1/K).
pub const DEFAULT_THERMO_OPTIC: f64 = 3.9e-5;

/// Linear thermo-optic law `dn/dT(λ) = coefficient + slope·(λ − reference)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermoOptic {
    pub coefficient_per_k: f64,
    #[serde(default)]
    pub slope_per_k_nm: f64,
    #[serde(default = "default_thermo_reference")]
    pub reference_nm: f64,
}

fn default_thermo_reference() -> f64 {
    1000.0
}

impl ThermoOptic {
    pub fn uniform(coefficient_per_k: f64) -> Self {
        Self {
            coefficient_per_k,
            slope_per_k_nm: 0.0,
            reference_nm: default_thermo_reference(),
        }
    }

    pub fn at(&self, wavelength_nm: f64) -> f64 {
        self.coefficient_per_k + self.slope_per_k_nm * (wavelength_nm - self.reference_nm)
    }
}

impl Default for ThermoOptic {
    fn default() -> Self {
        Self::uniform(DEFAULT_THERMO_OPTIC)
    }
}

/// `n(λ) = Σ c_k x^k` with `x = (λ − center) / half_span`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexPolynomial {
    pub center_nm: f64,
    pub half_span_nm: f64,
    pub coefficients: Vec<f64>,
}

impl IndexPolynomial {
    pub fn constant(index: f64) -> Self {
        Self {
            center_nm: 1000.0,
            half_span_nm: 1000.0,
            coefficients: vec![index],
        }
    }

    #[inline]
    pub fn normalized(&self, wavelength_nm: f64) -> f64 {
        (wavelength_nm - self.center_nm) / self.half_span_nm
    }

    /// Value and derivative with respect to λ (per nm).
    pub fn eval(&self, wavelength_nm: f64) -> (f64, f64) {
        let (v, dv) = poly_eval_with_derivative(&self.coefficients, self.normalized(wavelength_nm));
        (v, dv / self.half_span_nm)
    }

    pub fn order(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }
}

/// Dispersion data for one waveguide top width.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WidthDispersion {
    pub width_nm: u32,
    pub index: IndexPolynomial,
    pub thermo_optic: ThermoOptic,
    /// Maximum absolute fit residual against the source table (0 for analytic models).
    pub fit_residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidityWindow {
    pub wavelength_nm: (f64, f64),
    pub temperature_k: (f64, f64),
}

impl ValidityWindow {
    pub fn check(&self, wavelength_nm: f64, temperature_k: f64) -> Result<()> {
        let (lmin, lmax) = self.wavelength_nm;
        if !(wavelength_nm >= lmin && wavelength_nm <= lmax) {
            return Err(Error::out_of_domain("wavelength_nm", wavelength_nm, self.wavelength_nm));
        }
        let (tmin, tmax) = self.temperature_k;
        if !(temperature_k >= tmin && temperature_k <= tmax) {
            return Err(Error::out_of_domain("temperature_K", temperature_k, self.temperature_k));
        }
        Ok(())
    }

    pub fn contains_wavelength(&self, wavelength_nm: f64) -> bool {
        wavelength_nm >= self.wavelength_nm.0 && wavelength_nm <= self.wavelength_nm.1
    }
}

/// Immutable effective-index model shared by every other module.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DispersionModel {
    widths: BTreeMap<u32, WidthDispersion>,
    window: ValidityWindow,
    reference_temperature_k: f64,
    source: String,
}

impl DispersionModel {
    pub fn new(
        widths: Vec<WidthDispersion>,
        window: ValidityWindow,
        reference_temperature_k: f64,
        source: impl Into<String>,
    ) -> Result<Self> {
        if widths.is_empty() {
            return Err(Error::Domain("dispersion model needs at least one width".into()));
        }
        let (lmin, lmax) = window.wavelength_nm;
        let (tmin, tmax) = window.temperature_k;
        if !(lmin > 0.0 && lmax > lmin && tmax >= tmin && tmin > 0.0) {
            return Err(Error::Domain(format!("invalid validity window {window:?}")));
        }
        let model = Self {
            widths: widths.into_iter().map(|w| (w.width_nm, w)).collect(),
            window,
            reference_temperature_k,
            source: source.into(),
        };
        model.check_physical_bounds()?;
        Ok(model)
    }

    /// Single-width model with a constant index and uniform dn/dT; handy for
    /// dispersionless test devices.
    pub fn constant(
        width_nm: u32,
        index: f64,
        thermo_optic_per_k: f64,
        window: ValidityWindow,
        reference_temperature_k: f64,
    ) -> Result<Self> {
        Self::new(
            vec![WidthDispersion {
                width_nm,
                index: IndexPolynomial::constant(index),
                thermo_optic: ThermoOptic::uniform(thermo_optic_per_k),
                fit_residual: 0.0,
            }],
            window,
            reference_temperature_k,
            "constant",
        )
    }

    /// The committed default model: the Sellmeier-derived reference table for
    /// widths 1400/1500/1600 nm, fitted with a 6th-order polynomial.
    pub fn tfln_default(thermo_optic: &ThermoOptic) -> Result<Self> {
        let table = tfln_reference_table(&TFLN_DEFAULT_WIDTHS, thermo_optic);
        table.fit(&FitOptions::default())
    }

    fn check_physical_bounds(&self) -> Result<()> {
        let (lmin, lmax) = self.window.wavelength_nm;
        let (tmin, tmax) = self.window.temperature_k;
        for &w in self.widths.keys() {
            for i in 0..=200 {
                let lambda = lmin + (lmax - lmin) * i as f64 / 200.0;
                for t in [tmin, tmax] {
                    let n = self.n_eff(lambda, t, w)?;
                    if !(n > 1.0 && n < 3.0) {
                        return Err(Error::Domain(format!(
                            "n_eff = {n} outside (1, 3) at {lambda} nm, {t} K, width {w} nm"
                        )));
                    }
                    let ng = self.group_index(lambda, t, w)?;
                    if !(ng > 0.0) {
                        return Err(Error::Domain(format!(
                            "group index {ng} not positive at {lambda} nm, width {w} nm"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn width(&self, width_nm: u32) -> Result<&WidthDispersion> {
        self.widths.get(&width_nm).ok_or(Error::UnknownWidth(width_nm))
    }

    pub fn widths(&self) -> impl Iterator<Item = u32> + '_ {
        self.widths.keys().copied()
    }

    pub fn width_data(&self, width_nm: u32) -> Result<&WidthDispersion> {
        self.width(width_nm)
    }

    pub fn window(&self) -> &ValidityWindow {
        &self.window
    }

    pub fn reference_temperature_k(&self) -> f64 {
        self.reference_temperature_k
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Value and λ-derivative (per nm) of the effective index.
    fn index_and_slope(&self, wavelength_nm: f64, temperature_k: f64, width_nm: u32) -> Result<(f64, f64)> {
        let w = self.width(width_nm)?;
        self.window.check(wavelength_nm, temperature_k)?;
        let (n0, dn0) = w.index.eval(wavelength_nm);
        let dt = temperature_k - self.reference_temperature_k;
        let n = n0 + w.thermo_optic.at(wavelength_nm) * dt;
        let dn = dn0 + w.thermo_optic.slope_per_k_nm * dt;
        Ok((n, dn))
    }

    pub fn n_eff(&self, wavelength_nm: f64, temperature_k: f64, width_nm: u32) -> Result<f64> {
        self.index_and_slope(wavelength_nm, temperature_k, width_nm).map(|(n, _)| n)
    }

    /// dn_eff/dλ in 1/nm.
    pub fn dn_dlambda(&self, wavelength_nm: f64, temperature_k: f64, width_nm: u32) -> Result<f64> {
        self.index_and_slope(wavelength_nm, temperature_k, width_nm).map(|(_, d)| d)
    }

    pub fn thermo_optic(&self, wavelength_nm: f64, width_nm: u32) -> Result<f64> {
        Ok(self.width(width_nm)?.thermo_optic.at(wavelength_nm))
    }

    /// `n_g = n_eff − λ·dn_eff/dλ`, with the derivative taken analytically.
    pub fn group_index(&self, wavelength_nm: f64, temperature_k: f64, width_nm: u32) -> Result<f64> {
        let (n, dn) = self.index_and_slope(wavelength_nm, temperature_k, width_nm)?;
        Ok(n - wavelength_nm * dn)
    }

    /// β = 2π·n_eff/λ in rad/m.
    pub fn propagation_constant(&self, wavelength_nm: f64, temperature_k: f64, width_nm: u32) -> Result<f64> {
        let n = self.n_eff(wavelength_nm, temperature_k, width_nm)?;
        Ok(2.0 * PI * n / (wavelength_nm * 1e-9))
    }

    /// Free spectral range `c / (n_g·L)` in Hz.
    pub fn fsr(&self, wavelength_nm: f64, temperature_k: f64, width_nm: u32, ring_length_m: f64) -> Result<f64> {
        if !(ring_length_m > 0.0) {
            return Err(Error::Domain(format!("ring length must be positive, got {ring_length_m}")));
        }
        let ng = self.group_index(wavelength_nm, temperature_k, width_nm)?;
        Ok(SPEED_OF_LIGHT / (ng * ring_length_m))
    }

    /// SHA-256 over the serialized model, used to tag reports.
    pub fn fingerprint(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("dispersion model serializes");
        hex::encode(Sha256::digest(bytes))
    }
}

/// A dispersion model bound to one waveguide width.
#[derive(Clone, Debug)]
pub struct Waveguide {
    model: Arc<DispersionModel>,
    width_nm: u32,
}

impl Waveguide {
    pub fn new(model: Arc<DispersionModel>, width_nm: u32) -> Result<Self> {
        model.width(width_nm)?;
        Ok(Self { model, width_nm })
    }

    pub fn model(&self) -> &DispersionModel {
        &self.model
    }

    pub fn shared_model(&self) -> &Arc<DispersionModel> {
        &self.model
    }

    pub fn width_nm(&self) -> u32 {
        self.width_nm
    }

    pub fn n_eff(&self, wavelength_nm: f64, temperature_k: f64) -> Result<f64> {
        self.model.n_eff(wavelength_nm, temperature_k, self.width_nm)
    }

    pub fn group_index(&self, wavelength_nm: f64, temperature_k: f64) -> Result<f64> {
        self.model.group_index(wavelength_nm, temperature_k, self.width_nm)
    }

    pub fn propagation_constant(&self, wavelength_nm: f64, temperature_k: f64) -> Result<f64> {
        self.model.propagation_constant(wavelength_nm, temperature_k, self.width_nm)
    }

    pub fn thermo_optic(&self, wavelength_nm: f64) -> Result<f64> {
        self.model.thermo_optic(wavelength_nm, self.width_nm)
    }

    pub fn fsr(&self, wavelength_nm: f64, temperature_k: f64, ring_length_m: f64) -> Result<f64> {
        self.model.fsr(wavelength_nm, temperature_k, self.width_nm, ring_length_m)
    }

    pub fn window(&self) -> &ValidityWindow {
        self.model.window()
    }
}
