//! Strict TOML configuration: every physical key carries its unit in its name,
//! unknown keys are rejected, and physics-critical values have no silent
//! defaults.
//!
//! Overrides (`key=value`) are applied to the parsed document before it is
//! deserialised, so an override is exactly equivalent to editing the file.
//! A key is either a dotted path (`experiment.pump_power_mW`) or a bare leaf
//! name that occurs exactly once in the document.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::device::{Device, DeviceGeometry};
use crate::dispersion::{load_dispersion_table, DispersionModel, FitOptions, ThermoOptic};
use crate::elements::{CouplingLength, LossModel};
use crate::error::{Error, Result};
use crate::matcher::{FwmSettings, SearchConstraints};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariantConfig {
    pub ring_length_um: f64,
    pub poling_period_um: f64,
    /// Companion-mode detuning δ'_i used when the companion lies outside the
    /// dispersion window (THz, ordinary frequency; multiplied by 2π internally).
    #[serde(rename = "companion_detuning_THz")]
    pub companion_detuning_thz: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceConfig {
    pub active_width_nm: u32,
    pub ppln_fraction: f64,
    pub dc_gap_nm: f64,
    pub dc_length_um: f64,
    /// Coupling length `L_c = Σ c_k x^k` (µm) with `x = (λ − 1000 nm)/1000 nm`.
    pub coupling_length_um: Vec<f64>,
    pub mzi_arm_asymmetry_um: f64,
    pub heater_length_um: f64,
    #[serde(rename = "mzi_drive_K")]
    pub mzi_drive_k: f64,
    #[serde(rename = "base_temperature_K")]
    pub base_temperature_k: f64,
    #[serde(rename = "propagation_loss_dB_per_m")]
    pub propagation_loss_db_per_m: f64,
    pub variants: BTreeMap<String, VariantConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispersionConfig {
    /// Table file, relative to the configuration file. Without it the
    /// built-in Sellmeier reference table is generated and fitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table_path: Option<String>,
    #[serde(rename = "thermo_optic_per_K")]
    pub thermo_optic_per_k: f64,
    pub fit_order: usize,
    #[serde(rename = "reference_temperature_K")]
    pub reference_temperature_k: f64,
    pub max_fit_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsConfig {
    pub signal_wavelength_nm: f64,
    #[serde(rename = "signal_rate_Hz")]
    pub signal_rate_hz: f64,
    #[serde(rename = "companion_linewidth_GHz")]
    pub companion_linewidth_ghz: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintsConfig {
    #[serde(rename = "max_signal_detuning_MHz")]
    pub max_signal_detuning_mhz: f64,
    #[serde(rename = "max_mismatch_MHz")]
    pub max_mismatch_mhz: f64,
    pub pump_base_nm: f64,
    pub idler_base_nm: f64,
    pub half_window_nm: f64,
    #[serde(rename = "temperature_min_K")]
    pub temperature_min_k: f64,
    #[serde(rename = "temperature_max_K")]
    pub temperature_max_k: f64,
    #[serde(rename = "temperature_step_K", default, skip_serializing_if = "Option::is_none")]
    pub temperature_step_k: Option<f64>,
}

/// Anchors the `calibrate` experiment solves for.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetsConfig {
    pub eta_pump: f64,
    pub eta_signal: f64,
    pub eta_idler: f64,
    #[serde(rename = "g0_MHz")]
    pub g0_mhz: f64,
    #[serde(rename = "noise_rate_Hz")]
    pub noise_rate_hz: f64,
    #[serde(rename = "noise_power_mW")]
    pub noise_power_mw: f64,
    #[serde(rename = "noise_companion_detuning_THz")]
    pub noise_companion_detuning_thz: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(rename = "pump_power_mW")]
    pub pump_power_mw: f64,
    #[serde(rename = "power_min_mW")]
    pub power_min_mw: f64,
    #[serde(rename = "power_max_mW")]
    pub power_max_mw: f64,
    pub power_points: usize,
    pub spectrum_points: usize,
    #[serde(rename = "spectrum_span_GHz")]
    pub spectrum_span_ghz: f64,
    #[serde(rename = "drive_min_K")]
    pub drive_min_k: f64,
    #[serde(rename = "drive_max_K")]
    pub drive_max_k: f64,
    pub drive_points: usize,
    pub coupler_wavelength_min_nm: f64,
    pub coupler_wavelength_max_nm: f64,
    pub coupler_points: usize,
    pub tradeoff_widths_nm: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariantCalibration {
    pub heater_length_um: f64,
    pub coupling_length_offset_um: f64,
    pub coupling_length_tilt_um: f64,
}

/// Values produced by `calibrate`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationConfig {
    #[serde(rename = "g0_full_MHz")]
    pub g0_full_mhz: f64,
    pub g_chi3_rad_per_s: f64,
    pub variants: BTreeMap<String, VariantCalibration>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub device: DeviceConfig,
    pub dispersion: DispersionConfig,
    pub physics: PhysicsConfig,
    pub constraints: ConstraintsConfig,
    pub targets: TargetsConfig,
    pub experiment: ExperimentConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<CalibrationConfig>,
}

/// Angular frequency (rad/s) from a value in Hz scaled by `unit`.
fn angular(value: f64, unit: f64) -> f64 {
    2.0 * PI * value * unit
}

fn config_error(e: impl std::fmt::Display) -> Error {
    Error::Config(e.to_string())
}

/// Parse a `key=value` override; the value is read as a TOML literal and
/// falls back to a bare string.
fn parse_override(text: &str) -> Result<(String, toml::Value)> {
    let (key, raw) = text
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{text}` is not of the form key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    if key.is_empty() {
        return Err(Error::Config(format!("override `{text}` has an empty key")));
    }
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    Ok((key.to_string(), value))
}

fn leaf_paths(value: &toml::Value, prefix: &mut Vec<String>, out: &mut Vec<Vec<String>>) {
    if let toml::Value::Table(table) = value {
        for (k, v) in table {
            prefix.push(k.clone());
            if v.is_table() {
                leaf_paths(v, prefix, out);
            } else {
                out.push(prefix.clone());
            }
            prefix.pop();
        }
    }
}

/// Set `key` in `doc`; the key must already exist (unknown keys are errors).
pub fn apply_override(doc: &mut toml::Value, key: &str, value: toml::Value) -> Result<()> {
    let path: Vec<String> = if key.contains('.') {
        key.split('.').map(str::to_string).collect()
    } else {
        let mut leaves = Vec::new();
        leaf_paths(doc, &mut Vec::new(), &mut leaves);
        let hits: Vec<_> = leaves.into_iter().filter(|p| p.last().map(String::as_str) == Some(key)).collect();
        match hits.len() {
            1 => hits.into_iter().next().expect("one hit"),
            0 => return Err(Error::Config(format!("unknown override key `{key}`"))),
            _ => {
                let options: Vec<String> = hits.iter().map(|p| p.join(".")).collect();
                return Err(Error::Config(format!(
                    "override key `{key}` is ambiguous; use one of {}",
                    options.join(", ")
                )));
            }
        }
    };
    let mut node = doc;
    for (depth, part) in path.iter().enumerate() {
        let table = node
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override key `{key}`: `{part}` is not inside a table")))?;
        if depth + 1 == path.len() {
            if !table.contains_key(part) && !is_optional_key(part) {
                return Err(Error::Config(format!("unknown override key `{key}`")));
            }
            table.insert(part.clone(), value);
            return Ok(());
        }
        node = table
            .get_mut(part)
            .ok_or_else(|| Error::Config(format!("unknown override key `{key}`")))?;
    }
    Err(Error::Config(format!("override key `{key}` is empty")))
}

/// Keys that may be absent from a valid document but can still be overridden.
fn is_optional_key(key: &str) -> bool {
    matches!(key, "table_path" | "temperature_step_K")
}

impl Config {
    /// Parse and validate a document, after applying `overrides`.
    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self> {
        let mut doc: toml::Value = toml::from_str(text).map_err(config_error)?;
        for o in overrides {
            let (key, value) = parse_override(o)?;
            apply_override(&mut doc, &key, value)?;
        }
        let config: Config = doc.try_into().map_err(config_error)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>, overrides: &[String]) -> Result<(Self, PathBuf)> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((Self::from_toml_str(&text, overrides)?, base))
    }

    pub fn validate(&self) -> Result<()> {
        let d = &self.device;
        let positive = [
            ("device.dc_gap_nm", d.dc_gap_nm),
            ("device.dc_length_um", d.dc_length_um),
            ("device.heater_length_um", d.heater_length_um),
            ("device.base_temperature_K", d.base_temperature_k),
            ("device.propagation_loss_dB_per_m", d.propagation_loss_db_per_m),
            ("dispersion.thermo_optic_per_K", self.dispersion.thermo_optic_per_k.abs()),
            ("dispersion.reference_temperature_K", self.dispersion.reference_temperature_k),
            ("dispersion.max_fit_residual", self.dispersion.max_fit_residual),
            ("physics.signal_wavelength_nm", self.physics.signal_wavelength_nm),
            ("physics.companion_linewidth_GHz", self.physics.companion_linewidth_ghz),
            ("targets.g0_MHz", self.targets.g0_mhz),
            ("targets.noise_rate_Hz", self.targets.noise_rate_hz),
            ("targets.noise_power_mW", self.targets.noise_power_mw),
            ("experiment.power_max_mW", self.experiment.power_max_mw),
            ("experiment.power_min_mW", self.experiment.power_min_mw),
            ("experiment.spectrum_span_GHz", self.experiment.spectrum_span_ghz),
        ];
        for (name, value) in positive {
            if !(value > 0.0) {
                return Err(Error::Config(format!("`{name}` must be positive, got {value}")));
            }
        }
        if !(0.0..=1.0).contains(&d.ppln_fraction) {
            return Err(Error::Config(format!("`device.ppln_fraction` = {} outside [0, 1]", d.ppln_fraction)));
        }
        if !(self.physics.signal_rate_hz >= 0.0) {
            return Err(Error::Config("`physics.signal_rate_Hz` must be non-negative".into()));
        }
        for (name, eta) in [
            ("targets.eta_pump", self.targets.eta_pump),
            ("targets.eta_signal", self.targets.eta_signal),
            ("targets.eta_idler", self.targets.eta_idler),
        ] {
            if !(eta > 0.0 && eta < 1.0) {
                return Err(Error::Config(format!("`{name}` = {eta} must lie in (0, 1)")));
            }
        }
        if d.coupling_length_um.is_empty() {
            return Err(Error::Config("`device.coupling_length_um` needs at least one coefficient".into()));
        }
        for (key, v) in &d.variants {
            parse_width(key)?;
            if !(v.ring_length_um > 0.0 && v.poling_period_um > 0.0) {
                return Err(Error::Config(format!("variant {key}: lengths must be positive")));
            }
        }
        if !d.variants.contains_key(&d.active_width_nm.to_string()) {
            return Err(Error::Config(format!(
                "`device.active_width_nm` = {} has no [device.variants.{}] section",
                d.active_width_nm, d.active_width_nm
            )));
        }
        let e = &self.experiment;
        if e.power_points < 2 || e.spectrum_points < 2 || e.drive_points < 2 || e.coupler_points < 2 {
            return Err(Error::Config("experiment grids need at least 2 points".into()));
        }
        if !(e.power_min_mw < e.power_max_mw) || !(e.drive_min_k < e.drive_max_k) {
            return Err(Error::Config("experiment grid ranges must be increasing".into()));
        }
        if !(e.coupler_wavelength_min_nm < e.coupler_wavelength_max_nm) {
            return Err(Error::Config("coupler wavelength range must be increasing".into()));
        }
        for w in &e.tradeoff_widths_nm {
            if !d.variants.contains_key(&w.to_string()) {
                return Err(Error::Config(format!("trade-off width {w} nm has no device variant")));
            }
        }
        if let Some(cal) = &self.calibration {
            for key in cal.variants.keys() {
                parse_width(key)?;
            }
        }
        self.search_constraints().validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    /// SHA-256 of the canonical JSON rendering of the resolved configuration.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("configuration serialises");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    pub fn fit_options(&self) -> FitOptions {
        FitOptions {
            order: self.dispersion.fit_order,
            reference_temperature_k: self.dispersion.reference_temperature_k,
            fallback_thermo_optic: ThermoOptic::uniform(self.dispersion.thermo_optic_per_k),
            max_residual: self.dispersion.max_fit_residual,
            ..FitOptions::default()
        }
    }

    /// Dispersion model named by the configuration; `base_dir` resolves a relative table path.
    pub fn dispersion_model(&self, base_dir: &Path) -> Result<Arc<DispersionModel>> {
        let model = match &self.dispersion.table_path {
            Some(path) => load_dispersion_table(base_dir.join(path), &self.fit_options())?,
            None => {
                let table = crate::dispersion::tfln_reference_table(
                    &crate::dispersion::TFLN_DEFAULT_WIDTHS,
                    &ThermoOptic::uniform(self.dispersion.thermo_optic_per_k),
                );
                table.fit(&self.fit_options())?
            }
        };
        Ok(Arc::new(model))
    }

    pub fn variant(&self, width_nm: u32) -> Result<&VariantConfig> {
        self.device
            .variants
            .get(&width_nm.to_string())
            .ok_or_else(|| Error::Config(format!("no [device.variants.{width_nm}] section")))
    }

    pub fn variant_calibration(&self, width_nm: u32) -> Option<&VariantCalibration> {
        self.calibration.as_ref()?.variants.get(&width_nm.to_string())
    }

    /// Calibration block, or a configuration error pointing at `calibrate`.
    pub fn require_calibration(&self) -> Result<&CalibrationConfig> {
        self.calibration.as_ref().ok_or_else(|| {
            Error::Config("configuration has no [calibration] block; run the `calibrate` experiment first".into())
        })
    }

    /// Geometry of the `width_nm` variant; calibrated couplers when available.
    pub fn geometry(&self, width_nm: u32) -> Result<DeviceGeometry> {
        let d = &self.device;
        let v = self.variant(width_nm)?;
        let base = CouplingLength {
            coefficients_um: d.coupling_length_um.clone(),
        };
        let (heater_um, coupling_length) = match self.variant_calibration(width_nm) {
            Some(c) => (
                c.heater_length_um,
                base.shifted(c.coupling_length_offset_um, c.coupling_length_tilt_um),
            ),
            None => (d.heater_length_um, base),
        };
        Ok(DeviceGeometry {
            width_nm,
            ring_length_m: v.ring_length_um * 1e-6,
            ppln_fraction: d.ppln_fraction,
            poling_period_m: v.poling_period_um * 1e-6,
            loss: LossModel::uniform(d.propagation_loss_db_per_m),
            dc_gap_nm: d.dc_gap_nm,
            dc_length_m: d.dc_length_um * 1e-6,
            coupling_length,
            arm_asymmetry_m: d.mzi_arm_asymmetry_um * 1e-6,
            heater_length_m: heater_um * 1e-6,
        })
    }

    /// Device for `width_nm` at the configured MZI drive.
    pub fn device(&self, model: &Arc<DispersionModel>, width_nm: u32) -> Result<Device> {
        self.geometry(width_nm)?
            .build(model.clone(), self.device.base_temperature_k, self.device.mzi_drive_k)
    }

    pub fn search_constraints(&self) -> SearchConstraints {
        let c = &self.constraints;
        SearchConstraints {
            signal_wavelength_nm: self.physics.signal_wavelength_nm,
            max_signal_detuning_hz: c.max_signal_detuning_mhz * 1e6,
            max_mismatch_hz: c.max_mismatch_mhz * 1e6,
            pump_base_nm: c.pump_base_nm,
            idler_base_nm: c.idler_base_nm,
            half_window_nm: c.half_window_nm,
            temperature_range_k: (c.temperature_min_k, c.temperature_max_k),
            temperature_step_k: c.temperature_step_k,
        }
    }

    /// Effective vacuum coupling rate g₀ (rad/s) from the calibrated full-overlap value.
    pub fn g0(&self) -> Result<f64> {
        let cal = self.require_calibration()?;
        crate::cmt::g0_effective(angular(cal.g0_full_mhz, 1e6), self.device.ppln_fraction)
    }

    pub fn fwm_settings(&self) -> Result<FwmSettings> {
        let cal = self.require_calibration()?;
        let fallback_detuning = self
            .device
            .variants
            .iter()
            .map(|(k, v)| Ok((parse_width(k)?, angular(v.companion_detuning_thz, 1e12))))
            .collect::<Result<_>>()?;
        Ok(FwmSettings {
            g_chi3: cal.g_chi3_rad_per_s,
            companion_linewidth: angular(self.physics.companion_linewidth_ghz, 1e9),
            fallback_detuning,
        })
    }

    /// Pump-power grid (W), logarithmic between the configured bounds.
    pub fn power_grid_w(&self) -> Vec<f64> {
        let e = &self.experiment;
        crate::numeric::logspace(e.power_min_mw * 1e-3, e.power_max_mw * 1e-3, e.power_points)
    }
}

pub fn parse_width(key: &str) -> Result<u32> {
    key.parse()
        .map_err(|_| Error::Config(format!("variant key `{key}` is not a width in nm")))
}
