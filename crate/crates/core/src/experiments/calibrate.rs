//! Calibration of the free model constants against the design anchors:
//! coupling ratios at the operating MZI drive, the effective vacuum coupling
//! rate and the FWM noise rate at a reference pump power.
//!
//! The coupler is calibrated per width with three knobs — heater length,
//! coupling-length offset and coupling-length tilt — solved by a damped Newton
//! iteration at the matched pump/signal/idler wavelengths. Every run starts
//! from the base geometry, so calibrating twice yields the same block.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use serde_json::json;
use toml_edit::{value, DocumentMut, Item, Table};

use super::output::OutputWriter;
use super::Session;
use crate::config::{CalibrationConfig, Config, VariantCalibration};
use crate::device::DeviceGeometry;
use crate::dispersion::DispersionModel;
use crate::error::{Error, Result};
use crate::matcher::{find_triple_resonance, MatchResult};
use crate::noise::{calibrate_g_chi3, fwm_noise_rate, FwmChannel};

/// Newton stops once every coupling-ratio residual is below this.
const RESIDUAL_TOLERANCE: f64 = 1e-12;
const MAX_ITERATIONS: usize = 100;
/// Finite-difference step for the Jacobian (µm).
const JACOBIAN_STEP_UM: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariantReport {
    pub width_nm: u32,
    pub temperature_k: f64,
    /// Matched (pump, signal, idler) wavelengths the coupler is tuned at.
    pub wavelengths_nm: [f64; 3],
    pub calibration: VariantCalibration,
    /// Achieved (η_p, η_s, η_i).
    pub eta: [f64; 3],
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub variants: Vec<VariantReport>,
    pub g0_full_mhz: f64,
    pub g_chi3_rad_per_s: f64,
    /// Noise rate reproduced at the reference power with the calibrated g_χ3.
    pub noise_check_hz: f64,
}

impl CalibrationReport {
    pub fn block(&self) -> CalibrationConfig {
        CalibrationConfig {
            g0_full_mhz: self.g0_full_mhz,
            g_chi3_rad_per_s: self.g_chi3_rad_per_s,
            variants: self
                .variants
                .iter()
                .map(|v| (v.width_nm.to_string(), v.calibration.clone()))
                .collect(),
        }
    }
}

fn with_knobs(base: &DeviceGeometry, knobs: &Vector3<f64>) -> DeviceGeometry {
    DeviceGeometry {
        heater_length_m: knobs[0] * 1e-6,
        coupling_length: base.coupling_length.shifted(knobs[1], knobs[2]),
        ..base.clone()
    }
}

fn coupling_ratios(
    config: &Config,
    model: &Arc<DispersionModel>,
    base: &DeviceGeometry,
    knobs: &Vector3<f64>,
    point: &MatchResult,
) -> Result<Vector3<f64>> {
    let device = with_knobs(base, knobs).build(
        model.clone(),
        config.device.base_temperature_k,
        config.device.mzi_drive_k,
    )?;
    let mut eta = Vector3::zeros();
    for (j, mode) in [&point.pump, &point.signal, &point.idler].into_iter().enumerate() {
        eta[j] = device.coupling_rates(mode.wavelength_nm, point.temperature_k)?.eta();
    }
    Ok(eta)
}

/// Starting points ordered by distance from the base knobs: the heater is
/// stepped over one full thermal-phase period, the coupling-length shape over
/// a few microns of offset and tilt.
fn starting_points(base: &Vector3<f64>) -> Vec<Vector3<f64>> {
    let mut points = Vec::new();
    for dh in -8..=8 {
        for off in [0.0, -10.0, 10.0, -20.0, 20.0] {
            for tilt in [0.0, -20.0, 20.0] {
                points.push(base + Vector3::new(100.0 * f64::from(dh), off, tilt));
            }
        }
    }
    let scale = Vector3::new(100.0, 10.0, 20.0);
    let distance = |p: &Vector3<f64>| (p - base).component_div(&scale).norm();
    points.sort_by(|a, b| distance(a).total_cmp(&distance(b)));
    points
}

/// Newton iteration with a finite-difference Jacobian and step halving.
fn damped_newton(
    residual: &impl Fn(&Vector3<f64>) -> Option<Vector3<f64>>,
    start: Vector3<f64>,
) -> Option<(Vector3<f64>, Vector3<f64>, usize)> {
    let mut x = start;
    let mut r = residual(&x)?;
    let mut iterations = 0;
    'outer: while r.amax() > RESIDUAL_TOLERANCE && iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut jacobian = Matrix3::zeros();
        for k in 0..3 {
            let mut hi = x;
            let mut lo = x;
            hi[k] += JACOBIAN_STEP_UM;
            lo[k] -= JACOBIAN_STEP_UM;
            let (Some(rh), Some(rl)) = (residual(&hi), residual(&lo)) else {
                break 'outer;
            };
            jacobian.set_column(k, &((rh - rl) / (2.0 * JACOBIAN_STEP_UM)));
        }
        let Some(step) = jacobian.lu().solve(&(-r)) else {
            break;
        };
        let mut scale = 1.0;
        loop {
            if scale < 1e-6 {
                break 'outer;
            }
            let trial = x + step * scale;
            if let Some(rt) = residual(&trial) {
                if rt.norm() < r.norm() {
                    x = trial;
                    r = rt;
                    break;
                }
            }
            scale *= 0.5;
        }
    }
    Some((x, r, iterations))
}

/// Coupler calibration for one width, starting from the base geometry of `config`.
pub fn calibrate_variant(config: &Config, model: &Arc<DispersionModel>, width_nm: u32) -> Result<VariantReport> {
    let mut base_config = config.clone();
    base_config.calibration = None;
    let base = base_config.geometry(width_nm)?;
    let device = base_config.device(model, width_nm)?;
    let point = find_triple_resonance(&device, &base_config.search_constraints())?
        .best()
        .clone();
    let t = &config.targets;
    let target = Vector3::new(t.eta_pump, t.eta_signal, t.eta_idler);
    let names = ["eta_pump", "eta_signal", "eta_idler"];

    let residual = |x: &Vector3<f64>| -> Option<Vector3<f64>> {
        coupling_ratios(&base_config, model, &base, x, &point).ok().map(|eta| eta - target)
    };
    let base_knobs = Vector3::new(config.device.heater_length_um, 0.0, 0.0);
    let mut best: Option<(Vector3<f64>, Vector3<f64>, usize)> = None;
    for start in starting_points(&base_knobs) {
        let Some(attempt) = damped_newton(&residual, start) else {
            continue;
        };
        let better = best.as_ref().is_none_or(|b| attempt.1.amax() < b.1.amax());
        if better {
            best = Some(attempt);
        }
        if best.as_ref().is_some_and(|b| b.1.amax() <= RESIDUAL_TOLERANCE) {
            break;
        }
    }
    let Some((x, r, iterations)) = best else {
        return Err(Error::CalibrationInfeasible {
            anchor: "eta_pump".into(),
            detail: format!("width {width_nm} nm: coupler geometry cannot be evaluated"),
        });
    };
    if r.amax() > 1e-9 {
        let worst = r.iamax();
        return Err(Error::CalibrationInfeasible {
            anchor: names[worst].into(),
            detail: format!(
                "width {width_nm} nm: {} stays {:.3e} away from {} after {iterations} iterations",
                names[worst], r[worst], target[worst]
            ),
        });
    }
    let eta = r + target;
    Ok(VariantReport {
        width_nm,
        temperature_k: point.temperature_k,
        wavelengths_nm: [point.pump.wavelength_nm, point.signal.wavelength_nm, point.idler.wavelength_nm],
        calibration: VariantCalibration {
            heater_length_um: x[0],
            coupling_length_offset_um: x[1],
            coupling_length_tilt_um: x[2],
        },
        eta: [eta[0], eta[1], eta[2]],
        iterations,
    })
}

/// Solve every anchor; the configuration is not modified.
pub fn calibrate(session: &Session) -> Result<CalibrationReport> {
    let config = &session.config;
    let model = &session.model;
    let mut variants = Vec::new();
    for key in config.device.variants.keys() {
        let width = crate::config::parse_width(key)?;
        variants.push(calibrate_variant(config, model, width)?);
    }

    let t = &config.targets;
    let g0_full_mhz = t.g0_mhz / config.device.ppln_fraction;
    if !(g0_full_mhz.is_finite() && g0_full_mhz > 0.0) {
        return Err(Error::CalibrationInfeasible {
            anchor: "g0_MHz".into(),
            detail: format!("PPLN fraction {} cannot produce g0 = {} MHz", config.device.ppln_fraction, t.g0_mhz),
        });
    }

    // g_χ3 from the active width at its calibrated operating point.
    let mut calibrated = config.clone();
    calibrated.calibration = Some(CalibrationConfig {
        g0_full_mhz,
        g_chi3_rad_per_s: 1.0,
        variants: variants
            .iter()
            .map(|v| (v.width_nm.to_string(), v.calibration.clone()))
            .collect::<BTreeMap<_, _>>(),
    });
    let device = calibrated.device(model, config.device.active_width_nm)?;
    let point = find_triple_resonance(&device, &calibrated.search_constraints())?
        .best()
        .clone();
    let two_pi = 2.0 * std::f64::consts::PI;
    let channel = FwmChannel {
        g_chi3: 1.0,
        companion_detuning: two_pi * t.noise_companion_detuning_thz * 1e12,
        companion_linewidth: two_pi * config.physics.companion_linewidth_ghz * 1e9,
        idler_linewidth: point.idler.kappa_ex + point.idler.kappa_0,
        pump_kappa: point.pump.kappa_ex + point.pump.kappa_0,
        pump_kappa_ex: point.pump.kappa_ex,
        pump_omega: two_pi * point.pump.frequency_hz,
    };
    let power_w = t.noise_power_mw * 1e-3;
    let g_chi3 = calibrate_g_chi3(&channel, power_w, t.noise_rate_hz).map_err(|e| Error::CalibrationInfeasible {
        anchor: "noise_rate_Hz".into(),
        detail: e.to_string(),
    })?;
    let noise_check_hz = fwm_noise_rate(&FwmChannel { g_chi3, ..channel }, power_w);
    Ok(CalibrationReport {
        variants,
        g0_full_mhz,
        g_chi3_rad_per_s: g_chi3,
        noise_check_hz,
    })
}

fn provenance(config: &Config) -> String {
    let t = &config.targets;
    format!(
        "\n# Written by `rmzi calibrate`; do not edit by hand.\n\
         # Anchors: eta_pump = {}, eta_signal = {}, eta_idler = {} at mzi_drive_K = {} and the matched\n\
         # wavelengths of each width; g0/2pi = {} MHz at ppln_fraction = {};\n\
         # R_FWM({} mW) = {} Hz with delta'_i/2pi = {} THz and kappa'_i/2pi = {} GHz (active width).\n",
        t.eta_pump,
        t.eta_signal,
        t.eta_idler,
        config.device.mzi_drive_k,
        t.g0_mhz,
        config.device.ppln_fraction,
        t.noise_power_mw,
        t.noise_rate_hz,
        t.noise_companion_detuning_thz,
        config.physics.companion_linewidth_ghz,
    )
}

fn calibration_table(block: &CalibrationConfig, config: &Config) -> Table {
    let mut table = Table::new();
    table.decor_mut().set_prefix(provenance(config));
    table.insert("g0_full_MHz", value(block.g0_full_mhz));
    table.insert("g_chi3_rad_per_s", value(block.g_chi3_rad_per_s));
    let mut variants = Table::new();
    variants.set_implicit(true);
    for (key, v) in &block.variants {
        let mut t = Table::new();
        t.insert("heater_length_um", value(v.heater_length_um));
        t.insert("coupling_length_offset_um", value(v.coupling_length_offset_um));
        t.insert("coupling_length_tilt_um", value(v.coupling_length_tilt_um));
        variants.insert(key, Item::Table(t));
    }
    table.insert("variants", Item::Table(variants));
    table
}

/// Replace the `[calibration]` block of a configuration document, keeping
/// everything else byte for byte.
pub fn rewrite_calibration(text: &str, block: &CalibrationConfig, config: &Config) -> Result<String> {
    let mut doc: DocumentMut = text
        .parse()
        .map_err(|e| Error::Config(format!("cannot edit configuration: {e}")))?;
    doc.remove("calibration");
    doc.insert("calibration", Item::Table(calibration_table(block, config)));
    Ok(doc.to_string())
}

pub(super) fn write_outputs(session: &Session, report: &CalibrationReport, out: &mut OutputWriter) -> Result<()> {
    let block = report.block();
    let original = std::fs::read_to_string(&session.config_path)?;
    let updated = rewrite_calibration(&original, &block, &session.config)?;
    if updated != original {
        std::fs::write(&session.config_path, &updated)?;
    }
    let standalone = rewrite_calibration("", &block, &session.config)?;
    out.text("calibration.toml", standalone.trim_start(), json!({"anchors": session.config.targets}))?;
    out.json("calibration_report.json", report, json!({}))
}
