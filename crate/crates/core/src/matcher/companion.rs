use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{find_triple_resonance, MatchResult, SearchConstraints};
use crate::constants::{hz_to_angular, hz_to_wavelength_nm, wavelength_nm_to_hz};
use crate::device::Device;
use crate::elements::resonance_wavelength;
use crate::error::{Error, Result};
use crate::noise::FwmChannel;

/// Inputs for building the FWM noise channel of a matched device.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FwmSettings {
    /// χ(3) vacuum coupling rate (rad/s).
    pub g_chi3: f64,
    /// Companion-mode total linewidth κ'_i (rad/s).
    pub companion_linewidth: f64,
    /// Companion detuning δ'_i per width (rad/s), used when the companion mode
    /// lies outside the dispersion window.
    pub fallback_detuning: BTreeMap<u32, f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CompanionSource {
    /// Resolved on the resonance comb.
    Comb,
    /// Taken from the configured per-width table.
    Table,
}

/// Detuning δ'_i (rad/s) of the FWM companion mode `2m_p − m_i` from the
/// energy-conserving frequency `2ν_p − ν_i`.
pub fn companion_detuning(device: &Device, result: &MatchResult, settings: &FwmSettings) -> Result<(f64, CompanionSource)> {
    let target_hz = 2.0 * result.pump.frequency_hz - result.idler.frequency_hz;
    let m = 2 * result.pump.m - result.idler.m;
    let guess = hz_to_wavelength_nm(target_hz);
    let window = device.ring.waveguide.window();
    if target_hz > 0.0 && window.contains_wavelength(guess) {
        if let Ok(lambda) = resonance_wavelength(&device.ring, m, result.temperature_k, guess) {
            return Ok((hz_to_angular(wavelength_nm_to_hz(lambda) - target_hz), CompanionSource::Comb));
        }
    }
    settings
        .fallback_detuning
        .get(&device.width_nm())
        .map(|&d| (d, CompanionSource::Table))
        .ok_or_else(|| {
            Error::Config(format!(
                "companion mode near {guess:.1} nm is outside the dispersion window and no δ'_i is configured for width {} nm",
                device.width_nm()
            ))
        })
}

/// Per-width outcome of [`dispersion_engineering_sweep`].
#[derive(Debug)]
pub struct WidthMatch {
    pub width_nm: u32,
    pub outcome: Result<(MatchResult, FwmChannel, CompanionSource)>,
}

/// Best match and FWM channel for each device; a failed width does not abort the others.
pub fn dispersion_engineering_sweep(
    devices: &[Device],
    constraints: &SearchConstraints,
    settings: &FwmSettings,
) -> Vec<WidthMatch> {
    devices
        .par_iter()
        .map(|device| {
            let outcome = find_triple_resonance(device, constraints).and_then(|search| {
                let best = search.best().clone();
                let (detuning, source) = companion_detuning(device, &best, settings)?;
                let channel = FwmChannel {
                    g_chi3: settings.g_chi3,
                    companion_detuning: detuning,
                    companion_linewidth: settings.companion_linewidth,
                    idler_linewidth: best.idler.kappa_ex + best.idler.kappa_0,
                    pump_kappa: best.pump.kappa_ex + best.pump.kappa_0,
                    pump_kappa_ex: best.pump.kappa_ex,
                    pump_omega: hz_to_angular(best.pump.frequency_hz),
                };
                Ok((best, channel, source))
            });
            WidthMatch {
                width_nm: device.width_nm(),
                outcome,
            }
        })
        .collect()
}
