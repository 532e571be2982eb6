//! Pump-driven spontaneous four-wave-mixing noise in the output idler band and
//! the resulting efficiency/noise trade-off across waveguide widths.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cmt::{external_efficiency, TwmSystem};
use crate::constants::HBAR;
use crate::error::{Error, Result};

/// χ(3) channel feeding noise photons into the idler mode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FwmChannel {
    /// χ(3) vacuum coupling rate (rad/s).
    pub g_chi3: f64,
    /// Detuning δ'_i of the phase-matched companion mode (rad/s).
    pub companion_detuning: f64,
    /// Companion-mode total linewidth κ'_i (rad/s).
    pub companion_linewidth: f64,
    /// Output idler total linewidth κ_i (rad/s).
    pub idler_linewidth: f64,
    pub pump_kappa: f64,
    pub pump_kappa_ex: f64,
    pub pump_omega: f64,
}

impl FwmChannel {
    pub fn validate(&self) -> Result<()> {
        let rates = [
            self.g_chi3,
            self.companion_linewidth,
            self.idler_linewidth,
            self.pump_kappa,
            self.pump_kappa_ex,
            self.pump_omega,
        ];
        if rates.iter().any(|r| !(*r > 0.0)) || !self.companion_detuning.is_finite() {
            return Err(Error::NonphysicalRate(format!("FWM channel rates must be positive: {self:?}")));
        }
        Ok(())
    }
}

/// `R = 64 g² (P/ħω_p)² (κ_p,ex²/κ_p⁴) · (κ_i + κ'_i)/(4δ'² + (κ_i + κ'_i)²)` in photons/s.
pub fn fwm_noise_rate(ch: &FwmChannel, power_w: f64) -> f64 {
    let flux = power_w / (HBAR * ch.pump_omega);
    let width = ch.idler_linewidth + ch.companion_linewidth;
    let lorentzian = width / (4.0 * ch.companion_detuning * ch.companion_detuning + width * width);
    64.0 * ch.g_chi3 * ch.g_chi3 * flux * flux * ch.pump_kappa_ex * ch.pump_kappa_ex / ch.pump_kappa.powi(4)
        * lorentzian
}

/// `g_χ3` giving noise rate `target_hz` at `power_w` (the rate is quadratic in g).
pub fn calibrate_g_chi3(ch: &FwmChannel, power_w: f64, target_hz: f64) -> Result<f64> {
    let unit = fwm_noise_rate(&FwmChannel { g_chi3: 1.0, ..*ch }, power_w);
    if !(unit > 0.0) || !(target_hz > 0.0) {
        return Err(Error::Domain(format!("cannot calibrate g_chi3 to {target_hz} Hz at {power_w} W")));
    }
    Ok((target_hz / unit).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoisePoint {
    pub power_w: f64,
    pub rate_hz: f64,
}

pub fn noise_vs_power(ch: &FwmChannel, powers_w: &[f64]) -> Result<Vec<NoisePoint>> {
    ch.validate()?;
    powers_w
        .iter()
        .map(|&p| {
            if !(p >= 0.0) {
                return Err(Error::Domain(format!("pump power {p} W must be non-negative")));
            }
            Ok(NoisePoint {
                power_w: p,
                rate_hz: fwm_noise_rate(ch, p),
            })
        })
        .collect()
}

/// Noise figures at one operating point.
///
/// `noise_fom_db = 10·log10(R)` is the bare noise-rate figure; `snr_db =
/// 10·log10(signal_rate·η_ex/R)` is the physical signal-to-noise ratio. Both are
/// reported so that consumers choose explicitly.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnrReport {
    pub noise_fom_db: f64,
    pub snr_db: f64,
}

/// With `R = 0` and a non-zero converted signal, `snr_db` is `+∞` (and the noise figure `−∞`).
pub fn snr_report(noise_rate_hz: f64, signal_rate_hz: f64, eta_ex: f64) -> Result<SnrReport> {
    let converted = signal_rate_hz * eta_ex;
    if !(noise_rate_hz >= 0.0) || !(converted >= 0.0) {
        return Err(Error::Domain(format!(
            "rates must be non-negative: R = {noise_rate_hz}, signal·η = {converted}"
        )));
    }
    if noise_rate_hz == 0.0 {
        if converted > 0.0 {
            return Ok(SnrReport {
                noise_fom_db: f64::NEG_INFINITY,
                snr_db: f64::INFINITY,
            });
        }
        return Err(Error::Domain("SNR undefined: zero noise and zero converted signal".into()));
    }
    Ok(SnrReport {
        noise_fom_db: 10.0 * noise_rate_hz.log10(),
        snr_db: 10.0 * (converted / noise_rate_hz).log10(),
    })
}

/// A width variant at its matched operating point, or `None` when the matcher
/// found no triple resonance for it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TradeoffVariant {
    pub width_nm: u32,
    pub operating_point: Option<(TwmSystem, FwmChannel)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TradeoffRow {
    pub width_nm: u32,
    pub power_w: f64,
    pub eta_ex: f64,
    pub noise_rate_hz: f64,
    pub noise_fom_db: f64,
    pub snr_db: f64,
}

/// Figures of one variant at the power of its largest η_ex on the grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeakSummary {
    pub width_nm: u32,
    pub power_w: f64,
    pub eta_ex: f64,
    pub noise_rate_hz: f64,
    pub snr_db: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tradeoff {
    /// Sorted by (width, power).
    pub rows: Vec<TradeoffRow>,
    pub peaks: Vec<PeakSummary>,
    /// Width with the highest SNR at its peak η_ex (ties go to the narrower width).
    pub best_width_nm: u32,
}

/// Efficiency versus noise for each variant over `powers_w`.
pub fn efficiency_snr_tradeoff(variants: &[TradeoffVariant], powers_w: &[f64], signal_rate_hz: f64) -> Result<Tradeoff> {
    if variants.is_empty() || powers_w.is_empty() {
        return Err(Error::Domain("trade-off needs at least one variant and one power".into()));
    }
    let per_variant = variants
        .par_iter()
        .map(|v| -> Result<(Vec<TradeoffRow>, PeakSummary)> {
            let (sys, fwm) = v.operating_point.as_ref().ok_or(Error::UnmatchedVariant(v.width_nm))?;
            fwm.validate()?;
            let rows = powers_w
                .iter()
                .map(|&p| {
                    let (_, eta_ex) = external_efficiency(&sys.with_power(p));
                    let rate = fwm_noise_rate(fwm, p);
                    let snr = snr_report(rate, signal_rate_hz, eta_ex)?;
                    Ok(TradeoffRow {
                        width_nm: v.width_nm,
                        power_w: p,
                        eta_ex,
                        noise_rate_hz: rate,
                        noise_fom_db: snr.noise_fom_db,
                        snr_db: snr.snr_db,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let peak = rows
                .iter()
                .fold(None::<&TradeoffRow>, |best, r| match best {
                    Some(b) if b.eta_ex >= r.eta_ex => Some(b),
                    _ => Some(r),
                })
                .expect("non-empty power grid");
            let summary = PeakSummary {
                width_nm: v.width_nm,
                power_w: peak.power_w,
                eta_ex: peak.eta_ex,
                noise_rate_hz: peak.noise_rate_hz,
                snr_db: peak.snr_db,
            };
            Ok((rows, summary))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows: Vec<TradeoffRow> = per_variant.iter().flat_map(|(r, _)| r.iter().copied()).collect();
    rows.sort_by(|a, b| a.width_nm.cmp(&b.width_nm).then(a.power_w.total_cmp(&b.power_w)));
    let mut peaks: Vec<PeakSummary> = per_variant.into_iter().map(|(_, s)| s).collect();
    peaks.sort_by_key(|s| s.width_nm);
    let best_width_nm = peaks
        .iter()
        .fold(None::<&PeakSummary>, |best, s| match best {
            Some(b) if b.snr_db >= s.snr_db => Some(b),
            _ => Some(s),
        })
        .map(|s| s.width_nm)
        .expect("at least one variant");
    Ok(Tradeoff {
        rows,
        peaks,
        best_width_nm,
    })
}
