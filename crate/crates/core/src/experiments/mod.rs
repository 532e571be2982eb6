//! Named experiments behind the `rmzi` binary. Each one loads the
//! configuration, runs a deterministic computation and writes figure-ready
//! CSV/JSON files with `.meta.json` sidecars plus a `run_record.json`.

mod calibrate;
mod output;

pub use calibrate::{calibrate, calibrate_variant, CalibrationReport, VariantReport};
pub use output::{format_sig, OutputWriter, TOOL_VERSION};

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::cmt::{conversion, efficiency_vs_power, TwmSystem};
use crate::config::Config;
use crate::constants::wavelength_nm_to_hz;
use crate::device::Device;
use crate::dispersion::DispersionModel;
use crate::elements::{dc_cross_coupling, resonance_comb, ring_spectrum, WEAK_COUPLING_LIMIT};
use crate::error::{Error, Result};
use crate::matcher::{dispersion_engineering_sweep, find_triple_resonance, MatchResult, MatchSearch};
use crate::noise::{efficiency_snr_tradeoff, noise_vs_power, TradeoffVariant};
use crate::numeric::linspace;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Spectrum,
    Couplings,
    Match,
    Convert,
    Noise,
    Tradeoff,
    Calibrate,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::Spectrum,
        Experiment::Couplings,
        Experiment::Match,
        Experiment::Convert,
        Experiment::Noise,
        Experiment::Tradeoff,
        Experiment::Calibrate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Spectrum => "spectrum",
            Experiment::Couplings => "couplings",
            Experiment::Match => "match",
            Experiment::Convert => "convert",
            Experiment::Noise => "noise",
            Experiment::Tradeoff => "tradeoff",
            Experiment::Calibrate => "calibrate",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment `{s}`")))
    }
}

/// Summary of one invocation, written to `run_record.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config_hash: String,
    pub tool_version: String,
    pub experiment: String,
    pub wall_clock_s: f64,
    pub outputs: Vec<String>,
    pub warnings: Vec<String>,
}

/// Everything an experiment needs: resolved configuration and dispersion model.
pub struct Session {
    pub config: Config,
    pub config_path: PathBuf,
    pub model: Arc<DispersionModel>,
    pub warnings: Vec<String>,
}

impl Session {
    pub fn open(config_path: &Path, overrides: &[String]) -> Result<Self> {
        let (config, base_dir) = Config::load(config_path, overrides)?;
        let model = config.dispersion_model(&base_dir)?;
        Ok(Self {
            config,
            config_path: config_path.to_path_buf(),
            model,
            warnings: Vec::new(),
        })
    }

    pub fn device(&self, width_nm: u32) -> Result<Device> {
        self.config.device(&self.model, width_nm)
    }

    /// Best triple resonance of the active width.
    pub fn operating_point(&mut self) -> Result<(Device, MatchSearch)> {
        let device = self.device(self.config.device.active_width_nm)?;
        let search = find_triple_resonance(&device, &self.config.search_constraints())?;
        self.warnings.extend(search.warnings.iter().cloned());
        Ok((device, search))
    }

    fn system(&self, result: &MatchResult, power_w: f64) -> Result<TwmSystem> {
        result.twm_system(self.config.g0()?, power_w)
    }

    /// Operating point and FWM channel of every trade-off width, plus a JSON
    /// summary of each feasible one. Widths without a feasible match are
    /// kept (with no operating point) and noted as warnings.
    pub fn tradeoff_variants(&mut self) -> Result<(Vec<TradeoffVariant>, Vec<serde_json::Value>)> {
        let config = self.config.clone();
        let devices = config
            .experiment
            .tradeoff_widths_nm
            .iter()
            .map(|&w| self.device(w))
            .collect::<Result<Vec<_>>>()?;
        let settings = config.fwm_settings()?;
        let sweep = dispersion_engineering_sweep(&devices, &config.search_constraints(), &settings);
        let mut variants = Vec::new();
        let mut summaries = Vec::new();
        for entry in sweep {
            match entry.outcome {
                Ok((best, channel, source)) => {
                    summaries.push(json!({
                        "operating_point": match_summary(&best),
                        "companion_detuning_over_2pi_THz": channel.companion_detuning / (2.0 * std::f64::consts::PI) * 1e-12,
                        "companion_source": source,
                    }));
                    variants.push(TradeoffVariant {
                        width_nm: entry.width_nm,
                        operating_point: Some((self.system(&best, 0.0)?, channel)),
                    });
                }
                Err(e @ Error::NoFeasibleMatch(_)) => {
                    self.warnings.push(format!("width {} nm: {e}", entry.width_nm));
                    variants.push(TradeoffVariant {
                        width_nm: entry.width_nm,
                        operating_point: None,
                    });
                }
                Err(e) => return Err(e),
            }
        }
        Ok((variants, summaries))
    }
}

/// Run `experiment` and write its outputs to `out_dir`.
pub fn run(config_path: &Path, experiment: Experiment, overrides: &[String], out_dir: &Path) -> Result<RunRecord> {
    let started = Instant::now();
    let mut session = Session::open(config_path, overrides)?;
    if experiment != Experiment::Calibrate {
        session.config.require_calibration()?;
    }
    let config = session.config.clone();
    let mut writer = OutputWriter::new(out_dir, experiment.name(), &config, session.model.fingerprint())?;
    match experiment {
        Experiment::Spectrum => spectrum(&mut session, &mut writer)?,
        Experiment::Couplings => couplings(&mut session, &mut writer)?,
        Experiment::Match => match_report(&mut session, &mut writer)?,
        Experiment::Convert => convert(&mut session, &mut writer)?,
        Experiment::Noise => noise(&mut session, &mut writer)?,
        Experiment::Tradeoff => tradeoff(&mut session, &mut writer)?,
        Experiment::Calibrate => {
            let report = calibrate(&session)?;
            calibrate::write_outputs(&session, &report, &mut writer)?;
        }
    }
    let outputs: Vec<String> = writer
        .written()
        .iter()
        .map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default())
        .collect();
    for path in writer.written() {
        if std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true) {
            return Err(Error::Domain(format!("output {} is missing or empty", path.display())));
        }
    }
    let mut warnings = session.warnings;
    warnings.sort();
    warnings.dedup();
    let record = RunRecord {
        config_hash: config.hash(),
        tool_version: TOOL_VERSION.to_string(),
        experiment: experiment.name().to_string(),
        wall_clock_s: started.elapsed().as_secs_f64(),
        outputs,
        warnings,
    };
    let mut text = serde_json::to_string_pretty(&record).expect("run record serialises");
    text.push('\n');
    std::fs::write(out_dir.join("run_record.json"), text)?;
    Ok(record)
}

fn mhz(rate_rad_s: f64) -> f64 {
    rate_rad_s / (2.0 * std::f64::consts::PI) * 1e-6
}

fn ghz(rate_rad_s: f64) -> f64 {
    mhz(rate_rad_s) * 1e-3
}

fn match_summary(m: &MatchResult) -> serde_json::Value {
    json!({
        "width_nm": m.width_nm,
        "temperature_K": m.temperature_k,
        "pump_nm": m.pump.wavelength_nm,
        "signal_nm": m.signal.wavelength_nm,
        "idler_nm": m.idler.wavelength_nm,
        "mismatch_MHz": m.mismatch_hz * 1e-6,
        "signal_detuning_MHz": m.signal_detuning_hz * 1e-6,
        "eta": {"pump": m.pump.eta, "signal": m.signal.eta, "idler": m.idler.eta},
        "kappa_tot_over_2pi_GHz": {
            "pump": ghz(m.pump.kappa_ex + m.pump.kappa_0),
            "signal": ghz(m.signal.kappa_ex + m.signal.kappa_0),
            "idler": ghz(m.idler.kappa_ex + m.idler.kappa_0),
        },
    })
}

fn spectrum(session: &mut Session, out: &mut OutputWriter) -> Result<()> {
    let (device, search) = session.operating_point()?;
    let best = search.best().clone();
    let e = &session.config.experiment;
    let t = best.temperature_k;
    for (role, mode) in [("pump", &best.pump), ("signal", &best.signal), ("idler", &best.idler)] {
        let half = 0.5 * e.spectrum_span_ghz * 1e9;
        let nu = wavelength_nm_to_hz(mode.wavelength_nm);
        let range = (
            crate::constants::hz_to_wavelength_nm(nu + half),
            crate::constants::hz_to_wavelength_nm(nu - half),
        );
        let spec = ring_spectrum(&device.ring, &device.mzi, range, e.spectrum_points, t, device.mzi.drive_k)?;
        let rows: Vec<Vec<f64>> = spec
            .wavelength_nm
            .iter()
            .zip(&spec.transmission)
            .map(|(&l, &tr)| vec![l, tr])
            .collect();
        let details = json!({
            "mode": role,
            "resonance_nm": mode.wavelength_nm,
            "m": mode.m,
            "ring_temperature_K": t,
            "mzi_drive_K": device.mzi.drive_k,
            "eta": mode.eta,
            "kappa_tot_over_2pi_GHz": ghz(mode.kappa_ex + mode.kappa_0),
        });
        out.csv(&format!("spectrum_{role}.csv"), &["wavelength_nm", "transmission"], &rows, details)?;
    }
    let c = session.config.search_constraints();
    let signal_band = (c.signal_wavelength_nm - c.half_window_nm, c.signal_wavelength_nm + c.half_window_nm);
    for (role, band) in [("pump", c.pump_window()), ("signal", signal_band), ("idler", c.idler_window())] {
        let comb = resonance_comb(&device.ring, band, t)?;
        let rows = comb
            .iter()
            .map(|r| Ok(vec![r.m as f64, r.wavelength_nm, device.ring.fsr_hz(r.wavelength_nm, t)? * 1e-9]))
            .collect::<Result<Vec<_>>>()?;
        let details = json!({"band_nm": [band.0, band.1], "ring_temperature_K": t});
        out.csv(&format!("comb_{role}.csv"), &["m", "wavelength_nm", "fsr_GHz"], &rows, details)?;
    }
    Ok(())
}

fn couplings(session: &mut Session, out: &mut OutputWriter) -> Result<()> {
    let (device, search) = session.operating_point()?;
    let best = search.best().clone();
    let e = session.config.experiment.clone();
    let mut strong = Vec::new();
    let rows = linspace(e.coupler_wavelength_min_nm, e.coupler_wavelength_max_nm, e.coupler_points)
        .into_iter()
        .map(|l| {
            let k2 = dc_cross_coupling(&device.mzi.first, l)?;
            let dtheta = device.mzi.phase_difference(l)?;
            let k = device.mzi.power_coupling(l)?;
            Ok(vec![l, k2, k, (0.5 * dtheta).cos().powi(2)])
        })
        .collect::<Result<Vec<_>>>()?;
    out.csv(
        "coupler_spectrum.csv",
        &["wavelength_nm", "dc_cross_coupling", "mzi_cross_coupling", "envelope_cos2"],
        &rows,
        json!({"mzi_drive_K": device.mzi.drive_k, "base_temperature_K": device.mzi.base_temperature_k}),
    )?;
    let t = best.temperature_k;
    let rows = linspace(e.drive_min_k, e.drive_max_k, e.drive_points)
        .into_iter()
        .map(|drive| {
            let d = device.with_drive(drive);
            let mut row = vec![drive];
            for mode in [&best.pump, &best.signal, &best.idler] {
                let rates = d.coupling_rates(mode.wavelength_nm, t)?;
                if rates.beyond_weak_coupling {
                    strong.push(drive);
                }
                row.push(rates.eta());
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    if let (Some(lo), Some(hi)) = (strong.first(), strong.last()) {
        session.warnings.push(format!(
            "MZI cross-coupling exceeds {WEAK_COUPLING_LIMIT} for drives in [{lo}, {hi}] K; weak-coupling rate mapping is approximate there"
        ));
    }
    out.csv(
        "coupling_ratios.csv",
        &["drive_K", "eta_pump", "eta_signal", "eta_idler"],
        &rows,
        json!({"operating_point": match_summary(&best)}),
    )
}

fn match_report(session: &mut Session, out: &mut OutputWriter) -> Result<()> {
    let (_, search) = session.operating_point()?;
    let report = json!({
        "best": search.best(),
        "matches": search.matches,
        "sweep_step_K": search.step_k,
        "signal_shift_Hz_per_K": search.signal_shift_hz_per_k,
        "coverage_Hz": search.coverage_hz,
        "signal_fsr_Hz": search.signal_fsr_hz,
        "warnings": search.warnings,
        "constraints": session.config.search_constraints(),
        "dispersion_model_hash": session.model.fingerprint(),
    });
    out.json("match.json", &report, json!({"operating_point": match_summary(search.best())}))
}

/// Power grid with the configured pump power inserted.
/// Configured log-spaced power grid (W) with the operating power inserted.
pub fn power_grid(config: &Config) -> Vec<f64> {
    // The operating power is always a row; it replaces a grid point that
    // differs from it only by rounding.
    let p_op = config.experiment.pump_power_mw * 1e-3;
    let mut grid = config.power_grid_w();
    grid.retain(|p| ((p - p_op) / p_op).abs() > 1e-9);
    grid.push(p_op);
    grid.sort_by(f64::total_cmp);
    grid
}

fn convert(session: &mut Session, out: &mut OutputWriter) -> Result<()> {
    let (_, search) = session.operating_point()?;
    let best = search.best().clone();
    let p_op = session.config.experiment.pump_power_mw * 1e-3;
    let sys = session.system(&best, p_op)?;
    let at_op = conversion(&sys)?;
    let curve = efficiency_vs_power(&sys, &power_grid(&session.config))?;
    let peak = curve
        .iter()
        .fold(curve[0], |b, p| if p.eta_ex > b.eta_ex { *p } else { b });
    let rows: Vec<Vec<f64>> = curve
        .iter()
        .map(|p| vec![p.power_w * 1e3, p.cooperativity, p.eta_int, p.eta_ex])
        .collect();
    let details = json!({
        "operating_point": match_summary(&best),
        "g0_over_2pi_MHz": mhz(sys.g0),
        "detunings_MHz": {
            "pump": mhz(sys.pump.detuning),
            "signal": mhz(sys.signal.detuning),
            "mismatch": mhz(sys.mismatch),
        },
        "at_pump_power": {
            "pump_power_mW": p_op * 1e3,
            "intracavity_photons": at_op.intracavity_photons,
            "cooperativity": at_op.cooperativity,
            "eta_int": at_op.eta_int,
            "eta_ext": at_op.eta_ex,
        },
        "p_max_mW": at_op.p_max_w * 1e3,
        "peak": {"power_mW": peak.power_w * 1e3, "eta_ext": peak.eta_ex},
    });
    out.csv("efficiency.csv", &["power_mW", "cooperativity", "eta_int", "eta_ext"], &rows, details)
}

fn noise(session: &mut Session, out: &mut OutputWriter) -> Result<()> {
    let width = session.config.device.active_width_nm;
    let device = session.device(width)?;
    let settings = session.config.fwm_settings()?;
    let sweep = dispersion_engineering_sweep(&[device], &session.config.search_constraints(), &settings);
    let (best, channel, source) = sweep.into_iter().next().expect("one device").outcome?;
    let curve = noise_vs_power(&channel, &power_grid(&session.config))?;
    let rows: Vec<Vec<f64>> = curve.iter().map(|p| vec![p.power_w * 1e3, p.rate_hz]).collect();
    let details = json!({
        "operating_point": match_summary(&best),
        "companion_detuning_over_2pi_THz": channel.companion_detuning / (2.0 * std::f64::consts::PI) * 1e-12,
        "companion_detuning_convention": "configured THz values are ordinary frequency; delta'_i = 2*pi*value rad/s",
        "companion_source": source,
        "companion_linewidth_over_2pi_GHz": ghz(channel.companion_linewidth),
        "g_chi3_rad_per_s": channel.g_chi3,
    });
    out.csv("noise.csv", &["power_mW", "R_FWM_Hz"], &rows, details)
}

fn tradeoff(session: &mut Session, out: &mut OutputWriter) -> Result<()> {
    let config = session.config.clone();
    let (variants, summaries) = session.tradeoff_variants()?;
    let result = efficiency_snr_tradeoff(&variants, &power_grid(&config), config.physics.signal_rate_hz)?;
    let rows: Vec<Vec<f64>> = result
        .rows
        .iter()
        .map(|r| {
            vec![
                r.width_nm as f64,
                r.power_w * 1e3,
                r.eta_ex,
                r.noise_rate_hz,
                r.noise_fom_db,
                r.snr_db,
            ]
        })
        .collect();
    let peaks: Vec<_> = result
        .peaks
        .iter()
        .map(|p| {
            json!({
                "width_nm": p.width_nm,
                "power_mW": p.power_w * 1e3,
                "eta_ext": p.eta_ex,
                "R_FWM_Hz": p.noise_rate_hz,
                "snr_dB": p.snr_db,
            })
        })
        .collect();
    let details = json!({
        "variants": summaries,
        "peaks": peaks,
        "best_width_nm": result.best_width_nm,
        "signal_rate_Hz": config.physics.signal_rate_hz,
        "paper_fom_dB": "10*log10(R_FWM); snr_dB = 10*log10(signal_rate*eta_ext/R_FWM)",
    });
    out.csv(
        "tradeoff.csv",
        &["width_nm", "power_mW", "eta_ext", "R_FWM_Hz", "paper_fom_dB", "snr_dB"],
        &rows,
        details,
    )
}
