//! Triple-resonance search: sweep the ring temperature until a signal mode sits
//! on the memory transition, then look for pump/idler pairs that close the
//! quasi-phase-matching condition with a small frequency mismatch.
//!
//! Every grid detection of a signal mode is polished by a bracketed root solve
//! of the signal resonance condition in temperature, so the reported operating
//! point does not depend on the sweep step.

mod companion;

pub use companion::{companion_detuning, dispersion_engineering_sweep, CompanionSource, FwmSettings, WidthMatch};

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cmt::TwmSystem;
use crate::constants::{hz_to_angular, wavelength_nm_to_hz, SPEED_OF_LIGHT};
use crate::device::Device;
use crate::elements::{qpm_mismatch, resonance_comb, resonance_wavelength, ModeChannel, Role};
use crate::error::{Error, Result};
use crate::numeric::brent;

/// Floor on the adaptive temperature step (K).
pub const MIN_TEMPERATURE_STEP_K: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConstraints {
    /// Memory transition the signal mode must sit on (nm).
    pub signal_wavelength_nm: f64,
    pub max_signal_detuning_hz: f64,
    pub max_mismatch_hz: f64,
    pub pump_base_nm: f64,
    pub idler_base_nm: f64,
    /// Half of the pump/idler search window (nm).
    pub half_window_nm: f64,
    pub temperature_range_k: (f64, f64),
    /// Fixed sweep step; `None` selects the adaptive step.
    pub temperature_step_k: Option<f64>,
}

impl Default for SearchConstraints {
    fn default() -> Self {
        Self {
            signal_wavelength_nm: 737.0,
            max_signal_detuning_hz: 200e6,
            max_mismatch_hz: 150e6,
            pump_base_nm: 1623.0,
            idler_base_nm: 1350.0,
            half_window_nm: 10.0,
            temperature_range_k: (300.0, 400.0),
            temperature_step_k: None,
        }
    }
}

impl SearchConstraints {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("signal_wavelength_nm", self.signal_wavelength_nm),
            ("max_signal_detuning_hz", self.max_signal_detuning_hz),
            ("max_mismatch_hz", self.max_mismatch_hz),
            ("pump_base_nm", self.pump_base_nm),
            ("idler_base_nm", self.idler_base_nm),
            ("half_window_nm", self.half_window_nm),
        ];
        for (name, value) in positive {
            if !(value > 0.0) {
                return Err(Error::Domain(format!("{name} must be positive, got {value}")));
            }
        }
        let (lo, hi) = self.temperature_range_k;
        if !(lo < hi) {
            return Err(Error::Domain(format!("empty temperature sweep [{lo}, {hi}] K")));
        }
        if let Some(step) = self.temperature_step_k {
            if !(step > 0.0) {
                return Err(Error::Domain(format!("temperature step must be positive, got {step}")));
            }
        }
        Ok(())
    }

    pub fn pump_window(&self) -> (f64, f64) {
        (self.pump_base_nm - self.half_window_nm, self.pump_base_nm + self.half_window_nm)
    }

    pub fn idler_window(&self) -> (f64, f64) {
        (self.idler_base_nm - self.half_window_nm, self.idler_base_nm + self.half_window_nm)
    }
}

/// One resolved cavity mode of a match.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeSolution {
    pub m: i64,
    pub wavelength_nm: f64,
    pub frequency_hz: f64,
    pub kappa_ex: f64,
    pub kappa_0: f64,
    pub eta: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Feasibility {
    pub signal_detuning: bool,
    pub mismatch: bool,
    pub pump_window: bool,
    pub idler_window: bool,
    pub qpm: bool,
}

impl Feasibility {
    pub fn all(&self) -> bool {
        self.violated().is_empty()
    }

    pub fn violated(&self) -> Vec<&'static str> {
        [
            (self.signal_detuning, "signal_detuning"),
            (self.mismatch, "mismatch"),
            (self.pump_window, "pump_window"),
            (self.idler_window, "idler_window"),
            (self.qpm, "qpm"),
        ]
        .into_iter()
        .filter(|(ok, _)| !ok)
        .map(|(_, name)| name)
        .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub width_nm: u32,
    pub temperature_k: f64,
    pub pump: ModeSolution,
    pub signal: ModeSolution,
    pub idler: ModeSolution,
    /// Signal cavity frequency minus the memory transition (Hz).
    pub signal_detuning_hz: f64,
    /// `ν_s − ν_p − ν_i` of the cavity modes (Hz).
    pub mismatch_hz: f64,
    pub qpm_mismatch: i64,
    pub poling_number: i64,
    pub feasibility: Feasibility,
}

impl MatchResult {
    /// Mixing system at this operating point: pump laser on its resonance,
    /// signal at the memory transition.
    pub fn twm_system(&self, g0: f64, pump_power_w: f64) -> Result<TwmSystem> {
        let channel = |role, mode: &ModeSolution, detuning| {
            ModeChannel::new(role, hz_to_angular(mode.frequency_hz), mode.m, mode.kappa_ex, mode.kappa_0, detuning)
        };
        TwmSystem::new(
            channel(Role::Pump, &self.pump, 0.0)?,
            channel(Role::Signal, &self.signal, hz_to_angular(self.signal_detuning_hz))?,
            channel(Role::Idler, &self.idler, 0.0)?,
            g0,
            hz_to_angular(self.mismatch_hz),
            pump_power_w,
        )
    }

    fn rank_key(&self) -> (f64, f64, f64) {
        (self.mismatch_hz.abs(), self.signal_detuning_hz.abs(), self.temperature_k)
    }
}

/// Tie-break order: smallest |δ|, then smallest |signal detuning|, then lowest T.
fn rank(a: &MatchResult, b: &MatchResult) -> std::cmp::Ordering {
    let (ka, kb) = (a.rank_key(), b.rank_key());
    ka.0.total_cmp(&kb.0)
        .then(ka.1.total_cmp(&kb.1))
        .then(ka.2.total_cmp(&kb.2))
        .then(a.pump.m.cmp(&b.pump.m))
}

/// Why a search came back empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchDiagnostics {
    pub width_nm: u32,
    pub best_candidate: Option<MatchResult>,
    pub violated: Vec<String>,
    pub signal_detections: usize,
    pub candidates_examined: usize,
}

impl fmt::Display for MatchDiagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "width {} nm: {} signal detections, {} candidates",
            self.width_nm, self.signal_detections, self.candidates_examined
        )?;
        if let Some(best) = &self.best_candidate {
            write!(
                f,
                "; best at T = {:.4} K violates [{}] (δ = {:.3e} Hz, signal detuning = {:.3e} Hz)",
                best.temperature_k,
                self.violated.join(", "),
                best.mismatch_hz,
                best.signal_detuning_hz
            )?;
        }
        Ok(())
    }
}

/// Outcome of a successful search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchSearch {
    /// Feasible matches, best first.
    pub matches: Vec<MatchResult>,
    pub step_k: f64,
    pub signal_shift_hz_per_k: f64,
    /// Total signal-resonance shift over the sweep (Hz).
    pub coverage_hz: f64,
    pub signal_fsr_hz: f64,
    pub warnings: Vec<String>,
}

impl MatchSearch {
    pub fn best(&self) -> &MatchResult {
        &self.matches[0]
    }
}

fn frequency_hz(wavelength_nm: f64) -> f64 {
    wavelength_nm_to_hz(wavelength_nm)
}

fn in_window(lambda: f64, (lo, hi): (f64, f64)) -> bool {
    lambda >= lo && lambda <= hi
}

fn mode_solution(device: &Device, m: i64, wavelength_nm: f64, temperature_k: f64) -> Result<ModeSolution> {
    let rates = device.coupling_rates(wavelength_nm, temperature_k)?;
    Ok(ModeSolution {
        m,
        wavelength_nm,
        frequency_hz: frequency_hz(wavelength_nm),
        kappa_ex: rates.kappa_ex,
        kappa_0: rates.kappa_0,
        eta: rates.eta(),
    })
}

/// Signal-resonance drift `|dν/dT| = ν·(dn/dT)/n_g` at the target wavelength (Hz/K).
fn signal_shift_rate(device: &Device, constraints: &SearchConstraints) -> Result<f64> {
    let wg = &device.ring.waveguide;
    let lambda = constraints.signal_wavelength_nm;
    let t = constraints.temperature_range_k.0;
    Ok(frequency_hz(lambda) * wg.thermo_optic(lambda)?.abs() / wg.group_index(lambda, t)?)
}

/// Nearest-order guess for mode `m` from the index at `reference_nm`.
fn order_guess(device: &Device, m: i64, reference_nm: f64, temperature_k: f64) -> Result<f64> {
    let n = device.ring.waveguide.n_eff(reference_nm, temperature_k)?;
    Ok(n * device.ring.length_m / m as f64 * 1e9)
}

/// Build the result record for `(m_s, m_p)` at `temperature_k`; the idler order
/// follows from quasi-phase matching.
fn evaluate_triple(
    device: &Device,
    constraints: &SearchConstraints,
    temperature_k: f64,
    signal: (i64, f64),
    pump: (i64, f64),
) -> Result<MatchResult> {
    let poling = device.ring.poling_number().rounded;
    let m_i = signal.0 - pump.0 - poling;
    let nu_s = frequency_hz(signal.1);
    let nu_p = frequency_hz(pump.1);
    let window = device.ring.waveguide.window().wavelength_nm;
    let guess = (SPEED_OF_LIGHT / (nu_s - nu_p) * 1e9).clamp(window.0, window.1);
    let lambda_i = resonance_wavelength(&device.ring, m_i, temperature_k, guess)?;
    let nu_i = frequency_hz(lambda_i);
    let signal_detuning_hz = nu_s - frequency_hz(constraints.signal_wavelength_nm);
    let mismatch_hz = nu_s - nu_p - nu_i;
    let qpm = qpm_mismatch(signal.0, pump.0, m_i, poling);
    let feasibility = Feasibility {
        signal_detuning: signal_detuning_hz.abs() <= constraints.max_signal_detuning_hz,
        mismatch: mismatch_hz.abs() <= constraints.max_mismatch_hz,
        pump_window: in_window(pump.1, constraints.pump_window()),
        idler_window: in_window(lambda_i, constraints.idler_window()),
        qpm: qpm == 0,
    };
    Ok(MatchResult {
        width_nm: device.width_nm(),
        temperature_k,
        pump: mode_solution(device, pump.0, pump.1, temperature_k)?,
        signal: mode_solution(device, signal.0, signal.1, temperature_k)?,
        idler: mode_solution(device, m_i, lambda_i, temperature_k)?,
        signal_detuning_hz,
        mismatch_hz,
        qpm_mismatch: qpm,
        poling_number: poling,
        feasibility,
    })
}

/// Signal order nearest the target at `temperature_k`, its resonance and detuning.
fn detect_signal(device: &Device, constraints: &SearchConstraints, temperature_k: f64) -> Result<(i64, f64, f64)> {
    let lambda_t = constraints.signal_wavelength_nm;
    let n = device.ring.waveguide.n_eff(lambda_t, temperature_k)?;
    let m = (n * device.ring.length_m / (lambda_t * 1e-9)).round() as i64;
    let lambda = resonance_wavelength(&device.ring, m, temperature_k, lambda_t)?;
    Ok((m, lambda, frequency_hz(lambda) - frequency_hz(lambda_t)))
}

/// Temperature at which order `m_s` resonates exactly at the target, searched
/// within `radius` of `seed` and clamped to the sweep range.
fn polish_temperature(device: &Device, constraints: &SearchConstraints, m_s: i64, seed: f64, radius: f64) -> Option<f64> {
    let (t_lo, t_hi) = constraints.temperature_range_k;
    let lambda_t = constraints.signal_wavelength_nm;
    let wg = &device.ring.waveguide;
    let f = |t: f64| match wg.n_eff(lambda_t, t) {
        Ok(n) => m_s as f64 - n * device.ring.length_m / (lambda_t * 1e-9),
        Err(_) => f64::NAN,
    };
    brent(f, (seed - radius).max(t_lo), (seed + radius).min(t_hi), 1e-12).ok()
}

/// Sweep the ring temperature and return every feasible triple resonance.
pub fn find_triple_resonance(device: &Device, constraints: &SearchConstraints) -> Result<MatchSearch> {
    constraints.validate()?;
    let wg = &device.ring.waveguide;
    let (t_lo, t_hi) = constraints.temperature_range_k;
    for lambda in [
        constraints.signal_wavelength_nm,
        constraints.pump_window().0,
        constraints.pump_window().1,
        constraints.idler_window().0,
        constraints.idler_window().1,
    ] {
        wg.window().check(lambda, t_lo)?;
        wg.window().check(lambda, t_hi)?;
    }

    let tolerance = constraints.max_signal_detuning_hz;
    let rate = signal_shift_rate(device, constraints)?;
    let step = match constraints.temperature_step_k {
        Some(step) => {
            if rate * step > 0.5 * tolerance {
                return Err(Error::SweepStepTooCoarse {
                    step_k: step,
                    shift_hz: rate * step,
                    tolerance_hz: tolerance,
                });
            }
            step
        }
        None => (0.25 * tolerance / rate).max(MIN_TEMPERATURE_STEP_K),
    };
    let fsr = device.ring.fsr_hz(constraints.signal_wavelength_nm, t_lo)?;
    let coverage = rate * (t_hi - t_lo);
    let mut warnings = Vec::new();
    if coverage < fsr {
        warnings.push(format!(
            "temperature sweep shifts the signal resonance by {:.1} GHz, less than one FSR ({:.1} GHz)",
            coverage * 1e-9,
            fsr * 1e-9
        ));
    }
    let poling = device.ring.poling_number();
    if poling.needs_warning() {
        warnings.push(format!(
            "poling number L_PPLN/Λ = {:.4} is {:.3} from the nearest integer",
            poling.exact, poling.residual
        ));
    }

    // Grid detection, parallel over temperature chunks with an ordered reduction.
    let count = ((t_hi - t_lo) / step).ceil() as usize;
    let grid: Vec<f64> = (0..=count).map(|k| (t_lo + k as f64 * step).min(t_hi)).collect();
    let detections = grid
        .par_chunks(256)
        .map(|chunk| -> Result<Vec<(i64, f64, f64)>> {
            let mut hits = Vec::new();
            for &t in chunk {
                let (m, _, detuning) = detect_signal(device, constraints, t)?;
                if detuning.abs() <= tolerance {
                    hits.push((m, t, detuning));
                }
            }
            Ok(hits)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten();
    let mut best_per_order: BTreeMap<i64, (f64, f64)> = BTreeMap::new();
    for (m, t, detuning) in detections {
        let entry = best_per_order.entry(m).or_insert((t, detuning));
        if detuning.abs() < entry.1.abs() {
            *entry = (t, detuning);
        }
    }
    let signal_detections = best_per_order.len();

    let radius = 4.0 * step + tolerance / rate;
    let candidates = best_per_order
        .into_par_iter()
        .map(|(m_s, (t_grid, _))| -> Result<Vec<MatchResult>> {
            let t = polish_temperature(device, constraints, m_s, t_grid, radius).unwrap_or(t_grid);
            let lambda_s = resonance_wavelength(&device.ring, m_s, t, constraints.signal_wavelength_nm)?;
            let pumps = match resonance_comb(&device.ring, constraints.pump_window(), t) {
                Ok(comb) => comb,
                Err(Error::NoResonance { .. }) => Vec::new(),
                Err(e) => return Err(e),
            };
            let mut out = Vec::with_capacity(pumps.len());
            for p in pumps {
                match evaluate_triple(device, constraints, t, (m_s, lambda_s), (p.m, p.wavelength_nm)) {
                    Ok(result) => out.push(result),
                    Err(Error::RootNotFound(_)) | Err(Error::OutOfDomain { .. }) => {}
                    Err(e) => return Err(e),
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect::<Vec<_>>();
    let candidates_examined = candidates.len();

    let (mut feasible, mut infeasible): (Vec<_>, Vec<_>) = candidates.into_iter().partition(|r| r.feasibility.all());
    if feasible.is_empty() {
        infeasible.sort_by(|a, b| {
            a.feasibility
                .violated()
                .len()
                .cmp(&b.feasibility.violated().len())
                .then(rank(a, b))
        });
        let best_candidate = infeasible.into_iter().next();
        let violated = best_candidate
            .as_ref()
            .map(|b| b.feasibility.violated().into_iter().map(String::from).collect())
            .unwrap_or_else(|| vec!["signal_detuning".to_string()]);
        return Err(Error::NoFeasibleMatch(Box::new(MatchDiagnostics {
            width_nm: device.width_nm(),
            best_candidate,
            violated,
            signal_detections,
            candidates_examined,
        })));
    }
    feasible.sort_by(rank);
    for result in &feasible {
        verify_match(device, constraints, result)?;
    }
    Ok(MatchSearch {
        matches: feasible,
        step_k: step,
        signal_shift_hz_per_k: rate,
        coverage_hz: coverage,
        signal_fsr_hz: fsr,
        warnings,
    })
}

/// Residuals re-derived from the raw dispersion by [`verify_match`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub wavelengths_nm: [f64; 3],
    pub signal_detuning_hz: f64,
    pub mismatch_hz: f64,
    pub qpm_mismatch: i64,
    pub feasibility: Feasibility,
    /// Largest wavelength deviation relative to the stored values.
    pub max_relative_deviation: f64,
}

/// Relative tolerance of [`verify_match`]; frequency residuals are compared on
/// the scale of the signal carrier.
pub const VERIFY_TOLERANCE: f64 = 1e-9;

/// Independently recompute every residual of `result` and compare.
pub fn verify_match(device: &Device, constraints: &SearchConstraints, result: &MatchResult) -> Result<ResidualReport> {
    let t = result.temperature_k;
    let poling = device.ring.poling_number().rounded;
    let mut lambdas = [0.0; 3];
    for (slot, (mode, base)) in [
        (&result.pump, constraints.pump_base_nm),
        (&result.signal, constraints.signal_wavelength_nm),
        (&result.idler, constraints.idler_base_nm),
    ]
    .into_iter()
    .enumerate()
    {
        let guess = order_guess(device, mode.m, base, t)?;
        let window = device.ring.waveguide.window().wavelength_nm;
        lambdas[slot] = resonance_wavelength(&device.ring, mode.m, t, guess.clamp(window.0, window.1))
            .map_err(|e| Error::StaleResult(format!("order {} no longer resolves: {e}", mode.m)))?;
    }
    let [lp, ls, li] = lambdas;
    let nu_s = frequency_hz(ls);
    let signal_detuning_hz = nu_s - frequency_hz(constraints.signal_wavelength_nm);
    let mismatch_hz = nu_s - frequency_hz(lp) - frequency_hz(li);
    let qpm = qpm_mismatch(result.signal.m, result.pump.m, result.idler.m, poling);
    let feasibility = Feasibility {
        signal_detuning: signal_detuning_hz.abs() <= constraints.max_signal_detuning_hz,
        mismatch: mismatch_hz.abs() <= constraints.max_mismatch_hz,
        pump_window: in_window(lp, constraints.pump_window()),
        idler_window: in_window(li, constraints.idler_window()),
        qpm: qpm == 0,
    };
    let stored = [result.pump.wavelength_nm, result.signal.wavelength_nm, result.idler.wavelength_nm];
    let max_relative_deviation = lambdas
        .iter()
        .zip(stored)
        .map(|(a, b)| ((a - b) / b).abs())
        .fold(0.0, f64::max);
    let frequency_tolerance = VERIFY_TOLERANCE * nu_s;
    let mut problems = Vec::new();
    if !(max_relative_deviation <= VERIFY_TOLERANCE) {
        problems.push(format!("wavelengths deviate by {max_relative_deviation:.3e} (relative)"));
    }
    if !((signal_detuning_hz - result.signal_detuning_hz).abs() <= frequency_tolerance) {
        problems.push(format!(
            "signal detuning {signal_detuning_hz:.6e} Hz vs stored {:.6e} Hz",
            result.signal_detuning_hz
        ));
    }
    if !((mismatch_hz - result.mismatch_hz).abs() <= frequency_tolerance) {
        problems.push(format!("mismatch {mismatch_hz:.6e} Hz vs stored {:.6e} Hz", result.mismatch_hz));
    }
    if qpm != result.qpm_mismatch || poling != result.poling_number {
        problems.push(format!("QPM mismatch {qpm} vs stored {}", result.qpm_mismatch));
    }
    if feasibility != result.feasibility {
        problems.push("feasibility flags changed".to_string());
    }
    if !problems.is_empty() {
        return Err(Error::StaleResult(problems.join("; ")));
    }
    Ok(ResidualReport {
        wavelengths_nm: lambdas,
        signal_detuning_hz,
        mismatch_hz,
        qpm_mismatch: qpm,
        feasibility,
        max_relative_deviation,
    })
}
