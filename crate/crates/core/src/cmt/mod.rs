//! Triply resonant three-wave mixing in the undepleted-pump limit.
//!
//! Rate convention: every κ is a total energy decay rate in rad/s (the full
//! linewidth), so field amplitudes decay at κ/2. Detunings follow
//! `δ_x = ω_cavity − ω_drive`. This is the only convention under which the
//! efficiency bracket `(1 + 2iδ/κ)` and the unity-cooperativity pump power are
//! mutually consistent.

mod mean_field;

pub use mean_field::{evolve_mean_field, flux_efficiency, MeanFieldParams, State, Trajectory};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::HBAR;
use crate::elements::{ModeChannel, Role};
use crate::error::{Error, Result};

/// Pump, signal and idler modes coupled by the χ(2) vacuum rate `g0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwmSystem {
    pub pump: ModeChannel,
    pub signal: ModeChannel,
    pub idler: ModeChannel,
    /// Vacuum coupling rate g₀ (rad/s).
    pub g0: f64,
    /// Triple-resonance mismatch `δ = ω_s − (ω_p + ω_i)` (rad/s).
    pub mismatch: f64,
    /// Pump power in the bus waveguide (W).
    pub pump_power_w: f64,
}

impl TwmSystem {
    pub fn new(
        pump: ModeChannel,
        signal: ModeChannel,
        idler: ModeChannel,
        g0: f64,
        mismatch: f64,
        pump_power_w: f64,
    ) -> Result<Self> {
        if (pump.role, signal.role, idler.role) != (Role::Pump, Role::Signal, Role::Idler) {
            return Err(Error::Domain("modes must be given as (pump, signal, idler)".into()));
        }
        if !(g0 >= 0.0) {
            return Err(Error::NonphysicalRate(format!("g0 = {g0} must be non-negative")));
        }
        if !(pump_power_w >= 0.0) {
            return Err(Error::Domain(format!("pump power {pump_power_w} W must be non-negative")));
        }
        if !mismatch.is_finite() {
            return Err(Error::Domain("mismatch is not finite".into()));
        }
        Ok(Self {
            pump,
            signal,
            idler,
            g0,
            mismatch,
            pump_power_w,
        })
    }

    pub fn with_power(&self, pump_power_w: f64) -> Self {
        Self { pump_power_w, ..*self }
    }

    pub fn intracavity_photons(&self) -> f64 {
        pump_photons(self.pump_power_w, &self.pump)
    }

    /// Idler detuning entering the efficiency bracket, `δ_s − δ_p − δ`.
    pub fn idler_detuning(&self) -> f64 {
        self.signal.detuning - self.pump.detuning - self.mismatch
    }
}

/// Figures of merit at one pump power.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConversionResult {
    pub intracavity_photons: f64,
    pub cooperativity: f64,
    pub eta_int: f64,
    pub eta_ex: f64,
    /// Pump power giving unit cooperativity (W).
    pub p_max_w: f64,
}

/// Steady intracavity pump photon number
/// `|α|² = κ_p,ex·(P/ħω_p) / (δ_p² + κ_p²/4)`.
pub fn intracavity_pump(power_w: f64, omega_p: f64, kappa_p: f64, kappa_p_ex: f64, detuning_p: f64) -> Result<f64> {
    if !(kappa_p > 0.0) || !(kappa_p_ex >= 0.0) {
        return Err(Error::NonphysicalRate(format!(
            "pump rates κ_p = {kappa_p}, κ_p,ex = {kappa_p_ex} must be positive"
        )));
    }
    if kappa_p_ex > kappa_p {
        return Err(Error::NonphysicalRate(format!(
            "external rate {kappa_p_ex} exceeds total rate {kappa_p}"
        )));
    }
    if !(power_w >= 0.0) || !(omega_p > 0.0) {
        return Err(Error::Domain(format!("need P ≥ 0 and ω_p > 0, got {power_w}, {omega_p}")));
    }
    let flux = power_w / (HBAR * omega_p);
    Ok(kappa_p_ex * flux / (detuning_p * detuning_p + 0.25 * kappa_p * kappa_p))
}

fn pump_photons(power_w: f64, pump: &ModeChannel) -> f64 {
    let flux = power_w / (HBAR * pump.omega);
    let kappa = pump.kappa_tot();
    pump.kappa_ex * flux / (pump.detuning * pump.detuning + 0.25 * kappa * kappa)
}

/// `C = 4g₀²|α|²/(κ_s κ_i)`.
pub fn cooperativity(sys: &TwmSystem) -> f64 {
    4.0 * sys.g0 * sys.g0 * sys.intracavity_photons() / (sys.signal.kappa_tot() * sys.idler.kappa_tot())
}

/// Internal efficiency at cooperativity `c` for the given signal and idler
/// detuning ratios `2δ/κ`.
pub fn internal_efficiency(c: f64, signal_ratio: f64, idler_ratio: f64) -> f64 {
    let bracket = Complex64::new(1.0, signal_ratio) * Complex64::new(1.0, idler_ratio) + c;
    4.0 * c / bracket.norm_sqr()
}

/// `(η_int, η_ex)` with `η_int = 4C/|(1 + 2iδ_s/κ_s)(1 + 2i(δ_s − δ_p − δ)/κ_i) + C|²`
/// and `η_ex = η_s·η_i·η_int`.
pub fn external_efficiency(sys: &TwmSystem) -> (f64, f64) {
    let c = cooperativity(sys);
    let eta_int = internal_efficiency(
        c,
        2.0 * sys.signal.detuning / sys.signal.kappa_tot(),
        2.0 * sys.idler_detuning() / sys.idler.kappa_tot(),
    );
    (eta_int, sys.signal.eta() * sys.idler.eta() * eta_int)
}

/// Pump power for `C = 1` on pump resonance,
/// `P_max = ħω_p·κ_p0 κ_s0 κ_i0 / (16 g₀² η_p(1−η_p)(1−η_s)(1−η_i))`.
pub fn pump_power_unity_cooperativity(sys: &TwmSystem) -> Result<f64> {
    for mode in [&sys.pump, &sys.signal, &sys.idler] {
        if mode.kappa_ex == 0.0 || mode.kappa_0 == 0.0 {
            return Err(Error::DegenerateCoupling(format!(
                "{:?} coupling ratio η = {} makes the unity-cooperativity power singular",
                mode.role,
                mode.eta()
            )));
        }
    }
    if sys.g0 == 0.0 {
        return Err(Error::DegenerateCoupling("g0 = 0: cooperativity never reaches 1".into()));
    }
    let (p, s, i) = (&sys.pump, &sys.signal, &sys.idler);
    let numerator = p.kappa_0 * s.kappa_0 * i.kappa_0;
    let denominator = 16.0 * sys.g0 * sys.g0 * p.eta() * p.one_minus_eta() * s.one_minus_eta() * i.one_minus_eta();
    Ok(numerator / denominator * HBAR * p.omega)
}

/// PPLN-fraction scaling of the vacuum coupling rate, `g₀ = g0_full·f_PPLN`.
pub fn g0_effective(g0_full: f64, ppln_fraction: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&ppln_fraction) {
        return Err(Error::Domain(format!("PPLN fraction {ppln_fraction} outside [0, 1]")));
    }
    Ok(g0_full * ppln_fraction)
}

pub fn conversion(sys: &TwmSystem) -> Result<ConversionResult> {
    let (eta_int, eta_ex) = external_efficiency(sys);
    Ok(ConversionResult {
        intracavity_photons: sys.intracavity_photons(),
        cooperativity: cooperativity(sys),
        eta_int,
        eta_ex,
        p_max_w: pump_power_unity_cooperativity(sys)?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyPoint {
    pub power_w: f64,
    pub cooperativity: f64,
    pub eta_int: f64,
    pub eta_ex: f64,
}

/// Efficiency curve over a pump-power grid (W).
pub fn efficiency_vs_power(sys: &TwmSystem, powers_w: &[f64]) -> Result<Vec<EfficiencyPoint>> {
    powers_w
        .iter()
        .map(|&p| {
            if !(p >= 0.0) {
                return Err(Error::Domain(format!("pump power {p} W must be non-negative")));
            }
            let at = sys.with_power(p);
            let (eta_int, eta_ex) = external_efficiency(&at);
            Ok(EfficiencyPoint {
                power_w: p,
                cooperativity: cooperativity(&at),
                eta_int,
                eta_ex,
            })
        })
        .collect()
}
