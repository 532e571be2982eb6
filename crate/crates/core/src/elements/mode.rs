use serde::{Deserialize, Serialize};

use super::coupler::MziCoupler;
use super::ring::RingCavity;
use crate::constants::{hz_to_wavelength_nm, angular_to_hz};
use crate::error::{Error, Result};

/// Power coupling above which the weak-coupling rate mapping is flagged.
pub const WEAK_COUPLING_LIMIT: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Pump,
    Signal,
    Idler,
}

/// One cavity mode taking part in the mixing process. Rates are energy decay
/// rates in rad/s (field amplitudes decay at κ/2).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeChannel {
    pub role: Role,
    /// Carrier angular frequency (rad/s).
    pub omega: f64,
    pub azimuthal: i64,
    pub kappa_ex: f64,
    pub kappa_0: f64,
    /// Detuning of the drive from the cavity mode (rad/s).
    pub detuning: f64,
}

impl ModeChannel {
    pub fn new(role: Role, omega: f64, azimuthal: i64, kappa_ex: f64, kappa_0: f64, detuning: f64) -> Result<Self> {
        if !(omega > 0.0) {
            return Err(Error::NonphysicalRate(format!("{role:?} carrier frequency {omega} must be positive")));
        }
        if !(kappa_ex >= 0.0 && kappa_0 >= 0.0 && kappa_ex + kappa_0 > 0.0) {
            return Err(Error::NonphysicalRate(format!(
                "{role:?} rates κ_ex = {kappa_ex}, κ_0 = {kappa_0} must be non-negative with positive sum"
            )));
        }
        if !detuning.is_finite() {
            return Err(Error::NonphysicalRate(format!("{role:?} detuning is not finite")));
        }
        Ok(Self {
            role,
            omega,
            azimuthal,
            kappa_ex,
            kappa_0,
            detuning,
        })
    }

    pub fn kappa_tot(&self) -> f64 {
        self.kappa_ex + self.kappa_0
    }

    /// Coupling ratio `η = κ_ex/κ_tot`.
    pub fn eta(&self) -> f64 {
        self.kappa_ex / self.kappa_tot()
    }

    /// `1 − η = κ_0/κ_tot`, computed without cancellation.
    pub fn one_minus_eta(&self) -> f64 {
        self.kappa_0 / self.kappa_tot()
    }

    pub fn wavelength_nm(&self) -> f64 {
        hz_to_wavelength_nm(angular_to_hz(self.omega))
    }
}

/// Coupling of one mode to the bus through the MZI.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingRates {
    /// Composite power cross-coupling K.
    pub power_coupling: f64,
    pub kappa_ex: f64,
    pub kappa_0: f64,
    /// `true` when K exceeds [`WEAK_COUPLING_LIMIT`].
    pub beyond_weak_coupling: bool,
}

impl CouplingRates {
    pub fn eta(&self) -> f64 {
        self.kappa_ex / (self.kappa_ex + self.kappa_0)
    }
}

/// Weak-coupling rate mapping `κ_ex = K·v_g/L` and `κ_0 = α·v_g` at `wavelength_nm`,
/// for the drive already set on `mzi`.
pub fn coupling_rates(ring: &RingCavity, mzi: &MziCoupler, wavelength_nm: f64, temperature_k: f64) -> Result<CouplingRates> {
    let k = mzi.power_coupling(wavelength_nm)?;
    let vg = ring.group_velocity(wavelength_nm, temperature_k)?;
    Ok(CouplingRates {
        power_coupling: k,
        kappa_ex: k * vg / ring.length_m,
        kappa_0: ring.intrinsic_rate(wavelength_nm, temperature_k)?,
        beyond_weak_coupling: k > WEAK_COUPLING_LIMIT,
    })
}

/// Coupling ratio η of `mode` at MZI drive `drive_k`, with the ring at `temperature_k`.
pub fn coupling_ratio(
    ring: &RingCavity,
    mzi: &MziCoupler,
    mode: &ModeChannel,
    drive_k: f64,
    temperature_k: f64,
) -> Result<f64> {
    Ok(coupling_rates(ring, &mzi.with_drive(drive_k), mode.wavelength_nm(), temperature_k)?.eta())
}
