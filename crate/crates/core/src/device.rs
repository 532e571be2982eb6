//! A complete converter: PPLN ring plus its MZI bus coupler at a fixed drive.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::constants::wavelength_nm_to_angular;
use crate::dispersion::{DispersionModel, Waveguide};
use crate::elements::{
    coupling_rates, CouplingLength, CouplingRates, DirectionalCoupler, LossModel, ModeChannel, MziCoupler,
    RingCavity, Role,
};
use crate::error::{Error, Result};

/// Fabricated geometry of one converter. Lengths in metres.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviceGeometry {
    pub width_nm: u32,
    pub ring_length_m: f64,
    pub ppln_fraction: f64,
    pub poling_period_m: f64,
    pub loss: LossModel,
    pub dc_gap_nm: f64,
    pub dc_length_m: f64,
    pub coupling_length: CouplingLength,
    pub arm_asymmetry_m: f64,
    pub heater_length_m: f64,
}

/// Operating temperatures: ring tuner and differential MZI drive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermalState {
    pub ring_temperature_k: f64,
    pub mzi_drive_k: f64,
}

impl DeviceGeometry {
    /// Assemble the device with identical couplers, the MZI at `base_temperature_k`.
    pub fn build(&self, model: Arc<DispersionModel>, base_temperature_k: f64, mzi_drive_k: f64) -> Result<Device> {
        let waveguide = Waveguide::new(model, self.width_nm)?;
        let coupler = DirectionalCoupler {
            gap_nm: self.dc_gap_nm,
            length_m: self.dc_length_m,
            coupling_length: self.coupling_length.clone(),
            window_nm: waveguide.window().wavelength_nm,
        };
        let ring = RingCavity::new(
            waveguide.clone(),
            self.ring_length_m,
            self.loss.clone(),
            self.ppln_fraction,
            self.poling_period_m,
        )?;
        let mzi = MziCoupler {
            first: coupler.clone(),
            second: coupler,
            waveguide,
            arm_asymmetry_m: self.arm_asymmetry_m,
            heater_length_m: self.heater_length_m,
            drive_k: mzi_drive_k,
            base_temperature_k,
        };
        Device::new(ring, mzi)
    }
}

#[derive(Clone, Debug)]
pub struct Device {
    pub ring: RingCavity,
    pub mzi: MziCoupler,
}

impl Device {
    pub fn new(ring: RingCavity, mzi: MziCoupler) -> Result<Self> {
        if ring.waveguide.width_nm() != mzi.waveguide.width_nm() {
            return Err(Error::Domain(format!(
                "ring width {} nm differs from MZI width {} nm",
                ring.waveguide.width_nm(),
                mzi.waveguide.width_nm()
            )));
        }
        Ok(Self { ring, mzi })
    }

    pub fn width_nm(&self) -> u32 {
        self.ring.waveguide.width_nm()
    }

    pub fn with_drive(&self, drive_k: f64) -> Self {
        Self {
            ring: self.ring.clone(),
            mzi: self.mzi.with_drive(drive_k),
        }
    }

    pub fn coupling_rates(&self, wavelength_nm: f64, ring_temperature_k: f64) -> Result<CouplingRates> {
        coupling_rates(&self.ring, &self.mzi, wavelength_nm, ring_temperature_k)
    }

    /// Mode record for a resonance at `wavelength_nm` with the ring at `ring_temperature_k`.
    pub fn mode_channel(
        &self,
        role: Role,
        m: i64,
        wavelength_nm: f64,
        ring_temperature_k: f64,
        detuning: f64,
    ) -> Result<ModeChannel> {
        let rates = self.coupling_rates(wavelength_nm, ring_temperature_k)?;
        ModeChannel::new(
            role,
            wavelength_nm_to_angular(wavelength_nm),
            m,
            rates.kappa_ex,
            rates.kappa_0,
            detuning,
        )
    }
}
