use std::f64::consts::PI;

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dispersion::Waveguide;
use crate::error::{Error, Result};
use crate::numeric::poly_eval;

/// Complex 2×2 field transfer matrix; port 0 is the bus, port 1 the ring.
pub type Transfer = Matrix2<Complex64>;

/// Coupling length `L_c(λ) = Σ c_k x^k` in µm with `x = (λ − 1000 nm)/1000 nm`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingLength {
    pub coefficients_um: Vec<f64>,
}

impl CouplingLength {
    pub fn at_m(&self, wavelength_nm: f64) -> f64 {
        poly_eval(&self.coefficients_um, (wavelength_nm - 1000.0) / 1000.0) * 1e-6
    }

    /// Shift the constant and linear coefficients (µm).
    pub fn shifted(&self, offset_um: f64, tilt_um: f64) -> Self {
        let mut c = self.coefficients_um.clone();
        c.resize(c.len().max(2), 0.0);
        c[0] += offset_um;
        c[1] += tilt_um;
        Self { coefficients_um: c }
    }
}

/// Lossless symmetric directional coupler with a sinusoidal power transfer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionalCoupler {
    pub gap_nm: f64,
    pub length_m: f64,
    pub coupling_length: CouplingLength,
    pub window_nm: (f64, f64),
}

impl DirectionalCoupler {
    fn check(&self, wavelength_nm: f64) -> Result<f64> {
        let (lo, hi) = self.window_nm;
        if !(wavelength_nm >= lo && wavelength_nm <= hi) {
            return Err(Error::out_of_domain("wavelength_nm", wavelength_nm, self.window_nm));
        }
        let lc = self.coupling_length.at_m(wavelength_nm);
        if !(lc > 0.0) {
            return Err(Error::Domain(format!(
                "coupling length {lc:.3e} m is not positive at {wavelength_nm} nm"
            )));
        }
        Ok(lc)
    }

    /// Field amplitudes (t, k), both real and non-negative.
    pub fn field_coefficients(&self, wavelength_nm: f64) -> Result<(f64, f64)> {
        let lc = self.check(wavelength_nm)?;
        let phase = PI * self.length_m / (2.0 * lc);
        Ok((phase.cos().abs(), phase.sin().abs()))
    }

    /// `[[t, ik], [ik, t]]`.
    pub fn matrix(&self, wavelength_nm: f64) -> Result<Transfer> {
        let (t, k) = self.field_coefficients(wavelength_nm)?;
        let t = Complex64::new(t, 0.0);
        let ik = Complex64::new(0.0, k);
        Ok(Transfer::new(t, ik, ik, t))
    }
}

/// Power cross-coupling `|k|² = sin²(π·L_dc / (2·L_c(λ)))`.
pub fn dc_cross_coupling(dc: &DirectionalCoupler, wavelength_nm: f64) -> Result<f64> {
    let lc = dc.check(wavelength_nm)?;
    Ok((PI * dc.length_m / (2.0 * lc)).sin().powi(2))
}

/// Two directional couplers joined by arms of unequal length with a
/// differential heater on one arm.
#[derive(Clone, Debug)]
pub struct MziCoupler {
    pub first: DirectionalCoupler,
    pub second: DirectionalCoupler,
    pub waveguide: Waveguide,
    pub arm_asymmetry_m: f64,
    pub heater_length_m: f64,
    /// Differential heater drive ΔT_MZI (K).
    pub drive_k: f64,
    /// Chip temperature seen by the MZI arms (K).
    pub base_temperature_k: f64,
}

impl MziCoupler {
    pub fn with_drive(&self, drive_k: f64) -> Self {
        Self {
            drive_k,
            ..self.clone()
        }
    }

    /// Thermal phase `φ_T = (2π/λ)·(dn/dT)·ΔT·L_h`.
    pub fn thermal_phase(&self, wavelength_nm: f64) -> Result<f64> {
        let dndt = self.waveguide.thermo_optic(wavelength_nm)?;
        Ok(2.0 * PI / (wavelength_nm * 1e-9) * dndt * self.drive_k * self.heater_length_m)
    }

    /// Arm phase difference `θ₁ − θ₂ = β·ΔL + φ_T`.
    pub fn phase_difference(&self, wavelength_nm: f64) -> Result<f64> {
        let beta = self
            .waveguide
            .propagation_constant(wavelength_nm, self.base_temperature_k)?;
        Ok(beta * self.arm_asymmetry_m + self.thermal_phase(wavelength_nm)?)
    }

    /// Power cross-coupling `K = |M₂₁|²` of the composite coupler.
    pub fn power_coupling(&self, wavelength_nm: f64) -> Result<f64> {
        Ok(mzi_transfer(self, wavelength_nm)?[(1, 0)].norm_sqr())
    }

    /// `4|k|²|t|²·cos²(Δθ/2)`; equals [`Self::power_coupling`] for identical couplers.
    pub fn envelope_coupling(&self, wavelength_nm: f64) -> Result<f64> {
        let k2 = dc_cross_coupling(&self.first, wavelength_nm)?;
        let dtheta = self.phase_difference(wavelength_nm)?;
        Ok(4.0 * k2 * (1.0 - k2) * (0.5 * dtheta).cos().powi(2))
    }
}

/// Composite transfer `C₂·diag(e^{iθ₁}, e^{iθ₂})·C₁` with the arm phases split
/// symmetrically, `θ₁ = −θ₂ = Δθ/2` (the common phase belongs to the ring).
pub fn mzi_transfer(mzi: &MziCoupler, wavelength_nm: f64) -> Result<Transfer> {
    let c1 = mzi.first.matrix(wavelength_nm)?;
    let c2 = mzi.second.matrix(wavelength_nm)?;
    let half = 0.5 * mzi.phase_difference(wavelength_nm)?;
    let arms = Transfer::new(
        Complex64::from_polar(1.0, half),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::from_polar(1.0, -half),
    );
    Ok(c2 * arms * c1)
}
