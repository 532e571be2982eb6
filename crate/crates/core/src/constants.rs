//! Physical constants and unit helpers.
//!
//! Internally every rate is an angular frequency in rad/s and every length is
//! in metres; wavelengths cross the public boundary in nanometres.

use std::f64::consts::PI;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Reduced Planck constant (J·s).
pub const HBAR: f64 = 1.054_571_817e-34;

/// Vacuum wavelength (nm) to optical frequency (Hz).
#[inline]
pub fn wavelength_nm_to_hz(wavelength_nm: f64) -> f64 {
    SPEED_OF_LIGHT / (wavelength_nm * 1e-9)
}

/// Optical frequency (Hz) to vacuum wavelength (nm).
#[inline]
pub fn hz_to_wavelength_nm(frequency_hz: f64) -> f64 {
    SPEED_OF_LIGHT / frequency_hz * 1e9
}

/// Vacuum wavelength (nm) to angular frequency (rad/s).
#[inline]
pub fn wavelength_nm_to_angular(wavelength_nm: f64) -> f64 {
    2.0 * PI * wavelength_nm_to_hz(wavelength_nm)
}

/// Angular frequency (rad/s) to ordinary frequency (Hz).
#[inline]
pub fn angular_to_hz(omega: f64) -> f64 {
    omega / (2.0 * PI)
}

/// Ordinary frequency (Hz) to angular frequency (rad/s).
#[inline]
pub fn hz_to_angular(frequency_hz: f64) -> f64 {
    2.0 * PI * frequency_hz
}

/// Optical propagation loss in dB/m to a power attenuation coefficient in 1/m.
#[inline]
pub fn db_per_m_to_nepers(loss_db_per_m: f64) -> f64 {
    loss_db_per_m * std::f64::consts::LN_10 / 10.0
}
