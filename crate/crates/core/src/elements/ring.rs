use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::coupler::{mzi_transfer, MziCoupler};
use crate::constants::{db_per_m_to_nepers, SPEED_OF_LIGHT};
use crate::dispersion::Waveguide;
use crate::error::{Error, Result};
use crate::numeric::{brent, linspace};

/// Poling-number rounding residual above which a warning is raised.
pub const POLING_RESIDUAL_WARNING: f64 = 0.05;

/// Propagation loss over a wavelength band (dB/m).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossBand {
    pub lo_nm: f64,
    pub hi_nm: f64,
    pub db_per_m: f64,
}

/// Propagation loss: a default value with optional per-band overrides.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossModel {
    pub default_db_per_m: f64,
    #[serde(default)]
    pub bands: Vec<LossBand>,
}

impl LossModel {
    pub fn uniform(db_per_m: f64) -> Self {
        Self {
            default_db_per_m: db_per_m,
            bands: Vec::new(),
        }
    }

    pub fn db_per_m(&self, wavelength_nm: f64) -> f64 {
        self.bands
            .iter()
            .find(|b| wavelength_nm >= b.lo_nm && wavelength_nm <= b.hi_nm)
            .map_or(self.default_db_per_m, |b| b.db_per_m)
    }

    /// Power attenuation coefficient (1/m).
    pub fn nepers_per_m(&self, wavelength_nm: f64) -> f64 {
        db_per_m_to_nepers(self.db_per_m(wavelength_nm))
    }
}

/// `M = L_PPLN/Λ` kept exactly alongside its nearest integer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolingNumber {
    pub ppln_length_m: f64,
    pub poling_period_m: f64,
    pub exact: f64,
    pub rounded: i64,
    pub residual: f64,
}

impl PolingNumber {
    pub fn needs_warning(&self) -> bool {
        self.residual.abs() > POLING_RESIDUAL_WARNING
    }
}

#[derive(Clone, Debug)]
pub struct RingCavity {
    pub waveguide: Waveguide,
    pub length_m: f64,
    pub loss: LossModel,
    pub ppln_fraction: f64,
    pub poling_period_m: f64,
}

impl RingCavity {
    pub fn new(
        waveguide: Waveguide,
        length_m: f64,
        loss: LossModel,
        ppln_fraction: f64,
        poling_period_m: f64,
    ) -> Result<Self> {
        if !(length_m > 0.0) {
            return Err(Error::Domain(format!("ring length must be positive, got {length_m}")));
        }
        if !(0.0..=1.0).contains(&ppln_fraction) {
            return Err(Error::Domain(format!("PPLN fraction {ppln_fraction} outside [0, 1]")));
        }
        if !(poling_period_m > 0.0) {
            return Err(Error::Domain(format!("poling period must be positive, got {poling_period_m}")));
        }
        let mut losses = std::iter::once(loss.default_db_per_m).chain(loss.bands.iter().map(|b| b.db_per_m));
        if losses.any(|db| !(db > 0.0)) {
            return Err(Error::Domain("propagation loss must be positive so that κ_0 > 0".into()));
        }
        Ok(Self {
            waveguide,
            length_m,
            loss,
            ppln_fraction,
            poling_period_m,
        })
    }

    pub fn ppln_length_m(&self) -> f64 {
        self.ppln_fraction * self.length_m
    }

    pub fn poling_number(&self) -> PolingNumber {
        let exact = self.ppln_length_m() / self.poling_period_m;
        let rounded = exact.round();
        PolingNumber {
            ppln_length_m: self.ppln_length_m(),
            poling_period_m: self.poling_period_m,
            exact,
            rounded: rounded as i64,
            residual: exact - rounded,
        }
    }

    /// Round-trip phase `2π·n_eff·L/λ`.
    pub fn round_trip_phase(&self, wavelength_nm: f64, temperature_k: f64) -> Result<f64> {
        let n = self.waveguide.n_eff(wavelength_nm, temperature_k)?;
        Ok(2.0 * PI * n * self.length_m / (wavelength_nm * 1e-9))
    }

    /// Round-trip field amplitude `e^{−α·L/2}`.
    pub fn round_trip_amplitude(&self, wavelength_nm: f64) -> f64 {
        (-0.5 * self.loss.nepers_per_m(wavelength_nm) * self.length_m).exp()
    }

    /// Group velocity `c/n_g` (m/s).
    pub fn group_velocity(&self, wavelength_nm: f64, temperature_k: f64) -> Result<f64> {
        Ok(SPEED_OF_LIGHT / self.waveguide.group_index(wavelength_nm, temperature_k)?)
    }

    /// Intrinsic energy decay rate `κ_0 = α·(ln10/10)·v_g` (rad/s).
    pub fn intrinsic_rate(&self, wavelength_nm: f64, temperature_k: f64) -> Result<f64> {
        Ok(self.loss.nepers_per_m(wavelength_nm) * self.group_velocity(wavelength_nm, temperature_k)?)
    }

    pub fn fsr_hz(&self, wavelength_nm: f64, temperature_k: f64) -> Result<f64> {
        self.waveguide.fsr(wavelength_nm, temperature_k, self.length_m)
    }
}

/// A cavity resonance: azimuthal number and vacuum wavelength.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Resonance {
    pub m: i64,
    pub wavelength_nm: f64,
}

/// `m − n_eff(λ)·L/λ`, equal to `(m·λ − n_eff·L)/λ`; increasing in λ for n_g > 0.
fn resonance_residual(ring: &RingCavity, m: i64, wavelength_nm: f64, temperature_k: f64) -> Result<f64> {
    let n = ring.waveguide.n_eff(wavelength_nm, temperature_k)?;
    Ok(m as f64 - n * ring.length_m / (wavelength_nm * 1e-9))
}

/// Resonance wavelength of azimuthal order `m`, bracketed near `guess_nm`.
///
/// Brent's method isolates the root; a few Newton steps then polish it to
/// machine precision.
pub fn resonance_wavelength(ring: &RingCavity, m: i64, temperature_k: f64, guess_nm: f64) -> Result<f64> {
    let window = ring.waveguide.window().wavelength_nm;
    ring.waveguide.window().check(guess_nm.clamp(window.0, window.1), temperature_k)?;
    let f = |lambda: f64| resonance_residual(ring, m, lambda, temperature_k).unwrap_or(f64::NAN);

    // One order spans about λ/m; expand until the sign changes or the window is exhausted.
    let step = (guess_nm / m.max(1) as f64).max(1e-3);
    let (mut lo, mut hi) = (guess_nm - step, guess_nm + step);
    loop {
        lo = lo.max(window.0);
        hi = hi.min(window.1);
        let (flo, fhi) = (f(lo), f(hi));
        if flo <= 0.0 && fhi >= 0.0 {
            break;
        }
        if lo <= window.0 && hi >= window.1 {
            return Err(Error::RootNotFound(format!("order {m} has no resonance inside the window")));
        }
        if flo > 0.0 {
            lo -= 2.0 * (hi - lo);
        }
        if fhi < 0.0 {
            hi += 2.0 * (hi - lo);
        }
    }
    let mut lambda = brent(f, lo, hi, 1e-7)?;
    for _ in 0..3 {
        let g = resonance_residual(ring, m, lambda, temperature_k)?;
        let ng = ring.waveguide.group_index(lambda, temperature_k)?;
        let slope = ng * ring.length_m / (lambda * lambda * 1e-9);
        let next = lambda - g / slope;
        if !(next >= lo && next <= hi) || next == lambda {
            break;
        }
        lambda = next;
    }
    Ok(lambda)
}

/// All resonances inside `band`, sorted by increasing wavelength (decreasing m).
pub fn resonance_comb(ring: &RingCavity, band: (f64, f64), temperature_k: f64) -> Result<Vec<Resonance>> {
    let (lo, hi) = band;
    if !(lo < hi) {
        return Err(Error::Domain(format!("empty band [{lo}, {hi}] nm")));
    }
    ring.waveguide.window().check(lo, temperature_k)?;
    ring.waveguide.window().check(hi, temperature_k)?;
    let order_at = |lambda: f64| -> Result<f64> {
        Ok(ring.waveguide.n_eff(lambda, temperature_k)? * ring.length_m / (lambda * 1e-9))
    };
    let m_max = order_at(lo)?.floor() as i64;
    let m_min = order_at(hi)?.ceil() as i64;
    if m_min > m_max {
        return Err(Error::NoResonance { lo_nm: lo, hi_nm: hi });
    }
    let mut comb = Vec::with_capacity((m_max - m_min + 1) as usize);
    let n_guess = ring.waveguide.n_eff(0.5 * (lo + hi), temperature_k)?;
    for m in (m_min..=m_max).rev() {
        let guess = (n_guess * ring.length_m / m as f64 * 1e9).clamp(lo, hi);
        let lambda = resonance_wavelength(ring, m, temperature_k, guess)?;
        comb.push(Resonance { m, wavelength_nm: lambda.clamp(lo, hi) });
    }
    Ok(comb)
}

/// Sampled through-port power transmission.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub wavelength_nm: Vec<f64>,
    pub transmission: Vec<f64>,
}

/// All-pass response of the ring coupled through the MZI.
///
/// `t = M₁₁ + M₁₂·M₂₁·a·e^{iφ}/(1 − M₂₂·a·e^{iφ})`, with `φ` the ring round-trip
/// phase. The coupler's own self-phase `arg M₂₂` is counted as part of the ring
/// length, so dips sit exactly on the comb of [`resonance_comb`].
pub fn ring_spectrum(
    ring: &RingCavity,
    mzi: &MziCoupler,
    range_nm: (f64, f64),
    samples: usize,
    temperature_k: f64,
    drive_k: f64,
) -> Result<Spectrum> {
    if samples < 2 {
        return Err(Error::Domain(format!("spectrum needs at least 2 samples, got {samples}")));
    }
    let mzi = mzi.with_drive(drive_k);
    let wavelength_nm = linspace(range_nm.0, range_nm.1, samples);
    let transmission = wavelength_nm
        .iter()
        .map(|&lambda| through_transmission(ring, &mzi, lambda, temperature_k))
        .collect::<Result<Vec<_>>>()?;
    Ok(Spectrum {
        wavelength_nm,
        transmission,
    })
}

/// Power transmission at a single wavelength, drive already applied to `mzi`.
pub(crate) fn through_transmission(
    ring: &RingCavity,
    mzi: &MziCoupler,
    wavelength_nm: f64,
    temperature_k: f64,
) -> Result<f64> {
    let m = mzi_transfer(mzi, wavelength_nm)?;
    let phase = ring.round_trip_phase(wavelength_nm, temperature_k)? - m[(1, 1)].arg();
    let feedback = Complex64::from_polar(ring.round_trip_amplitude(wavelength_nm), phase);
    let t = m[(0, 0)] + m[(0, 1)] * m[(1, 0)] * feedback / (Complex64::new(1.0, 0.0) - m[(1, 1)] * feedback);
    Ok(t.norm_sqr().min(1.0))
}
