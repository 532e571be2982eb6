//! Time-domain mean-field equations of the three coupled modes, integrated with
//! fixed-step RK4. Independent of the closed forms in the parent module and
//! used as their oracle.
//!
//! ```text
//! ȧ = (iΔ_a − κ_p/2)a − i g₀ b c* + √κ_p,ex s_p
//! ḃ = (iΔ_b − κ_s/2)b − i g₀ a c  + √κ_s,ex s_s
//! ċ = (iΔ_c − κ_i/2)c − i g₀ a* b
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::TwmSystem;
use crate::constants::HBAR;
use crate::error::{Error, Result};

/// Largest admissible `dt·max(κ, g₀|a|)`.
pub const STABILITY_BOUND: f64 = 0.1;

/// Relative change over the last 1 % of steps below which a run counts as converged.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-10;

/// (pump, signal, idler) intracavity amplitudes in √photons.
pub type State = [Complex64; 3];

/// Coefficients of the equations of motion, indexed (pump, signal, idler).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldParams {
    pub kappa: [f64; 3],
    pub kappa_ex: [f64; 3],
    /// Rotating-frame detunings Δ (rad/s).
    pub detuning: [f64; 3],
    pub g0: f64,
    /// Bus drive amplitudes in √(photons/s); the idler is never driven.
    pub drive: [Complex64; 2],
}

impl MeanFieldParams {
    /// Equations for `sys` with the pump drive set by its power and an extra
    /// signal drive `signal_drive` (√(photons/s)). Frame detunings are
    /// `Δ_a = δ_p`, `Δ_b = δ_s`, `Δ_c = δ_s − δ_p − δ`.
    pub fn from_system(sys: &TwmSystem, signal_drive: Complex64) -> Self {
        let pump_drive = (sys.pump_power_w / (HBAR * sys.pump.omega)).sqrt();
        Self {
            kappa: [sys.pump.kappa_tot(), sys.signal.kappa_tot(), sys.idler.kappa_tot()],
            kappa_ex: [sys.pump.kappa_ex, sys.signal.kappa_ex, sys.idler.kappa_ex],
            detuning: [sys.pump.detuning, sys.signal.detuning, sys.idler_detuning()],
            g0: sys.g0,
            drive: [Complex64::new(pump_drive, 0.0), signal_drive],
        }
    }

    /// Lossless, undriven equations; used for the Manley–Rowe checks.
    pub fn lossless(g0: f64, detuning: [f64; 3]) -> Self {
        Self {
            kappa: [0.0; 3],
            kappa_ex: [0.0; 3],
            detuning,
            g0,
            drive: [Complex64::new(0.0, 0.0); 2],
        }
    }

    /// Steady pump amplitude without conversion.
    pub fn pump_amplitude(&self) -> Complex64 {
        let denom = Complex64::new(0.5 * self.kappa[0], -self.detuning[0]);
        if denom.norm_sqr() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        self.kappa_ex[0].sqrt() * self.drive[0] / denom
    }

    fn derivative(&self, s: &State) -> State {
        let i = Complex64::i();
        let [a, b, c] = *s;
        let g = self.g0;
        let rot = |k: usize| Complex64::new(-0.5 * self.kappa[k], self.detuning[k]);
        [
            rot(0) * a - i * g * b * c.conj() + self.kappa_ex[0].sqrt() * self.drive[0],
            rot(1) * b - i * g * a * c + self.kappa_ex[1].sqrt() * self.drive[1],
            rot(2) * c - i * g * a.conj() * b,
        ]
    }

    fn rk4_step(&self, s: &State, dt: f64) -> State {
        let add = |x: &State, k: &State, h: f64| [x[0] + k[0] * h, x[1] + k[1] * h, x[2] + k[2] * h];
        let k1 = self.derivative(s);
        let k2 = self.derivative(&add(s, &k1, 0.5 * dt));
        let k3 = self.derivative(&add(s, &k2, 0.5 * dt));
        let k4 = self.derivative(&add(s, &k3, dt));
        let mut out = *s;
        for j in 0..3 {
            out[j] += (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]) * (dt / 6.0);
        }
        out
    }
}

/// Sampled trajectory plus the final state and its convergence flag.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub dt: f64,
    /// Steps between stored samples.
    pub stride: usize,
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub final_state: State,
    /// Largest relative change of any amplitude over the last 1 % of steps.
    pub final_relative_change: f64,
    pub converged: bool,
}

/// Integrate `steps` RK4 steps of size `dt` from `initial`, storing about a
/// thousand evenly spaced samples.
pub fn evolve_mean_field(params: &MeanFieldParams, initial: State, dt: f64, steps: usize) -> Result<Trajectory> {
    if steps == 0 {
        return Err(Error::Domain("mean-field integration needs at least one step".into()));
    }
    let amplitude = initial[0].norm().max(params.pump_amplitude().norm());
    let fastest = params.kappa.iter().copied().fold(params.g0 * amplitude, f64::max);
    if !(dt > 0.0) || dt * fastest >= STABILITY_BOUND {
        return Err(Error::StepSizeTooLarge(dt * fastest));
    }
    let stride = (steps / 1000).max(1);
    let tail_start = steps - (steps / 100).max(1);
    let mut state = initial;
    let mut times = vec![0.0];
    let mut states = vec![state];
    let mut tail_reference = state;
    for step in 1..=steps {
        state = params.rk4_step(&state, dt);
        if state.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite(step));
        }
        if step == tail_start {
            tail_reference = state;
        }
        if step % stride == 0 || step == steps {
            times.push(step as f64 * dt);
            states.push(state);
        }
    }
    let scale = state.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let change = (0..3)
        .map(|j| (state[j] - tail_reference[j]).norm())
        .fold(0.0, f64::max);
    let relative = if scale > 0.0 { change / scale } else { change };
    Ok(Trajectory {
        dt,
        stride,
        times,
        states,
        final_state: state,
        final_relative_change: relative,
        converged: relative < CONVERGENCE_TOLERANCE,
    })
}

/// Photon-flux efficiencies `(η_int, η_ex)` of a steady state, with
/// `η_ex = κ_i,ex|c|²/|s_s|²` and `η_int = η_ex/(η_s η_i)`.
pub fn flux_efficiency(params: &MeanFieldParams, state: &State) -> Result<(f64, f64)> {
    let input = params.drive[1].norm_sqr();
    if input == 0.0 {
        return Err(Error::Domain("flux efficiency needs a signal drive".into()));
    }
    let eta_ex = params.kappa_ex[2] * state[2].norm_sqr() / input;
    let eta_s = params.kappa_ex[1] / params.kappa[1];
    let eta_i = params.kappa_ex[2] / params.kappa[2];
    Ok((eta_ex / (eta_s * eta_i), eta_ex))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn undriven_signal_decays_exponentially() {
        let params = MeanFieldParams {
            kappa: [1.0, 2.0, 1.5],
            kappa_ex: [0.5, 1.0, 1.0],
            detuning: [0.0, 0.3, 0.0],
            g0: 0.0,
            drive: [Complex64::new(0.0, 0.0); 2],
        };
        let b0 = Complex64::new(0.6, -0.8);
        let dt = 1e-3;
        let traj = evolve_mean_field(&params, [Complex64::new(0.0, 0.0), b0, Complex64::new(0.0, 0.0)], dt, 2000)
            .unwrap();
        let expected = (-2.0 * 2000.0 * dt).exp();
        assert!((traj.final_state[1].norm_sqr() / expected - 1.0).abs() < 1e-6);
    }

    #[test]
    fn coarse_step_is_rejected() {
        let params = MeanFieldParams::lossless(1.0, [0.0; 3]);
        let start = [Complex64::new(1.0, 0.0), Complex64::new(0.1, 0.0), Complex64::new(0.0, 0.0)];
        assert!(matches!(evolve_mean_field(&params, start, 0.2, 10), Err(Error::StepSizeTooLarge(_))));
    }
}
