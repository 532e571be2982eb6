//! Integrate the three-mode mean-field equations for the calibrated operating
//! point with a weak signal drive and compare the steady-state conversion with
//! the closed-form internal efficiency. A lossless run then checks the
//! Manley–Rowe invariants.
//!
//! ```text
//! cargo run --release --example mean_field_oracle -- [config.toml]
//! ```

use num_complex::Complex64;
use rmzi::cmt::{conversion, evolve_mean_field, flux_efficiency, MeanFieldParams};
use rmzi::config::Config;
use rmzi::matcher::find_triple_resonance;

fn main() -> rmzi::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/default.toml").into());
    let (config, base_dir) = Config::load(&path, &[])?;
    let model = config.dispersion_model(&base_dir)?;
    let device = config.device(&model, config.device.active_width_nm)?;
    let best = find_triple_resonance(&device, &config.search_constraints())?.best().clone();

    for power_mw in [0.3, 1.0, 3.0] {
        let sys = best.twm_system(config.g0()?, power_mw * 1e-3)?;
        let closed = conversion(&sys)?;
        let params = MeanFieldParams::from_system(&sys, Complex64::new(1.0, 0.0));
        let start = [params.pump_amplitude(), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)];
        // Rates are in rad/s; integrate for ~60 signal lifetimes.
        let kmax = params.kappa.iter().copied().fold(0.0, f64::max);
        let dt = 0.05 / kmax;
        let steps = (60.0 / params.kappa[1] / dt) as usize;
        let traj = evolve_mean_field(&params, start, dt, steps)?;
        let (eta_int, eta_ex) = flux_efficiency(&params, &traj.final_state)?;
        println!(
            "P = {power_mw} mW: eta_int closed {:.9} ODE {:.9} (rel {:.1e}), eta_ex {:.6}, converged {}",
            closed.eta_int,
            eta_int,
            (eta_int / closed.eta_int - 1.0).abs(),
            eta_ex,
            traj.converged
        );
    }

    let lossless = MeanFieldParams::lossless(1.0, [0.0, 0.2, 0.2]);
    let start = [Complex64::new(2.0, 0.0), Complex64::new(0.5, 0.3), Complex64::new(0.0, 0.1)];
    let traj = evolve_mean_field(&lossless, start, 1e-3, 20_000)?;
    let invariants = |s: &[Complex64; 3]| (s[0].norm_sqr() + s[1].norm_sqr(), s[1].norm_sqr() + s[2].norm_sqr());
    let (a0, b0) = invariants(&start);
    let (a1, b1) = invariants(&traj.final_state);
    println!(
        "Manley-Rowe: |a|^2+|b|^2 drift {:.2e}, |b|^2+|c|^2 drift {:.2e}",
        (a1 / a0 - 1.0).abs(),
        (b1 / b0 - 1.0).abs()
    );
    Ok(())
}
