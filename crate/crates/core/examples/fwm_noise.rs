//! Spontaneous four-wave-mixing noise rate in the idler mode versus pump power
//! for the calibrated operating point, with the fitted log-log slope.
//!
//! ```text
//! cargo run --release --example fwm_noise -- [config.toml]
//! ```

use rmzi::config::Config;
use rmzi::matcher::{companion_detuning, find_triple_resonance};
use rmzi::noise::noise_vs_power;
use rmzi::numeric::logspace;

fn main() -> rmzi::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/default.toml").into());
    let (config, base_dir) = Config::load(&path, &[])?;
    let model = config.dispersion_model(&base_dir)?;
    let device = config.device(&model, config.device.active_width_nm)?;
    let best = find_triple_resonance(&device, &config.search_constraints())?.best().clone();
    let settings = config.fwm_settings()?;
    let (detuning, source) = companion_detuning(&device, &best, &settings)?;
    let two_pi = 2.0 * std::f64::consts::PI;
    let channel = rmzi::noise::FwmChannel {
        g_chi3: settings.g_chi3,
        companion_detuning: detuning,
        companion_linewidth: settings.companion_linewidth,
        idler_linewidth: best.idler.kappa_ex + best.idler.kappa_0,
        pump_kappa: best.pump.kappa_ex + best.pump.kappa_0,
        pump_kappa_ex: best.pump.kappa_ex,
        pump_omega: two_pi * best.pump.frequency_hz,
    };
    println!("companion detuning {:.3} THz ({source:?})", detuning / two_pi * 1e-12);
    let points = noise_vs_power(&channel, &logspace(1e-5, 1e-2, 13))?;
    for p in &points {
        println!("{:>9.4} mW  R_FWM {:.4e} Hz", p.power_w * 1e3, p.rate_hz);
    }
    let (first, last) = (points[0], points[points.len() - 1]);
    let slope = (last.rate_hz / first.rate_hz).ln() / (last.power_w / first.power_w).ln();
    println!("log-log slope {slope:.12}");
    Ok(())
}
