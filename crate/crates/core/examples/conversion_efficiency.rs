//! External conversion efficiency of the calibrated operating point versus
//! pump power, with the unity-cooperativity power for comparison.
//!
//! ```text
//! cargo run --example conversion_efficiency -- [config.toml]
//! ```

use rmzi::cmt::{efficiency_vs_power, pump_power_unity_cooperativity};
use rmzi::config::Config;
use rmzi::matcher::find_triple_resonance;
use rmzi::numeric::logspace;

fn main() -> rmzi::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/default.toml").into());
    let (config, base_dir) = Config::load(&path, &[])?;
    let model = config.dispersion_model(&base_dir)?;
    let device = config.device(&model, config.device.active_width_nm)?;
    let best = find_triple_resonance(&device, &config.search_constraints())?.best().clone();
    let sys = best.twm_system(config.g0()?, 1e-3)?;

    println!("P_max (C = 1): {:.4} mW", pump_power_unity_cooperativity(&sys)? * 1e3);
    println!("P_mW      C          eta_int    eta_ex");
    let curve = efficiency_vs_power(&sys, &logspace(1e-5, 1e-2, 31))?;
    for p in &curve {
        println!("{:<8.4}  {:.6}  {:.6}  {:.6}", p.power_w * 1e3, p.cooperativity, p.eta_int, p.eta_ex);
    }
    let peak = curve.iter().max_by(|a, b| a.eta_ex.total_cmp(&b.eta_ex)).unwrap();
    println!("peak eta_ex {:.4} at {:.3} mW", peak.eta_ex, peak.power_w * 1e3);
    Ok(())
}
