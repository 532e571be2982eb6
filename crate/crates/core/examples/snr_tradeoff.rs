//! Efficiency/noise trade-off across the configured waveguide widths: each
//! width gets its own triple resonance and companion-mode detuning, and the
//! SNR at its peak conversion efficiency decides the best width.
//!
//! ```text
//! cargo run --release --example snr_tradeoff -- [config.toml]
//! ```

use std::path::Path;

use rmzi::experiments::{power_grid, Session};
use rmzi::noise::efficiency_snr_tradeoff;

fn main() -> rmzi::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/default.toml").into());
    let mut session = Session::open(Path::new(&path), &[])?;
    session.config.require_calibration()?;
    let (variants, _) = session.tradeoff_variants()?;
    let result = efficiency_snr_tradeoff(&variants, &power_grid(&session.config), session.config.physics.signal_rate_hz)?;
    println!("width_nm  P_peak_mW  eta_ex    R_FWM_Hz    SNR_dB");
    for p in &result.peaks {
        println!(
            "{:>8}  {:>9.4}  {:.5}  {:.4e}  {:.3}",
            p.width_nm,
            p.power_w * 1e3,
            p.eta_ex,
            p.noise_rate_hz,
            p.snr_db
        );
    }
    println!("best width: {} nm", result.best_width_nm);
    for w in &session.warnings {
        println!("warning: {w}");
    }
    Ok(())
}
