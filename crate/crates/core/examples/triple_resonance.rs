//! Thermally tuned triple-resonance search for one width, followed by an
//! independent re-derivation of every stored residual.
//!
//! ```text
//! cargo run --release --example triple_resonance -- [config.toml] [width_nm]
//! ```

use rmzi::config::Config;
use rmzi::matcher::{find_triple_resonance, verify_match};

fn main() -> rmzi::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/default.toml").into());
    let (config, base_dir) = Config::load(&path, &[])?;
    let width = match args.next() {
        Some(w) => rmzi::config::parse_width(&w)?,
        None => config.device.active_width_nm,
    };
    let model = config.dispersion_model(&base_dir)?;
    let device = config.device(&model, width)?;
    let constraints = config.search_constraints();
    let search = find_triple_resonance(&device, &constraints)?;
    println!(
        "width {width} nm: step {:.4} K, signal shift {:.3} GHz/K, coverage {:.1} GHz (FSR {:.1} GHz)",
        search.step_k,
        search.signal_shift_hz_per_k * 1e-9,
        search.coverage_hz * 1e-9,
        search.signal_fsr_hz * 1e-9
    );
    for w in &search.warnings {
        println!("warning: {w}");
    }
    println!("T_K        m_p   m_s   m_i   pump_nm      idler_nm     delta_MHz  signal_det_MHz");
    for r in &search.matches {
        println!(
            "{:.4}  {:>4}  {:>4}  {:>4}  {:.5}  {:.5}  {:>9.3}  {:>9.3}",
            r.temperature_k,
            r.pump.m,
            r.signal.m,
            r.idler.m,
            r.pump.wavelength_nm,
            r.idler.wavelength_nm,
            r.mismatch_hz * 1e-6,
            r.signal_detuning_hz * 1e-6
        );
        verify_match(&device, &constraints, r)?;
    }
    println!("all {} matches verified", search.matches.len());
    Ok(())
}
