//! Cross-coupling of the calibrated asymmetric MZI coupler: the fast
//! interference fringe K(λ) against its slow envelope 4|k|²|t|², and the
//! coupling ratio of each carrier as the differential heater drive is tuned.
//!
//! ```text
//! cargo run --example coupler_envelope -- [config.toml]
//! ```

use rmzi::config::Config;
use rmzi::numeric::linspace;

fn main() -> rmzi::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/default.toml").into());
    let (config, base_dir) = Config::load(&path, &[])?;
    let model = config.dispersion_model(&base_dir)?;
    let width = config.device.active_width_nm;
    let device = config.device(&model, width)?;

    println!("lambda_nm  K          envelope   |k|^2");
    for lambda in linspace(700.0, 1700.0, 21) {
        let dc = rmzi::elements::dc_cross_coupling(&device.mzi.first, lambda)?;
        println!(
            "{lambda:>9.1}  {:.6}  {:.6}  {:.6}",
            device.mzi.power_coupling(lambda)?,
            device.mzi.envelope_coupling(lambda)?,
            dc
        );
    }

    let t_ring = config.device.base_temperature_k;
    println!("\ndrive_K  eta_pump   eta_signal eta_idler  (width {width} nm)");
    let c = config.search_constraints();
    for drive in linspace(config.experiment.drive_min_k, config.experiment.drive_max_k, 9) {
        let d = device.with_drive(drive);
        let eta = |l: f64| d.coupling_rates(l, t_ring).map(|r| r.eta());
        println!(
            "{drive:>7.1}  {:.6}  {:.6}  {:.6}",
            eta(c.pump_base_nm)?,
            eta(c.signal_wavelength_nm)?,
            eta(c.idler_base_nm)?
        );
    }
    Ok(())
}
