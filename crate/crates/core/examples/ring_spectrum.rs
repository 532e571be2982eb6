//! Through-port spectrum of the ring around the pump resonance of the
//! operating point. The measured full width at half depth is compared with
//! the linewidth κ_tot/2π implied by the coupling rates.
//!
//! ```text
//! cargo run --example ring_spectrum -- [config.toml]
//! ```

use rmzi::config::Config;
use rmzi::constants::{wavelength_nm_to_hz, SPEED_OF_LIGHT};
use rmzi::elements::ring_spectrum;
use rmzi::matcher::find_triple_resonance;

fn main() -> rmzi::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/default.toml").into());
    let (config, base_dir) = Config::load(&path, &[])?;
    let model = config.dispersion_model(&base_dir)?;
    let device = config.device(&model, config.device.active_width_nm)?;
    let search = find_triple_resonance(&device, &config.search_constraints())?;
    let best = search.best();
    let t = best.temperature_k;

    for mode in [&best.pump, &best.signal, &best.idler] {
        let lambda = mode.wavelength_nm;
        let linewidth_hz = (mode.kappa_ex + mode.kappa_0) / (2.0 * std::f64::consts::PI);
        // ±5 linewidths, converted to wavelength.
        let half_span_nm = 5.0 * linewidth_hz * lambda * lambda * 1e-9 / SPEED_OF_LIGHT;
        let spec = ring_spectrum(
            &device.ring,
            &device.mzi,
            (lambda - half_span_nm, lambda + half_span_nm),
            4001,
            t,
            config.device.mzi_drive_k,
        )?;
        let (imin, tmin) = spec
            .transmission
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |b, (i, &v)| if v < b.1 { (i, v) } else { b });
        let half = 0.5 * (1.0 + tmin);
        let below: Vec<f64> = spec
            .wavelength_nm
            .iter()
            .zip(&spec.transmission)
            .filter(|(_, &v)| v < half)
            .map(|(&l, _)| l)
            .collect();
        let fwhm_hz = wavelength_nm_to_hz(below[0]) - wavelength_nm_to_hz(*below.last().unwrap());
        println!(
            "m = {:>5}  dip at {:.6} nm (comb {:.6} nm)  depth {:.4}  FWHM {:.4} GHz  kappa_tot/2pi {:.4} GHz  eta {:.3}",
            mode.m,
            spec.wavelength_nm[imin],
            lambda,
            1.0 - tmin,
            fwhm_hz * 1e-9,
            linewidth_hz * 1e-9,
            mode.eta
        );
    }
    Ok(())
}
