//! Scan ring length for each waveguide width and report lengths at which a
//! quasi-phase-matched triple resonance exists inside the temperature sweep.
//! The poling number M is left free; the resulting poling period is
//! `Λ = f_PPLN·L/M`.
//!
//! ```text
//! cargo run --release --example design_search -- [L_min_um] [L_max_um] [step_um]
//! ```

use std::sync::Arc;

use rayon::prelude::*;
use rmzi::constants::wavelength_nm_to_hz;
use rmzi::dispersion::{DispersionModel, ThermoOptic, Waveguide};
use rmzi::elements::{resonance_comb, resonance_wavelength, LossModel, RingCavity};
use rmzi::matcher::SearchConstraints;
use rmzi::numeric::brent;

#[derive(Clone, Debug)]
struct Candidate {
    length_um: f64,
    temperature_k: f64,
    m: (i64, i64, i64),
    poling: i64,
    pump_nm: f64,
    idler_nm: f64,
    mismatch_hz: f64,
}

fn scan(wg: &Waveguide, length_um: f64, c: &SearchConstraints) -> Vec<Candidate> {
    let ring = RingCavity::new(wg.clone(), length_um * 1e-6, LossModel::uniform(21.0), 0.45, 1e-6).unwrap();
    let lt = c.signal_wavelength_nm;
    let (t_lo, t_hi) = c.temperature_range_k;
    let order = |t: f64| wg.n_eff(lt, t).unwrap() * ring.length_m / (lt * 1e-9);
    let mut out = Vec::new();
    for m_s in order(t_lo).ceil() as i64..=order(t_hi).floor() as i64 {
        let Ok(t) = brent(|t| m_s as f64 - order(t), t_lo, t_hi, 1e-12) else { continue };
        let Ok(pumps) = resonance_comb(&ring, c.pump_window(), t) else { continue };
        let nu_s = wavelength_nm_to_hz(lt);
        for p in pumps {
            let nu_p = wavelength_nm_to_hz(p.wavelength_nm);
            let ideal = rmzi::constants::hz_to_wavelength_nm(nu_s - nu_p);
            let n = wg.n_eff(ideal, t).unwrap();
            let m_i = (n * ring.length_m / (ideal * 1e-9)).round() as i64;
            let Ok(li) = resonance_wavelength(&ring, m_i, t, ideal) else { continue };
            let mismatch = nu_s - nu_p - wavelength_nm_to_hz(li);
            if mismatch.abs() <= c.max_mismatch_hz && (li - c.idler_base_nm).abs() <= c.half_window_nm {
                out.push(Candidate {
                    length_um,
                    temperature_k: t,
                    m: (m_s, p.m, m_i),
                    poling: m_s - p.m - m_i,
                    pump_nm: p.wavelength_nm,
                    idler_nm: li,
                    mismatch_hz: mismatch,
                });
            }
        }
    }
    out
}

fn main() {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (l_min, l_max, step) = match args[..] {
        [a, b, s] => (a, b, s),
        _ => (780.0, 820.0, 0.002),
    };
    let model = Arc::new(DispersionModel::tfln_default(&ThermoOptic::default()).expect("default model"));
    let constraints = SearchConstraints::default();
    let count = ((l_max - l_min) / step).round() as usize;
    for width in model.widths().collect::<Vec<_>>() {
        let wg = Waveguide::new(model.clone(), width).unwrap();
        let mut hits: Vec<Candidate> = (0..=count)
            .into_par_iter()
            .flat_map_iter(|k| scan(&wg, l_min + k as f64 * step, &constraints))
            .collect();
        hits.sort_by(|a, b| a.length_um.total_cmp(&b.length_um));
        println!("width {width} nm: {} feasible (L, T) points", hits.len());
        println!("  L_um        T_K       m_s   m_p   m_i   M    pump_nm    idler_nm   delta_MHz  Lambda_um");
        for h in &hits {
            println!(
                "  {:<10.3} {:<9.3} {:<5} {:<5} {:<5} {:<4} {:<10.3} {:<10.3} {:<10.2} {:.5}",
                h.length_um,
                h.temperature_k,
                h.m.0,
                h.m.1,
                h.m.2,
                h.poling,
                h.pump_nm,
                h.idler_nm,
                h.mismatch_hz * 1e-6,
                0.45 * h.length_um / h.poling as f64
            );
        }
    }
}
