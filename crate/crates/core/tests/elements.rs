//! Couplers, the MZI transfer, ring resonances and the all-pass spectrum,
//! checked against closed forms.

mod common;

use std::f64::consts::PI;
use std::sync::Arc;

use common::{assert_rel, default_setup};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rmzi::constants::SPEED_OF_LIGHT;
use rmzi::dispersion::{DispersionModel, ValidityWindow, Waveguide};
use rmzi::elements::{
    coupling_rates, dc_cross_coupling, mzi_transfer, resonance_comb, resonance_wavelength, ring_spectrum,
    CouplingLength, DirectionalCoupler, LossModel, MziCoupler, RingCavity,
};
use rmzi::matcher::find_triple_resonance;

const WIDTH: u32 = 1000;

fn flat_guide(index: f64) -> Waveguide {
    let window = ValidityWindow {
        wavelength_nm: (600.0, 1800.0),
        temperature_k: (250.0, 450.0),
    };
    let model = DispersionModel::constant(WIDTH, index, 3.9e-5, window, 300.0).unwrap();
    Waveguide::new(Arc::new(model), WIDTH).unwrap()
}

fn coupler(length_um: f64, coupling_length_um: f64) -> DirectionalCoupler {
    DirectionalCoupler {
        gap_nm: 600.0,
        length_m: length_um * 1e-6,
        coupling_length: CouplingLength {
            coefficients_um: vec![coupling_length_um],
        },
        window_nm: (600.0, 1800.0),
    }
}

/// Coupling length giving power cross-coupling `k2` for a 50 µm coupler.
fn coupling_length_for(k2: f64) -> f64 {
    PI * 50.0 / (2.0 * k2.sqrt().asin())
}

fn mzi(guide: &Waveguide, dc: DirectionalCoupler, asymmetry_um: f64, drive_k: f64) -> MziCoupler {
    MziCoupler {
        first: dc.clone(),
        second: dc,
        waveguide: guide.clone(),
        arm_asymmetry_m: asymmetry_um * 1e-6,
        heater_length_m: 1000e-6,
        drive_k,
        base_temperature_k: 300.0,
    }
}

#[test]
fn directional_coupler_limits() {
    let full = coupler(50.0, 50.0);
    assert!((dc_cross_coupling(&full, 1000.0).unwrap() - 1.0).abs() < 1e-15);
    let none = coupler(0.0, 50.0);
    assert_eq!(dc_cross_coupling(&none, 1000.0).unwrap(), 0.0);
    let half = coupler(25.0, 50.0);
    assert!((dc_cross_coupling(&half, 1000.0).unwrap() - 0.5).abs() < 1e-15);
    let (t, k) = half.field_coefficients(1000.0).unwrap();
    assert!((t * t + k * k - 1.0).abs() < 1e-15);
    // A non-positive coupling length is a domain error, not a NaN.
    assert!(coupler(50.0, -10.0).field_coefficients(1000.0).is_err());
    assert!(coupler(50.0, 50.0).field_coefficients(500.0).is_err());
}

#[test]
fn mzi_matches_closed_form_and_is_unitary() {
    let guide = flat_guide(2.1);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let dc = coupler(50.0, rng.gen_range(30.0..400.0));
        let m = mzi(&guide, dc, rng.gen_range(-3.0..3.0), rng.gen_range(0.0..60.0));
        let lambda = rng.gen_range(700.0..1700.0);
        let t = mzi_transfer(&m, lambda).unwrap();
        let product = t.adjoint() * t;
        for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let expected = if i == j { 1.0 } else { 0.0 };
            assert!((product[(i, j)].re - expected).abs() < 1e-12 && product[(i, j)].im.abs() < 1e-12);
        }
        let k2 = dc_cross_coupling(&m.first, lambda).unwrap();
        let dtheta = m.phase_difference(lambda).unwrap();
        let closed = 4.0 * k2 * (1.0 - k2) * (0.5 * dtheta).cos().powi(2);
        let k = m.power_coupling(lambda).unwrap();
        assert!((k - closed).abs() < 1e-12, "{k} vs {closed}");
        assert!((k - m.envelope_coupling(lambda).unwrap()).abs() < 1e-12);
        assert!((0.0..=1.0).contains(&k));
    }
}

#[test]
fn balanced_mzi_of_half_couplers_crosses_fully() {
    let guide = flat_guide(2.1);
    let m = mzi(&guide, coupler(25.0, 50.0), 0.0, 0.0);
    assert!((m.power_coupling(1300.0).unwrap() - 1.0).abs() < 1e-15);
    // A π phase between the arms sends everything back to the bus.
    let dndt = 3.9e-5;
    let lambda = 1300.0;
    let drive = lambda * 1e-9 / (2.0 * dndt * 1000e-6);
    assert!(m.with_drive(drive).power_coupling(lambda).unwrap() < 1e-20);
    // Thermal phase: (2π/λ)·(dn/dT)·ΔT·L_h.
    let phase = m.with_drive(10.0).thermal_phase(lambda).unwrap();
    assert_rel(phase, 2.0 * PI / 1300e-9 * dndt * 10.0 * 1000e-6, 1e-14, "thermal phase");
}

#[test]
fn constant_index_resonances() {
    let guide = flat_guide(2.0);
    let ring = RingCavity::new(guide, 100e-6, LossModel::uniform(21.0), 0.5, 5e-6).unwrap();
    let lambda = resonance_wavelength(&ring, 200, 300.0, 1003.0).unwrap();
    assert!((lambda - 1000.0).abs() < 1e-9, "{lambda}");
    let comb = resonance_comb(&ring, (990.0, 1010.0), 300.0).unwrap();
    assert!(comb.iter().any(|r| r.m == 200 && (r.wavelength_nm - 1000.0).abs() < 1e-9));
    for pair in comb.windows(2) {
        assert_eq!(pair[0].m, pair[1].m + 1);
        let df = SPEED_OF_LIGHT / (pair[0].wavelength_nm * 1e-9) - SPEED_OF_LIGHT / (pair[1].wavelength_nm * 1e-9);
        assert_rel(df, SPEED_OF_LIGHT / (2.0 * 100e-6), 1e-9, "FSR");
    }
    assert_rel(ring.fsr_hz(1000.0, 300.0).unwrap(), SPEED_OF_LIGHT / 200e-6, 1e-12, "fsr_hz");
    assert_eq!(ring.poling_number().rounded, 10);
}

#[test]
fn lossless_ring_passes_all_power() {
    let guide = flat_guide(2.0);
    // Loss must be positive; 1e-12 dB/m is lossless at this precision.
    let ring = RingCavity::new(guide.clone(), 100e-6, LossModel::uniform(1e-12), 0.5, 5e-6).unwrap();
    let m = mzi(&guide, coupler(50.0, coupling_length_for(0.05)), 1.0, 12.0);
    let spectrum = ring_spectrum(&ring, &m, (999.0, 1001.0), 2001, 300.0, 12.0).unwrap();
    for t in spectrum.transmission {
        assert!((t - 1.0).abs() < 1e-9, "{t}");
    }
}

#[test]
fn critical_coupling_extinguishes_the_resonance() {
    let guide = flat_guide(2.0);
    for db_per_m in [200.0, 800.0, 2000.0] {
        let ring = RingCavity::new(guide.clone(), 100e-6, LossModel::uniform(db_per_m), 0.5, 5e-6).unwrap();
        // Balanced MZI at zero drive: K = 4k²(1 − k²) = 1 − a².
        let a2 = ring.round_trip_amplitude(1000.0).powi(2);
        let k2 = 0.5 * (1.0 - a2.sqrt());
        let m = mzi(&guide, coupler(50.0, coupling_length_for(k2)), 0.0, 0.0);
        assert_rel(m.power_coupling(1000.0).unwrap(), 1.0 - a2, 1e-9, "K");
        let lambda = resonance_wavelength(&ring, 200, 300.0, 1000.0).unwrap();
        let t = ring_spectrum(&ring, &m, (lambda, lambda), 2, 300.0, 0.0).unwrap().transmission[0];
        assert!(t <= 1e-3, "{db_per_m} dB/m: T = {t}");
    }
}

/// Full width at half depth (Hz) of the dip nearest `lambda0`.
fn dip_fwhm_hz(ring: &RingCavity, m: &MziCoupler, lambda0: f64, span_nm: f64) -> f64 {
    let s = ring_spectrum(ring, m, (lambda0 - span_nm, lambda0 + span_nm), 8001, 300.0, m.drive_k).unwrap();
    let (imin, tmin) = s
        .transmission
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &t)| if t < acc.1 { (i, t) } else { acc });
    let half = 1.0 - 0.5 * (1.0 - tmin);
    let crossing = |range: Box<dyn Iterator<Item = usize>>| {
        let mut prev = imin;
        for i in range {
            if s.transmission[i] >= half {
                let (t0, t1) = (s.transmission[prev], s.transmission[i]);
                let (l0, l1) = (s.wavelength_nm[prev], s.wavelength_nm[i]);
                return l0 + (half - t0) / (t1 - t0) * (l1 - l0);
            }
            prev = i;
        }
        panic!("dip not resolved inside the span");
    };
    let right = crossing(Box::new(imin + 1..s.transmission.len()));
    let left = crossing(Box::new((0..imin).rev()));
    SPEED_OF_LIGHT / (left * 1e-9) - SPEED_OF_LIGHT / (right * 1e-9)
}

#[test]
fn resonance_linewidth_matches_total_decay_rate() {
    let guide = flat_guide(2.0);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut draws = 0;
    while draws < 10 {
        let db_per_m = rng.gen_range(50.0..1500.0);
        let k2 = rng.gen_range(0.001..0.01);
        let ring = RingCavity::new(guide.clone(), 100e-6, LossModel::uniform(db_per_m), 0.5, 5e-6).unwrap();
        let m = mzi(&guide, coupler(50.0, coupling_length_for(k2)), 1.0, rng.gen_range(0.0..40.0));
        let lambda = resonance_wavelength(&ring, 200, 300.0, 1000.0).unwrap();
        let rates = coupling_rates(&ring, &m, lambda, 300.0).unwrap();
        let alpha_l = ring.loss.nepers_per_m(lambda) * ring.length_m;
        if rates.power_coupling + alpha_l >= 0.1 || rates.power_coupling < 1e-4 {
            continue;
        }
        draws += 1;
        let kappa_hz = (rates.kappa_ex + rates.kappa_0) / (2.0 * PI);
        let span = 8.0 * kappa_hz * (lambda * 1e-9).powi(2) / SPEED_OF_LIGHT * 1e9;
        let fwhm = dip_fwhm_hz(&ring, &m, lambda, span);
        assert_rel(fwhm, kappa_hz, 0.05, "linewidth");
    }
}

#[test]
fn calibrated_default_couplers() {
    let (config, model) = default_setup();
    let constraints = config.search_constraints();
    for width in [1400, 1500, 1600] {
        let device = config.device(&model, width).unwrap();
        let k2 = |nm| dc_cross_coupling(&device.mzi.first, nm).unwrap();
        assert!(k2(737.0) < k2(1623.0), "width {width}: long wavelengths couple harder");
        let best = find_triple_resonance(&device, &constraints).unwrap().best().clone();
        let (p, s, i) = (best.pump.eta, best.signal.eta, best.idler.eta);
        assert!((0.45..=0.55).contains(&p), "width {width}: η_p = {p}");
        assert!(s >= 0.8 && i >= 0.8, "width {width}: η_s = {s}, η_i = {i}");
        for (eta, target) in [(p, 0.5), (s, 0.95), (i, 0.95)] {
            assert!((eta - target).abs() < 1e-9, "width {width}: {eta} vs {target}");
        }
        for mode in [&best.pump, &best.signal, &best.idler] {
            assert!(mode.kappa_ex > 0.0 && mode.kappa_0 > 0.0);
            assert_rel(mode.eta, mode.kappa_ex / (mode.kappa_ex + mode.kappa_0), 1e-15, "η");
        }
    }
}

#[test]
fn invalid_ring_parameters_are_rejected() {
    let guide = flat_guide(2.0);
    assert!(RingCavity::new(guide.clone(), 0.0, LossModel::uniform(21.0), 0.5, 5e-6).is_err());
    assert!(RingCavity::new(guide.clone(), 1e-4, LossModel::uniform(21.0), 1.5, 5e-6).is_err());
    assert!(RingCavity::new(guide.clone(), 1e-4, LossModel::uniform(0.0), 0.5, 5e-6).is_err());
    assert!(RingCavity::new(guide, 1e-4, LossModel::uniform(21.0), 0.5, 0.0).is_err());
}
