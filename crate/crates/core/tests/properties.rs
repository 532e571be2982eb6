//! Property-based invariants over randomly generated parameters.

mod common;

use std::f64::consts::PI;
use std::sync::Arc;

use common::c;
use proptest::prelude::*;
use rmzi::cmt::{cooperativity, external_efficiency, internal_efficiency, pump_power_unity_cooperativity, TwmSystem};
use rmzi::dispersion::{DispersionModel, ValidityWindow, Waveguide};
use rmzi::elements::{mzi_transfer, CouplingLength, DirectionalCoupler, ModeChannel, MziCoupler, Role};
use rmzi::experiments::format_sig;
use rmzi::noise::{fwm_noise_rate, FwmChannel};

fn mzi(coupling_length_um: f64, asymmetry_um: f64, drive_k: f64) -> MziCoupler {
    let window = ValidityWindow {
        wavelength_nm: (600.0, 1800.0),
        temperature_k: (250.0, 450.0),
    };
    let model = DispersionModel::constant(1000, 2.1, 3.9e-5, window, 300.0).unwrap();
    let dc = DirectionalCoupler {
        gap_nm: 600.0,
        length_m: 50e-6,
        coupling_length: CouplingLength {
            coefficients_um: vec![coupling_length_um],
        },
        window_nm: (600.0, 1800.0),
    };
    MziCoupler {
        first: dc.clone(),
        second: dc,
        waveguide: Waveguide::new(Arc::new(model), 1000).unwrap(),
        arm_asymmetry_m: asymmetry_um * 1e-6,
        heater_length_m: 1000e-6,
        drive_k,
        base_temperature_k: 300.0,
    }
}

fn mode(role: Role, omega: f64, kappa: f64, eta: f64, detuning: f64) -> ModeChannel {
    ModeChannel::new(role, omega, 1000, eta * kappa, (1.0 - eta) * kappa, detuning).unwrap()
}

prop_compose! {
    fn system()(
        kp in 1e8..1e11f64, ks in 1e8..1e11f64, ki in 1e8..1e11f64,
        ep in 0.05..0.95f64, es in 0.05..0.95f64, ei in 0.05..0.95f64,
        ds in -1.0..1.0f64, dp in -1.0..1.0f64, mismatch in -1.0..1.0f64,
        g0 in 1e5..1e7f64, power in 0.0..1e-2f64,
    ) -> TwmSystem {
        TwmSystem::new(
            mode(Role::Pump, 1.16e15, kp, ep, dp * kp),
            mode(Role::Signal, 2.56e15, ks, es, ds * ks),
            mode(Role::Idler, 1.40e15, ki, ei, 0.0),
            g0,
            mismatch * ki,
            power,
        )
        .unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn mzi_is_unitary_and_bounded(
        lc in 20.0..500.0f64, asym in -5.0..5.0f64, drive in 0.0..80.0f64, lambda in 650.0..1750.0f64,
    ) {
        let m = mzi(lc, asym, drive);
        let t = mzi_transfer(&m, lambda).unwrap();
        let product = t.adjoint() * t;
        prop_assert!((product[(0, 0)] - c(1.0, 0.0)).norm() < 1e-12);
        prop_assert!((product[(1, 1)] - c(1.0, 0.0)).norm() < 1e-12);
        prop_assert!(product[(0, 1)].norm() < 1e-12);
        let k = m.power_coupling(lambda).unwrap();
        prop_assert!((0.0..=1.0).contains(&k));
        prop_assert!((k - m.envelope_coupling(lambda).unwrap()).abs() < 1e-12);
        // Reciprocal: cross coupling is the same in both directions.
        prop_assert!((t[(0, 1)].norm_sqr() - t[(1, 0)].norm_sqr()).abs() < 1e-12);
    }

    #[test]
    fn heater_phase_is_periodic(lc in 20.0..500.0f64, lambda in 650.0..1750.0f64, drive in 0.0..40.0f64) {
        // One 2π period of the thermal phase.
        let period = lambda * 1e-9 / (3.9e-5 * 1000e-6);
        let a = mzi(lc, 1.0, drive).power_coupling(lambda).unwrap();
        let b = mzi(lc, 1.0, drive + period).power_coupling(lambda).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn efficiencies_are_bounded(sys in system()) {
        let (eta_int, eta_ex) = external_efficiency(&sys);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&eta_int));
        prop_assert!(eta_ex <= eta_int);
        prop_assert!(eta_ex <= sys.signal.eta() * sys.idler.eta() + 1e-12);
        prop_assert!(cooperativity(&sys) >= 0.0);
    }

    #[test]
    fn unity_cooperativity_power_is_consistent(sys in system()) {
        let p = pump_power_unity_cooperativity(&sys).unwrap();
        let at = sys.with_power(p);
        // Pump detuning lowers |α|², so C ≤ 1 at the on-resonance P_max.
        let expected = 1.0 / (1.0 + (2.0 * sys.pump.detuning / sys.pump.kappa_tot()).powi(2));
        prop_assert!((cooperativity(&at) - expected).abs() < 1e-12);
    }

    #[test]
    fn internal_efficiency_peaks_at_unit_cooperativity(cv in 1e-3..1e3f64) {
        prop_assert!(internal_efficiency(cv, 0.0, 0.0) <= 1.0);
        prop_assert!((internal_efficiency(cv, 0.0, 0.0) - 4.0 * cv / (1.0 + cv).powi(2)).abs() < 1e-14);
    }

    #[test]
    fn noise_is_quadratic_and_falls_with_detuning(
        p in 1e-6..1e-1f64, detuning in 0.0..5e12f64, extra in 1e9..1e12f64,
    ) {
        let ch = FwmChannel {
            g_chi3: 1.0,
            companion_detuning: 2.0 * PI * detuning,
            companion_linewidth: 2.0 * PI * 0.36e9,
            idler_linewidth: 2.0 * PI * 2e9,
            pump_kappa: 2.0 * PI * 0.2e9,
            pump_kappa_ex: 2.0 * PI * 0.1e9,
            pump_omega: 1.16e15,
        };
        let ratio = fwm_noise_rate(&ch, 3.0 * p) / fwm_noise_rate(&ch, p);
        prop_assert!((ratio - 9.0).abs() < 1e-11);
        let further = FwmChannel { companion_detuning: ch.companion_detuning + 2.0 * PI * extra, ..ch };
        prop_assert!(fwm_noise_rate(&further, p) < fwm_noise_rate(&ch, p));
    }

    #[test]
    fn formatted_numbers_round_trip_to_twelve_digits(x in -1e12..1e12f64) {
        let text = format_sig(x);
        let back: f64 = text.parse().unwrap();
        if x != 0.0 {
            prop_assert!(((back - x) / x).abs() <= 5e-12, "{x} -> {text}");
        }
    }
}
