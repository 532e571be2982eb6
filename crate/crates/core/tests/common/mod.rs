//! Shared fixtures for the integration tests.
#![allow(dead_code)]

pub mod oracle;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rmzi::cmt::{evolve_mean_field, flux_efficiency, MeanFieldParams, TwmSystem};
use rmzi::config::Config;
use rmzi::constants::{hz_to_angular, SPEED_OF_LIGHT};
use rmzi::device::{Device, DeviceGeometry};
use rmzi::dispersion::{DispersionModel, DispersionTable, FitOptions, TableRow};
use rmzi::elements::{CouplingLength, LossModel, ModeChannel, Role};
use rmzi::matcher::SearchConstraints;

pub fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn default_config_path() -> PathBuf {
    workspace_root().join("configs/default.toml")
}

pub fn fixture_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// The committed default configuration and its dispersion model.
pub fn default_setup() -> (Config, Arc<DispersionModel>) {
    let (config, base) = Config::load(default_config_path(), &[]).expect("default config loads");
    let model = config.dispersion_model(&base).expect("default dispersion model");
    (config, model)
}

/// Dispersive but analytically solvable device: `n(λ, T) = a(T) − s·λ + q·λ²`
/// with λ in µm and `a(T) = a₀ + (dn/dT)(T − 300 K)`. The resonance condition
/// `n·L/λ = m` is the quadratic `qLλ² − (m + sL)λ + aL = 0`, so every mode has
/// a closed form. With `q = 0`, `λ_m = aL/(m + sL)` and all QPM triples share
/// `δ = c·(M − sL)/(aL)`; a small `q` splits their mismatches.
#[derive(Clone, Debug)]
pub struct Planted {
    pub width_nm: u32,
    pub a0: f64,
    /// Curvature q of the index (1/µm²).
    pub curvature: f64,
    pub dn_dt: f64,
    pub length_um: f64,
    pub poling: i64,
    /// Mismatch planted at `temperature_k`.
    pub delta_hz: f64,
    pub temperature_k: f64,
    /// (m_p, m_s, m_i) of the planted triple.
    pub orders: (i64, i64, i64),
    pub half_window_nm: f64,
    pub temperature_range_k: (f64, f64),
}

impl Planted {
    pub fn standard() -> Self {
        Self {
            width_nm: 1000,
            a0: 2.2,
            curvature: 0.0,
            dn_dt: 3.9e-5,
            length_um: 100.0,
            poling: 10,
            delta_hz: 50e6,
            temperature_k: 350.0,
            orders: (126, 289, 153),
            half_window_nm: 2.0,
            temperature_range_k: (300.0, 400.0),
        }
    }

    /// Fixture whose planted triple sits near 1620/737/1350 nm for the given
    /// ring length and poling number.
    pub fn near_targets(length_um: f64, poling: i64, delta_hz: f64, dn_dt: f64, half_window_nm: f64) -> Self {
        let mut p = Self {
            length_um,
            poling,
            delta_hz,
            dn_dt,
            half_window_nm,
            ..Self::standard()
        };
        let a = p.a(p.temperature_k);
        let order = |nm: f64| (a * length_um / (nm * 1e-3) - poling as f64).round() as i64;
        let (m_s, m_p) = (order(737.0), order(1620.0));
        p.orders = (m_p, m_s, m_s - m_p - poling);
        p
    }

    /// Five varied fixtures. The wide sweep tunes the signal by more than
    /// one FSR, so neighbouring signal orders compete with the planted one.
    pub fn varied() -> Vec<Self> {
        [
            (100.0, 10, 50e6, 1.2e-4, 8.0, 1e-4),
            (120.0, 12, -80e6, 1.0e-4, 9.0, 2e-4),
            (90.0, 9, 20e6, 1.5e-4, 10.0, 1.5e-4),
            (140.0, 14, 120e6, 0.8e-4, 7.0, 1e-4),
            (110.0, 11, -5e6, 1.3e-4, 10.0, 2.5e-4),
        ]
        .into_iter()
        .map(|(l, m, d, k, w, q)| Self {
            temperature_range_k: (220.0, 480.0),
            curvature: q,
            ..Self::near_targets(l, m, d, k, w)
        })
        .collect()
    }

    pub fn a(&self, temperature_k: f64) -> f64 {
        self.a0 + self.dn_dt * (temperature_k - 300.0)
    }

    /// Slope s (1/µm) that plants `delta_hz` at `temperature_k`: closed form
    /// for `q = 0`, bisection otherwise (δ falls monotonically with s).
    pub fn slope(&self) -> f64 {
        let l_m = self.length_um * 1e-6;
        let linear =
            (self.poling as f64 - self.delta_hz * self.a(self.temperature_k) * l_m / SPEED_OF_LIGHT) / self.length_um;
        if self.curvature == 0.0 {
            return linear;
        }
        let (mut lo, mut hi) = (linear - 0.01, linear + 0.01);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.mismatch_with_slope(mid) > self.delta_hz {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    fn mismatch_with_slope(&self, s: f64) -> f64 {
        let t = self.temperature_k;
        let (mp, ms, mi) = self.orders;
        let nu = |m| SPEED_OF_LIGHT / (self.wavelength_with_slope(m, t, s) * 1e-9);
        nu(ms) - nu(mp) - nu(mi)
    }

    pub fn wavelength_with_slope(&self, m: i64, temperature_k: f64, s: f64) -> f64 {
        let (l, q, a) = (self.length_um, self.curvature, self.a(temperature_k));
        let b = m as f64 + s * l;
        let um = if q == 0.0 {
            a * l / b
        } else {
            // Smaller root, written to avoid cancellation.
            2.0 * a * l / (b + (b * b - 4.0 * q * l * a * l).sqrt())
        };
        1e3 * um
    }

    pub fn n_eff(&self, wavelength_nm: f64, temperature_k: f64) -> f64 {
        let um = wavelength_nm * 1e-3;
        self.a(temperature_k) - self.slope() * um + self.curvature * um * um
    }

    pub fn wavelength_nm(&self, m: i64, temperature_k: f64) -> f64 {
        self.wavelength_with_slope(m, temperature_k, self.slope())
    }

    pub fn frequency_hz(&self, m: i64, temperature_k: f64) -> f64 {
        SPEED_OF_LIGHT / (self.wavelength_nm(m, temperature_k) * 1e-9)
    }

    pub fn table(&self) -> DispersionTable {
        let mut rows = Vec::new();
        for t in [200.0, 500.0] {
            for i in 0..=200 {
                let lambda = 700.0 + 5.0 * f64::from(i);
                rows.push(TableRow {
                    wavelength_nm: lambda,
                    width_nm: self.width_nm,
                    temperature_k: t,
                    n_eff: self.n_eff(lambda, t),
                });
            }
        }
        DispersionTable::new(rows, "planted-linear").unwrap()
    }

    pub fn model(&self) -> Arc<DispersionModel> {
        Arc::new(self.table().fit(&FitOptions::default()).unwrap())
    }

    pub fn geometry(&self) -> DeviceGeometry {
        DeviceGeometry {
            width_nm: self.width_nm,
            ring_length_m: self.length_um * 1e-6,
            ppln_fraction: 0.5,
            poling_period_m: 0.5 * self.length_um * 1e-6 / self.poling as f64,
            loss: LossModel::uniform(21.0),
            dc_gap_nm: 600.0,
            dc_length_m: 50e-6,
            coupling_length: CouplingLength {
                coefficients_um: vec![138.7586355, -214.90757134, 118.84909771],
            },
            arm_asymmetry_m: 1e-6,
            heater_length_m: 1320e-6,
        }
    }

    pub fn device(&self) -> Device {
        self.geometry().build(self.model(), 300.0, 26.5).unwrap()
    }

    /// Targets sit exactly on the planted modes at the planted temperature.
    pub fn constraints(&self) -> SearchConstraints {
        let (mp, ms, mi) = self.orders;
        let t = self.temperature_k;
        SearchConstraints {
            signal_wavelength_nm: self.wavelength_nm(ms, t),
            max_signal_detuning_hz: 200e6,
            max_mismatch_hz: 150e6,
            pump_base_nm: self.wavelength_nm(mp, t),
            idler_base_nm: self.wavelength_nm(mi, t),
            half_window_nm: self.half_window_nm,
            temperature_range_k: self.temperature_range_k,
            temperature_step_k: None,
        }
    }
}

/// Random physically valid three-mode system with rates of order `scale`.
pub fn random_system(rng: &mut impl Rng, scale: f64, detuned: bool) -> TwmSystem {
    let omega = |nm: f64| hz_to_angular(SPEED_OF_LIGHT / (nm * 1e-9));
    let mut mode = |role, nm: f64, m| {
        let kappa = scale * rng.gen_range(0.5..2.0);
        let eta = rng.gen_range(0.2..0.95);
        let detuning = if detuned && role != Role::Pump {
            kappa * rng.gen_range(-0.3..0.3)
        } else {
            0.0
        };
        ModeChannel::new(role, omega(nm), m, eta * kappa, (1.0 - eta) * kappa, detuning).unwrap()
    };
    let pump = mode(Role::Pump, 1623.0, 900);
    let signal = mode(Role::Signal, 737.0, 2200);
    let idler = mode(Role::Idler, 1350.0, 1100);
    let mismatch = if detuned { scale * rng.gen_range(-0.2..0.2) } else { 0.0 };
    let g0 = 2.0 * std::f64::consts::PI * rng.gen_range(0.05e6..1.0e6);
    TwmSystem::new(pump, signal, idler, g0, mismatch, rng.gen_range(1e-5..1e-2)).unwrap()
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn assert_rel(actual: f64, expected: f64, tol: f64, what: &str) {
    let rel = ((actual - expected) / expected).abs();
    assert!(rel <= tol, "{what}: {actual} vs {expected} (rel {rel:.3e} > {tol:.1e})");
}

/// Steady-state internal efficiency of `sys` from the time-domain equations
/// with a weak signal drive, integrated for `lifetimes` of the slowest mode.
pub fn mean_field_eta_int(sys: &TwmSystem, lifetimes: f64) -> (f64, bool) {
    let params = MeanFieldParams::from_system(sys, Complex64::new(1.0, 0.0));
    let start = [params.pump_amplitude(), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)];
    let fastest = params
        .kappa
        .iter()
        .copied()
        .chain([params.g0 * start[0].norm()])
        .fold(0.0, f64::max);
    let slowest = params.kappa.iter().copied().fold(f64::INFINITY, f64::min);
    let dt = 0.02 / fastest;
    let steps = (lifetimes / slowest / dt).ceil() as usize;
    let trajectory = evolve_mean_field(&params, start, dt, steps).unwrap();
    let (eta_int, _) = flux_efficiency(&params, &trajectory.final_state).unwrap();
    (eta_int, trajectory.converged)
}

/// Experiments whose outputs are pinned by golden files.
pub const GOLDEN_EXPERIMENTS: [&str; 6] = ["spectrum", "couplings", "match", "convert", "noise", "tradeoff"];

pub fn golden_dir(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

pub fn update_golden() -> bool {
    std::env::var_os("UPDATE_GOLDEN").is_some_and(|v| v == "1")
}

/// Run the `rmzi` binary.
pub fn rmzi(args: &[&str]) -> std::process::Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_rmzi"))
        .args(args)
        .env("RMZI_THREADS", "2")
        .output()
        .expect("rmzi binary runs")
}

/// Run `experiment` with `config` into `out`, panicking with stderr on failure.
pub fn run_experiment(experiment: &str, config: &Path, out: &Path, overrides: &[&str]) {
    let mut args = vec![experiment, "--config", config.to_str().unwrap(), "--out-dir", out.to_str().unwrap()];
    for o in overrides {
        args.extend(["--override", o]);
    }
    let output = rmzi(&args);
    assert!(
        output.status.success(),
        "rmzi {experiment} failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
}

/// Output files other than the run record (which holds the wall-clock time).
pub fn pinned_files(dir: &Path) -> std::collections::BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "run_record.json")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect()
}

/// Differences between the outputs in `out` and the golden directory `name`;
/// with `UPDATE_GOLDEN=1` the golden directory is rewritten instead.
pub fn golden_mismatches(out: &Path, name: &str) -> Vec<String> {
    let golden = golden_dir(name);
    let produced = pinned_files(out);
    if update_golden() {
        let _ = std::fs::remove_dir_all(&golden);
        std::fs::create_dir_all(&golden).unwrap();
        for (file, bytes) in &produced {
            std::fs::write(golden.join(file), bytes).unwrap();
        }
        return Vec::new();
    }
    if !golden.is_dir() {
        return vec![format!("{name}: no golden files (run with UPDATE_GOLDEN=1)")];
    }
    let expected = pinned_files(&golden);
    let mut problems = Vec::new();
    for file in expected.keys().chain(produced.keys()).collect::<std::collections::BTreeSet<_>>() {
        match (expected.get(file), produced.get(file)) {
            (Some(a), Some(b)) if a == b => {}
            (Some(_), Some(_)) => problems.push(format!("{name}/{file}: contents differ")),
            (Some(_), None) => problems.push(format!("{name}/{file}: not produced")),
            (None, _) => problems.push(format!("{name}/{file}: no golden copy")),
        }
    }
    problems
}
