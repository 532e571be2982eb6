//! Design toolkit for a cavity-enhanced χ(2) quantum frequency converter: a
//! periodically poled lithium-niobate ring resonator whose bus coupling is an
//! asymmetric, thermally tuned Mach–Zehnder interferometer.
//!
//! The crate is organised bottom-up:
//!
//! * [`dispersion`] — effective index, group index, β and FSR of the waveguide;
//! * [`elements`] — couplers, ring cavity, resonance combs and spectra;
//! * [`cmt`] — cooperativity and conversion efficiency, with a time-domain oracle;
//! * [`noise`] — four-wave-mixing noise and the efficiency/SNR trade-off;
//! * [`matcher`] — the triple-resonance temperature search;
//! * [`config`] and [`experiments`] — the configuration schema and runners behind the `rmzi` binary.

// `!(x > 0.0)` is used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cmt;
pub mod config;
pub mod constants;
pub mod device;
pub mod dispersion;
pub mod elements;
pub mod error;
pub mod experiments;
pub mod matcher;
pub mod noise;
pub mod numeric;

pub use error::{Error, Result};
