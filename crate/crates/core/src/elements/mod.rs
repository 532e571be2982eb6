//! Photonic building blocks: directional coupler, asymmetric thermally tuned
//! MZI coupler and the PPLN ring cavity.

mod coupler;
mod mode;
mod ring;

pub use coupler::{
    dc_cross_coupling, mzi_transfer, CouplingLength, DirectionalCoupler, MziCoupler, Transfer,
};
pub use mode::{coupling_rates, coupling_ratio, CouplingRates, ModeChannel, Role, WEAK_COUPLING_LIMIT};
pub use ring::{
    resonance_comb, resonance_wavelength, ring_spectrum, LossBand, LossModel, PolingNumber,
    Resonance, RingCavity, Spectrum, POLING_RESIDUAL_WARNING,
};

/// `m_s − m_p − m_i − M`; zero means the triple is quasi-phase-matched.
pub fn qpm_mismatch(m_signal: i64, m_pump: i64, m_idler: i64, poling_number: i64) -> i64 {
    m_signal - m_pump - m_idler - poling_number
}
