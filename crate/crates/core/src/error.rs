use thiserror::Error;

use crate::matcher::MatchDiagnostics;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{quantity} = {value} is outside the validity window [{min}, {max}]")]
    OutOfDomain {
        quantity: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("no dispersion data for waveguide width {0} nm")]
    UnknownWidth(u32),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("fit rejected for width {width_nm} nm: max residual {residual:.3e} exceeds {bound:.1e}")]
    Fit {
        width_nm: u32,
        residual: f64,
        bound: f64,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no resonance in band [{lo_nm}, {hi_nm}] nm")]
    NoResonance { lo_nm: f64, hi_nm: f64 },

    #[error("nonphysical rate: {0}")]
    NonphysicalRate(String),

    #[error("degenerate coupling: {0}")]
    DegenerateCoupling(String),

    #[error("integration step too large: dt * max rate = {0:.3} (must stay below 0.1)")]
    StepSizeTooLarge(f64),

    #[error("non-finite amplitude at step {0}")]
    NonFinite(usize),

    #[error("temperature step {step_k} K shifts the signal resonance by {shift_hz:.3e} Hz, more than half the tolerance {tolerance_hz:.3e} Hz")]
    SweepStepTooCoarse {
        step_k: f64,
        shift_hz: f64,
        tolerance_hz: f64,
    },

    #[error("no feasible triple resonance: {0}")]
    NoFeasibleMatch(Box<MatchDiagnostics>),

    #[error("stale match result: {0}")]
    StaleResult(String),

    #[error("variant with width {0} nm has no triple-resonance solution")]
    UnmatchedVariant(u32),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("calibration infeasible: anchor `{anchor}` not met ({detail})")]
    CalibrationInfeasible { anchor: String, detail: String },

    #[error("root solver failed: {0}")]
    RootNotFound(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn out_of_domain(quantity: &'static str, value: f64, (min, max): (f64, f64)) -> Self {
        Error::OutOfDomain {
            quantity,
            value,
            min,
            max,
        }
    }
}

impl Error {
    /// Process exit status: 2 configuration, 3 infeasible, 4 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Parse { .. } | Error::Fit { .. } | Error::UnknownWidth(_) | Error::Io(_) => 2,
            Error::NoFeasibleMatch(_) | Error::UnmatchedVariant(_) | Error::CalibrationInfeasible { .. } => 3,
            _ => 4,
        }
    }

    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            2 => "ConfigError",
            3 => "Infeasible",
            _ => "NumericalFailure",
        }
    }
}
