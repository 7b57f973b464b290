use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("potential must be non-negative, got {0}")]
    NegativePotential(f64),

    #[error("value {0} exceeds the overflow guard")]
    Overflow(f64),

    #[error("address entries are indexed from 1, got {0}")]
    EntryIndex(usize),

    #[error("invalid address {text:?}: {reason}")]
    AddressSyntax { text: String, reason: String },

    #[error("address sup norm {sup_norm} exceeds the admissibility gate {gate}")]
    Inadmissible { sup_norm: u64, gate: u64 },

    #[error("potential {t} is below the floor {floor}")]
    BelowFloor { t: f64, floor: f64 },

    #[error("inverse branch hit the singular value at level {level}")]
    SingularValueHit { level: usize },

    #[error("Re g = {re} at level {level} violates the lower bound {bound}")]
    LowerBoundViolated { level: usize, re: f64, bound: f64 },

    #[error("Newton iteration did not converge after {steps} steps (residual {residual:e})")]
    NoConvergence { steps: usize, residual: f64 },

    #[error("no child square meets the parabola domain")]
    EmptyRefinement,

    #[error("refinement capped: {0}")]
    GenerationCap(String),

    #[error("degenerate box-counting fit: {0}")]
    DegenerateFit(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
