use thiserror::Error;

/// Errors raised by kernel construction, decomposition and sampling.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("transition table row {row} sums to {sum} (expected 1 within 1e-12)")]
    MalformedTable { row: usize, sum: f64 },

    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),

    #[error("symbol {symbol} of the reference string has zero spontaneous mass")]
    WNotSpontaneous { symbol: usize },

    #[error("no certified saturation depth: {0}")]
    DepthExceeded(String),

    #[error("uniform {u} lies beyond the truncated threshold sequence (K_max = {k_max})")]
    KMaxExceeded { u: f64, k_max: usize },

    #[error("backward step budget of {budget} exhausted")]
    StepBudgetExceeded { budget: u64 },

    #[error("lifted chain is not irreducible")]
    NotIrreducible,

    #[error("only {found} interior blocks, at least {required} required")]
    TooFewBlocks { found: usize, required: usize },
}

impl Error {
    /// Stable machine-readable identifier.
    pub fn code(&self) -> &'static str {
        match self {
            Error::MalformedTable { .. } => "MALFORMED_TABLE",
            Error::ParameterOutOfRange(_) => "PARAMETER_OUT_OF_RANGE",
            Error::WNotSpontaneous { .. } => "W_NOT_SPONTANEOUS",
            Error::DepthExceeded(_) => "DEPTH_EXCEEDED",
            Error::KMaxExceeded { .. } => "K_MAX_EXCEEDED",
            Error::StepBudgetExceeded { .. } => "STEP_BUDGET_EXCEEDED",
            Error::NotIrreducible => "NOT_IRREDUCIBLE",
            Error::TooFewBlocks { .. } => "TOO_FEW_BLOCKS",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
