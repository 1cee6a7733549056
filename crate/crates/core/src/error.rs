use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not an odd prime below 256")]
    InvalidModulus(u64),

    #[error("moduli differ: {0} and {1}")]
    ModulusMismatch(u8, u8),

    #[error("weight {0} is odd; level-one spaces of odd weight vanish")]
    OddWeight(u32),

    #[error("weight {0} has no nonzero level-one forms")]
    EmptyWeight(u32),

    #[error("precision {got} is too small, need at least {need}")]
    PrecisionTooSmall { need: usize, got: usize },

    #[error("series is not in the weight-{weight} space (first disagreement at q^{index})")]
    NotInSpan { weight: u32, index: usize },

    #[error("weights {0} and {1} are not congruent modulo p-1")]
    MixedWeight(u32, u32),

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what} {value} exceeds the cap {cap}")]
    CapExceeded { what: &'static str, value: u64, cap: u64 },

    #[error("parse error: {message} at column {column}")]
    Parse { column: usize, message: String },

    #[error("the form is zero")]
    ZeroForm,

    #[error("the form is constant")]
    ConstantForm,

    #[error("conductor not found: {0}")]
    ConductorNotFound(String),

    #[error("span not closed: Hecke span exceeds dimension cap {cap}")]
    SpanNotClosed { cap: usize },

    #[error("splitting field needed: characteristic polynomial has an irreducible factor of degree {degree}")]
    SplittingFieldNeeded { degree: usize },

    #[error("module is not pure; decompose the form first")]
    NotPure,

    #[error("group closure exceeds {cap} elements")]
    GroupTooLarge { cap: usize },

    #[error("consistency check failed: {0}")]
    Inconsistent(String),
}

impl Error {
    /// True for failures of the mathematics (as opposed to bad input).
    pub fn is_mathematical(&self) -> bool {
        matches!(
            self,
            Error::ConductorNotFound(_)
                | Error::SpanNotClosed { .. }
                | Error::SplittingFieldNeeded { .. }
                | Error::NotPure
                | Error::GroupTooLarge { .. }
                | Error::Inconsistent(_)
        )
    }
}
