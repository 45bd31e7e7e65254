use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    /// Zero-forcing was asked to invert a rank-deficient channel set.
    #[error("channel set is rank deficient")]
    SingularSet,

    #[error("{function}: argument {value} is outside the domain")]
    Domain { function: &'static str, value: f64 },

    #[error(
        "explicit RVQ with B = {bits} exceeds the {max}-bit codebook cap; use rvq_statistical"
    )]
    Capacity { bits: u32, max: u32 },

    #[error("scalar quantizer needs a nonzero first channel entry")]
    DegeneratePivot,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("infeasible operating point: {0}")]
    Infeasible(String),
}
