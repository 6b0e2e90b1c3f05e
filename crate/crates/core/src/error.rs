use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// `q` outside `(0,1) ∪ (1, (d+4)/(d+2))`.
    #[error("q = {q} is outside the admissible set for dimension d = {d}")]
    InvalidQ { q: f64, d: u32 },

    #[error("Gamma function argument {arg} is not positive (q = {q}, d = {d})")]
    GammaArgument { arg: f64, q: f64, d: u32 },

    #[error("{what} outside its domain: {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("time step must be positive, got h = {0}")]
    NonPositiveStep(f64),

    #[error("matrix is not symmetric positive definite")]
    NotPositiveDefinite,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("measures carry different q values ({0} vs {1})")]
    MismatchedQ(f64, f64),

    /// Bivariate work outside `m ∈ (0,1) ∪ (1, 3/2)`.
    #[error("m = {m} is outside the verified bivariate range (0,1) ∪ (1,3/2)")]
    OutsideVerifiedRange { m: f64 },

    #[error("root is not bracketed on [{lo}, {hi}]")]
    NotBracketed { lo: f64, hi: f64 },

    #[error("quadrature did not reach tolerance: estimate {value}, error {error} after {subdivisions} subdivisions")]
    ToleranceNotMet {
        value: f64,
        error: f64,
        subdivisions: usize,
    },

    #[error("objective is flat over the search interval")]
    FlatObjective,
}
