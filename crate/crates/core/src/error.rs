use thiserror::Error;

use crate::susy::ParameterClass;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch between operands")]
    GridMismatch,

    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite value {value} at x = {x}")]
    NonFinite { x: f64, value: f64 },

    #[error("ground state must be positive, found {value} at x = {x}")]
    NonPositiveState { x: f64, value: f64 },

    #[error("integration factor overflows: exponent {exponent:.3} at x = {x}")]
    Overflow { x: f64, exponent: f64 },

    #[error("family member C = {c} is singular: denominator vanishes in {intervals:?}")]
    SingularFamilyMember { c: f64, intervals: Vec<(f64, f64)> },

    #[error("C = {c} is not allowed here ({class})")]
    ForbiddenParameter { c: f64, class: ParameterClass },

    #[error("singular point at x = {0}")]
    Singular(f64),

    #[error("coupling must be attractive (g < 0), got g = {0}")]
    NotAttractive(f64),

    #[error("grid has no node at x = 0")]
    NoOriginNode,

    #[error("no bound state: lowest eigenvalue {lowest:.3e} lies in the continuum")]
    NoBoundState { lowest: f64 },

    #[error("step too coarse for k = {k}: k*h = {kh:.4} must stay below 0.1")]
    NonConvergent { k: f64, kh: f64 },

    #[error("wavefunction vanishes identically")]
    VanishingWavefunction,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
