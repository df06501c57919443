use thiserror::Error;

/// Errors raised by the geometry, curve and search routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("north direction undefined at the poles (phi = {0})")]
    PoleNotAllowed(f64),
    #[error("radius unbounded for distance {0} (need d < 2)")]
    RadiusUnbounded(f64),
    #[error("invalid distance {0}")]
    InvalidDistance(f64),
    #[error("invalid radius {0}")]
    InvalidRadius(f64),
    #[error("need at least {need} lines, got {got}")]
    TooFewLines { need: usize, got: usize },
    #[error("expected {expected} lines, got {got}")]
    WrongLineCount { expected: usize, got: usize },
    #[error("degenerate parameters: {0}")]
    Degenerate(&'static str),
    #[error("tangent pole: {0}")]
    TanPole(&'static str),
    #[error("curve parameter x = {0} outside (0, 1]")]
    OutOfRange(f64),
    #[error("angle alpha = {0} outside (0, pi)")]
    AlphaOutOfRange(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
