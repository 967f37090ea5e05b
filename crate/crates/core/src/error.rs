use thiserror::Error;

use crate::lattice::{BoxSpec, Point};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension {0} is outside the supported range 2..=4")]
    UnsupportedDimension(usize),

    #[error("coordinate extent {0} exceeds the overflow guard 2^20")]
    CoordinateOverflow(i64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("probability {0} is not in the open interval (0, 1)")]
    InvalidProbability(String),

    #[error("point {point} lies outside {bbox}")]
    OutsideBox { point: Point, bbox: BoxSpec },

    #[error("configuration box {got} does not match the required box {expected}")]
    BoxMismatch { expected: BoxSpec, got: BoxSpec },

    #[error("region is not contained in {0}")]
    RegionOutsideBox(BoxSpec),

    #[error("partial configuration has the wrong domain: {0}")]
    WrongDomain(String),

    #[error("bit source exhausted after {0} draws")]
    BitSourceExhausted(usize),

    #[error("volume {volume} exceeds the enumeration cap {cap}")]
    EnumerationCap { volume: usize, cap: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
