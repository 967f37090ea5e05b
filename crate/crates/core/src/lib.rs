//! Site percolation laboratory on `Z^d`.

pub mod cluster;
pub mod error;
pub mod events;
pub mod exploration;
pub mod exponents;
pub mod lattice;
pub mod oracle;
pub mod sampler;
pub mod scalar;
pub mod statistics;

pub use error::{Error, Result};
pub use lattice::{BoxSpec, Point};
pub use sampler::{Configuration, SeedSpec};
pub use scalar::Scalar;

/// Exact arbitrary-precision rational.
pub type Rational = num_rational::BigRational;

/// Default floating scalar of the Monte Carlo code.
pub type Real = f64;

/// Single-precision scalar for the generic numerics.
pub type Real32 = f32;
