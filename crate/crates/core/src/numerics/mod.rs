//! Numerical substrate: dense matrices, seeded RNG streams, quadrature,
//! descriptive statistics, and least squares.

pub mod matrix;
pub mod ols;
pub mod quadrature;
pub mod rng;
pub mod stats;

pub use matrix::Matrix;
pub use ols::{ols_fit, LinearFit};
pub use quadrature::QuadratureRule;
pub use rng::RngStream;
pub use stats::{weight_stats, WeightStats};
