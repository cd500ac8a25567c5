//! Order-chaos analysis of the single-hidden-layer tanh network.
//!
//! The hidden layer of the network acts as a dynamical operator
//! `x -> tanh(W x)`. Depending on the mean and variance of the entries of
//! `W` the iterated map either contracts nearby trajectories (ordered
//! phase) or separates them (chaotic phase). This crate provides:
//!
//! - [`numerics`] — dense matrices, seeded RNG streams, Gauss-Hermite
//!   quadrature for standard-normal integrals, descriptive statistics,
//!   and ordinary least squares.
//! - [`phase`] — trajectory iteration, perturbation-growth probes, the
//!   Jacobian-norm criterion, the mean-field self-consistency closure,
//!   and the analytic phase boundary.
//! - [`data`] — Fashion-MNIST IDX ingestion, mini-batch planning,
//!   stratified subsets, and a synthetic stand-in generator.
//! - [`net`] — the 784-unit tanh hidden layer with a softmax readout,
//!   manual forward/backward passes, and evaluation.
//! - [`train`] — SGD with momentum and weight decay, plus per-epoch
//!   phase-coordinate logging.
//! - [`experiments`] — ordered-phase linear fits, the scale-factor
//!   scaling law, trajectory collapse checks, weight-decay sweeps, the
//!   principled weight-decay estimator, and the global-property check.

pub mod data;
pub mod error;
pub mod experiments;
pub mod net;
pub mod numerics;
pub mod phase;
#[cfg(test)]
pub(crate) mod testutil;
pub mod train;

pub use error::{CoreError, Result};
