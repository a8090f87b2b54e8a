//! Estimation of normalizing constants by contrastive learning and bridge
//! sampling.
//!
//! The crate evaluates an unnormalized model `phi(y | theta)` and a proposal
//! `q(y)` on model and proposal draws ([`table::LogTable`]), and estimates
//! `Z(theta)` either with the recursive estimators in [`estimators`] or by
//! minimizing one of the contrastive costs in [`costs`]. [`experiment`] runs
//! the Monte Carlo comparisons on the Gaussian benchmark.

pub mod costs;
pub mod error;
pub mod estimators;
pub mod experiment;
pub mod model;
pub mod numeric;
pub mod solvers;
pub mod table;

pub use error::{Error, Result};
pub use estimators::{EstimatorId, EstimatorRun, FixedPointConfig};
pub use table::{LogPair, LogTable};
