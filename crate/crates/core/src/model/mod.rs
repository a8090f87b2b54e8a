//! Energy-based models, proposal densities and the paired sample container.
//!
//! A model only needs to evaluate `log phi(y | theta)`; its normalizer
//! `Z(theta)` and a sampler are optional capabilities that the built-in test
//! families provide. Points are stored flat: a set of `n` points in `d`
//! dimensions is a `Vec<f64>` of length `n * d`.

mod gaussian;
mod sample_set;
pub mod seed;
mod umbrella;

pub use gaussian::{GaussianEnergy, GaussianProposal, ProportionalModel};
pub use sample_set::{draw_sample_set, ParameterPoint, SampleSet};
pub use umbrella::{sample_umbrella, UMBRELLA_WINDOW};

use rand::RngCore;

use crate::error::{Error, Result};
use crate::numeric::log_add_exp;

/// An unnormalized density `phi(y | theta) >= 0`, evaluated in natural-log units.
pub trait UnnormalizedModel: Send + Sync {
    /// Dimension of a point `y`.
    fn dim(&self) -> usize {
        1
    }

    fn log_phi(&self, y: &[f64], theta: &[f64]) -> f64;

    /// `log Z(theta)` when the normalizer is known in closed form.
    fn analytic_log_z(&self, _theta: &[f64]) -> Option<f64> {
        None
    }

    /// Draws `count` i.i.d. points from `phi(. | theta) / Z(theta)`.
    fn sample(&self, _theta: &[f64], _count: usize, _rng: &mut dyn RngCore) -> Result<Vec<f64>> {
        Err(Error::Capability("model sampler"))
    }
}

/// Parameter record of a proposal density.
#[derive(Debug, Clone, PartialEq)]
pub enum ProposalParams {
    Gaussian { mean: f64, std: f64 },
    Other(String),
}

/// A normalized density `q(y)` that can be evaluated and sampled.
pub trait Proposal: Send + Sync {
    fn dim(&self) -> usize {
        1
    }

    fn log_q(&self, y: &[f64]) -> f64;

    fn sample(&self, count: usize, rng: &mut dyn RngCore) -> Vec<f64>;

    fn params(&self) -> ProposalParams;
}

/// `log(alpha1 * phi(y|theta) / Z + alpha2 * q(y))`, the log-density of the
/// deterministic mixture that the pooled samples are drawn from.
pub fn log_mixture(
    y: &[f64],
    theta: &[f64],
    z: f64,
    samples: &SampleSet,
    proposal: &dyn Proposal,
    model: &dyn UnnormalizedModel,
) -> Result<f64> {
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::Precondition(format!("Z must be positive, got {z}")));
    }
    let log_phi = model.log_phi(y, theta);
    if log_phi.is_nan() || log_phi == f64::INFINITY {
        return Err(Error::Evaluation {
            density: "log_phi",
            index: 0,
            value: log_phi,
        });
    }
    let log_q = proposal.log_q(y);
    if log_q.is_nan() || log_q == f64::INFINITY {
        return Err(Error::Evaluation {
            density: "log_q",
            index: 0,
            value: log_q,
        });
    }
    Ok(log_add_exp(
        samples.alpha1().ln() + log_phi - z.ln(),
        samples.alpha2().ln() + log_q,
    ))
}
