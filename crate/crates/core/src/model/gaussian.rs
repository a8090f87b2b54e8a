use std::f64::consts::PI;

use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

use super::{Proposal, ProposalParams, UnnormalizedModel};
use crate::error::{Error, Result};

/// Zero-mean isotropic Gaussian energy `phi(y | theta) = exp(-|y|^2 / (2 theta^2))`.
///
/// `theta[0]` is the standard deviation. The normalizer is
/// `Z(theta) = (2 pi theta^2)^(d/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianEnergy {
    dim: usize,
}

impl GaussianEnergy {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        Self { dim }
    }

    /// Partition function at `theta` for the one-dimensional family.
    pub fn z_of(theta: f64) -> f64 {
        (2.0 * PI * theta * theta).sqrt()
    }
}

impl Default for GaussianEnergy {
    fn default() -> Self {
        Self::new(1)
    }
}

impl UnnormalizedModel for GaussianEnergy {
    fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn log_phi(&self, y: &[f64], theta: &[f64]) -> f64 {
        let s = theta[0];
        let r2: f64 = y.iter().map(|v| v * v).sum();
        -r2 / (2.0 * s * s)
    }

    fn analytic_log_z(&self, theta: &[f64]) -> Option<f64> {
        let s = theta[0];
        Some(0.5 * self.dim as f64 * (2.0 * PI * s * s).ln())
    }

    fn sample(&self, theta: &[f64], count: usize, rng: &mut dyn RngCore) -> Result<Vec<f64>> {
        let s = theta[0];
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::Precondition(format!("theta must be positive, got {s}")));
        }
        Ok((0..count * self.dim)
            .map(|_| {
                let z: f64 = StandardNormal.sample(rng);
                s * z
            })
            .collect())
    }
}

/// Isotropic Gaussian proposal `N(mean, std^2 I)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianProposal {
    pub mean: f64,
    pub std: f64,
    dim: usize,
    log_norm: f64,
}

impl GaussianProposal {
    pub fn new(mean: f64, std: f64) -> Self {
        Self::with_dim(mean, std, 1)
    }

    pub fn with_dim(mean: f64, std: f64, dim: usize) -> Self {
        assert!(std > 0.0 && std.is_finite(), "std must be positive");
        assert!(dim >= 1, "dimension must be at least 1");
        let log_norm = -0.5 * dim as f64 * (2.0 * PI * std * std).ln();
        Self {
            mean,
            std,
            dim,
            log_norm,
        }
    }
}

impl Proposal for GaussianProposal {
    fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn log_q(&self, y: &[f64]) -> f64 {
        let r2: f64 = y.iter().map(|v| (v - self.mean) * (v - self.mean)).sum();
        self.log_norm - r2 / (2.0 * self.std * self.std)
    }

    fn sample(&self, count: usize, rng: &mut dyn RngCore) -> Vec<f64> {
        (0..count * self.dim)
            .map(|_| {
                let z: f64 = StandardNormal.sample(rng);
                self.mean + self.std * z
            })
            .collect()
    }

    fn params(&self) -> ProposalParams {
        ProposalParams::Gaussian {
            mean: self.mean,
            std: self.std,
        }
    }
}

/// The model `phi(y) = c * q(y)` for a proposal `q`, so `Z = c` exactly.
///
/// Every bridge-type estimator must return `c` on this model.
#[derive(Debug, Clone)]
pub struct ProportionalModel<P> {
    pub proposal: P,
    pub log_c: f64,
}

impl<P: Proposal + Clone> ProportionalModel<P> {
    pub fn new(proposal: P, c: f64) -> Self {
        assert!(c > 0.0, "scale must be positive");
        Self {
            proposal,
            log_c: c.ln(),
        }
    }
}

impl<P: Proposal> UnnormalizedModel for ProportionalModel<P> {
    fn dim(&self) -> usize {
        self.proposal.dim()
    }

    fn log_phi(&self, y: &[f64], _theta: &[f64]) -> f64 {
        self.log_c + self.proposal.log_q(y)
    }

    fn analytic_log_z(&self, _theta: &[f64]) -> Option<f64> {
        Some(self.log_c)
    }

    fn sample(&self, _theta: &[f64], count: usize, rng: &mut dyn RngCore) -> Result<Vec<f64>> {
        Ok(self.proposal.sample(count, rng))
    }
}
