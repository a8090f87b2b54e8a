//! Estimators of the partition function `Z` at a fixed `theta`.
//!
//! All of them consume a [`LogTable`], i.e. the model and proposal
//! log-densities already evaluated at the `N` model draws and `M` proposal
//! draws. Recursive estimators are driven by
//! [`iterate_fixed_point`](crate::solvers::iterate_fixed_point) and report
//! their whole trace.

mod bridge;
mod importance;
mod mis;
mod multi;
mod rlr;
mod umbrella;

pub use bridge::{generic_bridge, optimal_bridge, quadratic_score_iteration, BridgeArgs, BridgeFunction};
pub use importance::{geometric_mean, geometric_mean_estimator, reverse_is, standard_is, GeometricEstimate};
pub use mis::{mis_estimator, self_is_with_mix};
pub use multi::{multi_proposal_bridge, MultiProposalTable};
pub use rlr::{rlr_estimate, rlr_two_class, RlrClass, RlrProblem};
pub use umbrella::{optimal_umbrella, optimal_umbrella_points};

use crate::error::{Error, Result};
use crate::numeric::log_add_exp;
use crate::solvers::FixedPointTrace;

/// Default relative tolerance for recursive estimators.
pub const DEFAULT_REL_TOL: f64 = 1e-10;

/// Starting point and stopping rule of a recursive estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointConfig {
    pub z0: f64,
    pub max_iters: usize,
    /// `None` runs exactly `max_iters` steps.
    pub rel_tol: Option<f64>,
}

impl Default for FixedPointConfig {
    fn default() -> Self {
        Self {
            z0: 1.0,
            max_iters: 1000,
            rel_tol: Some(DEFAULT_REL_TOL),
        }
    }
}

impl FixedPointConfig {
    pub fn new(z0: f64, max_iters: usize, rel_tol: Option<f64>) -> Result<Self> {
        if !(z0 > 0.0 && z0.is_finite()) {
            return Err(Error::Precondition(format!("Z0 must be positive, got {z0}")));
        }
        if max_iters == 0 {
            return Err(Error::Precondition("need at least one iteration".into()));
        }
        if let Some(tol) = rel_tol {
            if !(tol > 0.0 && tol < 1.0) {
                return Err(Error::Precondition(format!("rel_tol must be in (0, 1), got {tol}")));
            }
        }
        Ok(Self { z0, max_iters, rel_tol })
    }

    /// Exactly `steps` iterations from `z0`, no tolerance.
    pub fn fixed_steps(z0: f64, steps: usize) -> Result<Self> {
        Self::new(z0, steps, None)
    }

    /// Converge from `z0` to `rel_tol` within a generous iteration cap.
    pub fn converge(z0: f64, rel_tol: f64) -> Result<Self> {
        Self::new(z0, 10_000, Some(rel_tol))
    }
}

/// Result of a `Z` estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorRun {
    pub z_hat: f64,
    /// `Z_0, Z_1, ..., Z_T'`
    pub trace: Vec<f64>,
    pub converged: bool,
    pub iters_used: usize,
}

impl From<FixedPointTrace> for EstimatorRun {
    fn from(t: FixedPointTrace) -> Self {
        Self {
            z_hat: *t.iterates.last().expect("trace holds z0"),
            iters_used: t.iterates.len() - 1,
            converged: t.converged,
            trace: t.iterates,
        }
    }
}

/// `log(alpha1 phi + alpha2 Z q)` given `log(alpha1 phi)` and `log(alpha2 q)`.
#[inline]
pub(crate) fn log_mix(log_a1_phi: f64, log_a2_q: f64, ln_z: f64) -> f64 {
    log_add_exp(log_a1_phi, ln_z + log_a2_q)
}

pub(crate) fn ratio(num: f64, den: f64, what: &'static str) -> Result<f64> {
    if den == 0.0 || !den.is_finite() {
        return Err(Error::DegenerateSamples(what));
    }
    Ok(num / den)
}

/// Identifiers of the `Z` estimators known to the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EstimatorId {
    OptBridge,
    Mis,
    SelfIsMix,
    Geo,
    StandIs,
    Ris,
    OptUmbrella,
    QuadScore,
    MultiBridge,
}

impl EstimatorId {
    pub const ALL: [EstimatorId; 9] = [
        EstimatorId::OptBridge,
        EstimatorId::Mis,
        EstimatorId::SelfIsMix,
        EstimatorId::Geo,
        EstimatorId::StandIs,
        EstimatorId::Ris,
        EstimatorId::OptUmbrella,
        EstimatorId::QuadScore,
        EstimatorId::MultiBridge,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorId::OptBridge => "opt-bridge",
            EstimatorId::Mis => "mis",
            EstimatorId::SelfIsMix => "self-is-mix",
            EstimatorId::Geo => "geo",
            EstimatorId::StandIs => "stand-is",
            EstimatorId::Ris => "ris",
            EstimatorId::OptUmbrella => "opt-umbrella",
            EstimatorId::QuadScore => "quad-score",
            EstimatorId::MultiBridge => "multi-bridge",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            EstimatorId::OptBridge => "optimal bridge sampling (fixed point of the NCE cost in Z)",
            EstimatorId::Mis => "deterministic-mixture multiple importance sampling",
            EstimatorId::SelfIsMix => "self-normalized IS against the deterministic mixture",
            EstimatorId::Geo => "geometric mean of standard IS and reverse IS",
            EstimatorId::StandIs => "standard importance sampling with proposal draws",
            EstimatorId::Ris => "reverse importance sampling with model draws",
            EstimatorId::OptUmbrella => "optimal umbrella sampling from |phi_bar - q|",
            EstimatorId::QuadScore => "fixed point of the quadratic scoring-rule cost",
            EstimatorId::MultiBridge => "optimal bridge with two Gaussian proposals (sigma_p, 2 sigma_p)",
        }
    }

    /// Whether the estimator iterates from `Z0`.
    pub fn is_recursive(self) -> bool {
        !matches!(self, EstimatorId::Geo | EstimatorId::StandIs | EstimatorId::Ris)
    }
}

impl std::fmt::Display for EstimatorId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for EstimatorId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EstimatorId::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown estimator {s:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(FixedPointConfig::new(0.0, 10, None).is_err());
        assert!(FixedPointConfig::new(1.0, 0, None).is_err());
        assert!(FixedPointConfig::new(1.0, 10, Some(1.0)).is_err());
        assert!(FixedPointConfig::new(1.0, 10, Some(1e-8)).is_ok());
    }

    #[test]
    fn estimator_ids_round_trip() {
        for id in EstimatorId::ALL {
            assert_eq!(id.name().parse::<EstimatorId>().unwrap(), id);
        }
        assert!("bogus".parse::<EstimatorId>().is_err());
    }
}
