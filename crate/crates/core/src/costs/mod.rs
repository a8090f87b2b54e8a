//! Contrastive cost functions in `(theta, Z)`.
//!
//! Costs are evaluated on a [`LogTable`] (log-densities at a fixed `theta`)
//! together with a value of `Z`; the analytic partial derivative in `Z` is
//! returned alongside the value. Re-evaluate the table to move in `theta`.

mod rules;

pub use rules::ScoringRule;

use crate::error::{Error, Result};
use crate::estimators::log_mix;
use crate::model::{Proposal, SampleSet, UnnormalizedModel};
use crate::numeric::{log_add_exp, NeumaierSum};
use crate::solvers::{minimize_1d, Bracket1D, SolveReport};
use crate::table::{LogPair, LogTable};

/// Classifier posterior `eta = phi / (phi + nu Z q)` held in log form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Posterior {
    pub log_eta: f64,
    /// `log(1 - eta)`, computed from the same pair, not by subtraction.
    pub log_one_minus: f64,
    log_phi: f64,
    log_q: f64,
    ln_nu: f64,
    log_s: f64,
}

impl Posterior {
    pub fn from_logs(log_phi: f64, log_q: f64, ln_z: f64, ln_nu: f64) -> Result<Self> {
        if log_phi == f64::NEG_INFINITY && log_q == f64::NEG_INFINITY {
            return Err(Error::UndefinedPosterior);
        }
        let log_nzq = ln_nu + ln_z + log_q;
        let log_s = log_add_exp(log_phi, log_nzq);
        Ok(Self {
            log_eta: log_phi - log_s,
            log_one_minus: log_nzq - log_s,
            log_phi,
            log_q,
            ln_nu,
            log_s,
        })
    }

    pub fn eta(&self) -> f64 {
        self.log_eta.exp()
    }

    pub fn one_minus_eta(&self) -> f64 {
        self.log_one_minus.exp()
    }

    /// `d eta / dZ = -nu phi q / (phi + nu Z q)^2`
    pub fn eta_dot(&self, _z: f64) -> f64 {
        -(self.ln_nu + self.log_phi + self.log_q - 2.0 * self.log_s).exp()
    }
}

/// `eta(u, theta, Z)` for one point.
pub fn eta(
    u: &[f64],
    theta: &[f64],
    z: f64,
    nu: f64,
    model: &dyn UnnormalizedModel,
    proposal: &dyn Proposal,
) -> Result<f64> {
    Ok(Posterior::from_logs(model.log_phi(u, theta), proposal.log_q(u), z.ln(), nu.ln())?.eta())
}

/// `d eta / dZ` at one point.
pub fn eta_dot(
    u: &[f64],
    theta: &[f64],
    z: f64,
    nu: f64,
    model: &dyn UnnormalizedModel,
    proposal: &dyn Proposal,
) -> Result<f64> {
    Ok(Posterior::from_logs(model.log_phi(u, theta), proposal.log_q(u), z.ln(), nu.ln())?.eta_dot(z))
}

/// Per-sample contributions `(value, dZ)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CostTerms {
    pub model: Vec<(f64, f64)>,
    pub proposal: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostEvaluation {
    /// `+inf` when some term is infinite (`eta` at 0 or 1 where `V` blows up).
    pub value: f64,
    /// `dJ/dZ`; NaN when the value is infinite.
    pub dz: f64,
    pub infinite: bool,
    pub per_term: Option<CostTerms>,
}

impl CostEvaluation {
    fn finish(value: NeumaierSum, dz: NeumaierSum, per_term: Option<CostTerms>) -> Self {
        let value = value.sum();
        if value.is_finite() {
            Self {
                value,
                dz: dz.sum(),
                infinite: false,
                per_term,
            }
        } else {
            Self {
                value: f64::INFINITY,
                dz: f64::NAN,
                infinite: true,
                per_term,
            }
        }
    }
}

fn check_z(z: f64) -> Result<()> {
    if z > 0.0 && z.is_finite() {
        Ok(())
    } else {
        Err(Error::Precondition(format!("Z must be positive, got {z}")))
    }
}

fn scoring(rule: &ScoringRule, table: &LogTable, z: f64, keep_terms: bool) -> Result<CostEvaluation> {
    check_z(z)?;
    let (ln_z, ln_nu) = (z.ln(), table.nu().ln());
    let mut value = NeumaierSum::new();
    let mut dz = NeumaierSum::new();
    let mut terms = keep_terms.then(CostTerms::default);
    for p in table.model_side() {
        let t = rule.model_term(&Posterior::from_logs(p.log_phi, p.log_q, ln_z, ln_nu)?, z);
        value.add(t.0);
        dz.add(t.1);
        if let Some(terms) = terms.as_mut() {
            terms.model.push(t);
        }
    }
    for p in table.proposal_side() {
        let t = rule.proposal_term(&Posterior::from_logs(p.log_phi, p.log_q, ln_z, ln_nu)?, z);
        value.add(t.0);
        dz.add(t.1);
        if let Some(terms) = terms.as_mut() {
            terms.proposal.push(t);
        }
    }
    Ok(CostEvaluation::finish(value, dz, terms))
}

/// `J(theta, Z) = sum_n V(eta(y_n)) + sum_m V(1 - eta(x_m))` with `nu = M/N`.
pub fn j_scoring(rule: &ScoringRule, table: &LogTable, z: f64) -> Result<CostEvaluation> {
    scoring(rule, table, z, false)
}

/// [`j_scoring`] keeping the per-sample breakdown.
pub fn j_scoring_terms(rule: &ScoringRule, table: &LogTable, z: f64) -> Result<CostEvaluation> {
    scoring(rule, table, z, true)
}

/// NCE cost, `-sum_n log eta(y_n) - sum_m log(1 - eta(x_m))`.
pub fn j_nce(table: &LogTable, z: f64) -> Result<CostEvaluation> {
    j_scoring(&ScoringRule::negative_log(), table, z)
}

/// MIS cost over the pooled samples `u`:
/// `-sum log[phi/D] - sum log[Z q/D]` with `D = alpha1 phi + alpha2 Z q`.
pub fn j_mis(table: &LogTable, z: f64) -> Result<CostEvaluation> {
    check_z(z)?;
    let (ln_a1, ln_a2, ln_z) = (table.alpha1().ln(), table.alpha2().ln(), z.ln());
    let mut value = NeumaierSum::new();
    let mut dz = NeumaierSum::new();
    for p in table.pooled() {
        let LogPair { log_phi, log_q } = *p;
        if log_phi == f64::NEG_INFINITY && log_q == f64::NEG_INFINITY {
            return Err(Error::UndefinedPosterior);
        }
        let ld = log_mix(ln_a1 + log_phi, ln_a2 + log_q, ln_z);
        value.add(ld - log_phi);
        value.add(ld - (ln_z + log_q));
        // d/dZ: 2 alpha2 q / D - 1/Z
        dz.add(2.0 * (ln_a2 + log_q - ld).exp());
        dz.add(-1.0 / z);
    }
    Ok(CostEvaluation::finish(value, dz, None))
}

/// Negative log-likelihood of the model draws under the normalized model,
/// `-sum_n [log phi(y_n | theta) - log Z(theta)]`.
pub fn j_ml(model: &dyn UnnormalizedModel, theta: &[f64], samples: &SampleSet) -> Result<f64> {
    let log_z = model.analytic_log_z(theta).ok_or(Error::Capability("analytic log Z"))?;
    let s: NeumaierSum = samples
        .model_samples()
        .map(|y| log_z - model.log_phi(y, theta))
        .collect();
    Ok(s.sum())
}

/// Minimizes a cost over `Z` with `theta` held fixed, searching in `log Z`
/// over `bracket`. Returns the minimizing `Z`.
///
/// Values alone locate the minimum only to about the square root of the
/// machine epsilon, so the result is polished by bisecting on the sign of
/// `dJ/dZ` once a sign change is found near the value-based minimum.
pub fn argmin_z<F>(mut cost: F, bracket: &Bracket1D, tol: f64) -> Result<SolveReport<f64>>
where
    F: FnMut(f64) -> Result<CostEvaluation>,
{
    let r = minimize_1d(
        |lz| cost(lz.exp()).map(|c| c.value).unwrap_or(f64::INFINITY),
        bracket,
        tol,
    )?;
    let mut evaluations = r.evaluations;
    let mut slope = |lz: f64| {
        evaluations += 1;
        cost(lz.exp())
            .ok()
            .filter(|c| !c.infinite && c.dz.is_finite())
            .map(|c| c.dz)
    };
    let mut argmin = r.argmin;
    let mut width = 1e-7 * r.argmin.abs().max(1.0);
    while width < 1e-1 {
        let (lo, hi) = (r.argmin - width, r.argmin + width);
        if let (Some(dlo), Some(dhi)) = (slope(lo), slope(hi)) {
            if dlo < 0.0 && dhi > 0.0 {
                let (mut lo, mut hi) = (lo, hi);
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    match slope(mid) {
                        Some(d) if d < 0.0 => lo = mid,
                        Some(d) if d > 0.0 => hi = mid,
                        Some(_) => {
                            lo = mid;
                            hi = mid;
                        }
                        None => break,
                    }
                }
                argmin = 0.5 * (lo + hi);
                break;
            }
        }
        width *= 10.0;
    }
    let value_at_min = cost(argmin.exp()).map(|c| c.value).unwrap_or(f64::INFINITY);
    if value_at_min > r.value_at_min + 64.0 * f64::EPSILON * r.value_at_min.abs().max(1.0) {
        return Ok(SolveReport {
            argmin: r.argmin.exp(),
            evaluations: evaluations + 1,
            ..r
        });
    }
    Ok(SolveReport {
        argmin: argmin.exp(),
        value_at_min,
        evaluations: evaluations + 1,
        converged: r.converged,
    })
}
