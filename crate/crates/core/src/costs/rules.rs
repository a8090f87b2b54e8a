use std::fmt;
use std::sync::Arc;

use super::Posterior;
use crate::error::{Error, Result};

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    NegativeLog,
    Quadratic,
    Reciprocal,
    Custom { v: RealFn, dv: RealFn },
}

/// Loss `V(eta)` of the binary classifier, with its derivative.
///
/// The three built-in rules evaluate their terms from the log-domain
/// posterior pair; custom rules see `eta` as a plain number.
#[derive(Clone)]
pub struct ScoringRule {
    name: String,
    proper: bool,
    kind: Kind,
}

impl fmt::Debug for ScoringRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScoringRule")
            .field("name", &self.name)
            .field("proper", &self.proper)
            .finish()
    }
}

const CHECK_GRID: usize = 99;

fn validate(name: &str, v: &dyn Fn(f64) -> f64, dv: &dyn Fn(f64) -> f64) -> Result<()> {
    let grid: Vec<f64> = (1..=CHECK_GRID).map(|i| i as f64 / (CHECK_GRID + 1) as f64).collect();
    let mut prev = f64::INFINITY;
    for &e in &grid {
        let val = v(e);
        if !(val > 0.0 && val.is_finite()) {
            return Err(Error::Precondition(format!(
                "rule {name}: V({e}) = {val} is not positive"
            )));
        }
        if val >= prev {
            return Err(Error::Precondition(format!("rule {name}: V is not decreasing at {e}")));
        }
        prev = val;
        let h = 1e-4 * e.min(1.0 - e);
        let fd = (v(e + h) - v(e - h)) / (2.0 * h);
        let d = dv(e);
        if (fd - d).abs() > 1e-6 * d.abs().max(1e-12) {
            return Err(Error::Precondition(format!(
                "rule {name}: dV({e}) = {d} disagrees with finite difference {fd}"
            )));
        }
    }
    Ok(())
}

impl ScoringRule {
    /// Custom rule. `V` must be positive and decreasing on `(0, 1)` and `dV`
    /// must match it; both are checked on a grid.
    pub fn new<V, D>(name: impl Into<String>, v: V, dv: D, proper: bool) -> Result<Self>
    where
        V: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let name = name.into();
        validate(&name, &v, &dv)?;
        Ok(Self {
            name,
            proper,
            kind: Kind::Custom {
                v: Arc::new(v),
                dv: Arc::new(dv),
            },
        })
    }

    fn builtin(name: &str, proper: bool, kind: Kind) -> Self {
        Self {
            name: name.to_string(),
            proper,
            kind,
        }
    }

    /// `V(eta) = -log eta`, the logistic loss of NCE.
    pub fn negative_log() -> Self {
        Self::builtin("neg-log", true, Kind::NegativeLog)
    }

    /// `V(eta) = (1 - eta)^2`
    pub fn quadratic() -> Self {
        Self::builtin("quadratic", true, Kind::Quadratic)
    }

    /// `V(eta) = 1/eta`, not proper.
    pub fn reciprocal() -> Self {
        Self::builtin("reciprocal", false, Kind::Reciprocal)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_proper(&self) -> bool {
        self.proper
    }

    pub fn v(&self, eta: f64) -> f64 {
        match &self.kind {
            Kind::NegativeLog => -eta.ln(),
            Kind::Quadratic => (1.0 - eta).powi(2),
            Kind::Reciprocal => 1.0 / eta,
            Kind::Custom { v, .. } => v(eta),
        }
    }

    pub fn dv(&self, eta: f64) -> f64 {
        match &self.kind {
            Kind::NegativeLog => -1.0 / eta,
            Kind::Quadratic => -2.0 * (1.0 - eta),
            Kind::Reciprocal => -1.0 / (eta * eta),
            Kind::Custom { dv, .. } => dv(eta),
        }
    }

    /// `(V(eta), dV(eta) * deta/dZ)` for a model draw.
    pub(crate) fn model_term(&self, p: &Posterior, z: f64) -> (f64, f64) {
        let (e, c) = (p.eta(), p.one_minus_eta());
        match &self.kind {
            Kind::NegativeLog => (-p.log_eta, c / z),
            Kind::Quadratic => (c * c, 2.0 * e * c * c / z),
            Kind::Reciprocal => ((-p.log_eta).exp(), (p.log_one_minus - p.log_eta).exp() / z),
            Kind::Custom { v, dv } => (v(e), dv(e) * p.eta_dot(z)),
        }
    }

    /// `(V(1 - eta), -dV(1 - eta) * deta/dZ)` for a proposal draw.
    pub(crate) fn proposal_term(&self, p: &Posterior, z: f64) -> (f64, f64) {
        let (e, c) = (p.eta(), p.one_minus_eta());
        match &self.kind {
            Kind::NegativeLog => (-p.log_one_minus, -e / z),
            Kind::Quadratic => (e * e, -2.0 * e * e * c / z),
            Kind::Reciprocal => ((-p.log_one_minus).exp(), -(p.log_eta - p.log_one_minus).exp() / z),
            Kind::Custom { v, dv } => (v(c), -dv(c) * p.eta_dot(z)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_pass_validation() {
        for r in [
            ScoringRule::negative_log(),
            ScoringRule::quadratic(),
            ScoringRule::reciprocal(),
        ] {
            validate(r.name(), &|e| r.v(e), &|e| r.dv(e)).unwrap();
        }
        assert!(!ScoringRule::reciprocal().is_proper());
    }

    #[test]
    fn rejects_bad_rules() {
        assert!(ScoringRule::new("inc", |e| e, |_| 1.0, false).is_err());
        assert!(ScoringRule::new("neg", |e| -e, |_| -1.0, false).is_err());
        assert!(ScoringRule::new("wrong-dv", |e| 2.0 - e, |_| -2.0, false).is_err());
        assert!(ScoringRule::new("ok", |e| 2.0 - e, |_| -1.0, false).is_ok());
    }

    #[test]
    fn custom_terms_follow_the_chain_rule() {
        let p = Posterior::from_logs(-0.4, -0.9, 0.3, 0.0).unwrap();
        let z = 0.3f64.exp();
        let custom = ScoringRule::new("q2", |e| (1.0 - e).powi(2), |e| -2.0 * (1.0 - e), true).unwrap();
        let built = ScoringRule::quadratic();
        for (a, b) in [
            (custom.model_term(&p, z), built.model_term(&p, z)),
            (custom.proposal_term(&p, z), built.proposal_term(&p, z)),
        ] {
            assert!((a.0 - b.0).abs() < 1e-15);
            assert!((a.1 - b.1).abs() < 1e-14 * b.1.abs());
        }
    }
}
