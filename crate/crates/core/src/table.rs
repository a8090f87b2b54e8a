//! Log-densities of a [`SampleSet`] under a model and a proposal.
//!
//! Every estimator and cost only ever needs `log phi` and `log q` at the
//! sample points, so they are evaluated once, checked, and passed around as
//! a [`LogTable`].

use crate::error::{Error, Result};
use crate::model::{Proposal, SampleSet, UnnormalizedModel};

/// `log phi(u | theta)` and `log q(u)` at one sample point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogPair {
    pub log_phi: f64,
    pub log_q: f64,
}

impl LogPair {
    pub fn new(log_phi: f64, log_q: f64) -> Self {
        Self { log_phi, log_q }
    }

    /// `phi = q = 0`: the point carries no information and is skipped.
    pub fn is_null(&self) -> bool {
        self.log_phi == f64::NEG_INFINITY && self.log_q == f64::NEG_INFINITY
    }
}

/// Evaluated sample set: model draws `y` and proposal draws `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogTable {
    dim: usize,
    y_points: Vec<f64>,
    x_points: Vec<f64>,
    pub(crate) y: Vec<LogPair>,
    pub(crate) x: Vec<LogPair>,
}

fn check(pairs: &[LogPair], offset: usize) -> Result<()> {
    for (i, p) in pairs.iter().enumerate() {
        if p.log_q.is_nan() || p.log_q == f64::INFINITY {
            return Err(Error::Evaluation {
                density: "log_q",
                index: offset + i,
                value: p.log_q,
            });
        }
        let phi_bad = p.log_phi.is_nan() || p.log_phi == f64::INFINITY;
        let phi_missing = p.log_phi == f64::NEG_INFINITY && p.log_q > f64::NEG_INFINITY;
        if phi_bad || phi_missing {
            return Err(Error::Evaluation {
                density: "log_phi",
                index: offset + i,
                value: p.log_phi,
            });
        }
    }
    Ok(())
}

impl LogTable {
    /// Evaluates the model at `theta` and the proposal on every sample.
    ///
    /// Fails if any log-density is NaN or `+inf`, or if `log phi = -inf`
    /// where `q` is positive.
    pub fn evaluate(
        samples: &SampleSet,
        model: &dyn UnnormalizedModel,
        theta: &[f64],
        proposal: &dyn Proposal,
    ) -> Result<Self> {
        let eval = |u: &[f64]| LogPair::new(model.log_phi(u, theta), proposal.log_q(u));
        let y: Vec<LogPair> = samples.model_samples().map(eval).collect();
        let x: Vec<LogPair> = samples.proposal_samples().map(eval).collect();
        check(&y, 0)?;
        check(&x, y.len())?;
        Ok(Self {
            dim: samples.dim(),
            y_points: samples.model_buffer().to_vec(),
            x_points: samples.proposal_buffer().to_vec(),
            y,
            x,
        })
    }

    /// Builds a table from log-density values alone (no points attached).
    pub fn from_log_pairs(y: Vec<LogPair>, x: Vec<LogPair>) -> Result<Self> {
        if y.is_empty() || x.is_empty() {
            return Err(Error::Precondition("need N >= 1 and M >= 1".into()));
        }
        check(&y, 0)?;
        check(&x, y.len())?;
        Ok(Self {
            dim: 0,
            y_points: Vec::new(),
            x_points: Vec::new(),
            y,
            x,
        })
    }

    /// Re-evaluates `log phi` at a new `theta`; `log q` is reused.
    pub fn refresh_model(&mut self, model: &dyn UnnormalizedModel, theta: &[f64]) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::Precondition("table has no points attached".into()));
        }
        for (pair, u) in self.y.iter_mut().zip(self.y_points.chunks_exact(self.dim)) {
            pair.log_phi = model.log_phi(u, theta);
        }
        for (pair, u) in self.x.iter_mut().zip(self.x_points.chunks_exact(self.dim)) {
            pair.log_phi = model.log_phi(u, theta);
        }
        check(&self.y, 0)?;
        check(&self.x, self.y.len())
    }

    /// The same table with `phi` replaced by `scale * phi`.
    pub fn scale_phi(&self, scale: f64) -> Self {
        let ls = scale.ln();
        let bump = |p: &LogPair| LogPair::new(p.log_phi + ls, p.log_q);
        Self {
            dim: self.dim,
            y_points: self.y_points.clone(),
            x_points: self.x_points.clone(),
            y: self.y.iter().map(bump).collect(),
            x: self.x.iter().map(bump).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn m(&self) -> usize {
        self.x.len()
    }

    pub fn alpha1(&self) -> f64 {
        self.n() as f64 / (self.n() + self.m()) as f64
    }

    pub fn alpha2(&self) -> f64 {
        self.m() as f64 / (self.n() + self.m()) as f64
    }

    pub fn nu(&self) -> f64 {
        self.m() as f64 / self.n() as f64
    }

    /// Log-densities at the model draws.
    pub fn model_side(&self) -> &[LogPair] {
        &self.y
    }

    /// Log-densities at the proposal draws.
    pub fn proposal_side(&self) -> &[LogPair] {
        &self.x
    }

    /// Model draws followed by proposal draws.
    pub fn pooled(&self) -> impl Iterator<Item = &LogPair> + '_ {
        self.y.iter().chain(self.x.iter())
    }

    /// Point of the `i`-th model draw, if points are attached.
    pub fn model_point(&self, i: usize) -> Option<&[f64]> {
        (self.dim > 0).then(|| &self.y_points[i * self.dim..(i + 1) * self.dim])
    }

    /// Point of the `i`-th proposal draw, if points are attached.
    pub fn proposal_point(&self, i: usize) -> Option<&[f64]> {
        (self.dim > 0).then(|| &self.x_points[i * self.dim..(i + 1) * self.dim])
    }
}
