use std::io::{BufRead, Write};

use super::seed::rng_for;
use super::{Proposal, UnnormalizedModel};
use crate::error::{Error, Result};

/// Observed model draws `y_1..y_N` paired with proposal draws `x_1..x_M`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    dim: usize,
    model_samples: Vec<f64>,
    proposal_samples: Vec<f64>,
}

impl SampleSet {
    /// Builds a sample set from flat point buffers. Both sides must be non-empty.
    pub fn from_points(dim: usize, model_samples: Vec<f64>, proposal_samples: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Precondition("dimension must be at least 1".into()));
        }
        if model_samples.len() % dim != 0 || proposal_samples.len() % dim != 0 {
            return Err(Error::Precondition("buffer length is not a multiple of dim".into()));
        }
        if model_samples.is_empty() || proposal_samples.is_empty() {
            return Err(Error::Precondition("need N >= 1 and M >= 1".into()));
        }
        Ok(Self {
            dim,
            model_samples,
            proposal_samples,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of model draws.
    pub fn n(&self) -> usize {
        self.model_samples.len() / self.dim
    }

    /// Number of proposal draws.
    pub fn m(&self) -> usize {
        self.proposal_samples.len() / self.dim
    }

    /// `N / (N + M)`
    pub fn alpha1(&self) -> f64 {
        self.n() as f64 / (self.n() + self.m()) as f64
    }

    /// `M / (N + M)`
    pub fn alpha2(&self) -> f64 {
        self.m() as f64 / (self.n() + self.m()) as f64
    }

    /// `M / N`
    pub fn nu(&self) -> f64 {
        self.m() as f64 / self.n() as f64
    }

    pub fn model_samples(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.model_samples.chunks_exact(self.dim)
    }

    pub fn proposal_samples(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.proposal_samples.chunks_exact(self.dim)
    }

    pub fn model_buffer(&self) -> &[f64] {
        &self.model_samples
    }

    pub fn proposal_buffer(&self) -> &[f64] {
        &self.proposal_samples
    }

    /// Writes `label,value` rows (one-dimensional sets only).
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        if self.dim != 1 {
            return Err(Error::Precondition(
                "CSV export supports one-dimensional samples only".into(),
            ));
        }
        writeln!(out, "label,value")?;
        for v in &self.model_samples {
            writeln!(out, "model,{v}")?;
        }
        for v in &self.proposal_samples {
            writeln!(out, "proposal,{v}")?;
        }
        Ok(())
    }

    /// Reads `label,value` rows; a header line is optional.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut model = Vec::new();
        let mut proposal = Vec::new();
        for (lineno, line) in input.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (label, value) = line
                .split_once(',')
                .ok_or_else(|| Error::Usage(format!("line {}: expected label,value", lineno + 1)))?;
            let label = label.trim();
            if lineno == 0 && label == "label" {
                continue;
            }
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::Usage(format!("line {}: bad value {value:?}", lineno + 1)))?;
            match label {
                "model" => model.push(value),
                "proposal" => proposal.push(value),
                other => {
                    return Err(Error::Usage(format!(
                        "line {}: label must be model or proposal, got {other:?}",
                        lineno + 1
                    )))
                }
            }
        }
        Self::from_points(1, model, proposal).map_err(|e| Error::Usage(e.to_string()))
    }
}

/// A candidate `(theta, Z)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterPoint {
    pub theta: Vec<f64>,
    z: f64,
}

impl ParameterPoint {
    pub fn new(theta: Vec<f64>, z: f64) -> Result<Self> {
        if !(z > 0.0 && z.is_finite()) {
            return Err(Error::Precondition(format!("Z must be positive, got {z}")));
        }
        Ok(Self { theta, z })
    }

    pub fn z(&self) -> f64 {
        self.z
    }
}

/// Draws `N` points from the model at `theta_true` and `M` points from the proposal.
///
/// Model draws come from stream 0 and proposal draws from stream 1 of the
/// generator seeded by `seed`, so the model side does not depend on `M` and
/// a Gaussian proposal's draws scale linearly with its standard deviation.
pub fn draw_sample_set(
    model: &dyn UnnormalizedModel,
    theta_true: &[f64],
    proposal: &dyn Proposal,
    n: usize,
    m: usize,
    seed: u64,
) -> Result<SampleSet> {
    if n == 0 || m == 0 {
        return Err(Error::Precondition("need N >= 1 and M >= 1".into()));
    }
    if model.dim() != proposal.dim() {
        return Err(Error::Precondition("model and proposal dimensions differ".into()));
    }
    let ys = model.sample(theta_true, n, &mut rng_for(seed, 0))?;
    let xs = proposal.sample(m, &mut rng_for(seed, 1));
    SampleSet::from_points(model.dim(), ys, xs)
}
