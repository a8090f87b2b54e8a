use std::fmt;

use crate::error::{Error, Result};
use crate::numeric::{log_sum_exp, NeumaierSum};
use crate::solvers::newton_minimize;
use crate::table::LogTable;

type LogDensity = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// One class of a relative-logistic-regression problem: an unnormalized
/// log-density and the `N_k` draws from its normalized version.
pub struct RlrClass {
    pub log_density: LogDensity,
    /// Flat buffer of `dim`-vectors.
    pub samples: Vec<f64>,
}

impl fmt::Debug for RlrClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RlrClass")
            .field("samples", &self.samples.len())
            .finish_non_exhaustive()
    }
}

impl RlrClass {
    pub fn new<F>(log_density: F, samples: Vec<f64>) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            log_density: Box::new(log_density),
            samples,
        }
    }
}

/// `K`-class problem with one normalizing constant pinned to 1.
///
/// Internally only the matrix `log phi_j(u_i)` over all pooled draws is
/// kept, together with the class of each draw.
#[derive(Debug, Clone, PartialEq)]
pub struct RlrProblem {
    counts: Vec<usize>,
    /// Row-major, one row of `K` values per pooled draw, classes in order.
    log_phi: Vec<f64>,
    pinned: usize,
}

impl RlrProblem {
    pub fn new(dim: usize, classes: &[RlrClass], pinned: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Precondition("dimension must be positive".into()));
        }
        let mut counts = Vec::with_capacity(classes.len());
        for c in classes {
            if c.samples.is_empty() || c.samples.len() % dim != 0 {
                return Err(Error::Precondition("every class needs N_k >= 1 draws".into()));
            }
            counts.push(c.samples.len() / dim);
        }
        let mut log_phi = Vec::with_capacity(counts.iter().sum::<usize>() * classes.len());
        for c in classes {
            for u in c.samples.chunks_exact(dim) {
                log_phi.extend(classes.iter().map(|d| (d.log_density)(u)));
            }
        }
        Self::from_log_matrix(counts, log_phi, pinned)
    }

    /// From precomputed `log phi_j(u_i)`; the first `counts[0]` rows belong
    /// to class 0 and so on.
    pub fn from_log_matrix(counts: Vec<usize>, log_phi: Vec<f64>, pinned: usize) -> Result<Self> {
        let k = counts.len();
        if k < 2 {
            return Err(Error::Precondition(format!("need K >= 2 classes, got {k}")));
        }
        if pinned >= k {
            return Err(Error::Precondition(format!("pinned index {pinned} out of range")));
        }
        if counts.contains(&0) {
            return Err(Error::Precondition("every class needs N_k >= 1 draws".into()));
        }
        if log_phi.len() != counts.iter().sum::<usize>() * k {
            return Err(Error::Precondition("log-density matrix has the wrong size".into()));
        }
        for (i, &v) in log_phi.iter().enumerate() {
            if v.is_nan() || v == f64::INFINITY {
                return Err(Error::Evaluation {
                    density: "log_phi_k",
                    index: i / k,
                    value: v,
                });
            }
        }
        for (i, row) in log_phi.chunks_exact(k).enumerate() {
            if row.iter().all(|&v| v == f64::NEG_INFINITY) {
                return Err(Error::ZeroDensity {
                    density: "every phi_k",
                    index: i,
                });
            }
        }
        Ok(Self {
            counts,
            log_phi,
            pinned,
        })
    }

    pub fn classes(&self) -> usize {
        self.counts.len()
    }

    /// Class posteriors `p_j(u_i)` for given `lambda = log Z`, plus the
    /// negative log-likelihood.
    fn posteriors(&self, lambda: &[f64], probs: &mut Vec<f64>) -> f64 {
        let k = self.classes();
        let ln_counts: Vec<f64> = self.counts.iter().map(|&c| (c as f64).ln()).collect();
        probs.clear();
        let mut nll = NeumaierSum::new();
        let mut logits = vec![0.0; k];
        let mut class = 0;
        let mut left = self.counts[0];
        for row in self.log_phi.chunks_exact(k) {
            while left == 0 {
                class += 1;
                left = self.counts[class];
            }
            left -= 1;
            for j in 0..k {
                logits[j] = ln_counts[j] + row[j] - lambda[j];
            }
            let lse = log_sum_exp(&logits);
            nll.add(lse - logits[class]);
            probs.extend(logits.iter().map(|l| (l - lse).exp()));
        }
        nll.sum()
    }

    /// Starting point: per class, the mean of `log phi_j - log phi_pinned`
    /// over its own draws. Shifts exactly with any rescaling of `phi_j`.
    fn warm_start(&self, free: &[usize]) -> Vec<f64> {
        let k = self.classes();
        let mut start = Vec::with_capacity(free.len());
        for &j in free {
            let first: usize = self.counts[..j].iter().sum();
            let mut acc = NeumaierSum::new();
            for row in self.log_phi[first * k..(first + self.counts[j]) * k].chunks_exact(k) {
                acc.add(row[j] - row[self.pinned]);
            }
            let mean = acc.sum() / self.counts[j] as f64;
            start.push(if mean.is_finite() { mean } else { 0.0 });
        }
        start
    }

    fn expand(&self, free: &[f64]) -> Vec<f64> {
        let mut lambda = Vec::with_capacity(self.classes());
        let mut it = free.iter();
        for j in 0..self.classes() {
            lambda.push(if j == self.pinned {
                0.0
            } else {
                *it.next().expect("free coordinates")
            });
        }
        lambda
    }
}

/// Gradient tolerance of the Newton solve (sup-norm in `log Z`).
const GRAD_TOL: f64 = 1e-9;

/// Maximum-likelihood normalizing constants of a relative logistic
/// regression. The pinned entry is returned as exactly 1.
pub fn rlr_estimate(problem: &RlrProblem) -> Result<Vec<f64>> {
    let k = problem.classes();
    let free: Vec<usize> = (0..k).filter(|&j| j != problem.pinned).collect();
    let objective = |x: &[f64]| {
        let mut probs = Vec::new();
        problem.posteriors(&problem.expand(x), &mut probs)
    };
    let grad_hess = |x: &[f64]| {
        let mut probs = Vec::new();
        problem.posteriors(&problem.expand(x), &mut probs);
        let f = free.len();
        let mut g: Vec<NeumaierSum> = vec![NeumaierSum::new(); f];
        let mut h = vec![0.0; f * f];
        for row in probs.chunks_exact(k) {
            for (a, &ja) in free.iter().enumerate() {
                g[a].add(-row[ja]);
                for (b, &jb) in free.iter().enumerate() {
                    let delta = if a == b { row[ja] } else { 0.0 };
                    h[a * f + b] += delta - row[ja] * row[jb];
                }
            }
        }
        // d nll / d lambda_j = N_j - sum_i p_j(u_i)
        let grad = free
            .iter()
            .zip(g)
            .map(|(&j, s)| problem.counts[j] as f64 + s.sum())
            .collect();
        (grad, h)
    };
    let x0 = problem.warm_start(&free);
    let report = newton_minimize(objective, grad_hess, x0, GRAD_TOL, 200).map_err(|e| match e {
        Error::Optimization { reason, last } => Error::Optimization {
            reason,
            last: problem.expand(&last).iter().map(|l| l.exp()).collect(),
        },
        other => other,
    })?;
    let lambda = problem.expand(&report.argmin);
    Ok(lambda
        .iter()
        .enumerate()
        .map(|(j, l)| if j == problem.pinned { 1.0 } else { l.exp() })
        .collect())
}

/// Two-class problem from an evaluated sample set: class 0 is the model
/// (`N` draws), class 1 the proposal (`M` draws) with its constant pinned.
/// Returns the estimate of the model's `Z`.
pub fn rlr_two_class(table: &LogTable) -> Result<f64> {
    let mut log_phi = Vec::with_capacity(2 * (table.n() + table.m()));
    for p in table.pooled() {
        log_phi.push(p.log_phi);
        log_phi.push(p.log_q);
    }
    let problem = RlrProblem::from_log_matrix(vec![table.n(), table.m()], log_phi, 1)?;
    Ok(rlr_estimate(&problem)?[0])
}
