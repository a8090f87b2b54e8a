use crate::numeric::NeumaierSum;

/// Outcome of one Monte Carlo trial: the estimate (or `None` on an error)
/// and the iterations or objective evaluations it used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub estimate: Option<f64>,
    pub iters: usize,
}

impl TrialOutcome {
    pub fn ok(estimate: f64, iters: usize) -> Self {
        Self {
            estimate: Some(estimate),
            iters,
        }
    }

    pub fn failed() -> Self {
        Self {
            estimate: None,
            iters: 0,
        }
    }
}

/// Error moments of a cell, with population formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mse: f64,
    pub bias: f64,
    pub variance: f64,
    /// Standard error of `mse`, i.e. of the mean of the squared errors.
    pub mse_se: f64,
    pub mean_iters: f64,
    pub successes: usize,
    pub failures: usize,
}

/// Summarizes trials in index order; failed trials are only counted.
pub fn moments(outcomes: &[TrialOutcome], truth: f64) -> Moments {
    let failures = outcomes.iter().filter(|o| o.estimate.is_none()).count();
    let ok: Vec<(f64, usize)> = outcomes
        .iter()
        .filter_map(|o| o.estimate.map(|e| (e, o.iters)))
        .collect();
    if ok.is_empty() {
        return Moments {
            mse: f64::NAN,
            bias: f64::NAN,
            variance: f64::NAN,
            mse_se: f64::NAN,
            mean_iters: f64::NAN,
            successes: 0,
            failures,
        };
    }
    let r = ok.len() as f64;
    let mean: f64 = ok.iter().map(|(e, _)| *e).collect::<NeumaierSum>().sum() / r;
    let bias = mean - truth;
    let variance = ok
        .iter()
        .map(|(e, _)| (e - mean).powi(2))
        .collect::<NeumaierSum>()
        .sum()
        / r;
    // bias^2 + variance is the population MSE; computing it this way keeps
    // the identity exact up to one rounding.
    let mse = bias * bias + variance;
    let sq_mean = ok
        .iter()
        .map(|(e, _)| (e - truth).powi(2))
        .collect::<NeumaierSum>()
        .sum()
        / r;
    let sq_var = ok
        .iter()
        .map(|(e, _)| ((e - truth).powi(2) - sq_mean).powi(2))
        .collect::<NeumaierSum>()
        .sum()
        / r;
    let mse_se = if ok.len() > 1 {
        (sq_var / (r - 1.0)).sqrt()
    } else {
        f64::NAN
    };
    let mean_iters = ok.iter().map(|(_, i)| *i as f64).collect::<NeumaierSum>().sum() / r;
    Moments {
        mse,
        bias,
        variance,
        mse_se,
        mean_iters,
        successes: ok.len(),
        failures,
    }
}

/// Mean and standard error of the paired differences `a_i - b_i` of squared
/// errors, over trials where both succeeded.
pub fn paired_mse_difference(a: &[TrialOutcome], b: &[TrialOutcome], truth: f64) -> Option<(f64, f64)> {
    let d: Vec<f64> = a
        .iter()
        .zip(b)
        .filter_map(|(x, y)| Some((x.estimate? - truth).powi(2) - (y.estimate? - truth).powi(2)))
        .collect();
    if d.len() < 2 {
        return None;
    }
    let r = d.len() as f64;
    let mean = d.iter().copied().collect::<NeumaierSum>().sum() / r;
    let var = d.iter().map(|v| (v - mean).powi(2)).collect::<NeumaierSum>().sum() / (r - 1.0);
    Some((mean, (var / r).sqrt()))
}
