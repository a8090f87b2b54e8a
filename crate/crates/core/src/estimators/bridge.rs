use std::fmt;
use std::sync::Arc;

use super::{log_mix, ratio, EstimatorRun, FixedPointConfig};
use crate::error::{Error, Result};
use crate::numeric::{log_add_exp, NeumaierSum};
use crate::solvers::iterate_fixed_point;
use crate::table::{LogPair, LogTable};

/// Optimal bridge sampling.
///
/// Iterates `Z' = [(1/M) sum_x phi/D] / [(1/N) sum_y q/D]` with
/// `D = alpha1 phi + alpha2 Z q`.
pub fn optimal_bridge(table: &LogTable, cfg: &FixedPointConfig) -> Result<EstimatorRun> {
    let (ln_a1, ln_a2) = (table.alpha1().ln(), table.alpha2().ln());
    let (n, m) = (table.n() as f64, table.m() as f64);
    let trace = iterate_fixed_point(cfg.z0, cfg.max_iters, cfg.rel_tol, |z| {
        let ln_z = z.ln();
        let mut num = NeumaierSum::new();
        for p in table.x.iter().filter(|p| !p.is_null()) {
            let ld = log_mix(ln_a1 + p.log_phi, ln_a2 + p.log_q, ln_z);
            num.add((p.log_phi - ld).exp());
        }
        let mut den = NeumaierSum::new();
        for p in table.y.iter().filter(|p| !p.is_null()) {
            let ld = log_mix(ln_a1 + p.log_phi, ln_a2 + p.log_q, ln_z);
            den.add((p.log_q - ld).exp());
        }
        ratio(num.sum() / m, den.sum() / n, "bridge denominator vanished")
    })?;
    Ok(trace.into())
}

/// Per-sample inputs handed to a [`BridgeFunction`].
#[derive(Debug, Clone, Copy)]
pub struct BridgeArgs<'a> {
    /// The sample point, when the table carries points.
    pub point: Option<&'a [f64]>,
    pub log_phi: f64,
    pub log_q: f64,
    /// `log` of the current iterate.
    pub log_z: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub nu: f64,
}

type LogBridge = Arc<dyn Fn(&BridgeArgs<'_>) -> f64 + Send + Sync>;

/// Bridge function `b(y)`, represented through `log b`.
#[derive(Clone)]
pub enum BridgeFunction {
    /// `b = 1`
    Constant,
    /// `b = 1 / (alpha1 phi + alpha2 Z q)`, optimal bridge sampling.
    Optimal,
    /// `b = phi q / (phi + nu Z q)^3`, the quadratic scoring rule.
    Quadratic,
    Custom {
        log_b: LogBridge,
        uses_z: bool,
    },
}

impl fmt::Debug for BridgeFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BridgeFunction::Constant => f.write_str("Constant"),
            BridgeFunction::Optimal => f.write_str("Optimal"),
            BridgeFunction::Quadratic => f.write_str("Quadratic"),
            BridgeFunction::Custom { uses_z, .. } => write!(f, "Custom {{ uses_z: {uses_z} }}"),
        }
    }
}

/// `log[phi q / (phi + nu Z q)^3]`
#[inline]
pub(crate) fn quadratic_log_weight(log_phi: f64, log_q: f64, ln_nu: f64, ln_z: f64) -> f64 {
    let ls = log_add_exp(log_phi, ln_z + (ln_nu + log_q));
    log_phi + log_q - 3.0 * ls
}

impl BridgeFunction {
    /// Custom bridge from `b` itself; must be positive on every sample.
    pub fn custom<F>(uses_z: bool, b: F) -> Self
    where
        F: Fn(&BridgeArgs<'_>) -> f64 + Send + Sync + 'static,
    {
        Self::Custom {
            log_b: Arc::new(move |a| b(a).ln()),
            uses_z,
        }
    }

    /// Custom bridge given directly as `log b`.
    pub fn custom_log<F>(uses_z: bool, log_b: F) -> Self
    where
        F: Fn(&BridgeArgs<'_>) -> f64 + Send + Sync + 'static,
    {
        Self::Custom {
            log_b: Arc::new(log_b),
            uses_z,
        }
    }

    pub fn uses_z(&self) -> bool {
        match self {
            BridgeFunction::Constant => false,
            BridgeFunction::Optimal | BridgeFunction::Quadratic => true,
            BridgeFunction::Custom { uses_z, .. } => *uses_z,
        }
    }

    /// `log b` at one sample. Constant factors common to all samples are
    /// dropped since they cancel in the bridge ratio.
    pub fn log_b(&self, a: &BridgeArgs<'_>) -> f64 {
        match self {
            BridgeFunction::Constant => 0.0,
            BridgeFunction::Optimal => -log_mix(a.alpha1.ln() + a.log_phi, a.alpha2.ln() + a.log_q, a.log_z),
            BridgeFunction::Quadratic => quadratic_log_weight(a.log_phi, a.log_q, a.nu.ln(), a.log_z),
            BridgeFunction::Custom { log_b, .. } => log_b(a),
        }
    }
}

/// One evaluation of the bridge identity `E_q[b phi] / E_phibar[b q]`.
fn bridge_ratio(b: &BridgeFunction, table: &LogTable, log_z: f64) -> Result<f64> {
    let (alpha1, alpha2, nu) = (table.alpha1(), table.alpha2(), table.nu());
    let args = |point, p: &LogPair| BridgeArgs {
        point,
        log_phi: p.log_phi,
        log_q: p.log_q,
        log_z,
        alpha1,
        alpha2,
        nu,
    };
    let mut num = NeumaierSum::new();
    for (i, p) in table.x.iter().enumerate().filter(|(_, p)| !p.is_null()) {
        let lb = b.log_b(&args(table.proposal_point(i), p));
        if lb.is_nan() || lb == f64::INFINITY {
            return Err(Error::Evaluation {
                density: "bridge function",
                index: table.n() + i,
                value: lb,
            });
        }
        num.add((lb + p.log_phi).exp());
    }
    let mut den = NeumaierSum::new();
    for (i, p) in table.y.iter().enumerate().filter(|(_, p)| !p.is_null()) {
        let lb = b.log_b(&args(table.model_point(i), p));
        if lb.is_nan() || lb == f64::INFINITY {
            return Err(Error::Evaluation {
                density: "bridge function",
                index: i,
                value: lb,
            });
        }
        den.add((lb + p.log_q).exp());
    }
    ratio(
        num.sum() / table.m() as f64,
        den.sum() / table.n() as f64,
        "bridge denominator vanished",
    )
}

/// Generic bridge sampling with bridge function `b`.
///
/// A `Z`-independent `b` gives a single ratio (trace `[Z0, Z_hat]`); otherwise
/// the current iterate is substituted into `b` and the ratio is iterated.
pub fn generic_bridge(b: &BridgeFunction, table: &LogTable, cfg: &FixedPointConfig) -> Result<EstimatorRun> {
    if !b.uses_z() {
        let z = bridge_ratio(b, table, cfg.z0.ln())?;
        let trace = iterate_fixed_point(cfg.z0, 1, None, |_| Ok(z))?;
        return Ok(EstimatorRun {
            converged: true,
            ..trace.into()
        });
    }
    let trace = iterate_fixed_point(cfg.z0, cfg.max_iters, cfg.rel_tol, |z| bridge_ratio(b, table, z.ln()))?;
    Ok(trace.into())
}

/// Fixed-point iteration of the quadratic scoring-rule cost:
/// `Z' = [(1/M) sum_x phi^2 q / S^3] / [(1/N) sum_y phi q^2 / S^3]`
/// with `S = phi + nu Z q`.
pub fn quadratic_score_iteration(table: &LogTable, cfg: &FixedPointConfig) -> Result<EstimatorRun> {
    let ln_nu = table.nu().ln();
    let (n, m) = (table.n() as f64, table.m() as f64);
    let trace = iterate_fixed_point(cfg.z0, cfg.max_iters, cfg.rel_tol, |z| {
        let ln_z = z.ln();
        let num: NeumaierSum = table
            .x
            .iter()
            .filter(|p| !p.is_null())
            .map(|p| (quadratic_log_weight(p.log_phi, p.log_q, ln_nu, ln_z) + p.log_phi).exp())
            .collect();
        let den: NeumaierSum = table
            .y
            .iter()
            .filter(|p| !p.is_null())
            .map(|p| (quadratic_log_weight(p.log_phi, p.log_q, ln_nu, ln_z) + p.log_q).exp())
            .collect();
        ratio(num.sum() / m, den.sum() / n, "quadratic-score denominator vanished")
    })?;
    Ok(trace.into())
}
