use super::{log_mix, ratio, EstimatorRun, FixedPointConfig};
use crate::error::Result;
use crate::numeric::NeumaierSum;
use crate::solvers::iterate_fixed_point;
use crate::table::LogTable;

/// Deterministic-mixture MIS over the pooled samples:
/// `Z' = (1/(N+M)) sum_i Z phi(u_i) / (alpha1 phi(u_i) + alpha2 Z q(u_i))`.
pub fn mis_estimator(table: &LogTable, cfg: &FixedPointConfig) -> Result<EstimatorRun> {
    let (ln_a1, ln_a2) = (table.alpha1().ln(), table.alpha2().ln());
    let total = (table.n() + table.m()) as f64;
    let trace = iterate_fixed_point(cfg.z0, cfg.max_iters, cfg.rel_tol, |z| {
        let ln_z = z.ln();
        let sum: NeumaierSum = table
            .pooled()
            .filter(|p| !p.is_null())
            .map(|p| (ln_z + p.log_phi - log_mix(ln_a1 + p.log_phi, ln_a2 + p.log_q, ln_z)).exp())
            .collect();
        Ok(sum.sum() / total)
    })?;
    Ok(trace.into())
}

/// Self-normalized IS against the deterministic mixture:
/// `Z' = [sum_i phi(u_i)/D(u_i)] / [sum_i q(u_i)/D(u_i)]` over the pooled samples.
pub fn self_is_with_mix(table: &LogTable, cfg: &FixedPointConfig) -> Result<EstimatorRun> {
    let (ln_a1, ln_a2) = (table.alpha1().ln(), table.alpha2().ln());
    let trace = iterate_fixed_point(cfg.z0, cfg.max_iters, cfg.rel_tol, |z| {
        let ln_z = z.ln();
        let mut num = NeumaierSum::new();
        let mut den = NeumaierSum::new();
        for p in table.pooled().filter(|p| !p.is_null()) {
            let ld = log_mix(ln_a1 + p.log_phi, ln_a2 + p.log_q, ln_z);
            num.add((p.log_phi - ld).exp());
            den.add((p.log_q - ld).exp());
        }
        ratio(num.sum(), den.sum(), "mixture denominator vanished")
    })?;
    Ok(trace.into())
}
