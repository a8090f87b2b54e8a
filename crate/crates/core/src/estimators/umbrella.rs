use super::{EstimatorRun, FixedPointConfig};
use crate::error::{Error, Result};
use crate::model::{Proposal, UnnormalizedModel};
use crate::numeric::{log_abs_diff_exp, log_sum_exp};
use crate::solvers::iterate_fixed_point;
use crate::table::LogPair;

/// Smallest admissible `|phi - Z q| / max(phi, Z q)`.
const MIN_RELATIVE_GAP: f64 = 1e-300;

/// Whether `|phi - Z q|` at log-values `a`, `b` is zero up to rounding.
fn singular(a: f64, b: f64, log_gap: f64) -> bool {
    let scale = a.abs().max(b.abs()).max(1.0);
    (a - b).abs() <= 16.0 * f64::EPSILON * scale || log_gap - a.max(b) < MIN_RELATIVE_GAP.ln()
}

/// Optimal umbrella sampling from points drawn from `r ∝ |phi_bar - q|`:
/// `Z' = [sum_i phi/|phi - Z q|] / [sum_i q/|phi - Z q|]`.
///
/// A term whose absolute difference vanishes (relative to the larger of
/// `phi` and `Z q`) aborts with [`Error::SingularIterate`].
pub fn optimal_umbrella(points: &[LogPair], cfg: &FixedPointConfig) -> Result<EstimatorRun> {
    if points.is_empty() {
        return Err(Error::Precondition(
            "umbrella estimator needs at least one point".into(),
        ));
    }
    let mut num = Vec::with_capacity(points.len());
    let mut den = Vec::with_capacity(points.len());
    let trace = iterate_fixed_point(cfg.z0, cfg.max_iters, cfg.rel_tol, |z| {
        let ln_z = z.ln();
        num.clear();
        den.clear();
        for (index, p) in points.iter().enumerate() {
            if p.is_null() {
                continue;
            }
            let lzq = ln_z + p.log_q;
            let gap = log_abs_diff_exp(p.log_phi, lzq);
            if singular(p.log_phi, lzq, gap) {
                return Err(Error::SingularIterate { iterate: z, index });
            }
            num.push(p.log_phi - gap);
            den.push(p.log_q - gap);
        }
        if den.is_empty() {
            return Err(Error::DegenerateSamples("umbrella points carry no density"));
        }
        Ok((log_sum_exp(&num) - log_sum_exp(&den)).exp())
    })?;
    Ok(trace.into())
}

/// [`optimal_umbrella`] on raw points (flat buffer of `dim`-vectors).
pub fn optimal_umbrella_points(
    points: &[f64],
    dim: usize,
    model: &dyn UnnormalizedModel,
    theta: &[f64],
    proposal: &dyn Proposal,
    cfg: &FixedPointConfig,
) -> Result<EstimatorRun> {
    if dim == 0 || points.len() % dim != 0 {
        return Err(Error::Precondition(format!(
            "{} values do not form {dim}-vectors",
            points.len()
        )));
    }
    let mut pairs = Vec::with_capacity(points.len() / dim);
    for (index, u) in points.chunks_exact(dim).enumerate() {
        let pair = LogPair::new(model.log_phi(u, theta), proposal.log_q(u));
        for (density, value) in [("log_phi", pair.log_phi), ("log_q", pair.log_q)] {
            if value.is_nan() || value == f64::INFINITY {
                return Err(Error::Evaluation { density, index, value });
            }
        }
        pairs.push(pair);
    }
    optimal_umbrella(&pairs, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{GaussianEnergy, GaussianProposal};

    #[test]
    fn single_point_cancels() {
        let p = LogPair::new(-0.3, -1.9);
        for z0 in [0.01, 1.0, 77.0] {
            let r = optimal_umbrella(&[p], &FixedPointConfig::fixed_steps(z0, 1).unwrap()).unwrap();
            assert!((r.z_hat - (1.6f64).exp()).abs() < 1e-14 * r.z_hat);
        }
    }

    #[test]
    fn proportional_densities_hit_the_singularity() {
        let c: f64 = 2.5;
        let pts: Vec<LogPair> = [-0.4, -1.2, 0.3].iter().map(|&l| LogPair::new(c.ln() + l, l)).collect();
        let err = optimal_umbrella(&pts, &FixedPointConfig::default()).unwrap_err();
        match err {
            Error::SingularIterate { iterate, index } => {
                assert!((iterate - c).abs() < 1e-12);
                assert_eq!(index, 0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn fixed_points_split_the_ratios_evenly() {
        // Z' - Z is proportional to sum_i sign(phi_i - Z q_i), so with ratios
        // phi/q = (3.33, 0.4) every Z in between is a fixed point.
        let pts = [LogPair::new(0.0, 0.3f64.ln()), LogPair::new(0.2f64.ln(), 0.5f64.ln())];
        for z0 in [0.5, 1.0, 3.0] {
            let r = optimal_umbrella(&pts, &FixedPointConfig::fixed_steps(z0, 1).unwrap()).unwrap();
            assert!((r.z_hat - z0).abs() < 1e-14 * z0);
        }
        let r = optimal_umbrella(&pts, &FixedPointConfig::fixed_steps(0.2, 1).unwrap()).unwrap();
        assert!((r.z_hat - 0.576).abs() < 1e-14);
        // Four points: the iteration settles between the 2nd and 3rd ratio.
        let pts: Vec<LogPair> = [(1.0, 0.3), (0.2, 0.5), (0.7, 0.6), (2.0, 0.4)]
            .iter()
            .map(|&(a, b): &(f64, f64)| LogPair::new(a.ln(), b.ln()))
            .collect();
        let r = optimal_umbrella(&pts, &FixedPointConfig::converge(0.5, 1e-14).unwrap()).unwrap();
        assert!((r.z_hat - 1.237871147912042).abs() < 1e-12, "{}", r.z_hat);
    }

    #[test]
    fn point_evaluation_wrapper() {
        let model = GaussianEnergy::new(1);
        let q = GaussianProposal::new(0.0, 2.0);
        let cfg = FixedPointConfig::fixed_steps(1.0, 3).unwrap();
        let a = optimal_umbrella_points(&[0.1, 1.3, -2.0], 1, &model, &[1.0], &q, &cfg).unwrap();
        let pairs: Vec<LogPair> = [0.1, 1.3, -2.0]
            .iter()
            .map(|&u| LogPair::new(model.log_phi(&[u], &[1.0]), q.log_q(&[u])))
            .collect();
        assert_eq!(a, optimal_umbrella(&pairs, &cfg).unwrap());
        assert!(optimal_umbrella_points(&[0.1, 1.3, -2.0], 2, &model, &[1.0], &q, &cfg).is_err());
    }
}
