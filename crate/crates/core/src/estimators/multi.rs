use super::{log_mix, ratio, EstimatorRun, FixedPointConfig};
use crate::error::{Error, Result};
use crate::model::{Proposal, UnnormalizedModel};
use crate::numeric::{log_sum_exp, NeumaierSum};
use crate::solvers::iterate_fixed_point;

/// Model draws and `K` proposal groups, evaluated for the multi-proposal
/// bridge.
///
/// Per point it stores `log phi`, `log sum_j beta_j q_j` with
/// `beta_j = M_j/(N + M)`, and `log sum_j (M_j/M) q_j`, where `M = sum_j M_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiProposalTable {
    n: usize,
    counts: Vec<usize>,
    /// `(log phi, log mixture, log average proposal)` at the model draws.
    y: Vec<[f64; 3]>,
    /// Same at the proposal draws, group after group.
    x: Vec<[f64; 3]>,
}

impl MultiProposalTable {
    /// `y` holds `N` model draws and `groups[k]` the `M_k` draws of
    /// `proposals[k]`, all as flat buffers of `dim`-vectors.
    pub fn evaluate(
        dim: usize,
        y: &[f64],
        proposals: &[&dyn Proposal],
        groups: &[Vec<f64>],
        model: &dyn UnnormalizedModel,
        theta: &[f64],
    ) -> Result<Self> {
        if proposals.is_empty() || proposals.len() != groups.len() {
            return Err(Error::Precondition("need one sample group per proposal, K >= 1".into()));
        }
        if dim == 0 || y.is_empty() || y.len() % dim != 0 {
            return Err(Error::Precondition("need N >= 1 model draws".into()));
        }
        let mut counts = Vec::with_capacity(groups.len());
        for g in groups {
            if g.is_empty() || g.len() % dim != 0 {
                return Err(Error::Precondition("every proposal group needs M_k >= 1 draws".into()));
            }
            counts.push(g.len() / dim);
        }
        let n = y.len() / dim;
        let m_tot: usize = counts.iter().sum();
        let ln_beta: Vec<f64> = counts.iter().map(|&mk| (mk as f64 / (n + m_tot) as f64).ln()).collect();
        let ln_share: Vec<f64> = counts.iter().map(|&mk| (mk as f64 / m_tot as f64).ln()).collect();
        let mut index = 0;
        let mut row = |u: &[f64]| -> Result<[f64; 3]> {
            let lphi = model.log_phi(u, theta);
            let lq: Vec<f64> = proposals.iter().map(|p| p.log_q(u)).collect();
            for (density, value) in std::iter::once(("log_phi", lphi)).chain(lq.iter().map(|&v| ("log_q", v))) {
                if value.is_nan() || value == f64::INFINITY {
                    return Err(Error::Evaluation { density, index, value });
                }
            }
            let mix: Vec<f64> = lq.iter().zip(&ln_beta).map(|(l, b)| b + l).collect();
            let avg: Vec<f64> = lq.iter().zip(&ln_share).map(|(l, s)| s + l).collect();
            index += 1;
            Ok([lphi, log_sum_exp(&mix), log_sum_exp(&avg)])
        };
        let ys = y.chunks_exact(dim).map(&mut row).collect::<Result<Vec<_>>>()?;
        let mut xs = Vec::with_capacity(m_tot);
        for g in groups {
            for u in g.chunks_exact(dim) {
                xs.push(row(u)?);
            }
        }
        Ok(Self {
            n,
            counts,
            y: ys,
            x: xs,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `M_1, ..., M_K`
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn m_total(&self) -> usize {
        self.x.len()
    }
}

/// Bridge sampling with `K` proposals and one unknown `Z`.
///
/// Iterates the stationarity condition of the `(K+1)`-class logistic cost,
/// `Z' = [(1/M) sum_x phi/D] / [(1/N) sum_y qbar/D]` with
/// `D = alpha1 phi + Z sum_j beta_j q_j` and `qbar = sum_j (M_j/M) q_j`.
/// For `K = 1` this is exactly [`optimal_bridge`](super::optimal_bridge).
pub fn multi_proposal_bridge(table: &MultiProposalTable, cfg: &FixedPointConfig) -> Result<EstimatorRun> {
    let (n, m) = (table.n, table.m_total());
    let ln_a1 = (n as f64 / (n + m) as f64).ln();
    let null = |r: &&[f64; 3]| r[0] == f64::NEG_INFINITY && r[1] == f64::NEG_INFINITY;
    let trace = iterate_fixed_point(cfg.z0, cfg.max_iters, cfg.rel_tol, |z| {
        let ln_z = z.ln();
        let mut num = NeumaierSum::new();
        for r in table.x.iter().filter(|r| !null(r)) {
            let ld = log_mix(ln_a1 + r[0], r[1], ln_z);
            num.add((r[0] - ld).exp());
        }
        let mut den = NeumaierSum::new();
        for r in table.y.iter().filter(|r| !null(r)) {
            let ld = log_mix(ln_a1 + r[0], r[1], ln_z);
            den.add((r[2] - ld).exp());
        }
        ratio(
            num.sum() / m as f64,
            den.sum() / n as f64,
            "bridge denominator vanished",
        )
    })?;
    Ok(trace.into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::optimal_bridge;
    use crate::model::{GaussianEnergy, GaussianProposal, SampleSet};
    use crate::table::LogTable;

    const Y: [f64; 3] = [0.3, -1.2, 0.8];
    const X: [f64; 5] = [1.7, -0.4, 2.9, -2.2, 0.1];

    #[test]
    fn single_proposal_reduces_exactly() {
        let model = GaussianEnergy::new(1);
        let q = GaussianProposal::new(0.0, 1.6);
        let cfg = FixedPointConfig::new(0.3, 50, Some(1e-13)).unwrap();
        let multi = MultiProposalTable::evaluate(1, &Y, &[&q], &[X.to_vec()], &model, &[0.9]).unwrap();
        let s = SampleSet::from_points(1, Y.to_vec(), X.to_vec()).unwrap();
        let single = LogTable::evaluate(&s, &model, &[0.9], &q).unwrap();
        assert_eq!(
            multi_proposal_bridge(&multi, &cfg).unwrap(),
            optimal_bridge(&single, &cfg).unwrap()
        );
    }

    #[test]
    fn identical_proposals_pool() {
        let model = GaussianEnergy::new(1);
        let q = GaussianProposal::new(0.0, 1.6);
        let cfg = FixedPointConfig::converge(1.0, 1e-14).unwrap();
        let multi = MultiProposalTable::evaluate(1, &Y, &[&q, &q], &[X[..2].to_vec(), X[2..].to_vec()], &model, &[0.9])
            .unwrap();
        assert_eq!(multi.counts(), &[2, 3]);
        let s = SampleSet::from_points(1, Y.to_vec(), X.to_vec()).unwrap();
        let single = LogTable::evaluate(&s, &model, &[0.9], &q).unwrap();
        let a = multi_proposal_bridge(&multi, &cfg).unwrap().z_hat;
        let b = optimal_bridge(&single, &cfg).unwrap().z_hat;
        assert!((a - b).abs() < 1e-12 * b);
    }

    #[test]
    fn two_gaussian_proposals_match_bisection() {
        let model = GaussianEnergy::new(1);
        let (q1, q3) = (GaussianProposal::new(0.0, 1.0), GaussianProposal::new(0.0, 3.0));
        let multi =
            MultiProposalTable::evaluate(1, &Y, &[&q1, &q3], &[X[..2].to_vec(), X[2..].to_vec()], &model, &[1.0])
                .unwrap();
        let r = multi_proposal_bridge(&multi, &FixedPointConfig::converge(1.0, 1e-14).unwrap()).unwrap();
        assert!((r.z_hat - TWO_PROPOSAL_ROOT).abs() < 1e-11, "{}", r.z_hat);
    }

    // Maximizer in Z of the (K+1)-class logistic likelihood, high-precision root.
    const TWO_PROPOSAL_ROOT: f64 = 2.554257642083621;

    #[test]
    fn rejects_empty_groups() {
        let model = GaussianEnergy::new(1);
        let q = GaussianProposal::new(0.0, 1.0);
        assert!(MultiProposalTable::evaluate(1, &Y, &[&q, &q], &[X.to_vec(), vec![]], &model, &[1.0]).is_err());
        assert!(MultiProposalTable::evaluate(1, &Y, &[], &[], &model, &[1.0]).is_err());
    }
}
