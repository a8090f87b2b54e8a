use rand::Rng;

use super::spec::ExperimentSpec;
use super::sweep::run_z_trials;
use crate::costs::{argmin_z, j_mis, j_nce, j_scoring, ScoringRule};
use crate::error::Result;
use crate::estimators::{
    geometric_mean_estimator, mis_estimator, multi_proposal_bridge, optimal_bridge, quadratic_score_iteration,
    reverse_is, self_is_with_mix, standard_is, FixedPointConfig, MultiProposalTable,
};
use crate::model::seed::{rng_for, sub_seed};
use crate::model::{draw_sample_set, GaussianEnergy, GaussianProposal, ProportionalModel, SampleSet};
use crate::solvers::Bracket1D;
use crate::table::LogTable;

/// A random Gaussian test case: `theta_tr = 1`, `q = N(0, sigma_p^2)`.
#[derive(Debug, Clone)]
pub struct Instance {
    pub sigma_p: f64,
    pub samples: SampleSet,
    pub table: LogTable,
}

impl Instance {
    pub fn proposal(&self) -> GaussianProposal {
        GaussianProposal::new(0.0, self.sigma_p)
    }
}

/// Draws `N, M` uniformly in `[1, max_count]` and `sigma_p` log-uniformly in
/// `[0.3, 5]`.
pub fn random_instance(seed: u64, max_count: usize) -> Result<Instance> {
    let mut rng = rng_for(seed, 3);
    let n = rng.random_range(1..=max_count);
    let m = rng.random_range(1..=max_count);
    let sigma_p = rng.random_range(0.3f64.ln()..5f64.ln()).exp();
    let model = GaussianEnergy::new(1);
    let q = GaussianProposal::new(0.0, sigma_p);
    let samples = draw_sample_set(&model, &[1.0], &q, n, m, seed)?;
    let table = LogTable::evaluate(&samples, &model, &[1.0], &q)?;
    Ok(Instance {
        sigma_p,
        samples,
        table,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> Check {
    match f() {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Fast invariant checks, run by the `selftest` subcommand.
pub fn run_selftest() -> Vec<Check> {
    let cfg = FixedPointConfig::converge(1.0, 1e-13).expect("valid config");
    let mut out = Vec::new();

    out.push(check("proportional densities give Z = c", || {
        let mut worst = 0.0f64;
        for c in [0.1, 1.0, (2.0 * std::f64::consts::PI).sqrt(), 100.0] {
            let q = GaussianProposal::new(0.0, 1.5);
            let model = ProportionalModel::new(q, c);
            let s = draw_sample_set(&model, &[], &q, 7, 9, 11)?;
            let t = LogTable::evaluate(&s, &model, &[], &q)?;
            let mt =
                MultiProposalTable::evaluate(1, s.model_buffer(), &[&q], &[s.proposal_buffer().to_vec()], &model, &[])?;
            for z in [
                optimal_bridge(&t, &cfg)?.z_hat,
                mis_estimator(&t, &cfg)?.z_hat,
                self_is_with_mix(&t, &cfg)?.z_hat,
                quadratic_score_iteration(&t, &cfg)?.z_hat,
                multi_proposal_bridge(&mt, &cfg)?.z_hat,
                standard_is(&t)?,
                reverse_is(&t)?,
                geometric_mean_estimator(&t)?.z_geo,
            ] {
                worst = worst.max(rel(z, c));
            }
        }
        Ok((worst < 1e-12, format!("max rel error {worst:e}")))
    }));

    out.push(check("NCE argmin equals the optimal bridge", || {
        let mut worst = 0.0f64;
        for i in 0..10 {
            let inst = random_instance(sub_seed(7, &[i]), 50)?;
            let bridge = optimal_bridge(&inst.table, &cfg)?.z_hat;
            let nce = argmin_z(|z| j_nce(&inst.table, z), &Bracket1D::default_log_z(), 1e-10)?.argmin;
            worst = worst.max(rel(nce, bridge));
        }
        Ok((worst < 1e-6, format!("max rel difference {worst:e}")))
    }));

    out.push(check("single-proposal multi bridge is the optimal bridge", || {
        let mut same = true;
        for i in 0..5 {
            let inst = random_instance(sub_seed(8, &[i]), 30)?;
            let q = inst.proposal();
            let mt = MultiProposalTable::evaluate(
                1,
                inst.samples.model_buffer(),
                &[&q],
                &[inst.samples.proposal_buffer().to_vec()],
                &GaussianEnergy::new(1),
                &[1.0],
            )?;
            let steps = FixedPointConfig::fixed_steps(0.3, 10)?;
            same &= multi_proposal_bridge(&mt, &steps)?.trace == optimal_bridge(&inst.table, &steps)?.trace;
        }
        Ok((same, "bitwise trace comparison".into()))
    }));

    out.push(check("analytic dJ/dZ matches central differences", || {
        let mut worst = 0.0f64;
        let quad = ScoringRule::quadratic();
        for i in 0..3 {
            let inst = random_instance(sub_seed(9, &[i]), 20)?;
            let t = &inst.table;
            let z = 0.5 + i as f64;
            let h = 1e-5 * z;
            let costs: [&dyn Fn(f64) -> Result<crate::costs::CostEvaluation>; 3] =
                [&|z| j_nce(t, z), &|z| j_mis(t, z), &|z| j_scoring(&quad, t, z)];
            for f in costs {
                let fd = (f(z + h)?.value - f(z - h)?.value) / (2.0 * h);
                worst = worst.max(rel(fd, f(z)?.dz).min((fd - f(z)?.dz).abs()));
            }
        }
        Ok((worst < 1e-6, format!("max rel deviation {worst:e}")))
    }));

    out.push(check("sweeps do not depend on the worker count", || {
        let mut spec = ExperimentSpec {
            sigma_grid: vec![0.6, 2.0],
            splits: vec![(4, 4)],
            replications: 16,
            workers: 1,
            ..ExperimentSpec::z_sweep_default()
        };
        let a = run_z_trials(&spec)?;
        spec.workers = 4;
        let b = run_z_trials(&spec)?;
        Ok((a.cells == b.cells, format!("{} cells", a.cells.len())))
    }));

    out
}
