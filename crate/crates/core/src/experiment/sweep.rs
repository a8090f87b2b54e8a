use super::spec::{CostId, ExperimentSpec, SweepKind};
use super::stats::{moments, TrialOutcome};
use crate::costs::{j_mis, j_ml, j_scoring, ScoringRule};
use crate::error::{Error, Result};
use crate::estimators::{
    geometric_mean_estimator, mis_estimator, multi_proposal_bridge, optimal_bridge, optimal_umbrella_points,
    quadratic_score_iteration, reverse_is, self_is_with_mix, standard_is, EstimatorId, FixedPointConfig,
    MultiProposalTable,
};
use crate::model::seed::{rng_for, sub_seed};
use crate::model::{sample_umbrella, GaussianEnergy, GaussianProposal, Proposal, SampleSet, UnnormalizedModel};
use crate::solvers::{minimize_1d, Bracket1D, DEFAULT_TOL};
use crate::table::LogTable;

/// Raw trials of one `(method, sigma_p, N, M)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellTrials {
    pub method: String,
    pub sigma_p: f64,
    pub n: usize,
    pub m: usize,
    pub outcomes: Vec<TrialOutcome>,
}

/// One aggregated output row.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub method: String,
    pub sigma_p: f64,
    pub n: usize,
    pub m: usize,
    pub scenario: String,
    pub replications: usize,
    pub mse: f64,
    pub bias: f64,
    pub variance: f64,
    pub mean_iters: f64,
    pub failures: usize,
    /// Monte Carlo standard error of `mse` (not written to the CSV).
    pub mse_se: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub spec: ExperimentSpec,
    /// The quantity being estimated: `Z_tr` or `theta_tr`.
    pub truth: f64,
    pub cells: Vec<CellTrials>,
}

impl SweepResult {
    pub fn cell(&self, method: &str, sigma_p: f64, n: usize, m: usize) -> Option<&CellTrials> {
        self.cells
            .iter()
            .find(|c| c.method == method && c.sigma_p == sigma_p && c.n == n && c.m == m)
    }

    /// Rows sorted by `(method, N, M, sigma_p)`.
    pub fn rows(&self) -> Vec<SweepRow> {
        let scenario = match self.spec.kind {
            SweepKind::ZSweep => self.spec.scenario.name(),
            SweepKind::ThetaSweep => "none",
        };
        let mut rows: Vec<SweepRow> = self
            .cells
            .iter()
            .map(|c| {
                let mo = moments(&c.outcomes, self.truth);
                SweepRow {
                    method: c.method.clone(),
                    sigma_p: c.sigma_p,
                    n: c.n,
                    m: c.m,
                    scenario: scenario.to_string(),
                    replications: c.outcomes.len(),
                    mse: mo.mse,
                    bias: mo.bias,
                    variance: mo.variance,
                    mean_iters: mo.mean_iters,
                    failures: mo.failures,
                    mse_se: mo.mse_se,
                }
            })
            .collect();
        rows.sort_by(|a, b| {
            (a.method.as_str(), a.n, a.m)
                .cmp(&(b.method.as_str(), b.n, b.m))
                .then(a.sigma_p.total_cmp(&b.sigma_p))
        });
        rows
    }
}

/// Maps `f` over `0..count` on `workers` threads (0: runtime default),
/// returning results in index order.
fn par_map<T, F>(count: usize, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Io(format!("thread pool: {e}")))?;
        Ok(pool.install(|| (0..count).into_par_iter().map(f).collect()))
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = workers;
        Ok((0..count).map(f).collect())
    }
}

/// Seed of trial `trial` in split `split`. It does not depend on `sigma_p`
/// or on the method, so all cells of a split see the same draws.
pub fn trial_seed(root: u64, split: usize, trial: usize) -> u64 {
    sub_seed(root, &[split as u64, trial as u64])
}

/// Model draws and standard-normal proposal noise of one trial.
fn base_draws(model: &GaussianEnergy, theta: &[f64], n: usize, m: usize, seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    let ys = model.sample(theta, n, &mut rng_for(seed, 0))?;
    let xi = GaussianProposal::new(0.0, 1.0).sample(m, &mut rng_for(seed, 1));
    Ok((ys, xi))
}

struct ZContext<'a> {
    model: GaussianEnergy,
    theta: [f64; 1],
    z_true: f64,
    cfg: FixedPointConfig,
    estimators: &'a [EstimatorId],
}

impl ZContext<'_> {
    fn run(
        &self,
        id: EstimatorId,
        table: &LogTable,
        ys: &[f64],
        xs: &[f64],
        sigma: f64,
        seed: u64,
    ) -> Result<TrialOutcome> {
        let run = |r: crate::estimators::EstimatorRun| TrialOutcome::ok(r.z_hat, r.iters_used);
        Ok(match id {
            EstimatorId::OptBridge => run(optimal_bridge(table, &self.cfg)?),
            EstimatorId::Mis => run(mis_estimator(table, &self.cfg)?),
            EstimatorId::SelfIsMix => run(self_is_with_mix(table, &self.cfg)?),
            EstimatorId::QuadScore => run(quadratic_score_iteration(table, &self.cfg)?),
            EstimatorId::Geo => TrialOutcome::ok(geometric_mean_estimator(table)?.z_geo, 0),
            EstimatorId::StandIs => TrialOutcome::ok(standard_is(table)?, 0),
            EstimatorId::Ris => TrialOutcome::ok(reverse_is(table)?, 0),
            EstimatorId::OptUmbrella => {
                let q = GaussianProposal::new(0.0, sigma);
                let count = ys.len() + xs.len();
                let pts = sample_umbrella(&self.model, &self.theta, self.z_true, &q, count, seed)?;
                run(optimal_umbrella_points(
                    &pts,
                    1,
                    &self.model,
                    &self.theta,
                    &q,
                    &self.cfg,
                )?)
            }
            EstimatorId::MultiBridge => {
                let (q1, q2) = (
                    GaussianProposal::new(0.0, sigma),
                    GaussianProposal::new(0.0, 2.0 * sigma),
                );
                let m1 = xs.len().div_ceil(2);
                let table = if m1 == xs.len() {
                    MultiProposalTable::evaluate(1, ys, &[&q1], &[xs.to_vec()], &self.model, &self.theta)?
                } else {
                    // The second group is drawn from the wider proposal.
                    let wide: Vec<f64> = xs[m1..].iter().map(|x| 2.0 * x).collect();
                    MultiProposalTable::evaluate(
                        1,
                        ys,
                        &[&q1, &q2],
                        &[xs[..m1].to_vec(), wide],
                        &self.model,
                        &self.theta,
                    )?
                };
                run(multi_proposal_bridge(&table, &self.cfg)?)
            }
        })
    }

    /// Outcomes of one trial, indexed `[sigma][estimator]`.
    fn trial(&self, n: usize, m: usize, sigmas: &[f64], seed: u64) -> Vec<Vec<TrialOutcome>> {
        let failed = || vec![vec![TrialOutcome::failed(); self.estimators.len()]; sigmas.len()];
        let Ok((ys, xi)) = base_draws(&self.model, &self.theta, n, m, seed) else {
            return failed();
        };
        sigmas
            .iter()
            .enumerate()
            .map(|(si, &sigma)| {
                let xs: Vec<f64> = xi.iter().map(|x| sigma * x).collect();
                let q = GaussianProposal::new(0.0, sigma);
                let table = SampleSet::from_points(1, ys.clone(), xs.clone())
                    .and_then(|s| LogTable::evaluate(&s, &self.model, &self.theta, &q));
                let Ok(table) = table else {
                    return vec![TrialOutcome::failed(); self.estimators.len()];
                };
                let umbrella_seed = sub_seed(seed, &[si as u64]);
                self.estimators
                    .iter()
                    .map(|&id| {
                        self.run(id, &table, &ys, &xs, sigma, umbrella_seed)
                            .unwrap_or_else(|_| TrialOutcome::failed())
                    })
                    .collect()
            })
            .collect()
    }
}

/// Regroups per-trial outcomes `[trial][sigma][method]` into cells.
fn collect_cells(
    per_trial: Vec<Vec<Vec<TrialOutcome>>>,
    methods: &[String],
    sigmas: &[f64],
    (n, m): (usize, usize),
    cells: &mut Vec<CellTrials>,
) {
    for (mi, method) in methods.iter().enumerate() {
        for (si, &sigma_p) in sigmas.iter().enumerate() {
            cells.push(CellTrials {
                method: method.clone(),
                sigma_p,
                n,
                m,
                outcomes: per_trial.iter().map(|t| t[si][mi]).collect(),
            });
        }
    }
}

/// Runs a z-sweep and keeps every trial outcome.
pub fn run_z_trials(spec: &ExperimentSpec) -> Result<SweepResult> {
    if spec.kind != SweepKind::ZSweep {
        return Err(Error::Usage("not a z-sweep spec".into()));
    }
    spec.validate()?;
    let estimators = spec.estimators()?;
    let (z0, steps) = spec.start();
    let ctx = ZContext {
        model: GaussianEnergy::new(1),
        theta: [spec.theta_true],
        z_true: spec.z_true(),
        cfg: FixedPointConfig::fixed_steps(z0, steps)?,
        estimators: &estimators,
    };
    let methods: Vec<String> = estimators.iter().map(|e| e.name().to_string()).collect();
    let mut cells = Vec::new();
    for (split, &(n, m)) in spec.splits.iter().enumerate() {
        let per_trial = par_map(spec.replications, spec.workers, |trial| {
            ctx.trial(n, m, &spec.sigma_grid, trial_seed(spec.root_seed, split, trial))
        })?;
        collect_cells(per_trial, &methods, &spec.sigma_grid, (n, m), &mut cells);
    }
    Ok(SweepResult {
        spec: spec.clone(),
        truth: ctx.z_true,
        cells,
    })
}

/// Aggregated z-sweep.
pub fn run_z_sweep(spec: &ExperimentSpec) -> Result<Vec<SweepRow>> {
    Ok(run_z_trials(spec)?.rows())
}

struct ThetaContext<'a> {
    model: GaussianEnergy,
    theta_true: f64,
    z_true: f64,
    costs: &'a [CostId],
    bracket: Bracket1D,
}

impl ThetaContext<'_> {
    fn minimize<F: FnMut(f64) -> f64>(&self, f: F) -> TrialOutcome {
        match minimize_1d(f, &self.bracket, DEFAULT_TOL) {
            Ok(r) => TrialOutcome::ok(r.argmin, r.evaluations),
            Err(_) => TrialOutcome::failed(),
        }
    }

    fn fit(&self, cost: CostId, table: &mut LogTable) -> TrialOutcome {
        let rule = match cost {
            CostId::NceLog => Some(ScoringRule::negative_log()),
            CostId::Quad => Some(ScoringRule::quadratic()),
            CostId::Reciprocal => Some(ScoringRule::reciprocal()),
            CostId::Mis | CostId::Ml => None,
        };
        let model = self.model;
        let z = self.z_true;
        self.minimize(|theta| {
            if table.refresh_model(&model, &[theta]).is_err() {
                return f64::INFINITY;
            }
            let c = match &rule {
                Some(rule) => j_scoring(rule, table, z),
                None => j_mis(table, z),
            };
            c.map(|c| c.value).unwrap_or(f64::INFINITY)
        })
    }

    fn trial(&self, n: usize, m: usize, sigmas: &[f64], seed: u64) -> Vec<Vec<TrialOutcome>> {
        let failed = || vec![vec![TrialOutcome::failed(); self.costs.len()]; sigmas.len()];
        let Ok((ys, xi)) = base_draws(&self.model, &[self.theta_true], n, m, seed) else {
            return failed();
        };
        // ML ignores the proposal: one fit per trial, shared by every sigma.
        let ml = self
            .costs
            .contains(&CostId::Ml)
            .then(|| match SampleSet::from_points(1, ys.clone(), vec![0.0]) {
                Ok(s) => self.minimize(|theta| j_ml(&self.model, &[theta], &s).unwrap_or(f64::INFINITY)),
                Err(_) => TrialOutcome::failed(),
            });
        sigmas
            .iter()
            .map(|&sigma| {
                let xs: Vec<f64> = xi.iter().map(|x| sigma * x).collect();
                let q = GaussianProposal::new(0.0, sigma);
                let table = SampleSet::from_points(1, ys.clone(), xs)
                    .and_then(|s| LogTable::evaluate(&s, &self.model, &[self.theta_true], &q));
                let mut table = table.ok();
                self.costs
                    .iter()
                    .map(|&c| match (c, table.as_mut()) {
                        (CostId::Ml, _) => ml.expect("ml requested"),
                        (_, Some(t)) => self.fit(c, t),
                        (_, None) => TrialOutcome::failed(),
                    })
                    .collect()
            })
            .collect()
    }
}

/// Runs a theta-sweep and keeps every trial outcome.
pub fn run_theta_trials(spec: &ExperimentSpec) -> Result<SweepResult> {
    if spec.kind != SweepKind::ThetaSweep {
        return Err(Error::Usage("not a theta-sweep spec".into()));
    }
    spec.validate()?;
    let costs = spec.costs()?;
    let ctx = ThetaContext {
        model: GaussianEnergy::new(1),
        theta_true: spec.theta_true,
        z_true: spec.z_true(),
        costs: &costs,
        bracket: Bracket1D::default_theta(),
    };
    let methods: Vec<String> = costs.iter().map(|c| c.name().to_string()).collect();
    let mut cells = Vec::new();
    for (split, &(n, m)) in spec.splits.iter().enumerate() {
        let per_trial = par_map(spec.replications, spec.workers, |trial| {
            ctx.trial(n, m, &spec.sigma_grid, trial_seed(spec.root_seed, split, trial))
        })?;
        collect_cells(per_trial, &methods, &spec.sigma_grid, (n, m), &mut cells);
    }
    Ok(SweepResult {
        spec: spec.clone(),
        truth: spec.theta_true,
        cells,
    })
}

/// Aggregated theta-sweep.
pub fn run_theta_sweep(spec: &ExperimentSpec) -> Result<Vec<SweepRow>> {
    Ok(run_theta_trials(spec)?.rows())
}
