//! Browser bindings for three small experiments on the Gaussian model
//! `exp(-y^2 / 2)` with a zero-mean Gaussian proposal. Every function
//! returns a JSON string.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use zbridge::costs::{j_mis, j_nce, j_scoring, ScoringRule};
use zbridge::estimators::{
    geometric_mean_estimator, mis_estimator, optimal_bridge, quadratic_score_iteration, reverse_is, self_is_with_mix,
    standard_is,
};
use zbridge::experiment::{run_z_sweep, ExperimentSpec, Scenario};
use zbridge::model::{draw_sample_set, GaussianEnergy, GaussianProposal};
use zbridge::{EstimatorId, FixedPointConfig, LogTable, Result};

const THETA: f64 = 1.0;

fn table(n: usize, m: usize, sigma_p: f64, seed: u64) -> Result<LogTable> {
    let model = GaussianEnergy::new(1);
    let q = GaussianProposal::new(0.0, sigma_p);
    let s = draw_sample_set(&model, &[THETA], &q, n, m, seed)?;
    LogTable::evaluate(&s, &model, &[THETA], &q)
}

fn to_js(v: Result<Value>) -> std::result::Result<String, JsError> {
    v.map(|v| v.to_string()).map_err(|e| JsError::new(&e.to_string()))
}

fn estimates(n: usize, m: usize, sigma_p: f64, seed: u64, z0: f64, iters: usize) -> Result<Value> {
    let t = table(n, m, sigma_p, seed)?;
    let cfg = FixedPointConfig::fixed_steps(z0, iters)?;
    let recursive = [
        (EstimatorId::OptBridge, optimal_bridge(&t, &cfg)),
        (EstimatorId::Mis, mis_estimator(&t, &cfg)),
        (EstimatorId::SelfIsMix, self_is_with_mix(&t, &cfg)),
        (EstimatorId::QuadScore, quadratic_score_iteration(&t, &cfg)),
    ];
    let mut out = Vec::new();
    for (id, run) in recursive {
        out.push(match run {
            Ok(r) => json!({"name": id.name(), "z_hat": r.z_hat, "trace": r.trace}),
            Err(e) => json!({"name": id.name(), "error": e.to_string()}),
        });
    }
    let closed = [
        (EstimatorId::StandIs, standard_is(&t)),
        (EstimatorId::Ris, reverse_is(&t)),
        (EstimatorId::Geo, geometric_mean_estimator(&t).map(|g| g.z_geo)),
    ];
    for (id, z) in closed {
        out.push(match z {
            Ok(z) => json!({"name": id.name(), "z_hat": z, "trace": [z]}),
            Err(e) => json!({"name": id.name(), "error": e.to_string()}),
        });
    }
    Ok(json!({"z_true": GaussianEnergy::z_of(THETA), "estimates": out}))
}

/// Runs the table-based estimators on one sample set for `iters` steps
/// from `z0`, returning estimates and iterate traces.
#[wasm_bindgen]
pub fn estimate_z(
    n: usize,
    m: usize,
    sigma_p: f64,
    seed: u64,
    z0: f64,
    iters: usize,
) -> std::result::Result<String, JsError> {
    to_js(estimates(n, m, sigma_p, seed, z0, iters))
}

fn curves(n: usize, m: usize, sigma_p: f64, seed: u64, points: usize) -> Result<Value> {
    let t = table(n, m, sigma_p, seed)?;
    let z_true = GaussianEnergy::z_of(THETA);
    let points = points.clamp(3, 2000);
    let zs: Vec<f64> = (0..points)
        .map(|i| z_true * (-3.0 + 6.0 * i as f64 / (points - 1) as f64).exp())
        .collect();
    let quad = ScoringRule::quadratic();
    let mut nce = Vec::with_capacity(points);
    let mut mis = Vec::with_capacity(points);
    let mut quadratic = Vec::with_capacity(points);
    for &z in &zs {
        nce.push(j_nce(&t, z)?.value);
        mis.push(j_mis(&t, z)?.value);
        quadratic.push(j_scoring(&quad, &t, z)?.value);
    }
    let bridge = optimal_bridge(&t, &FixedPointConfig::converge(1.0, 1e-13)?)?.z_hat;
    Ok(json!({"z": zs, "nce": nce, "mis": mis, "quadratic": quadratic, "z_true": z_true, "bridge": bridge}))
}

/// NCE, MIS and quadratic-score costs on a log grid of `Z` around the
/// truth, with the optimal-bridge estimate for the same samples.
#[wasm_bindgen]
pub fn cost_curves(n: usize, m: usize, sigma_p: f64, seed: u64, points: usize) -> std::result::Result<String, JsError> {
    to_js(curves(n, m, sigma_p, seed, points))
}

fn sweep(n: usize, m: usize, replications: usize, scenario: &str, seed: u64) -> Result<Value> {
    let scenario: Scenario = scenario.parse()?;
    let spec = ExperimentSpec {
        splits: vec![(n, m)],
        replications: replications.clamp(1, 5000),
        scenario,
        root_seed: seed,
        workers: 1,
        methods: ["opt-bridge", "mis", "self-is-mix", "ris", "stand-is", "geo"]
            .map(String::from)
            .to_vec(),
        ..ExperimentSpec::z_sweep_default()
    };
    let rows: Vec<Value> = run_z_sweep(&spec)?
        .into_iter()
        .map(|r| json!({"method": r.method, "sigma_p": r.sigma_p, "mse": r.mse, "mse_se": r.mse_se, "failures": r.failures}))
        .collect();
    Ok(json!({"rows": rows}))
}

/// MSE against `sigma_p` for one `(N, M)` split and scenario, on the
/// default twelve-point grid.
#[wasm_bindgen]
pub fn mse_sweep(
    n: usize,
    m: usize,
    replications: usize,
    scenario: &str,
    seed: u64,
) -> std::result::Result<String, JsError> {
    to_js(sweep(n, m, replications, scenario, seed))
}
