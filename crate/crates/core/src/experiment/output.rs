use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::json;

use super::spec::{ExperimentSpec, Scenario, SweepKind};
use super::sweep::SweepRow;
use crate::error::{Error, Result};
use crate::estimators::DEFAULT_REL_TOL;
use crate::solvers::{Bracket1D, DEFAULT_TOL};

pub const CSV_HEADER: [&str; 11] = [
    "estimator",
    "sigma_p",
    "N",
    "M",
    "scenario",
    "R",
    "mse",
    "bias",
    "variance",
    "mean_iters",
    "failures",
];

/// Path of the metadata file written next to `csv`: `<csv>.meta.json`.
pub fn metadata_path(csv: &Path) -> PathBuf {
    let mut s = csv.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::Io(e.to_string())
}

/// Writes the rows as CSV, sorted by `(estimator, N, M, sigma_p)`, floats in
/// shortest round-trip form.
pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::Precondition("refusing to write an empty result table".into()));
    }
    let mut sorted: Vec<&SweepRow> = rows.iter().collect();
    sorted.sort_by(|a, b| {
        (a.method.as_str(), a.n, a.m)
            .cmp(&(b.method.as_str(), b.n, b.m))
            .then(a.sigma_p.total_cmp(&b.sigma_p))
    });
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(io_err)?;
    for r in sorted {
        w.write_record([
            r.method.clone(),
            r.sigma_p.to_string(),
            r.n.to_string(),
            r.m.to_string(),
            r.scenario.clone(),
            r.replications.to_string(),
            r.mse.to_string(),
            r.bias.to_string(),
            r.variance.to_string(),
            r.mean_iters.to_string(),
            r.failures.to_string(),
        ])
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// Run metadata as JSON. Contains no timestamps, so reruns are byte-identical.
pub fn metadata(spec: &ExperimentSpec) -> serde_json::Value {
    let scenarios: serde_json::Map<String, serde_json::Value> = Scenario::ALL
        .iter()
        .map(|s| {
            let (z0, t) = s.start(spec.z_true());
            (s.name().to_string(), json!({"z0": z0, "iters": t}))
        })
        .collect();
    let (z0, iters) = spec.start();
    let bracket = Bracket1D::default_theta();
    let mut v = json!({
        "crate_version": env!("CARGO_PKG_VERSION"),
        "kind": spec.kind,
        "model": "phi(y; theta) = exp(-y^2 / (2 theta^2)), Z(theta) = sqrt(2 pi) theta",
        "proposal": "N(0, sigma_p^2)",
        "theta_true": spec.theta_true,
        "z_true": spec.z_true(),
        "sigma_grid": spec.sigma_grid,
        "splits": spec.splits,
        "methods": spec.methods,
        "replications": spec.replications,
        "root_seed": spec.root_seed,
        "workers": spec.workers,
        "seeding": "trial seed = sub_seed(root_seed, [split_index, trial]); model draws on stream 0, proposal noise on stream 1, umbrella draws on stream 2 of sub_seed(trial_seed, [sigma_index]); proposal samples are sigma_p times shared N(0,1) noise",
    });
    let extra = match spec.kind {
        SweepKind::ZSweep => json!({
            "scenario": spec.scenario,
            "z0": z0,
            "iters": iters,
            "scenario_mapping": scenarios,
            "umbrella": "samples from |phi/Z_ref - q| with Z_ref = z_true, N + M points",
            "multi_bridge": "K = 2: ceil(M/2) points from N(0, sigma_p^2), the rest from N(0, (2 sigma_p)^2); K = 1 when M = 1",
            "closed_form": "stand-is, ris and geo use no iterations",
        }),
        SweepKind::ThetaSweep => json!({
            "z_fixed": spec.z_true(),
            "solver": {
                "method": "grid scan then golden section",
                "bracket": [bracket.lo(), bracket.hi()],
                "grid_points": bracket.grid_points(),
                "tol": DEFAULT_TOL,
            },
            "mean_iters": "objective evaluations of the 1-D solver",
            "ml": "uses the analytic Z(theta) and only the model samples",
        }),
    };
    if let (Some(a), Some(b)) = (v.as_object_mut(), extra.as_object()) {
        a.extend(b.clone());
        a.insert("fixed_point_rel_tol_default".into(), json!(DEFAULT_REL_TOL));
    }
    v
}

/// Writes `rows` to `path` and the metadata to `<path>.meta.json`.
pub fn emit_csv(rows: &[SweepRow], path: &Path, spec: &ExperimentSpec) -> Result<()> {
    let file = File::create(path)?;
    write_csv(rows, BufWriter::new(file))?;
    let meta = serde_json::to_string_pretty(&metadata(spec)).map_err(io_err)?;
    std::fs::write(metadata_path(path), meta + "\n")?;
    Ok(())
}
