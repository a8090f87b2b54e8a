use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::EstimatorId;
use crate::model::GaussianEnergy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    ZSweep,
    ThetaSweep,
}

/// Initialization of the recursive estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Ideal,
    AlmostIdeal,
    RealisticLow,
    RealisticHigh,
}

/// Relative offset of the almost-ideal starting point.
pub const ALMOST_IDEAL_FACTOR: f64 = 1.001;

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::Ideal,
        Scenario::AlmostIdeal,
        Scenario::RealisticLow,
        Scenario::RealisticHigh,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Ideal => "ideal",
            Scenario::AlmostIdeal => "almost-ideal",
            Scenario::RealisticLow => "realistic-low",
            Scenario::RealisticHigh => "realistic-high",
        }
    }

    /// `(Z0, T)` given the true `Z`.
    pub fn start(self, z_true: f64) -> (f64, usize) {
        match self {
            Scenario::Ideal => (z_true, 1),
            Scenario::AlmostIdeal => (z_true * ALMOST_IDEAL_FACTOR, 10),
            Scenario::RealisticLow => (0.1, 10),
            Scenario::RealisticHigh => (5.0, 10),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown scenario {s:?}")))
    }
}

/// Cost functions minimized over `theta` in a theta-sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CostId {
    NceLog,
    Quad,
    Reciprocal,
    Mis,
    Ml,
}

impl CostId {
    pub const ALL: [CostId; 5] = [
        CostId::NceLog,
        CostId::Quad,
        CostId::Reciprocal,
        CostId::Mis,
        CostId::Ml,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CostId::NceLog => "nce-log",
            CostId::Quad => "quad",
            CostId::Reciprocal => "reciprocal",
            CostId::Mis => "mis",
            CostId::Ml => "ml",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            CostId::NceLog => "NCE cost, V(eta) = -log eta",
            CostId::Quad => "scoring rule V(eta) = (1 - eta)^2",
            CostId::Reciprocal => "scoring rule V(eta) = 1/eta",
            CostId::Mis => "MIS cost over the pooled samples",
            CostId::Ml => "maximum likelihood with the analytic Z (ignores the proposal)",
        }
    }
}

impl fmt::Display for CostId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CostId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CostId::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown cost {s:?}")))
    }
}

/// `points` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| {
            if i + 1 == points {
                hi
            } else {
                (a + (b - a) * i as f64 / (points - 1) as f64).exp()
            }
        })
        .collect()
}

pub fn default_sigma_grid() -> Vec<f64> {
    log_grid(0.3, 5.0, 12)
}

/// Configuration of a Monte Carlo sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub kind: SweepKind,
    pub sigma_grid: Vec<f64>,
    /// `(N, M)` pairs.
    pub splits: Vec<(usize, usize)>,
    /// z-sweeps only.
    pub scenario: Scenario,
    /// Estimator ids (z-sweep) or cost ids (theta-sweep).
    pub methods: Vec<String>,
    pub replications: usize,
    /// Overrides the scenario's iteration budget when set.
    pub iters: Option<usize>,
    pub root_seed: u64,
    /// Worker threads; 0 lets the runtime decide.
    pub workers: usize,
    pub theta_true: f64,
}

impl ExperimentSpec {
    pub fn z_sweep_default() -> Self {
        Self {
            kind: SweepKind::ZSweep,
            sigma_grid: default_sigma_grid(),
            splits: vec![(20, 20), (5, 35), (35, 5)],
            scenario: Scenario::Ideal,
            methods: EstimatorId::ALL.iter().map(|e| e.name().to_string()).collect(),
            replications: 10_000,
            iters: None,
            root_seed: 1,
            workers: 0,
            theta_true: 1.0,
        }
    }

    pub fn theta_sweep_default() -> Self {
        Self {
            kind: SweepKind::ThetaSweep,
            sigma_grid: default_sigma_grid(),
            splits: vec![(5, 5), (5, 15), (1, 20), (1, 100)],
            scenario: Scenario::Ideal,
            methods: CostId::ALL.iter().map(|c| c.name().to_string()).collect(),
            replications: 2000,
            iters: None,
            root_seed: 1,
            workers: 0,
            theta_true: 1.0,
        }
    }

    pub fn z_true(&self) -> f64 {
        GaussianEnergy::z_of(self.theta_true)
    }

    /// `(Z0, T)` of the recursive estimators.
    pub fn start(&self) -> (f64, usize) {
        let (z0, t) = self.scenario.start(self.z_true());
        (z0, self.iters.unwrap_or(t))
    }

    pub fn estimators(&self) -> Result<Vec<EstimatorId>> {
        self.methods.iter().map(|m| m.parse()).collect()
    }

    pub fn costs(&self) -> Result<Vec<CostId>> {
        self.methods.iter().map(|m| m.parse()).collect()
    }

    /// Checks everything that can be checked before any computation.
    pub fn validate(&self) -> Result<()> {
        let usage = |msg: String| Err(Error::Usage(msg));
        if self.sigma_grid.is_empty() || self.splits.is_empty() || self.methods.is_empty() {
            return usage("sigma grid, splits and methods must be nonempty".into());
        }
        if let Some(s) = self.sigma_grid.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
            return usage(format!("sigma_p must be positive, got {s}"));
        }
        if let Some(&(n, m)) = self.splits.iter().find(|(n, m)| *n == 0 || *m == 0) {
            return usage(format!("split ({n}, {m}) needs N, M >= 1"));
        }
        if self.replications == 0 {
            return usage("replications must be at least 1".into());
        }
        if self.iters == Some(0) {
            return usage("iters must be at least 1".into());
        }
        if !(self.theta_true > 0.0 && self.theta_true.is_finite()) {
            return usage(format!("theta_true must be positive, got {}", self.theta_true));
        }
        match self.kind {
            SweepKind::ZSweep => self.estimators().map(|_| ()),
            SweepKind::ThetaSweep => self.costs().map(|_| ()),
        }
    }

    /// Applies the keys of a flat JSON object on top of `self`.
    pub fn apply_json(mut self, text: &str) -> Result<Self> {
        let file: FileConfig = serde_json::from_str(text).map_err(|e| Error::Usage(format!("config: {e}")))?;
        if let Some(kind) = file.kind {
            if kind != self.kind {
                return Err(Error::Usage("config kind does not match the subcommand".into()));
            }
        }
        if let Some(g) = file.sigma_grid {
            self.sigma_grid = g;
        } else if file.sigma_min.is_some() || file.sigma_max.is_some() || file.sigma_points.is_some() {
            self.sigma_grid = log_grid(
                file.sigma_min.unwrap_or(0.3),
                file.sigma_max.unwrap_or(5.0),
                file.sigma_points.unwrap_or(12).max(1),
            );
        }
        if let Some(s) = file.splits {
            self.splits = s.into_iter().map(|[n, m]| (n, m)).collect();
        }
        if let Some(s) = file.scenario {
            self.scenario = s;
        }
        if let Some(m) = file.estimators.or(file.costs) {
            self.methods = m;
        }
        if let Some(r) = file.replications {
            self.replications = r;
        }
        if file.iters.is_some() {
            self.iters = file.iters;
        }
        if let Some(s) = file.root_seed {
            self.root_seed = s;
        }
        if let Some(w) = file.workers {
            self.workers = w;
        }
        if let Some(t) = file.theta_true {
            self.theta_true = t;
        }
        Ok(self)
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    kind: Option<SweepKind>,
    sigma_grid: Option<Vec<f64>>,
    sigma_min: Option<f64>,
    sigma_max: Option<f64>,
    sigma_points: Option<usize>,
    splits: Option<Vec<[usize; 2]>>,
    scenario: Option<Scenario>,
    estimators: Option<Vec<String>>,
    costs: Option<Vec<String>>,
    replications: Option<usize>,
    iters: Option<usize>,
    root_seed: Option<u64>,
    workers: Option<usize>,
    theta_true: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_mapping() {
        let z = 2.0;
        assert_eq!(Scenario::Ideal.start(z), (2.0, 1));
        assert_eq!(Scenario::AlmostIdeal.start(z), (2.002, 10));
        assert_eq!(Scenario::RealisticLow.start(z), (0.1, 10));
        assert_eq!(Scenario::RealisticHigh.start(z), (5.0, 10));
        for s in Scenario::ALL {
            assert_eq!(s.name().parse::<Scenario>().unwrap(), s);
        }
    }

    #[test]
    fn default_grid_endpoints() {
        let g = default_sigma_grid();
        assert_eq!(g.len(), 12);
        assert_eq!(g[0], 0.3);
        assert_eq!(g[11], 5.0);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn json_overrides_and_validation() {
        let spec = ExperimentSpec::z_sweep_default()
            .apply_json(
                r#"{"splits": [[4, 6]], "estimators": ["mis"], "replications": 3, "scenario": "realistic-high"}"#,
            )
            .unwrap();
        assert_eq!(spec.splits, vec![(4, 6)]);
        assert_eq!(spec.start(), (5.0, 10));
        spec.validate().unwrap();
        let bad = ExperimentSpec::z_sweep_default()
            .apply_json(r#"{"estimators": ["nope"]}"#)
            .unwrap();
        assert!(matches!(bad.validate(), Err(Error::Usage(_))));
        assert!(ExperimentSpec::z_sweep_default()
            .apply_json(r#"{"unknown": 1}"#)
            .is_err());
        assert!(ExperimentSpec::z_sweep_default()
            .apply_json(r#"{"kind": "theta-sweep"}"#)
            .is_err());
    }
}
