//! Acceptance suite. Prints one line per criterion and exits nonzero if any
//! result differs from the recorded expectation.

use std::f64::consts::PI;
use std::process::{Command, ExitCode};

use statrs::distribution::{ContinuousCDF, Normal};

use zbridge::costs::{argmin_z, j_mis, j_nce, j_scoring, ScoringRule};
use zbridge::estimators::{
    geometric_mean_estimator, mis_estimator, multi_proposal_bridge, optimal_bridge, quadratic_score_iteration,
    reverse_is, rlr_two_class, self_is_with_mix, standard_is, FixedPointConfig, MultiProposalTable,
};
use zbridge::experiment::{
    moments, paired_mse_difference, random_instance, run_theta_trials, run_z_trials, ExperimentSpec, Instance,
    Scenario, SweepKind, SweepResult,
};
use zbridge::model::seed::sub_seed;
use zbridge::model::{draw_sample_set, sample_umbrella, GaussianEnergy, GaussianProposal, ProportionalModel};
use zbridge::numeric::NeumaierSum;
use zbridge::solvers::Bracket1D;
use zbridge::{LogTable, Result};

/// Criteria that fail with a faithful implementation; see the README.
const EXPECTED_FAILURES: [usize; 3] = [2, 7, 8];

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { passed, detail })
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn instances(tag: u64, count: u64) -> Result<Vec<Instance>> {
    (0..count).map(|i| random_instance(sub_seed(tag, &[i]), 50)).collect()
}

fn converged() -> FixedPointConfig {
    FixedPointConfig::converge(1.0, 1e-14).unwrap()
}

fn criterion_1() -> Result<Outcome> {
    let bracket = Bracket1D::new(1e-8f64.ln(), 1e8f64.ln(), 400)?;
    let (mut nce_worst, mut rlr_worst) = (0.0f64, 0.0f64);
    for inst in instances(101, 100)? {
        let bridge = optimal_bridge(&inst.table, &converged())?.z_hat;
        let nce = argmin_z(|z| j_nce(&inst.table, z), &bracket, 1e-12)?.argmin;
        nce_worst = nce_worst.max(rel(nce, bridge));
        rlr_worst = rlr_worst.max(rel(rlr_two_class(&inst.table)?, bridge));
    }
    outcome(
        nce_worst < 1e-6 && rlr_worst < 1e-6,
        format!("max rel diff to bridge: NCE argmin {nce_worst:.2e}, RLR {rlr_worst:.2e}"),
    )
}

/// Root of `log g(Z) - log Z` for the quadratic-score map `g`, by bisection
/// in `log Z`. `g` is bounded away from 0 and infinity, so the root exists.
fn quadratic_fixed_point(t: &LogTable) -> Result<f64> {
    let h = |lz: f64| -> Result<f64> {
        let step = FixedPointConfig::fixed_steps(lz.exp(), 1)?;
        Ok(quadratic_score_iteration(t, &step)?.z_hat.ln() - lz)
    };
    let (mut lo, mut hi) = (1e-8f64.ln(), 1e8f64.ln());
    assert!(h(lo)? > 0.0 && h(hi)? < 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if h(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

fn criterion_2() -> Result<Outcome> {
    let quad = ScoringRule::quadratic();
    let (mut mis_worst, mut mis_balanced, mut quad_worst) = (0.0f64, 0.0f64, 0.0f64);
    let mut cycles = 0;
    for inst in instances(102, 100)? {
        let t = &inst.table;
        let z = self_is_with_mix(t, &converged())?.z_hat;
        let d = j_mis(t, z)?.dz.abs();
        mis_worst = mis_worst.max(d);
        if t.n() == t.m() {
            mis_balanced = mis_balanced.max(d);
        }
        let run = quadratic_score_iteration(t, &converged())?;
        let z = if run.converged {
            run.z_hat
        } else {
            cycles += 1;
            quadratic_fixed_point(t)?
        };
        quad_worst = quad_worst.max(j_scoring(&quad, t, z)?.dz.abs());
    }
    outcome(
        mis_worst < 1e-8 && quad_worst < 1e-8,
        format!(
            "max |dJ/dZ|: J_MIS {mis_worst:.2e} (N = M instances only: {mis_balanced:.2e}), \
             J_quad {quad_worst:.2e} ({cycles} instances located by bisection, the iteration cycles)"
        ),
    )
}

fn criterion_3() -> Result<Outcome> {
    let quad = ScoringRule::quadratic();
    let mut worst = 0.0f64;
    for (i, inst) in instances(103, 5)?.iter().enumerate() {
        let t = &inst.table;
        // Stay away from the minimizer, where the relative error is meaningless.
        let z_hat = optimal_bridge(t, &converged())?.z_hat;
        let z = z_hat * if i % 2 == 0 { 0.4 } else { 2.5 };
        let h = 1e-5 * z;
        let costs: [&dyn Fn(f64) -> Result<zbridge::costs::CostEvaluation>; 3] =
            [&|z| j_nce(t, z), &|z| j_mis(t, z), &|z| j_scoring(&quad, t, z)];
        for f in costs {
            let fd = (f(z + h)?.value - f(z - h)?.value) / (2.0 * h);
            worst = worst.max(rel(fd, f(z)?.dz));
        }
    }
    outcome(worst < 1e-6, format!("max rel deviation {worst:.2e}"))
}

fn criterion_4() -> Result<Outcome> {
    let mut worst = 0.0f64;
    for c in [0.1, 1.0, (2.0 * PI).sqrt(), 100.0] {
        for (n, m, sigma) in [(7, 9, 1.5), (1, 1, 0.4), (30, 3, 3.0)] {
            let q = GaussianProposal::new(0.0, sigma);
            let model = ProportionalModel::new(q, c);
            let s = draw_sample_set(&model, &[], &q, n, m, sub_seed(104, &[n as u64, m as u64]))?;
            let t = LogTable::evaluate(&s, &model, &[], &q)?;
            let mt =
                MultiProposalTable::evaluate(1, s.model_buffer(), &[&q], &[s.proposal_buffer().to_vec()], &model, &[])?;
            let cfg = converged();
            for z in [
                optimal_bridge(&t, &cfg)?.z_hat,
                mis_estimator(&t, &cfg)?.z_hat,
                self_is_with_mix(&t, &cfg)?.z_hat,
                quadratic_score_iteration(&t, &cfg)?.z_hat,
                multi_proposal_bridge(&mt, &cfg)?.z_hat,
                standard_is(&t)?,
                reverse_is(&t)?,
                geometric_mean_estimator(&t)?.z_geo,
                rlr_two_class(&t)?,
            ] {
                worst = worst.max(rel(z, c));
            }
        }
    }
    outcome(worst < 1e-12, format!("max rel error {worst:.2e} over 9 estimators"))
}

fn criterion_5() -> Result<Outcome> {
    let model = GaussianEnergy::new(1);
    let q = GaussianProposal::new(0.0, 2.0);
    let r = 10_000u64;
    let mut values = Vec::with_capacity(r as usize);
    for i in 0..r {
        let s = draw_sample_set(&model, &[1.0], &q, 5, 1, sub_seed(105, &[i]))?;
        values.push(reverse_is(&LogTable::evaluate(&s, &model, &[1.0], &q)?)?);
    }
    let mean = values.iter().copied().collect::<NeumaierSum>().sum() / r as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).collect::<NeumaierSum>().sum() / (r - 1) as f64;
    let se = (var / r as f64).sqrt();
    let z = GaussianEnergy::z_of(1.0);
    outcome(
        mean - z > 3.0 * se,
        format!(
            "mean {mean:.5} vs Z = {z:.5}, excess {:.1} standard errors",
            (mean - z) / se
        ),
    )
}

fn z_spec(scenario: Scenario, splits: Vec<(usize, usize)>, methods: &[&str]) -> ExperimentSpec {
    ExperimentSpec {
        kind: SweepKind::ZSweep,
        splits,
        scenario,
        methods: methods.iter().map(|s| s.to_string()).collect(),
        replications: 10_000,
        ..ExperimentSpec::z_sweep_default()
    }
}

fn mse(res: &SweepResult, method: &str, sigma: f64, (n, m): (usize, usize)) -> f64 {
    let c = res.cell(method, sigma, n, m).expect("cell exists");
    moments(&c.outcomes, res.truth).mse
}

fn criterion_6() -> Result<Outcome> {
    let split = (20, 20);
    let res = run_z_trials(&z_spec(Scenario::Ideal, vec![split], &["opt-bridge", "mis"]))?;
    let grid = &res.spec.sigma_grid;
    let mut wins = 0;
    for &s in grid {
        let a = &res.cell("mis", s, split.0, split.1).unwrap().outcomes;
        let b = &res.cell("opt-bridge", s, split.0, split.1).unwrap().outcomes;
        if let Some((d, se)) = paired_mse_difference(a, b, res.truth) {
            wins += usize::from(d < -2.0 * se);
        }
    }
    let needed = (0.8 * grid.len() as f64).ceil() as usize;
    outcome(
        wins >= needed,
        format!(
            "MSE(mis) < MSE(opt-bridge) by > 2 SE at {wins}/{} grid points",
            grid.len()
        ),
    )
}

fn criterion_7() -> Result<Outcome> {
    let methods = ["opt-bridge", "mis", "self-is-mix"];
    let splits = vec![(20, 20), (5, 35), (35, 5)];
    let mut passed = true;
    let mut parts = Vec::new();
    for scenario in [Scenario::RealisticLow, Scenario::RealisticHigh] {
        let res = run_z_trials(&z_spec(scenario, splits.clone(), &methods))?;
        let grid = &res.spec.sigma_grid;
        for &split in &splits {
            let wins = grid
                .iter()
                .filter(|&&s| mse(&res, "opt-bridge", s, split) <= mse(&res, "mis", s, split))
                .count();
            let ratio = grid
                .iter()
                .map(|&s| mse(&res, "self-is-mix", s, split) / mse(&res, "opt-bridge", s, split))
                .fold(0.0, f64::max);
            // The criterion is judged at the balanced split; the others are reported.
            if split == (20, 20) {
                passed &= wins as f64 >= 0.8 * grid.len() as f64 && ratio <= 2.0;
            }
            parts.push(format!(
                "Z0={} ({},{}): bridge<=mis {wins}/{}, self/bridge max {ratio:.2}",
                scenario.start(res.truth).0,
                split.0,
                split.1,
                grid.len()
            ));
        }
    }
    outcome(passed, parts.join("; "))
}

fn criterion_8() -> Result<Outcome> {
    let spec = ExperimentSpec {
        splits: vec![(5, 5)],
        methods: vec!["nce-log".into(), "ml".into()],
        replications: 2000,
        ..ExperimentSpec::theta_sweep_default()
    };
    let res = run_theta_trials(&spec)?;
    let grid = &res.spec.sigma_grid;
    let ml: Vec<u64> = grid.iter().map(|&s| mse(&res, "ml", s, (5, 5)).to_bits()).collect();
    let constant = ml.windows(2).all(|w| w[0] == w[1]);
    let top = *grid.last().unwrap();
    let a = &res.cell("nce-log", top, 5, 5).unwrap().outcomes;
    let b = &res.cell("ml", top, 5, 5).unwrap().outcomes;
    let (ma, mb) = (moments(a, res.truth), moments(b, res.truth));
    let d = ma.mse - mb.mse;
    // Standard error of the difference of two MSE estimates.
    let se = ma.mse_se.hypot(mb.mse_se);
    let (_, paired_se) = paired_mse_difference(a, b, res.truth).unwrap();
    outcome(
        constant && d.abs() <= 2.0 * se,
        format!(
            "ml MSE constant: {constant}; at sigma_p = {top}: MSE(nce-log) {:.4} - MSE(ml) {:.4} = {d:.4}, \
             SE {se:.4} (paired SE {paired_se:.4})",
            ma.mse, mb.mse
        ),
    )
}

fn criterion_9() -> Result<Outcome> {
    let mut same = 0;
    for inst in instances(109, 20)? {
        let q = inst.proposal();
        let mt = MultiProposalTable::evaluate(
            1,
            inst.samples.model_buffer(),
            &[&q],
            &[inst.samples.proposal_buffer().to_vec()],
            &GaussianEnergy::new(1),
            &[1.0],
        )?;
        let cfg = FixedPointConfig::fixed_steps(0.5, 25)?;
        let a = multi_proposal_bridge(&mt, &cfg)?.trace;
        let b = optimal_bridge(&inst.table, &cfg)?.trace;
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        same += usize::from(bits(&a) == bits(&b));
    }
    outcome(same == 20, format!("{same}/20 traces bitwise equal"))
}

fn criterion_10() -> Result<Outcome> {
    let z = GaussianEnergy::z_of(1.0);
    let q = GaussianProposal::new(0.0, 2.0);
    let mut draws = sample_umbrella(&GaussianEnergy::new(1), &[1.0], z, &q, 100_000, 110)?;
    draws.sort_by(f64::total_cmp);

    // r(y) ∝ |N(y; 0, 1) - N(y; 0, 4)|, which changes sign at ±c.
    let (p1, p2) = (Normal::new(0.0, 1.0).unwrap(), Normal::new(0.0, 2.0).unwrap());
    let d = |y: f64| p1.cdf(y) - p2.cdf(y);
    let c = (8.0 * 2f64.ln() / 3.0).sqrt();
    let inner = d(c) - d(-c);
    let total = 2.0 * inner;
    let cdf = |y: f64| {
        let mass = if y < -c {
            -d(y)
        } else if y < c {
            -d(-c) + d(y) - d(-c)
        } else {
            -d(-c) + inner - (d(y) - d(c))
        };
        mass / total
    };
    let n = draws.len() as f64;
    let ks = draws
        .iter()
        .enumerate()
        .map(|(i, &y)| {
            let f = cdf(y);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max);
    outcome(ks < 0.01, format!("KS statistic {ks:.5} over {} draws", draws.len()))
}

fn criterion_11() -> Result<Outcome> {
    let dir = tempfile::tempdir().map_err(|e| zbridge::Error::Io(e.to_string()))?;
    let config = dir.path().join("config.json");
    std::fs::write(
        &config,
        r#"{"splits": [[20, 20], [5, 35]], "replications": 300, "scenario": "realistic-low", "root_seed": 11}"#,
    )?;
    let mut outputs = Vec::new();
    for (run, workers) in [(0, 1), (1, 1), (2, 8), (3, 8)] {
        let out = dir.path().join(format!("run{run}.csv"));
        let status = Command::new(env!("CARGO_BIN_EXE_zbridge"))
            .arg("z-sweep")
            .arg("--config")
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .arg("--workers")
            .arg(workers.to_string())
            .status()?;
        if !status.success() {
            return outcome(false, format!("z-sweep exited with {status}"));
        }
        outputs.push(std::fs::read(&out)?);
    }
    let identical = outputs.windows(2).all(|w| w[0] == w[1]);
    outcome(
        identical,
        format!(
            "4 runs (1, 1, 8, 8 workers), {} bytes each, identical: {identical}",
            outputs[0].len()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(usize, &str, fn() -> Result<Outcome>); 11] = [
        (1, "NCE, RLR and optimal bridge coincide", criterion_1),
        (2, "stationarity of J_MIS and J_quad at their fixed points", criterion_2),
        (3, "analytic dJ/dZ vs central differences", criterion_3),
        (4, "exactness under phi = c q", criterion_4),
        (5, "reverse IS is positively biased", criterion_5),
        (6, "ideal scenario: mis beats opt-bridge", criterion_6),
        (7, "realistic scenarios: opt-bridge beats mis", criterion_7),
        (8, "theta-sweep: ml constant, nce-log approaches ml", criterion_8),
        (9, "single-proposal multi bridge equals opt-bridge", criterion_9),
        (10, "umbrella sampler KS test", criterion_10),
        (11, "z-sweep output independent of worker count", criterion_11),
    ];
    let mut unexpected = 0;
    for (id, name, f) in criteria {
        let started = std::time::Instant::now();
        let o = f().unwrap_or_else(|e| Outcome {
            passed: false,
            detail: format!("error: {e}"),
        });
        let expected = !EXPECTED_FAILURES.contains(&id);
        let note = match (o.passed, expected) {
            (true, true) | (false, false) => "",
            _ => {
                unexpected += 1;
                " [UNEXPECTED]"
            }
        };
        println!(
            "criterion {id:>2} {}{note}: {name}: {} ({:.1}s)",
            if o.passed { "PASS" } else { "FAIL" },
            o.detail,
            started.elapsed().as_secs_f64()
        );
    }
    if unexpected > 0 {
        println!("{unexpected} criteria differ from the recorded expectation");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
