use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use zbridge::estimators::{
    geometric_mean_estimator, mis_estimator, multi_proposal_bridge, optimal_bridge, optimal_umbrella_points,
    quadratic_score_iteration, reverse_is, self_is_with_mix, standard_is, MultiProposalTable,
};
use zbridge::experiment::{emit_csv, run_selftest, run_theta_sweep, run_z_sweep, CostId, ExperimentSpec, Scenario};
use zbridge::model::{GaussianEnergy, GaussianProposal, SampleSet};
use zbridge::{Error, EstimatorId, EstimatorRun, FixedPointConfig, LogTable, Result};

/// Partition-function estimators and the Monte Carlo harness that compares them.
#[derive(Parser)]
#[command(name = "zbridge", version, arg_required_else_help = true)]
struct Cli {
    /// Print the estimator and cost registries and exit.
    #[arg(long)]
    list_estimators: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// MSE of the Z estimators versus sigma_p.
    ZSweep(SweepArgs),
    /// MSE of theta estimates from each cost function versus sigma_p.
    ThetaSweep(SweepArgs),
    /// Run one estimator on a label,value sample file.
    EstimateZ(EstimateArgs),
    /// Run the built-in invariant checks.
    Selftest,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON config; its keys override the defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Overrides `root_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `replications`.
    #[arg(long)]
    replications: Option<usize>,
    /// Overrides `workers` (0: one per core).
    #[arg(long)]
    workers: Option<usize>,
    /// Overrides `scenario` (z-sweep only).
    #[arg(long)]
    scenario: Option<Scenario>,
    /// Overrides the scenario's iteration count.
    #[arg(long)]
    iters: Option<usize>,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    estimator: EstimatorId,
    /// CSV of `label,value` rows with labels `model` and `proposal`.
    #[arg(long)]
    data: PathBuf,
    /// Standard deviation of the zero-mean Gaussian proposal.
    #[arg(long)]
    sigma_p: f64,
    #[arg(long, default_value_t = 1.0)]
    z0: f64,
    /// Fixed number of steps; without it the iteration runs to convergence.
    #[arg(long)]
    iters: Option<usize>,
    /// Parameter of the Gaussian model `exp(-y^2 / (2 theta^2))`.
    #[arg(long, default_value_t = 1.0)]
    theta: f64,
}

fn build_spec(base: ExperimentSpec, args: &SweepArgs) -> Result<ExperimentSpec> {
    let mut spec = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Usage(format!("cannot read {}: {e}", path.display())))?;
            base.apply_json(&text)?
        }
        None => base,
    };
    if let Some(s) = args.seed {
        spec.root_seed = s;
    }
    if let Some(r) = args.replications {
        spec.replications = r;
    }
    if let Some(w) = args.workers {
        spec.workers = w;
    }
    if let Some(s) = args.scenario {
        spec.scenario = s;
    }
    if args.iters.is_some() {
        spec.iters = args.iters;
    }
    spec.validate()?;
    Ok(spec)
}

fn list_estimators() {
    println!("estimators (z-sweep, estimate-z):");
    for e in EstimatorId::ALL {
        let kind = if e.is_recursive() { "recursive" } else { "closed form" };
        println!("  {:<14} {:<12} {}", e.name(), kind, e.description());
    }
    println!("costs (theta-sweep):");
    for c in CostId::ALL {
        println!("  {:<14} {}", c.name(), c.description());
    }
}

fn estimate(args: &EstimateArgs) -> Result<()> {
    if !(args.sigma_p > 0.0 && args.sigma_p.is_finite()) {
        return Err(Error::Usage(format!(
            "--sigma-p must be positive, got {}",
            args.sigma_p
        )));
    }
    if !(args.theta > 0.0 && args.theta.is_finite()) {
        return Err(Error::Usage(format!("--theta must be positive, got {}", args.theta)));
    }
    let file = File::open(&args.data).map_err(|e| Error::Usage(format!("cannot read {}: {e}", args.data.display())))?;
    let samples = SampleSet::read_csv(BufReader::new(file))?;
    let cfg = match args.iters {
        Some(t) => FixedPointConfig::fixed_steps(args.z0, t),
        None => FixedPointConfig::new(
            args.z0,
            FixedPointConfig::default().max_iters,
            FixedPointConfig::default().rel_tol,
        ),
    }
    .map_err(|e| Error::Usage(e.to_string()))?;
    let model = GaussianEnergy::new(1);
    let theta = [args.theta];
    let q = GaussianProposal::new(0.0, args.sigma_p);
    let table = LogTable::evaluate(&samples, &model, &theta, &q)?;
    let closed = |z: f64| EstimatorRun {
        z_hat: z,
        trace: vec![z],
        converged: true,
        iters_used: 0,
    };
    let run = match args.estimator {
        EstimatorId::OptBridge => optimal_bridge(&table, &cfg)?,
        EstimatorId::Mis => mis_estimator(&table, &cfg)?,
        EstimatorId::SelfIsMix => self_is_with_mix(&table, &cfg)?,
        EstimatorId::QuadScore => quadratic_score_iteration(&table, &cfg)?,
        EstimatorId::StandIs => closed(standard_is(&table)?),
        EstimatorId::Ris => closed(reverse_is(&table)?),
        EstimatorId::Geo => closed(geometric_mean_estimator(&table)?.z_geo),
        EstimatorId::OptUmbrella => {
            // Every row is taken as a draw from the umbrella density.
            let mut pts = samples.model_buffer().to_vec();
            pts.extend_from_slice(samples.proposal_buffer());
            optimal_umbrella_points(&pts, 1, &model, &theta, &q, &cfg)?
        }
        EstimatorId::MultiBridge => {
            let mt = MultiProposalTable::evaluate(
                1,
                samples.model_buffer(),
                &[&q],
                &[samples.proposal_buffer().to_vec()],
                &model,
                &theta,
            )?;
            multi_proposal_bridge(&mt, &cfg)?
        }
    };
    println!("estimator: {}", args.estimator);
    println!("N: {}", samples.n());
    println!("M: {}", samples.m());
    println!("z_hat: {}", run.z_hat);
    println!("iterations: {}", run.iters_used);
    println!("converged: {}", run.converged);
    Ok(())
}

fn selftest() -> Result<()> {
    let checks = run_selftest();
    let mut failed = 0;
    for c in &checks {
        println!("{} {} ({})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        failed += usize::from(!c.passed);
    }
    if failed > 0 {
        return Err(Error::Precondition(format!(
            "{failed} of {} checks failed",
            checks.len()
        )));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if cli.list_estimators {
        list_estimators();
        return Ok(());
    }
    match cli.command {
        Some(Command::ZSweep(args)) => {
            let spec = build_spec(ExperimentSpec::z_sweep_default(), &args)?;
            emit_csv(&run_z_sweep(&spec)?, &args.out, &spec)
        }
        Some(Command::ThetaSweep(args)) => {
            let spec = build_spec(ExperimentSpec::theta_sweep_default(), &args)?;
            emit_csv(&run_theta_sweep(&spec)?, &args.out, &spec)
        }
        Some(Command::EstimateZ(args)) => estimate(&args),
        Some(Command::Selftest) => selftest(),
        None => Err(Error::Usage("no subcommand given".into())),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("zbridge: {e}");
            ExitCode::from(if matches!(e, Error::Usage(_)) { 2 } else { 3 })
        }
    }
}
