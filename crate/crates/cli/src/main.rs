use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bcod::detection::bre_divergence;
use bcod::dynamics::{detect_clusters, run_dynamics};
use bcod::experiments::{default_sigma_grid, run_sweep, sample_initial_weights};
use bcod::plan::{parse_plan, parse_real, parse_sigma_grid};
use bcod::{
    io as csv, BaselineRisks, CostPair, DetectionProblem, DynamicsConfig, Error, ExperimentPlan,
    GaussianModel, InitialDistribution, ProximityMeasure, RiskReport,
};
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

/// Bounded-confidence opinion dynamics among Bayesian binary detectors.
#[derive(Debug, Parser)]
#[command(name = "bcod", version)]
struct Cli {
    /// Worker threads for sweeps (default: all available cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one population to its fixed point and report clusters and risks.
    Simulate(SimulateArgs),
    /// Run every (σ, trial) pair of an experiment plan.
    Sweep(SweepArgs),
    /// Tabulate the baseline fusion risks over a noise grid, without dynamics.
    Risk(RiskArgs),
    /// Tabulate the Bayes risk error divergence d(p, a) on a square grid.
    Diverge(DivergeArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Measure {
    /// Bayes risk error divergence between decision weights.
    Bre,
    /// Absolute difference between decision weights.
    Abs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Dist {
    Uniform,
    Beta,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Example {
    First,
    Second,
}

#[derive(Debug, Args)]
struct CostArgs {
    /// Cost of deciding h1 when h0 is true.
    #[arg(long, default_value = "1", value_parser = real)]
    c10: f64,
    /// Cost of deciding h0 when h1 is true.
    #[arg(long, default_value = "1", value_parser = real)]
    c01: f64,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct SimulateArgs {
    #[arg(long, default_value_t = 101)]
    n: usize,
    /// Confidence threshold.
    #[arg(long, default_value = "0.1", value_parser = real)]
    theta: f64,
    /// Observation noise standard deviation (unit mean shift).
    #[arg(long, default_value = "4", value_parser = real)]
    sigma: f64,
    /// True prior on h0 used for the risk report (default: mean of the initial distribution).
    #[arg(long, value_parser = real)]
    p0: Option<f64>,
    #[command(flatten)]
    costs: CostArgs,
    #[arg(long, value_enum, default_value_t = Measure::Bre)]
    measure: Measure,
    #[arg(long, value_enum, default_value_t = Dist::Uniform)]
    dist: Dist,
    /// First Beta shape parameter (required with --dist beta).
    #[arg(long, value_parser = real)]
    alpha: Option<f64>,
    /// Second Beta shape parameter.
    #[arg(long, default_value = "1", value_parser = real)]
    beta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trajectory CSV path.
    #[arg(long, default_value = "trajectory.csv")]
    out: PathBuf,
    #[arg(long, default_value_t = bcod::dynamics::DEFAULT_MAX_STEPS)]
    max_steps: usize,
    #[arg(long, default_value = "1e-12", value_parser = real)]
    fixed_point_tol: f64,
    #[arg(long, default_value = "1e-6", value_parser = real)]
    cluster_tol: f64,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["plan", "example"])))]
#[command(allow_negative_numbers = true)]
struct SweepArgs {
    /// Plan file (`key = value` lines).
    #[arg(long)]
    plan: Option<PathBuf>,
    /// Built-in plan.
    #[arg(long, value_enum)]
    example: Option<Example>,
    /// Override the plan's trial count.
    #[arg(long)]
    trials: Option<usize>,
    /// Override the plan's base seed.
    #[arg(long)]
    base_seed: Option<u64>,
    /// Override the plan's noise grid: `logspace(lo, hi, points)` or a comma list.
    #[arg(long, value_parser = sigma_grid)]
    sigma_grid: Option<Grid>,
    /// Output directory for sweep.csv and the per-quantity plot files.
    #[arg(long, default_value = "sweep")]
    out: PathBuf,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct RiskArgs {
    #[arg(long, default_value_t = 101)]
    n: usize,
    /// True prior on h0.
    #[arg(long, default_value = "0.5", value_parser = real)]
    p0: f64,
    #[command(flatten)]
    costs: CostArgs,
    /// Noise grid: `logspace(lo, hi, points)` or a comma list.
    #[arg(long, value_parser = sigma_grid)]
    sigma_grid: Option<Grid>,
    /// CSV path (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct DivergeArgs {
    #[arg(long, value_parser = real)]
    sigma: f64,
    #[command(flatten)]
    costs: CostArgs,
    /// Grid points per axis on [0, 1].
    #[arg(long, default_value_t = 101)]
    points: usize,
    /// CSV path (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn real(s: &str) -> Result<f64, String> {
    parse_real(s)
}

/// A noise grid given as one flag value.
#[derive(Debug, Clone)]
struct Grid(Vec<f64>);

fn sigma_grid(s: &str) -> Result<Grid, String> {
    parse_sigma_grid(s).map(Grid)
}

/// A failure with its exit code: 2 for bad input, 1 for everything else.
enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter { name, .. } => {
                Failure::Usage(format!("{e} (--{})", name.replace('_', "-")))
            }
            Error::Plan { .. } => Failure::Usage(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn io_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Runtime(format!("{}: {e}", path.display()))
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Sweep(args) => sweep(args, cli.jobs),
        Command::Risk(args) => risk(args),
        Command::Diverge(args) => diverge(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

/// Writes through a buffered file, or standard output when `path` is None.
fn with_output(
    path: Option<&Path>,
    write: impl FnOnce(&mut dyn Write) -> bcod::Result<()>,
) -> Outcome {
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| io_failure(p, e))?;
            let mut w = BufWriter::new(file);
            write(&mut w).map_err(|e| io_failure(p, e))?;
            w.flush().map_err(|e| io_failure(p, e))
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            write(&mut w).map_err(|e| Failure::Runtime(e.to_string()))?;
            w.flush().map_err(|e| Failure::Runtime(e.to_string()))
        }
    }
}

fn costs(args: &CostArgs) -> Result<CostPair, Failure> {
    Ok(CostPair::new(args.c10, args.c01)?)
}

fn simulate(args: SimulateArgs) -> Outcome {
    let distribution = match args.dist {
        Dist::Uniform => InitialDistribution::Uniform01,
        Dist::Beta => {
            let alpha = args.alpha.ok_or_else(|| {
                Failure::Usage("alpha is required with --dist beta (--alpha)".into())
            })?;
            InitialDistribution::beta(alpha, args.beta)?
        }
    };
    let costs = costs(&args.costs)?;
    let model = GaussianModel::unit_shift(args.sigma)?;
    let problem = DetectionProblem::new(args.p0.unwrap_or(distribution.mean()), costs, model)?;
    let measure = match args.measure {
        Measure::Bre => ProximityMeasure::BayesRiskError { costs, model },
        Measure::Abs => ProximityMeasure::AbsoluteError,
    };
    let config = DynamicsConfig::new(args.theta, measure)?
        .with_max_steps(args.max_steps)?
        .with_tolerances(args.fixed_point_tol, args.cluster_tol)?;
    let initial = sample_initial_weights(distribution, args.n, args.seed)?;

    let trajectory = run_dynamics(&initial, &config)?;
    with_output(Some(&args.out), |w| {
        csv::write_trajectory(w, &trajectory.snapshots)
    })?;

    let clusters = detect_clusters(trajectory.final_population(), config.cluster_tol());
    let report = RiskReport::compute(&clusters, &problem);
    println!("clusters: {}", clusters.count());
    println!("steps:    {}", trajectory.steps_to_convergence);
    println!();
    println!("{:>8}  {:>24}  {:>6}", "cluster", "weight", "size");
    for (k, (w, s)) in clusters.weights().iter().zip(clusters.sizes()).enumerate() {
        println!("{:>8}  {:>24}  {:>6}", k + 1, csv::format_real(*w), s);
    }
    println!();
    println!(
        "risk report (sigma = {}, p0 = {})",
        args.sigma,
        problem.p0()
    );
    let rows = [
        ("aggregate_risk", Some(report.aggregate_risk)),
        ("centralized_risk", Some(report.centralized_risk)),
        ("optimal_majority_risk", Some(report.optimal_majority_risk)),
        ("chair_varshney_risk", report.chair_varshney_risk),
        ("aggregate_bre", Some(report.aggregate_bre)),
    ];
    for (name, value) in rows {
        let shown = value.map_or_else(|| "undefined".to_string(), csv::format_real);
        println!("  {name:<22}  {shown:>24}");
    }
    println!();
    println!("trajectory written to {}", args.out.display());
    Ok(())
}

fn load_plan(args: &SweepArgs) -> Result<ExperimentPlan, Failure> {
    let mut plan = match (&args.plan, args.example) {
        (Some(path), _) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("{}: {e} (--plan)", path.display())))?;
            let (plan, warnings) = parse_plan(&text)?;
            for w in warnings {
                eprintln!("warning: {w}");
            }
            plan
        }
        (None, Some(Example::First)) => ExperimentPlan::first_example(),
        (None, Some(Example::Second)) => ExperimentPlan::second_example(),
        (None, None) => unreachable!("clap requires --plan or --example"),
    };
    if let Some(trials) = args.trials {
        plan.trials = trials;
    }
    if let Some(seed) = args.base_seed {
        plan.base_seed = seed;
    }
    if let Some(grid) = &args.sigma_grid {
        plan.sigma_grid = grid.0.clone();
    }
    plan.validate()?;
    Ok(plan)
}

fn sweep(args: SweepArgs, jobs: Option<usize>) -> Outcome {
    let plan = load_plan(&args)?;
    let result = run_sweep(&plan, jobs)?;
    fs::create_dir_all(&args.out).map_err(|e| io_failure(&args.out, e))?;

    let sweep_path = args.out.join("sweep.csv");
    with_output(Some(&sweep_path), |w| csv::write_sweep(w, &result.records))?;
    println!("{}", sweep_path.display());
    for (name, points) in csv::plot_series(&result.records) {
        let path = args.out.join(format!("{name}.csv"));
        with_output(Some(&path), |w| csv::write_plot_data(w, &points))?;
        println!("{}", path.display());
    }
    for r in result
        .records
        .iter()
        .filter(|r| r.chair_varshney_risk.is_none())
    {
        eprintln!(
            "warning: Chair-Varshney risk undefined at sigma={}",
            r.sigma
        );
    }
    Ok(())
}

fn risk(args: RiskArgs) -> Outcome {
    let costs = costs(&args.costs)?;
    if args.n == 0 {
        return Err(Failure::Usage("n must be at least 1 (--n)".into()));
    }
    let grid = args
        .sigma_grid
        .clone()
        .map_or_else(default_sigma_grid, |g| g.0);
    let mut rows = Vec::with_capacity(grid.len());
    for &sigma in &grid {
        let model = GaussianModel::unit_shift(sigma).map_err(|_| {
            Failure::Usage("sigma-grid entries must be positive (--sigma-grid)".into())
        })?;
        let problem = DetectionProblem::new(args.p0, costs, model)?;
        let baselines = BaselineRisks::compute(args.n, &problem);
        if baselines.chair_varshney_risk.is_none() {
            eprintln!("warning: Chair-Varshney risk undefined at sigma={sigma}");
        }
        rows.push((sigma, baselines));
    }
    with_output(args.out.as_deref(), |w| csv::write_baselines(w, &rows))
}

fn diverge(args: DivergeArgs) -> Outcome {
    let costs = costs(&args.costs)?;
    let model = GaussianModel::unit_shift(args.sigma)?;
    if args.points < 2 {
        return Err(Failure::Usage(
            "points must be at least 2 (--points)".into(),
        ));
    }
    let last = (args.points - 1) as f64;
    let axis: Vec<f64> = (0..args.points).map(|i| i as f64 / last).collect();
    let rows: Vec<(f64, f64, f64)> = axis
        .iter()
        .flat_map(|&p| {
            axis.iter()
                .map(move |&a| (p, a, bre_divergence(p, a, costs, model)))
        })
        .collect();
    with_output(args.out.as_deref(), |w| {
        csv::write_divergence_grid(w, &rows)
    })
}
