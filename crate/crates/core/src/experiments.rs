//! Seeded reproduction of the noise-sweep experiments.
//!
//! A plan fixes the population size, confidence threshold, initial weight
//! distribution, true prior and a grid of noise levels. Each (σ, trial) pair
//! draws its own initial population from a seed derived only from the plan's
//! base seed and the two indices, so any trial can be rerun in isolation and
//! sweep results do not depend on thread scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use rayon::prelude::*;

use crate::detection::{CostPair, DetectionProblem, GaussianModel};
use crate::dynamics::{
    detect_clusters, run_dynamics, ClusterSummary, DynamicsConfig, Population, ProximityMeasure,
};
use crate::error::{Error, Result};
use crate::fusion::{aggregate_bayes_risk, BaselineRisks, RiskReport};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialDistribution {
    Uniform01,
    Beta { alpha: f64, beta: f64 },
}

impl InitialDistribution {
    pub fn beta(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::invalid("alpha", "must be positive"));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::invalid("beta", "must be positive"));
        }
        Ok(InitialDistribution::Beta { alpha, beta })
    }

    pub fn mean(&self) -> f64 {
        match *self {
            InitialDistribution::Uniform01 => 0.5,
            InitialDistribution::Beta { alpha, beta } => alpha / (alpha + beta),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            InitialDistribution::Uniform01 => Ok(()),
            InitialDistribution::Beta { alpha, beta } => Self::beta(alpha, beta).map(|_| ()),
        }
    }

    /// Draws `n` weights. Beta(α, 1) uses the inverse CDF u^(1/α); other
    /// shapes fall back to `rand_distr::Beta`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        match *self {
            InitialDistribution::Uniform01 => (0..n).map(|_| rng.gen::<f64>()).collect(),
            InitialDistribution::Beta { alpha, beta: 1.0 } => {
                let inv_alpha = 1.0 / alpha;
                (0..n).map(|_| rng.gen::<f64>().powf(inv_alpha)).collect()
            }
            InitialDistribution::Beta { alpha, beta } => {
                let dist = rand_distr::Beta::new(alpha, beta).expect("validated shape parameters");
                (0..n).map(|_| dist.sample(rng)).collect()
            }
        }
    }
}

pub fn sample_initial_weights(
    dist: InitialDistribution,
    n: usize,
    seed: u64,
) -> Result<Population> {
    dist.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Population::new(dist.sample(&mut rng, n))
}

/// SplitMix64 output function.
fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for one trial: `h(h(h(base) ^ sigma_index) ^ trial_index)` with `h`
/// the SplitMix64 output function.
pub fn trial_seed(base_seed: u64, sigma_index: usize, trial_index: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(base_seed) ^ sigma_index as u64) ^ trial_index as u64)
}

/// `points` noise levels spaced evenly in log scale from `lo` to `hi`,
/// with both endpoints exact.
pub fn log_spaced(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let ratio = (hi / lo).ln();
            let last = points - 1;
            (0..points)
                .map(|k| match k {
                    0 => lo,
                    k if k == last => hi,
                    k => lo * (ratio * k as f64 / last as f64).exp(),
                })
                .collect()
        }
    }
}

/// 20 log-spaced points from 0.125 to 64.
pub fn default_sigma_grid() -> Vec<f64> {
    log_spaced(0.125, 64.0, 20)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub n: usize,
    pub theta: f64,
    pub distribution: InitialDistribution,
    pub true_p0: f64,
    pub costs: CostPair,
    pub sigma_grid: Vec<f64>,
    pub trials: usize,
    pub base_seed: u64,
}

impl ExperimentPlan {
    /// Uniform initial weights, θ = 0.1, true prior 1/2.
    pub fn first_example() -> Self {
        ExperimentPlan {
            n: 101,
            theta: 0.1,
            distribution: InitialDistribution::Uniform01,
            true_p0: 0.5,
            costs: CostPair::unit(),
            sigma_grid: default_sigma_grid(),
            trials: 200,
            base_seed: 0,
        }
    }

    /// Beta(2/3, 1) initial weights, θ = 0.025, true prior 2/5.
    pub fn second_example() -> Self {
        ExperimentPlan {
            theta: 0.025,
            distribution: InitialDistribution::Beta {
                alpha: 2.0 / 3.0,
                beta: 1.0,
            },
            true_p0: 0.4,
            ..Self::first_example()
        }
    }

    /// Checks the plan and returns non-fatal warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        if self.n == 0 {
            return Err(Error::invalid("n", "must be at least 1"));
        }
        if !(self.theta.is_finite() && self.theta > 0.0) {
            return Err(Error::invalid("theta", "must be positive"));
        }
        self.distribution.validate()?;
        crate::detection::check_probability("true_p0", self.true_p0)?;
        CostPair::new(self.costs.c10(), self.costs.c01())?;
        if self.sigma_grid.is_empty() {
            return Err(Error::invalid("sigma_grid", "must not be empty"));
        }
        for &s in &self.sigma_grid {
            GaussianModel::unit_shift(s)
                .map_err(|_| Error::invalid("sigma_grid", "entries must be positive"))?;
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials", "must be at least 1"));
        }
        let mut warnings = Vec::new();
        let mean = self.distribution.mean();
        if (mean - self.true_p0).abs() > 1e-9 {
            warnings.push(format!(
                "true_p0 = {} differs from the initial weight mean {}",
                self.true_p0, mean
            ));
        }
        Ok(warnings)
    }

    pub fn problem(&self, sigma: f64) -> Result<DetectionProblem> {
        DetectionProblem::new(self.true_p0, self.costs, GaussianModel::unit_shift(sigma)?)
    }

    pub fn dynamics_config(&self, sigma: f64) -> Result<DynamicsConfig> {
        let measure = ProximityMeasure::BayesRiskError {
            costs: self.costs,
            model: GaussianModel::unit_shift(sigma)?,
        };
        DynamicsConfig::new(self.theta, measure)
    }

    fn sigma(&self, sigma_index: usize) -> Result<f64> {
        self.sigma_grid.get(sigma_index).copied().ok_or_else(|| {
            Error::invalid("sigma_index", format!("{sigma_index} is outside the grid"))
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub clusters: ClusterSummary,
    pub steps: usize,
    pub report: RiskReport,
}

/// One trial of a plan at the noise level `plan.sigma_grid[sigma_index]`.
pub fn run_trial(
    plan: &ExperimentPlan,
    sigma_index: usize,
    trial_index: usize,
) -> Result<TrialOutcome> {
    let sigma = plan.sigma(sigma_index)?;
    let baselines = BaselineRisks::compute(plan.n, &plan.problem(sigma)?);
    run_trial_with(plan, sigma_index, trial_index, &baselines)
}

fn run_trial_with(
    plan: &ExperimentPlan,
    sigma_index: usize,
    trial_index: usize,
    baselines: &BaselineRisks,
) -> Result<TrialOutcome> {
    let sigma = plan.sigma(sigma_index)?;
    let seed = trial_seed(plan.base_seed, sigma_index, trial_index);
    let initial = sample_initial_weights(plan.distribution, plan.n, seed)?;
    let config = plan.dynamics_config(sigma)?;
    let trajectory = run_dynamics(&initial, &config)?;
    let clusters = detect_clusters(trajectory.final_population(), config.cluster_tol());
    let aggregate = aggregate_bayes_risk(&clusters, &plan.problem(sigma)?);
    Ok(TrialOutcome {
        clusters,
        steps: trajectory.steps_to_convergence,
        report: RiskReport::new(aggregate, *baselines),
    })
}

/// Per-trial quantities kept by a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialRecord {
    pub clusters: usize,
    pub steps: usize,
    pub aggregate_risk: f64,
    pub aggregate_bre: f64,
}

impl From<&TrialOutcome> for TrialRecord {
    fn from(t: &TrialOutcome) -> Self {
        TrialRecord {
            clusters: t.clusters.count(),
            steps: t.steps,
            aggregate_risk: t.report.aggregate_risk,
            aggregate_bre: t.report.aggregate_bre,
        }
    }
}

/// Statistics over all trials at one noise level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRecord {
    pub sigma: f64,
    pub mean_clusters: f64,
    pub std_clusters: f64,
    pub mean_steps: f64,
    pub std_steps: f64,
    pub mean_aggregate_risk: f64,
    pub std_aggregate_risk: f64,
    pub centralized_risk: f64,
    pub optimal_majority_risk: f64,
    pub chair_varshney_risk: Option<f64>,
    pub mean_aggregate_bre: f64,
    pub std_aggregate_bre: f64,
}

impl SweepRecord {
    pub fn from_trials(sigma: f64, baselines: &BaselineRisks, trials: &[TrialRecord]) -> Self {
        let (mean_clusters, std_clusters) = mean_std(trials.iter().map(|t| t.clusters as f64));
        let (mean_steps, std_steps) = mean_std(trials.iter().map(|t| t.steps as f64));
        let (mean_aggregate_risk, std_aggregate_risk) =
            mean_std(trials.iter().map(|t| t.aggregate_risk));
        let (mean_aggregate_bre, std_aggregate_bre) =
            mean_std(trials.iter().map(|t| t.aggregate_bre));
        SweepRecord {
            sigma,
            mean_clusters,
            std_clusters,
            mean_steps,
            std_steps,
            mean_aggregate_risk,
            std_aggregate_risk,
            centralized_risk: baselines.centralized_risk,
            optimal_majority_risk: baselines.optimal_majority_risk,
            chair_varshney_risk: baselines.chair_varshney_risk,
            mean_aggregate_bre,
            std_aggregate_bre,
        }
    }
}

/// Mean and population standard deviation (divisor N), summed in order.
pub fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let (count, sum) = values
        .clone()
        .fold((0usize, 0.0), |(c, s), v| (c + 1, s + v));
    if count == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = sum / count as f64;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / count as f64;
    (mean, var.sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub records: Vec<SweepRecord>,
    /// `trials[k]` holds the per-trial records at `records[k].sigma`, in trial order.
    pub trials: Vec<Vec<TrialRecord>>,
}

/// Runs every (σ, trial) pair of the plan on `jobs` threads (all available
/// cores when `None`) and reduces them in (σ index, trial index) order.
pub fn run_sweep(plan: &ExperimentPlan, jobs: Option<usize>) -> Result<SweepResult> {
    plan.validate()?;
    if jobs == Some(0) {
        return Err(Error::invalid("jobs", "must be at least 1"));
    }
    let baselines = plan
        .sigma_grid
        .iter()
        .map(|&s| Ok(BaselineRisks::compute(plan.n, &plan.problem(s)?)))
        .collect::<Result<Vec<_>>>()?;

    let tasks: Vec<(usize, usize)> = (0..plan.sigma_grid.len())
        .flat_map(|s| (0..plan.trials).map(move |t| (s, t)))
        .collect();
    let run = || {
        tasks
            .par_iter()
            .map(|&(s, t)| {
                run_trial_with(plan, s, t, &baselines[s])
                    .map(|o| TrialRecord::from(&o))
                    .map_err(|e| Error::Trial {
                        sigma: plan.sigma_grid[s],
                        trial: t,
                        source: Box::new(e),
                    })
            })
            .collect::<Vec<_>>()
    };
    let outcomes = match jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .map_err(|e| Error::invalid("jobs", e.to_string()))?
            .install(run),
        None => run(),
    };

    let mut outcomes = outcomes.into_iter();
    let mut records = Vec::with_capacity(plan.sigma_grid.len());
    let mut trials = Vec::with_capacity(plan.sigma_grid.len());
    for (s, &sigma) in plan.sigma_grid.iter().enumerate() {
        let per_sigma = outcomes
            .by_ref()
            .take(plan.trials)
            .collect::<Result<Vec<_>>>()?;
        records.push(SweepRecord::from_trials(sigma, &baselines[s], &per_sigma));
        trials.push(per_sigma);
    }
    Ok(SweepResult { records, trials })
}
