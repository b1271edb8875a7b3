//! Synchronous Krause-Hegselmann dynamics over decision weights.
//!
//! Every agent moves to the mean of the agents it considers close, all agents
//! reading the same time-t snapshot. Closeness is either the absolute
//! difference of weights or the Bayes risk error divergence d(a_i, a_j),
//! with the updating agent's own weight as the first argument.

use crate::detection::{
    divergence_from_errors, error_probabilities, CostPair, ErrorPair, GaussianModel,
};
use crate::error::{Error, Result};

pub const DEFAULT_MAX_STEPS: usize = 10_000;
pub const DEFAULT_FIXED_POINT_TOL: f64 = 1e-12;
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProximityMeasure {
    AbsoluteError,
    BayesRiskError {
        costs: CostPair,
        model: GaussianModel,
    },
}

impl ProximityMeasure {
    /// Proximity of `other` as seen by an agent holding `own`.
    pub fn between(&self, own: f64, other: f64) -> f64 {
        match *self {
            ProximityMeasure::AbsoluteError => (own - other).abs(),
            ProximityMeasure::BayesRiskError { costs, model } => divergence_from_errors(
                own,
                error_probabilities(own, costs, model),
                error_probabilities(other, costs, model),
                costs,
            ),
        }
    }

    /// The symmetrized separation min{prox(x, y), prox(y, x)}.
    pub fn separation(&self, x: f64, y: f64) -> f64 {
        self.between(x, y).min(self.between(y, x))
    }
}

/// Decision weights indexed by agent. Indices are stable identities.
#[derive(Debug, Clone, PartialEq)]
pub struct Population(Vec<f64>);

impl Population {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("n", "must be at least 1"));
        }
        if let Some(w) = weights.iter().find(|w| !(0.0..=1.0).contains(*w)) {
            return Err(Error::invalid(
                "weights",
                format!("must lie in [0, 1], got {w}"),
            ));
        }
        Ok(Population(weights))
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.0
    }

    /// Largest per-agent absolute difference to `other`.
    pub fn max_change(&self, other: &Population) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Agent indices sorted by weight, ties broken by index.
    fn ascending_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.0.len()).collect();
        order.sort_by(|&i, &j| self.0[i].total_cmp(&self.0[j]).then(i.cmp(&j)));
        order
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicsConfig {
    theta: f64,
    measure: ProximityMeasure,
    max_steps: usize,
    fixed_point_tol: f64,
    cluster_tol: f64,
}

impl DynamicsConfig {
    /// Default iteration cap and tolerances.
    pub fn new(theta: f64, measure: ProximityMeasure) -> Result<Self> {
        if !(theta.is_finite() && theta > 0.0) {
            return Err(Error::invalid("theta", "must be positive"));
        }
        Ok(DynamicsConfig {
            theta,
            measure,
            max_steps: DEFAULT_MAX_STEPS,
            fixed_point_tol: DEFAULT_FIXED_POINT_TOL,
            cluster_tol: DEFAULT_CLUSTER_TOL,
        })
    }

    pub fn with_max_steps(mut self, max_steps: usize) -> Result<Self> {
        if max_steps == 0 {
            return Err(Error::invalid("max-steps", "must be positive"));
        }
        self.max_steps = max_steps;
        Ok(self)
    }

    pub fn with_tolerances(mut self, fixed_point_tol: f64, cluster_tol: f64) -> Result<Self> {
        if !(fixed_point_tol.is_finite() && fixed_point_tol >= 0.0) {
            return Err(Error::invalid("fixed-point-tol", "must be nonnegative"));
        }
        if !(cluster_tol.is_finite() && cluster_tol >= fixed_point_tol) {
            return Err(Error::invalid(
                "cluster-tol",
                "must be at least the fixed-point tolerance",
            ));
        }
        self.fixed_point_tol = fixed_point_tol;
        self.cluster_tol = cluster_tol;
        Ok(self)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn measure(&self) -> ProximityMeasure {
        self.measure
    }

    pub fn max_steps(&self) -> usize {
        self.max_steps
    }

    pub fn fixed_point_tol(&self) -> f64 {
        self.fixed_point_tol
    }

    pub fn cluster_tol(&self) -> f64 {
        self.cluster_tol
    }
}

/// Proximities for one snapshot, with per-agent error pairs computed once.
enum SnapshotProximity<'a> {
    Absolute(&'a [f64]),
    BayesRisk {
        weights: &'a [f64],
        errors: Vec<ErrorPair>,
        costs: CostPair,
    },
}

impl<'a> SnapshotProximity<'a> {
    fn new(pop: &'a Population, measure: ProximityMeasure) -> Self {
        let weights = pop.weights();
        match measure {
            ProximityMeasure::AbsoluteError => SnapshotProximity::Absolute(weights),
            ProximityMeasure::BayesRiskError { costs, model } => SnapshotProximity::BayesRisk {
                weights,
                errors: weights
                    .iter()
                    .map(|&w| error_probabilities(w, costs, model))
                    .collect(),
                costs,
            },
        }
    }

    /// prox(a_i, a_j) with agent i's weight first.
    fn get(&self, i: usize, j: usize) -> f64 {
        match self {
            SnapshotProximity::Absolute(w) => (w[i] - w[j]).abs(),
            SnapshotProximity::BayesRisk {
                weights,
                errors,
                costs,
            } => divergence_from_errors(weights[i], errors[i], errors[j], *costs),
        }
    }
}

/// Indices j with prox(a_i, a_j) ≤ θ, in ascending index order.
pub fn neighborhood(
    i: usize,
    pop: &Population,
    theta: f64,
    measure: ProximityMeasure,
) -> Vec<usize> {
    let prox = SnapshotProximity::new(pop, measure);
    (0..pop.len())
        .filter(|&j| prox.get(i, j) <= theta)
        .collect()
}

/// One synchronous update. Each neighborhood mean is accumulated in ascending
/// weight order, so the result does not depend on how agents are numbered, and
/// is clamped to the neighbors' range so a cluster of equal weights is an
/// exact fixed point.
pub fn step(pop: &Population, config: &DynamicsConfig) -> Population {
    let prox = SnapshotProximity::new(pop, config.measure);
    let order = pop.ascending_order();
    let w = pop.weights();
    let next = (0..pop.len())
        .map(|i| {
            let mut sum = 0.0;
            let mut count = 0usize;
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for &j in &order {
                if prox.get(i, j) <= config.theta {
                    sum += w[j];
                    count += 1;
                    lo = lo.min(w[j]);
                    hi = hi.max(w[j]);
                }
            }
            debug_assert!(count > 0, "agent {i} is not its own neighbor");
            (sum / count as f64).clamp(lo, hi)
        })
        .collect();
    Population(next)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// `snapshots[0]` is the initial state; each later entry is one step.
    pub snapshots: Vec<Population>,
    pub converged: bool,
    /// Index of the first step whose output matched its input within
    /// tolerance. A population that starts at a fixed point reports 0, and
    /// one that needs a single update reports 1 because the confirming step
    /// is counted.
    pub steps_to_convergence: usize,
}

impl Trajectory {
    pub fn final_population(&self) -> &Population {
        self.snapshots
            .last()
            .expect("trajectory has an initial snapshot")
    }
}

pub fn run_dynamics(initial: &Population, config: &DynamicsConfig) -> Result<Trajectory> {
    let mut snapshots = vec![initial.clone()];
    let mut last_change = f64::INFINITY;
    for step_index in 0..config.max_steps {
        let current = snapshots.last().expect("non-empty");
        let next = step(current, config);
        last_change = current.max_change(&next);
        snapshots.push(next);
        if last_change <= config.fixed_point_tol {
            return Ok(Trajectory {
                snapshots,
                converged: true,
                steps_to_convergence: step_index,
            });
        }
    }
    Err(Error::NonConvergence {
        max_steps: config.max_steps,
        last_change,
    })
}

/// Converged opinion groups, ordered by weight.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSummary {
    weights: Vec<f64>,
    sizes: Vec<usize>,
}

impl ClusterSummary {
    pub fn new(weights: Vec<f64>, sizes: Vec<usize>) -> Result<Self> {
        if weights.is_empty() || weights.len() != sizes.len() {
            return Err(Error::invalid(
                "clusters",
                "need matching, non-empty weight and size lists",
            ));
        }
        if sizes.contains(&0) {
            return Err(Error::invalid("clusters", "sizes must be positive"));
        }
        if weights.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid(
                "clusters",
                "weights must be strictly increasing",
            ));
        }
        if let Some(w) = weights.iter().find(|w| !(0.0..=1.0).contains(*w)) {
            return Err(Error::invalid(
                "clusters",
                format!("weight {w} outside [0, 1]"),
            ));
        }
        Ok(ClusterSummary { weights, sizes })
    }

    /// A single cluster holding all `n` agents at `weight`.
    pub fn single(weight: f64, n: usize) -> Result<Self> {
        Self::new(vec![weight], vec![n])
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn count(&self) -> usize {
        self.weights.len()
    }

    pub fn total_agents(&self) -> usize {
        self.sizes.iter().sum()
    }

    /// Smallest symmetrized proximity over all pairs of clusters, or `None`
    /// for a single cluster.
    pub fn min_separation(&self, measure: ProximityMeasure) -> Option<f64> {
        let mut min: Option<f64> = None;
        for (k, &x) in self.weights.iter().enumerate() {
            for &y in &self.weights[k + 1..] {
                let s = measure.separation(x, y);
                min = Some(min.map_or(s, |m| m.min(s)));
            }
        }
        min
    }
}

/// Groups a converged population into clusters, splitting wherever adjacent
/// sorted weights differ by more than `cluster_tol`.
pub fn detect_clusters(pop: &Population, cluster_tol: f64) -> ClusterSummary {
    let mut sorted = pop.weights().to_vec();
    sorted.sort_by(f64::total_cmp);

    let mut weights = Vec::new();
    let mut sizes = Vec::new();
    let mut start = 0;
    for end in 1..=sorted.len() {
        if end == sorted.len() || sorted[end] - sorted[end - 1] > cluster_tol {
            let members = &sorted[start..end];
            let mean = members.iter().sum::<f64>() / members.len() as f64;
            weights.push(mean.clamp(members[0], members[members.len() - 1]));
            sizes.push(members.len());
            start = end;
        }
    }
    ClusterSummary { weights, sizes }
}
