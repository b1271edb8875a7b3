//! Fusing the agents' local decisions into one global decision.
//!
//! After the dynamics settle, agents in the same cluster share a decision
//! weight and therefore the same error probabilities, so the number of agents
//! voting h1 is a sum of independent binomials, one per cluster. Its exact
//! distribution gives the error rates of any count-threshold fusion rule,
//! including majority vote and the Chair-Varshney rule.

use crate::detection::{
    error_probabilities, log_error_probabilities, risk_from_errors, CostPair, DetectionProblem,
    ErrorPair, GaussianModel,
};
use crate::dynamics::ClusterSummary;
use crate::error::{Error, Result};

/// How far a computed Chair-Varshney threshold may sit from an integer and
/// still be treated as that integer, relative to max(1, |γ|).
const GAMMA_SNAP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    H0,
    H1,
}

/// Per-cluster local error probabilities with cluster sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterErrorProfile {
    errors: Vec<ErrorPair>,
    sizes: Vec<usize>,
}

impl ClusterErrorProfile {
    pub fn new(errors: Vec<ErrorPair>, sizes: Vec<usize>) -> Result<Self> {
        if errors.is_empty() || errors.len() != sizes.len() {
            return Err(Error::invalid(
                "profile",
                "need matching, non-empty error and size lists",
            ));
        }
        if sizes.contains(&0) {
            return Err(Error::invalid("profile", "cluster sizes must be positive"));
        }
        let in_unit = |p: f64| (0.0..=1.0).contains(&p);
        if errors
            .iter()
            .any(|e| !in_unit(e.type_i) || !in_unit(e.type_ii))
        {
            return Err(Error::invalid(
                "profile",
                "error probabilities must lie in [0, 1]",
            ));
        }
        Ok(ClusterErrorProfile { errors, sizes })
    }

    /// Evaluates each cluster's likelihood ratio test at its converged weight.
    pub fn from_clusters(clusters: &ClusterSummary, costs: CostPair, model: GaussianModel) -> Self {
        ClusterErrorProfile {
            errors: clusters
                .weights()
                .iter()
                .map(|&a| error_probabilities(a, costs, model))
                .collect(),
            sizes: clusters.sizes().to_vec(),
        }
    }

    /// `n` identical detectors.
    pub fn single(errors: ErrorPair, n: usize) -> Result<Self> {
        Self::new(vec![errors], vec![n])
    }

    pub fn errors(&self) -> &[ErrorPair] {
        &self.errors
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn total_agents(&self) -> usize {
        self.sizes.iter().sum()
    }
}

/// Probability that exactly k agents decide h1, for k = 0..=n.
#[derive(Debug, Clone, PartialEq)]
pub struct VoteCountDistribution(Vec<f64>);

impl VoteCountDistribution {
    pub fn probabilities(&self) -> &[f64] {
        &self.0
    }

    pub fn max_count(&self) -> usize {
        self.0.len() - 1
    }

    /// P(count ≥ k). Exactly 1 for k = 0 and 0 for k > n.
    pub fn at_least(&self, k: usize) -> f64 {
        if k == 0 {
            return 1.0;
        }
        compensated_sum(self.0.iter().skip(k).copied()).min(1.0)
    }

    /// P(count < k). Exactly 0 for k = 0 and 1 for k > n.
    pub fn below(&self, k: usize) -> f64 {
        if k > self.max_count() {
            return 1.0;
        }
        compensated_sum(self.0.iter().take(k).copied()).min(1.0)
    }
}

/// Neumaier's variant of Kahan summation.
fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// Binomial(n, p) probability mass function, evaluated in log space.
pub fn binomial_pmf(n: usize, p: f64) -> Vec<f64> {
    debug_assert!((0.0..=1.0).contains(&p));
    let mut pmf = vec![0.0; n + 1];
    if p <= 0.0 {
        pmf[0] = 1.0;
        return pmf;
    }
    if p >= 1.0 {
        pmf[n] = 1.0;
        return pmf;
    }
    let ln_p = p.ln();
    let ln_q = (-p).ln_1p();
    let ln_n_fact = libm::lgamma(n as f64 + 1.0);
    for (k, slot) in pmf.iter_mut().enumerate() {
        let ln_choose =
            ln_n_fact - libm::lgamma(k as f64 + 1.0) - libm::lgamma((n - k) as f64 + 1.0);
        *slot = (ln_choose + k as f64 * ln_p + (n - k) as f64 * ln_q).exp();
    }
    pmf
}

fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Distribution of the number of h1 votes under `hypothesis`.
pub fn vote_distribution(
    profile: &ClusterErrorProfile,
    hypothesis: Hypothesis,
) -> VoteCountDistribution {
    let mut dist = vec![1.0];
    for (e, &size) in profile.errors.iter().zip(&profile.sizes) {
        let p_h1 = match hypothesis {
            Hypothesis::H0 => e.type_i,
            Hypothesis::H1 => 1.0 - e.type_ii,
        };
        dist = convolve(&dist, &binomial_pmf(size, p_h1));
    }
    VoteCountDistribution(dist)
}

/// Global errors of the rule "decide h1 iff at least `k` agents vote h1".
pub fn count_threshold_errors(profile: &ClusterErrorProfile, k: usize) -> ErrorPair {
    ErrorPair {
        type_i: vote_distribution(profile, Hypothesis::H0).at_least(k),
        type_ii: vote_distribution(profile, Hypothesis::H1).below(k),
    }
}

/// Votes needed for the majority rule to decide h1: the smallest count ≥ n/2.
/// For even n a tie decides h1.
pub fn majority_threshold(n: usize) -> usize {
    n.div_ceil(2)
}

pub fn majority_vote_errors(profile: &ClusterErrorProfile) -> ErrorPair {
    count_threshold_errors(profile, majority_threshold(profile.total_agents()))
}

/// Majority-vote Bayes risk of a converged population, judged against the
/// true prior.
pub fn aggregate_bayes_risk(clusters: &ClusterSummary, problem: &DetectionProblem) -> f64 {
    let profile = ClusterErrorProfile::from_clusters(clusters, problem.costs(), problem.model());
    risk_from_errors(
        problem.p0(),
        majority_vote_errors(&profile),
        problem.costs(),
    )
}

/// Bayes-optimal risk with access to all `n` observations. The sum of the
/// observations is sufficient and Gaussian with means n·mu0, n·mu1 and
/// standard deviation σ√n.
pub fn centralized_bayes_risk(n: usize, problem: &DetectionProblem) -> f64 {
    assert!(n >= 1, "centralized risk needs at least one observation");
    let m = problem.model();
    let nf = n as f64;
    let pooled = GaussianModel::new(nf * m.mu0(), nf * m.mu1(), m.sigma() * nf.sqrt())
        .expect("scaling a valid model keeps it valid");
    problem.with_model(pooled).optimal_risk()
}

fn optimal_local_errors(problem: &DetectionProblem) -> ErrorPair {
    error_probabilities(problem.p0(), problem.costs(), problem.model())
}

/// Majority vote over `n` detectors that all use the true prior.
pub fn optimal_majority_risk(n: usize, problem: &DetectionProblem) -> f64 {
    assert!(n >= 1, "majority vote needs at least one detector");
    let profile = ClusterErrorProfile::single(optimal_local_errors(problem), n)
        .expect("optimal local errors form a valid profile");
    risk_from_errors(
        problem.p0(),
        majority_vote_errors(&profile),
        problem.costs(),
    )
}

/// Vote-count threshold γ of the Chair-Varshney fusion rule for `n`
/// identical Bayes-optimal local detectors.
///
/// The rule decides h1 iff the count is at least γ. Everything is evaluated
/// from log error probabilities so that local errors rounding to 0 or 1 in
/// plain arithmetic still give a finite threshold.
pub fn chair_varshney_gamma(n: usize, problem: &DetectionProblem) -> Result<f64> {
    let costs = problem.costs();
    let logs = log_error_probabilities(problem.p0(), costs, problem.model());
    let degenerate = || {
        let e = optimal_local_errors(problem);
        Error::DegenerateFusion {
            type_i: e.type_i,
            type_ii: e.type_ii,
        }
    };
    let all_finite = [
        logs.ln_type_i,
        logs.ln_one_minus_type_i,
        logs.ln_type_ii,
        logs.ln_one_minus_type_ii,
    ]
    .iter()
    .all(|v| v.is_finite());
    if !all_finite {
        return Err(degenerate());
    }
    // ln[(1 − pI)(1 − pII) / (pI·pII)], positive iff pI + pII < 1.
    let denominator =
        logs.ln_one_minus_type_i + logs.ln_one_minus_type_ii - logs.ln_type_i - logs.ln_type_ii;
    if denominator.is_nan() || denominator <= 0.0 {
        return Err(degenerate());
    }
    let p0 = problem.p0();
    let ln_prior_ratio = (p0 * costs.c10()).ln() - ((1.0 - p0) * costs.c01()).ln();
    let numerator = ln_prior_ratio - n as f64 * (logs.ln_type_ii - logs.ln_one_minus_type_i);
    let gamma = numerator / denominator;
    if !gamma.is_finite() {
        return Err(degenerate());
    }
    let nearest = gamma.round();
    if (gamma - nearest).abs() <= GAMMA_SNAP_TOL * gamma.abs().max(1.0) {
        Ok(nearest)
    } else {
        Ok(gamma)
    }
}

/// ⌈γ⌉ clamped into [0, n + 1]; 0 always decides h1, n + 1 never does.
pub fn chair_varshney_count_threshold(gamma: f64, n: usize) -> usize {
    let k = gamma.ceil();
    if k <= 0.0 {
        0
    } else if k >= (n + 1) as f64 {
        n + 1
    } else {
        k as usize
    }
}

pub fn chair_varshney_risk(n: usize, problem: &DetectionProblem) -> Result<f64> {
    let gamma = chair_varshney_gamma(n, problem)?;
    let k = chair_varshney_count_threshold(gamma, n);
    let profile = ClusterErrorProfile::single(optimal_local_errors(problem), n)?;
    let errors = count_threshold_errors(&profile, k);
    Ok(risk_from_errors(problem.p0(), errors, problem.costs()))
}

/// Risks that depend only on the problem and the population size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineRisks {
    pub centralized_risk: f64,
    pub optimal_majority_risk: f64,
    /// `None` when the Chair-Varshney rule is undefined for this problem.
    pub chair_varshney_risk: Option<f64>,
}

impl BaselineRisks {
    pub fn compute(n: usize, problem: &DetectionProblem) -> Self {
        BaselineRisks {
            centralized_risk: centralized_bayes_risk(n, problem),
            optimal_majority_risk: optimal_majority_risk(n, problem),
            chair_varshney_risk: chair_varshney_risk(n, problem).ok(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskReport {
    pub aggregate_risk: f64,
    pub centralized_risk: f64,
    pub optimal_majority_risk: f64,
    pub chair_varshney_risk: Option<f64>,
    /// `aggregate_risk − centralized_risk`.
    pub aggregate_bre: f64,
}

impl RiskReport {
    pub fn new(aggregate_risk: f64, baselines: BaselineRisks) -> Self {
        RiskReport {
            aggregate_risk,
            centralized_risk: baselines.centralized_risk,
            optimal_majority_risk: baselines.optimal_majority_risk,
            chair_varshney_risk: baselines.chair_varshney_risk,
            aggregate_bre: aggregate_risk - baselines.centralized_risk,
        }
    }

    pub fn compute(clusters: &ClusterSummary, problem: &DetectionProblem) -> Self {
        let baselines = BaselineRisks::compute(clusters.total_agents(), problem);
        Self::new(aggregate_bayes_risk(clusters, problem), baselines)
    }
}
