//! Binary Bayesian detection under a scalar Gaussian shift model.
//!
//! An agent observes `y ~ N(mu0, σ²)` under h0 or `y ~ N(mu1, σ²)` under h1
//! and runs a likelihood ratio test whose threshold is set by a *decision
//! weight* `a`, the prior on h0 the agent believes in. When `a` equals the
//! true prior the test is Bayes optimal; any other weight pays an excess
//! risk, the Bayes risk error divergence `d(p, a) = J(p, a) − J(p, p)`.

use crate::error::{Error, Result};
use crate::normal::{log_std_normal_cdf, log_std_normal_sf, std_normal_cdf, std_normal_sf};

/// Divergences between −DIVERGENCE_SLACK and 0 are rounding noise and clamp to 0.
pub const DIVERGENCE_SLACK: f64 = 1e-12;

/// Observation model: `N(mu0, σ²)` under h0 and `N(mu1, σ²)` under h1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianModel {
    mu0: f64,
    mu1: f64,
    sigma: f64,
}

impl GaussianModel {
    pub fn new(mu0: f64, mu1: f64, sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::invalid("sigma", "must be positive"));
        }
        if !(mu0.is_finite() && mu1.is_finite()) {
            return Err(Error::invalid("mu", "means must be finite"));
        }
        if mu1 <= mu0 {
            return Err(Error::invalid("mu1", "must exceed mu0"));
        }
        Ok(GaussianModel { mu0, mu1, sigma })
    }

    /// Means 0 and 1 with noise standard deviation `sigma`.
    pub fn unit_shift(sigma: f64) -> Result<Self> {
        Self::new(0.0, 1.0, sigma)
    }

    pub fn mu0(&self) -> f64 {
        self.mu0
    }

    pub fn mu1(&self) -> f64 {
        self.mu1
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// Costs of the two error kinds. Correct decisions cost nothing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostPair {
    c10: f64,
    c01: f64,
}

impl CostPair {
    /// `c10` is the cost of deciding h1 under h0, `c01` of deciding h0 under h1.
    pub fn new(c10: f64, c01: f64) -> Result<Self> {
        if !(c10.is_finite() && c10 > 0.0) {
            return Err(Error::invalid("c10", "must be positive"));
        }
        if !(c01.is_finite() && c01 > 0.0) {
            return Err(Error::invalid("c01", "must be positive"));
        }
        Ok(CostPair { c10, c01 })
    }

    pub fn unit() -> Self {
        CostPair { c10: 1.0, c01: 1.0 }
    }

    pub fn c10(&self) -> f64 {
        self.c10
    }

    pub fn c01(&self) -> f64 {
        self.c01
    }
}

impl Default for CostPair {
    fn default() -> Self {
        Self::unit()
    }
}

/// A detection task with its true prior on h0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionProblem {
    p0: f64,
    costs: CostPair,
    model: GaussianModel,
}

impl DetectionProblem {
    pub fn new(p0: f64, costs: CostPair, model: GaussianModel) -> Result<Self> {
        check_probability("p0", p0)?;
        Ok(DetectionProblem { p0, costs, model })
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn costs(&self) -> CostPair {
        self.costs
    }

    pub fn model(&self) -> GaussianModel {
        self.model
    }

    /// Same prior and costs, different observation model.
    pub fn with_model(&self, model: GaussianModel) -> Self {
        DetectionProblem { model, ..*self }
    }

    /// Risk of the Bayes-optimal single detector, J(p0, p0).
    pub fn optimal_risk(&self) -> f64 {
        bayes_risk(self.p0, self.p0, self.costs, self.model)
    }
}

pub(crate) fn check_probability(name: &'static str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::invalid(name, "must lie in [0, 1]"))
    }
}

/// Type I (false alarm) and Type II (miss) probabilities of a test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorPair {
    pub type_i: f64,
    pub type_ii: f64,
}

/// Natural logs of both error probabilities and their complements.
///
/// These stay finite when the error probabilities round to 0 or 1 in plain
/// arithmetic, which matters for fusion rules built from log-likelihoods.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogErrorPair {
    pub ln_type_i: f64,
    pub ln_one_minus_type_i: f64,
    pub ln_type_ii: f64,
    pub ln_one_minus_type_ii: f64,
}

/// Observation threshold η of the likelihood ratio test with decision weight
/// `a`: decide h1 iff y > η. Returns −∞ for a = 0 and +∞ for a = 1.
pub fn lrt_threshold(a: f64, costs: CostPair, model: GaussianModel) -> f64 {
    debug_assert!(
        (0.0..=1.0).contains(&a),
        "decision weight {a} outside [0, 1]"
    );
    if a <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if a >= 1.0 {
        return f64::INFINITY;
    }
    let ln_tau = a.ln() - (1.0 - a).ln() + costs.c10.ln() - costs.c01.ln();
    let shift = model.mu1 - model.mu0;
    model.sigma * model.sigma * ln_tau / shift + 0.5 * (model.mu0 + model.mu1)
}

pub fn error_probabilities(a: f64, costs: CostPair, model: GaussianModel) -> ErrorPair {
    let eta = lrt_threshold(a, costs, model);
    if eta == f64::NEG_INFINITY {
        return ErrorPair {
            type_i: 1.0,
            type_ii: 0.0,
        };
    }
    if eta == f64::INFINITY {
        return ErrorPair {
            type_i: 0.0,
            type_ii: 1.0,
        };
    }
    ErrorPair {
        type_i: std_normal_sf((eta - model.mu0) / model.sigma),
        type_ii: std_normal_cdf((eta - model.mu1) / model.sigma),
    }
}

pub fn log_error_probabilities(a: f64, costs: CostPair, model: GaussianModel) -> LogErrorPair {
    let eta = lrt_threshold(a, costs, model);
    let z0 = (eta - model.mu0) / model.sigma;
    let z1 = (eta - model.mu1) / model.sigma;
    LogErrorPair {
        ln_type_i: log_std_normal_sf(z0),
        ln_one_minus_type_i: log_std_normal_cdf(z0),
        ln_type_ii: log_std_normal_cdf(z1),
        ln_one_minus_type_ii: log_std_normal_sf(z1),
    }
}

/// Bayes risk J(p0, a) of the test with weight `a` when the true prior is `p0`.
pub fn bayes_risk(p0: f64, a: f64, costs: CostPair, model: GaussianModel) -> f64 {
    risk_from_errors(p0, error_probabilities(a, costs, model), costs)
}

/// Cost-and-prior weighting of an error pair. Works for any decision rule,
/// not just a single likelihood ratio test.
pub fn risk_from_errors(p0: f64, errors: ErrorPair, costs: CostPair) -> f64 {
    costs.c10 * p0 * errors.type_i + costs.c01 * (1.0 - p0) * errors.type_ii
}

/// Bayes risk error divergence d(p, a) = J(p, a) − J(p, p).
pub fn bre_divergence(p: f64, a: f64, costs: CostPair, model: GaussianModel) -> f64 {
    divergence_from_errors(
        p,
        error_probabilities(p, costs, model),
        error_probabilities(a, costs, model),
        costs,
    )
}

/// d(p, a) from precomputed error pairs at `p` and at `a`.
///
/// Differencing the error probabilities before weighting keeps the result
/// accurate when both risks are close. Panics if the result is negative
/// beyond rounding noise, since that would mean the matched weight is not
/// optimal and every neighborhood built on it is suspect.
pub fn divergence_from_errors(p: f64, at_p: ErrorPair, at_a: ErrorPair, costs: CostPair) -> f64 {
    let d = costs.c10 * p * (at_a.type_i - at_p.type_i)
        + costs.c01 * (1.0 - p) * (at_a.type_ii - at_p.type_ii);
    if d >= 0.0 {
        d
    } else {
        assert!(
            d > -DIVERGENCE_SLACK,
            "Bayes risk error divergence {d:e} is negative beyond rounding (p={p})"
        );
        0.0
    }
}
