//! Plan files: one `key = value` pair per line, `#` starts a comment.
//!
//! ```text
//! n = 101
//! theta = 0.1
//! distribution = uniform          # or: beta
//! alpha = 0.6666666666666666      # beta only
//! beta = 1                        # beta only
//! true_p0 = 0.5
//! c10 = 1
//! c01 = 1
//! sigma_grid = logspace(0.125, 64, 20)   # or a comma-separated list
//! trials = 200
//! base_seed = 0
//! ```
//!
//! `theta`, `distribution` and `true_p0` are required. The rest default to
//! n = 101, unit costs, the 20-point grid above, 200 trials and seed 0.

use std::collections::HashSet;
use std::fmt::Write as _;

use crate::detection::CostPair;
use crate::error::{Error, Result};
use crate::experiments::{default_sigma_grid, log_spaced, ExperimentPlan, InitialDistribution};

const KEYS: &[&str] = &[
    "n",
    "theta",
    "distribution",
    "alpha",
    "beta",
    "true_p0",
    "c10",
    "c01",
    "sigma_grid",
    "trials",
    "base_seed",
];

struct Entry<'a> {
    line: usize,
    key: &'a str,
    value: &'a str,
}

impl Entry<'_> {
    fn fail(&self, reason: impl Into<String>) -> Error {
        Error::Plan {
            line: self.line,
            key: self.key.to_string(),
            reason: reason.into(),
        }
    }

    fn real(&self) -> Result<f64> {
        parse_real(self.value).map_err(|r| self.fail(r))
    }

    fn integer<T: std::str::FromStr>(&self) -> Result<T> {
        self.value
            .parse()
            .map_err(|_| self.fail(format!("`{}` is not a valid integer", self.value)))
    }

    fn sigma_grid(&self) -> Result<Vec<f64>> {
        parse_sigma_grid(self.value).map_err(|r| self.fail(r))
    }
}

/// Parses a noise grid: `logspace(lo, hi, points)` or a comma-separated list.
/// Only the syntax is checked here; positivity is left to plan validation.
pub fn parse_sigma_grid(text: &str) -> std::result::Result<Vec<f64>, String> {
    let text = text.trim();
    if let Some(args) = text
        .strip_prefix("logspace(")
        .and_then(|rest| rest.strip_suffix(')'))
    {
        let parts: Vec<&str> = args.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err("logspace takes (lo, hi, points)".into());
        }
        let lo = parse_real(parts[0])?;
        let hi = parse_real(parts[1])?;
        let points: usize = parts[2]
            .parse()
            .map_err(|_| format!("`{}` is not a point count", parts[2]))?;
        if !(lo > 0.0 && hi > lo) || points == 0 {
            return Err("logspace needs 0 < lo < hi and at least one point".into());
        }
        return Ok(log_spaced(lo, hi, points));
    }
    text.split(',').map(|s| parse_real(s.trim())).collect()
}

/// Locale-independent decimal parsing that rejects NaN and infinities.
pub fn parse_real(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format!("`{s}` is not a finite decimal number")),
    }
}

/// Parses and validates a plan file. Warnings from validation are returned
/// alongside the plan.
pub fn parse_plan(text: &str) -> Result<(ExperimentPlan, Vec<String>)> {
    let mut entries = Vec::new();
    let mut seen = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::Plan {
            line,
            key: content.to_string(),
            reason: "expected `key = value`".into(),
        })?;
        let entry = Entry {
            line,
            key: key.trim(),
            value: value.trim(),
        };
        if !KEYS.contains(&entry.key) {
            return Err(entry.fail("unknown key"));
        }
        if !seen.insert(entry.key) {
            return Err(entry.fail("given more than once"));
        }
        entries.push(entry);
    }

    let find = |key: &str| entries.iter().find(|e| e.key == key);
    let missing = |key: &str| Error::Plan {
        line: 0,
        key: key.to_string(),
        reason: "required key is missing".into(),
    };

    let defaults = ExperimentPlan::first_example();
    let n = find("n")
        .map(Entry::integer)
        .transpose()?
        .unwrap_or(defaults.n);
    let theta = find("theta").ok_or_else(|| missing("theta"))?.real()?;
    let true_p0 = find("true_p0").ok_or_else(|| missing("true_p0"))?.real()?;

    let dist_entry = find("distribution").ok_or_else(|| missing("distribution"))?;
    let alpha = find("alpha");
    let beta = find("beta");
    let distribution = match dist_entry.value {
        "uniform" => {
            if let Some(e) = alpha.or(beta) {
                return Err(e.fail("only applies to the beta distribution"));
            }
            InitialDistribution::Uniform01
        }
        "beta" => {
            let a = alpha.ok_or_else(|| missing("alpha"))?;
            let b = beta.map(Entry::real).transpose()?.unwrap_or(1.0);
            InitialDistribution::beta(a.real()?, b).map_err(|e| a.fail(e.to_string()))?
        }
        other => return Err(dist_entry.fail(format!("`{other}` is not uniform or beta"))),
    };

    let c10 = find("c10").map(Entry::real).transpose()?.unwrap_or(1.0);
    let c01 = find("c01").map(Entry::real).transpose()?.unwrap_or(1.0);
    let costs = CostPair::new(c10, c01).map_err(|e| {
        let key = if c10 > 0.0 { "c01" } else { "c10" };
        find(key).map_or_else(|| missing(key), |entry| entry.fail(e.to_string()))
    })?;

    let sigma_grid = find("sigma_grid")
        .map(Entry::sigma_grid)
        .transpose()?
        .unwrap_or_else(default_sigma_grid);
    let trials = find("trials")
        .map(Entry::integer)
        .transpose()?
        .unwrap_or(defaults.trials);
    let base_seed = find("base_seed")
        .map(Entry::integer)
        .transpose()?
        .unwrap_or(defaults.base_seed);

    let plan = ExperimentPlan {
        n,
        theta,
        distribution,
        true_p0,
        costs,
        sigma_grid,
        trials,
        base_seed,
    };
    let warnings = plan.validate().map_err(|e| match e {
        Error::InvalidParameter { name, reason } => match find(name) {
            Some(entry) => entry.fail(reason),
            None => Error::Plan {
                line: 0,
                key: name.to_string(),
                reason,
            },
        },
        other => other,
    })?;
    Ok((plan, warnings))
}

/// Writes a plan in the format `parse_plan` reads. Reals use the shortest
/// representation that parses back to the same value.
pub fn format_plan(plan: &ExperimentPlan) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "n = {}", plan.n);
    let _ = writeln!(out, "theta = {}", plan.theta);
    match plan.distribution {
        InitialDistribution::Uniform01 => {
            let _ = writeln!(out, "distribution = uniform");
        }
        InitialDistribution::Beta { alpha, beta } => {
            let _ = writeln!(out, "distribution = beta");
            let _ = writeln!(out, "alpha = {alpha}");
            let _ = writeln!(out, "beta = {beta}");
        }
    }
    let _ = writeln!(out, "true_p0 = {}", plan.true_p0);
    let _ = writeln!(out, "c10 = {}", plan.costs.c10());
    let _ = writeln!(out, "c01 = {}", plan.costs.c01());
    let grid: Vec<String> = plan.sigma_grid.iter().map(f64::to_string).collect();
    let _ = writeln!(out, "sigma_grid = {}", grid.join(", "));
    let _ = writeln!(out, "trials = {}", plan.trials);
    let _ = writeln!(out, "base_seed = {}", plan.base_seed);
    out
}
