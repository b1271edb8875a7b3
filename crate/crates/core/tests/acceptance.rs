//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use bcod::detection::{
    bre_divergence, error_probabilities, CostPair, DetectionProblem, GaussianModel,
};
use bcod::dynamics::{detect_clusters, run_dynamics, DynamicsConfig, Population, ProximityMeasure};
use bcod::experiments::{run_sweep, run_trial, InitialDistribution};
use bcod::fusion::{
    chair_varshney_gamma, chair_varshney_risk, majority_threshold, majority_vote_errors,
    optimal_majority_risk, ClusterErrorProfile,
};
use bcod::plan::{format_plan, parse_plan};
use bcod::{io, ErrorPair, ExperimentPlan, SweepResult};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

struct Report {
    failures: usize,
}

impl Report {
    fn run(
        &mut self,
        id: &str,
        title: &str,
        budget: Option<Duration>,
        check: impl FnOnce() -> Outcome,
    ) {
        let start = Instant::now();
        let mut result = check();
        let elapsed = start.elapsed();
        if let Some(limit) = budget {
            if elapsed > limit {
                result.pass = false;
                result
                    .detail
                    .push_str(&format!("; over the {limit:?} budget"));
            }
        }
        if !result.pass {
            self.failures += 1;
        }
        println!(
            "[{}] {id:>2} {title}: {} ({elapsed:.2?})",
            if result.pass { "PASS" } else { "FAIL" },
            result.detail
        );
    }
}

fn unit_model(sigma: f64) -> GaussianModel {
    GaussianModel::unit_shift(sigma).unwrap()
}

fn divergence_suite() -> Outcome {
    let costs = CostPair::unit();
    let grid: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
    let mut violations = Vec::new();
    for sigma in [0.5, 1.0, 4.0, 16.0] {
        let model = unit_model(sigma);
        for &p in &grid {
            let row: Vec<f64> = grid
                .iter()
                .map(|&a| bre_divergence(p, a, costs, model))
                .collect();
            if bre_divergence(p, p, costs, model) > 1e-12 {
                violations.push(format!("d(p,p) at σ={sigma} p={p}"));
            }
            for (k, &d) in row.iter().enumerate() {
                if d < -1e-12 {
                    violations.push(format!("negative at σ={sigma} p={p} a={}", grid[k]));
                }
                if k > 0 {
                    let (prev, a) = (row[k - 1], grid[k]);
                    if a <= p && d > prev + 1e-10 {
                        violations.push(format!("rises left of p at σ={sigma} p={p} a={a}"));
                    }
                    if grid[k - 1] >= p && d < prev - 1e-10 {
                        violations.push(format!("falls right of p at σ={sigma} p={p} a={a}"));
                    }
                }
            }
        }
    }
    outcome(
        violations.is_empty(),
        format!(
            "{} violations on 4×101×101 points {:?}",
            violations.len(),
            violations.first()
        ),
    )
}

struct RandomRun {
    initial: Vec<f64>,
    config: DynamicsConfig,
}

fn random_runs() -> Vec<RandomRun> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    (0..1000)
        .map(|k| {
            let n = rng.gen_range(1..=50);
            let initial = (0..n).map(|_| rng.gen::<f64>()).collect();
            let config = if k % 2 == 0 {
                DynamicsConfig::new(rng.gen_range(0.02..0.4), ProximityMeasure::AbsoluteError)
            } else {
                let sigma = 2f64.powf(rng.gen_range(-3.0..6.0));
                let measure = ProximityMeasure::BayesRiskError {
                    costs: CostPair::unit(),
                    model: unit_model(sigma),
                };
                DynamicsConfig::new(rng.gen_range(0.005..0.2), measure)
            }
            .unwrap();
            RandomRun { initial, config }
        })
        .collect()
}

fn order_preservation(runs: &[RandomRun]) -> Outcome {
    let mut violations = 0usize;
    for run in runs {
        let t = run_dynamics(&Population::new(run.initial.clone()).unwrap(), &run.config).unwrap();
        let w0 = &run.initial;
        for snap in &t.snapshots {
            let s = snap.weights();
            for i in 0..s.len() {
                for j in 0..s.len() {
                    if w0[i] <= w0[j] && s[i] > s[j] + 1e-12 {
                        violations += 1;
                    }
                }
            }
        }
    }
    outcome(
        violations == 0,
        format!("{violations} ordering violations over {} runs", runs.len()),
    )
}

fn convergence_and_separation(runs: &[RandomRun]) -> Outcome {
    let mut not_converged = 0usize;
    let mut separation_failures = Vec::new();
    let mut absolute_failures = 0usize;
    let mut one_way_failures = 0usize;
    let mut max_steps = 0usize;
    for (k, run) in runs.iter().enumerate() {
        let t = match run_dynamics(&Population::new(run.initial.clone()).unwrap(), &run.config) {
            Ok(t) => t,
            Err(_) => {
                not_converged += 1;
                continue;
            }
        };
        max_steps = max_steps.max(t.steps_to_convergence);
        let clusters = detect_clusters(t.final_population(), run.config.cluster_tol());
        if let Some(sep) = clusters.min_separation(run.config.measure()) {
            if sep < run.config.theta() - 1e-9 {
                separation_failures.push((k, sep, run.config.theta()));
                if run.config.measure() == ProximityMeasure::AbsoluteError {
                    absolute_failures += 1;
                }
            }
        }
        // Diagnostic only: does at least one direction of every pair exceed θ?
        let m = run.config.measure();
        let w = clusters.weights();
        for i in 0..w.len() {
            for j in i + 1..w.len() {
                if m.between(w[i], w[j]).max(m.between(w[j], w[i])) < run.config.theta() - 1e-9 {
                    one_way_failures += 1;
                }
            }
        }
    }
    outcome(
        not_converged == 0 && separation_failures.is_empty(),
        format!(
            "{not_converged} runs without a fixed point (max steps {max_steps}); {} runs with a cluster pair \
             closer than θ in the weaker direction ({absolute_failures} in absolute mode), first (run, sep, θ) = {:?}; \
             pairs closer than θ in both directions: {one_way_failures}",
            separation_failures.len(),
            separation_failures.first()
        ),
    )
}

fn fusion_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_enum = 0f64;
    let mut worst_literal = 0f64;
    for n in 1..=15usize {
        for _ in 0..200 {
            let m = rng.gen_range(1..=n.min(4));
            let mut sizes = vec![1usize; m];
            for _ in m..n {
                sizes[rng.gen_range(0..m)] += 1;
            }
            let errors: Vec<ErrorPair> = (0..m)
                .map(|_| ErrorPair {
                    type_i: rng.gen(),
                    type_ii: rng.gen(),
                })
                .collect();
            let profile = ClusterErrorProfile::new(errors.clone(), sizes.clone()).unwrap();
            let got = majority_vote_errors(&profile);
            let expand = |f: fn(&ErrorPair) -> f64| -> Vec<f64> {
                errors
                    .iter()
                    .zip(&sizes)
                    .flat_map(|(e, &s)| vec![f(e); s])
                    .collect()
            };
            let (fa, miss) = common::enumerate_count_rule(
                &expand(|e| e.type_i),
                &expand(|e| e.type_ii),
                majority_threshold(n),
            );
            worst_enum = worst_enum
                .max((got.type_i - fa).abs())
                .max((got.type_ii - miss).abs());
            if m <= 3 {
                let p_i: Vec<f64> = errors.iter().map(|e| e.type_i).collect();
                worst_literal = worst_literal
                    .max((got.type_i - common::literal_majority_tail(&sizes, &p_i)).abs());
                if n % 2 == 1 {
                    let p_ii: Vec<f64> = errors.iter().map(|e| e.type_ii).collect();
                    worst_literal = worst_literal
                        .max((got.type_ii - common::literal_majority_tail(&sizes, &p_ii)).abs());
                }
            }
        }
    }
    outcome(
        worst_enum <= 1e-10 && worst_literal <= 1e-12,
        format!("max |Δ| vs enumeration {worst_enum:.2e} (≤1e-10), vs written-out sums {worst_literal:.2e} (≤1e-12)"),
    )
}

fn monte_carlo() -> Outcome {
    const SAMPLES: usize = 1_000_000;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut misses = Vec::new();
    for k in 0..10 {
        let a: f64 = rng.gen_range(0.05..0.95);
        let sigma: f64 = rng.gen_range(0.25..8.0);
        let exact = error_probabilities(a, CostPair::unit(), unit_model(sigma));
        let eta = common::reference_threshold(a, 1.0, 1.0, 0.0, 1.0, sigma);
        let (fa, miss) = common::simulate_local_errors(&mut rng, eta, 0.0, 1.0, sigma, SAMPLES);
        if !common::within_standard_errors(exact.type_i, fa, SAMPLES, 4.0)
            || !common::within_standard_errors(exact.type_ii, miss, SAMPLES, 4.0)
        {
            misses.push(format!("detection #{k}"));
        }
    }
    for k in 0..10 {
        let sigma: f64 = rng.gen_range(0.5..4.0);
        let m = rng.gen_range(1..=3);
        let weights: Vec<f64> = (0..m).map(|_| rng.gen_range(0.1..0.9)).collect();
        let sizes: Vec<usize> = (0..m).map(|_| rng.gen_range(1..=5)).collect();
        let errors = weights
            .iter()
            .map(|&a| error_probabilities(a, CostPair::unit(), unit_model(sigma)))
            .collect();
        let exact = majority_vote_errors(&ClusterErrorProfile::new(errors, sizes.clone()).unwrap());
        let thresholds: Vec<f64> = weights
            .iter()
            .zip(&sizes)
            .flat_map(|(&a, &s)| vec![common::reference_threshold(a, 1.0, 1.0, 0.0, 1.0, sigma); s])
            .collect();
        let (fa, miss) = common::simulate_majority(&mut rng, &thresholds, 0.0, 1.0, sigma, SAMPLES);
        if !common::within_standard_errors(exact.type_i, fa, SAMPLES, 4.0)
            || !common::within_standard_errors(exact.type_ii, miss, SAMPLES, 4.0)
        {
            misses.push(format!("fusion #{k}"));
        }
    }
    outcome(
        misses.is_empty(),
        format!("20 configurations at 10^6 samples, outside 4 SE: {misses:?}"),
    )
}

fn single_sigma_trials() -> Outcome {
    let mut plan = ExperimentPlan::first_example();
    plan.sigma_grid = vec![4.0];
    plan.trials = 50;
    let mut max_steps = 0;
    let mut clusters = 0usize;
    for t in 0..plan.trials {
        match run_trial(&plan, 0, t) {
            Ok(o) => {
                max_steps = max_steps.max(o.steps);
                clusters += o.clusters.count();
            }
            Err(e) => return outcome(false, format!("trial {t}: {e}")),
        }
    }
    let mean = clusters as f64 / plan.trials as f64;
    outcome(
        max_steps <= 30 && mean >= 2.0,
        format!("max steps {max_steps} (≤30), mean clusters {mean:.2} (≥2)"),
    )
}

fn sweep_from_text(plan: &ExperimentPlan, jobs: Option<usize>) -> (SweepResult, Vec<u8>) {
    let (parsed, _) = parse_plan(&format_plan(plan)).expect("plan text parses");
    let result = run_sweep(&parsed, jobs).expect("sweep runs");
    let mut csv = Vec::new();
    io::write_sweep(&mut csv, &result.records).unwrap();
    (result, csv)
}

fn cluster_shape(result: &SweepResult) -> Outcome {
    let means: Vec<f64> = result.records.iter().map(|r| r.mean_clusters).collect();
    let first = means[0];
    let last = *means.last().unwrap();
    let (peak_at, peak) =
        means[1..means.len() - 1]
            .iter()
            .enumerate()
            .fold(
                (0, f64::MIN),
                |acc, (k, &m)| if m > acc.1 { (k + 1, m) } else { acc },
            );
    let curve: Vec<String> = means.iter().map(|m| format!("{m:.2}")).collect();
    outcome(
        first == 1.0 && last == 1.0 && peak >= 2.0,
        format!(
            "endpoints {first:.2} at σ={} and {last:.2} at σ={} (both =1), interior max {peak:.2} at σ={:.3} (≥2); curve [{}]",
            result.records[0].sigma,
            result.records.last().unwrap().sigma,
            result.records[peak_at].sigma,
            curve.join(" ")
        ),
    )
}

fn risk_shape(result: &SweepResult) -> Outcome {
    let mut problems = Vec::new();
    for r in &result.records {
        match r.chair_varshney_risk {
            Some(cv) => {
                if r.centralized_risk > cv || cv > r.optimal_majority_risk + 1e-12 {
                    problems.push(format!("ordering at σ={}", r.sigma));
                }
            }
            None => problems.push(format!("undefined Chair-Varshney risk at σ={}", r.sigma)),
        }
    }
    let negative = result
        .trials
        .iter()
        .flatten()
        .filter(|t| t.aggregate_bre < -1e-12)
        .count();
    if negative > 0 {
        problems.push(format!("{negative} trials with negative aggregate BRE"));
    }
    let bre: Vec<f64> = result
        .records
        .iter()
        .map(|r| r.mean_aggregate_bre)
        .collect();
    let (first, last) = (bre[0], *bre.last().unwrap());
    let peak = bre[1..bre.len() - 1]
        .iter()
        .cloned()
        .fold(f64::MIN, f64::max);
    if !(peak > first && peak > last) {
        problems.push(format!(
            "no interior BRE maximum (ends {first:.3e}, {last:.3e}, peak {peak:.3e})"
        ));
    }
    outcome(
        problems.is_empty(),
        format!(
            "mean aggregate BRE ends {first:.3e}/{last:.3e}, interior max {peak:.3e}; issues {problems:?}"
        ),
    )
}

fn chair_varshney_symmetry() -> Outcome {
    let n = 101;
    let mut worst_gamma = 0f64;
    let mut worst_risk = 0f64;
    for sigma in [0.5, 1.0, 4.0, 16.0] {
        let problem = DetectionProblem::new(0.5, CostPair::unit(), unit_model(sigma)).unwrap();
        match (
            chair_varshney_gamma(n, &problem),
            chair_varshney_risk(n, &problem),
        ) {
            (Ok(gamma), Ok(risk)) => {
                worst_gamma = worst_gamma.max((gamma - n as f64 / 2.0).abs());
                worst_risk = worst_risk.max((risk - optimal_majority_risk(n, &problem)).abs());
            }
            (Err(e), _) | (_, Err(e)) => return outcome(false, format!("σ={sigma}: {e}")),
        }
    }
    outcome(
        worst_gamma <= 1e-9 && worst_risk <= 1e-12,
        format!("max |γ − n/2| {worst_gamma:.2e} (≤1e-9), max |Δrisk| {worst_risk:.2e} (≤1e-12)"),
    )
}

fn beta_sample_mean() -> Outcome {
    let dist = InitialDistribution::beta(2.0 / 3.0, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let draws = dist.sample(&mut rng, 1_000_000);
    let mean = draws.iter().sum::<f64>() / draws.len() as f64;
    outcome(
        (mean - 0.4).abs() <= 0.002,
        format!("sample mean {mean:.5} (0.4 ± 0.002)"),
    )
}

fn main() -> ExitCode {
    let mut report = Report { failures: 0 };
    let secs = Duration::from_secs;

    report.run(
        "1",
        "divergence nonnegative and unimodal",
        Some(secs(5)),
        divergence_suite,
    );
    let runs = random_runs();
    report.run("2", "order preservation", Some(secs(60)), || {
        order_preservation(&runs)
    });
    report.run("3", "convergence and cluster separation", None, || {
        convergence_and_separation(&runs)
    });
    report.run(
        "4",
        "fusion oracle equivalence",
        Some(secs(60)),
        fusion_oracles,
    );
    report.run("5", "Monte Carlo concordance", None, monte_carlo);
    report.run(
        "6",
        "first example at σ=4",
        Some(secs(120)),
        single_sigma_trials,
    );

    let mut first = ExperimentPlan::first_example();
    first.trials = 50;
    let sweep_start = Instant::now();
    let (first_sweep, first_csv) = sweep_from_text(&first, None);
    let first_elapsed = sweep_start.elapsed();
    report.run("7", "cluster count rises then falls with σ", None, || {
        let mut o = cluster_shape(&first_sweep);
        o.detail
            .push_str(&format!("; sweep took {first_elapsed:.2?}"));
        if first_elapsed > secs(600) {
            o.pass = false;
        }
        o
    });
    report.run("8", "risk ordering and aggregate BRE shape", None, || {
        risk_shape(&first_sweep)
    });
    report.run(
        "9",
        "Chair-Varshney reduces to majority when symmetric",
        None,
        chair_varshney_symmetry,
    );

    let mut second = ExperimentPlan::second_example();
    second.trials = 50;
    let (second_sweep, _) = sweep_from_text(&second, None);
    report.run("10a", "second example: cluster count shape", None, || {
        cluster_shape(&second_sweep)
    });
    report.run(
        "10b",
        "second example: risk ordering and BRE shape",
        None,
        || risk_shape(&second_sweep),
    );
    report.run("10c", "Beta(2/3,1) sample mean", None, beta_sample_mean);

    report.run(
        "11",
        "sweep CSV is byte-identical across runs",
        None,
        || {
            let (_, again) = sweep_from_text(&first, Some(2));
            outcome(
                again == first_csv,
                format!(
                    "{} bytes, identical: {}",
                    first_csv.len(),
                    again == first_csv
                ),
            )
        },
    );

    println!("{} criteria failed", report.failures);
    if report.failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
