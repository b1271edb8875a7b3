//! Reference computations that avoid the library's fusion and detection code
//! paths. Shared by the property, Monte Carlo and acceptance targets.
#![allow(dead_code)]

use rand::Rng;
use rand_distr::StandardNormal;

/// Exact binomial coefficient as f64; 0 outside 0 ≤ k ≤ n.
pub fn choose(n: i64, k: i64) -> f64 {
    if k < 0 || k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut c = 1.0;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c
}

fn term(n: i64, k: i64, p: f64) -> f64 {
    if k < 0 || k > n {
        return 0.0;
    }
    choose(n, k) * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)
}

fn ceil_half(n: i64) -> i64 {
    (n + 1) / 2
}

/// P(at least ⌈n/2⌉ of the agents err) written out as the nested sums for
/// one, two and three clusters. `p[k]` is the per-agent probability for
/// cluster k.
pub fn literal_majority_tail(sizes: &[usize], p: &[f64]) -> f64 {
    let n: i64 = sizes.iter().map(|&s| s as i64).sum();
    let sz: Vec<i64> = sizes.iter().map(|&s| s as i64).collect();
    let mut total = 0.0;
    match sizes.len() {
        1 => {
            for j in ceil_half(n)..=n {
                total += term(sz[0], j, p[0]);
            }
        }
        2 => {
            for j in ceil_half(n)..=n {
                for k in 0..=j {
                    total += term(sz[0], j - k, p[0]) * term(sz[1], k, p[1]);
                }
            }
        }
        3 => {
            for j in ceil_half(n)..=n {
                for k in 0..=j {
                    let outer = term(sz[0], j - k, p[0]);
                    let mut inner = 0.0;
                    for l in 0..=k {
                        inner += term(sz[1], k - l, p[1]) * term(sz[2], l, p[2]);
                    }
                    total += outer * inner;
                }
            }
        }
        m => panic!("literal formula written for up to three clusters, got {m}"),
    }
    total
}

/// Enumerates all 2^n joint local decisions. Returns (P(decide h1 | h0),
/// P(decide h0 | h1)) for the rule "h1 iff #h1-votes ≥ threshold".
pub fn enumerate_count_rule(
    per_agent_type_i: &[f64],
    per_agent_type_ii: &[f64],
    threshold: usize,
) -> (f64, f64) {
    let n = per_agent_type_i.len();
    assert!(n <= 20);
    let mut false_alarm = 0.0;
    let mut miss = 0.0;
    for mask in 0u32..(1u32 << n) {
        let votes = mask.count_ones() as usize;
        let mut prob_h0 = 1.0;
        let mut prob_h1 = 1.0;
        for i in 0..n {
            let votes_h1 = mask & (1 << i) != 0;
            prob_h0 *= if votes_h1 {
                per_agent_type_i[i]
            } else {
                1.0 - per_agent_type_i[i]
            };
            prob_h1 *= if votes_h1 {
                1.0 - per_agent_type_ii[i]
            } else {
                per_agent_type_ii[i]
            };
        }
        if votes >= threshold {
            false_alarm += prob_h0;
        } else {
            miss += prob_h1;
        }
    }
    (false_alarm, miss)
}

/// Gaussian-shift LRT threshold, derived independently: decide h1 iff
/// y > σ²·ln(a·c10 / ((1−a)·c01)) / (μ1 − μ0) + (μ0 + μ1)/2.
pub fn reference_threshold(a: f64, c10: f64, c01: f64, mu0: f64, mu1: f64, sigma: f64) -> f64 {
    if a == 0.0 {
        return f64::NEG_INFINITY;
    }
    if a == 1.0 {
        return f64::INFINITY;
    }
    sigma * sigma * ((a * c10) / ((1.0 - a) * c01)).ln() / (mu1 - mu0) + 0.5 * (mu0 + mu1)
}

/// Empirical (Type I, Type II) rates of one LRT agent from `samples`
/// observations under each hypothesis.
pub fn simulate_local_errors<R: Rng>(
    rng: &mut R,
    threshold: f64,
    mu0: f64,
    mu1: f64,
    sigma: f64,
    samples: usize,
) -> (f64, f64) {
    let mut false_alarms = 0usize;
    let mut misses = 0usize;
    for _ in 0..samples {
        let z0: f64 = rng.sample(StandardNormal);
        let z1: f64 = rng.sample(StandardNormal);
        if mu0 + sigma * z0 > threshold {
            false_alarms += 1;
        }
        if mu1 + sigma * z1 <= threshold {
            misses += 1;
        }
    }
    (
        false_alarms as f64 / samples as f64,
        misses as f64 / samples as f64,
    )
}

/// Empirical global (Type I, Type II) rates of majority vote over agents
/// with the given observation thresholds, simulating raw observations.
pub fn simulate_majority<R: Rng>(
    rng: &mut R,
    thresholds: &[f64],
    mu0: f64,
    mu1: f64,
    sigma: f64,
    trials: usize,
) -> (f64, f64) {
    let n = thresholds.len();
    let need = n.div_ceil(2);
    let mut false_alarms = 0usize;
    let mut misses = 0usize;
    for _ in 0..trials {
        let mut votes_h0 = 0usize;
        let mut votes_h1 = 0usize;
        for &eta in thresholds {
            let z0: f64 = rng.sample(StandardNormal);
            let z1: f64 = rng.sample(StandardNormal);
            votes_h0 += usize::from(mu0 + sigma * z0 > eta);
            votes_h1 += usize::from(mu1 + sigma * z1 > eta);
        }
        false_alarms += usize::from(votes_h0 >= need);
        misses += usize::from(votes_h1 < need);
    }
    (
        false_alarms as f64 / trials as f64,
        misses as f64 / trials as f64,
    )
}

/// Standard error of a proportion estimate.
pub fn standard_error(p: f64, samples: usize) -> f64 {
    (p * (1.0 - p) / samples as f64).sqrt()
}

/// Does an estimate sit within `k` standard errors of the exact value? A
/// floor of one count keeps near-0/1 probabilities from demanding exactness.
pub fn within_standard_errors(exact: f64, estimate: f64, samples: usize, k: f64) -> bool {
    let se = standard_error(exact, samples).max(1.0 / samples as f64);
    (exact - estimate).abs() <= k * se
}

/// Φ by composite Simpson quadrature of the density over [-12, x]. Slow but
/// independent of erfc; good to ~1e-13 on moderate arguments.
pub fn quadrature_normal_cdf(x: f64) -> f64 {
    let lo = -12.0;
    if x <= lo {
        return 0.0;
    }
    let steps = 200_000;
    let h = (x - lo) / steps as f64;
    let pdf = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut s = pdf(lo) + pdf(x);
    for i in 1..steps {
        let t = lo + i as f64 * h;
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * pdf(t);
    }
    s * h / 3.0
}
