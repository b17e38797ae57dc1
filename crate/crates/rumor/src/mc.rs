//! Replicated-trial Monte Carlo engine with deterministic per-trial
//! streams, Bernoulli estimators with standard errors, and the chi-square /
//! Kolmogorov-Smirnov tests used by the verification suites.
//!
//! Every trial owns a private stream derived from (master seed, trial
//! index), so results are byte-identical across runs and worker counts.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};
use thiserror::Error;

use crate::dist::RadiusDistribution;
use crate::renewal::{mu_sigma, Mean, Variance};
use crate::rfp::simulate_spreader_count;

#[derive(Debug, Error, PartialEq)]
pub enum McError {
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("chi-square bucketing degenerated to fewer than 2 buckets")]
    DegenerateBuckets,
    #[error("parameter out of range: {0}")]
    Param(String),
    #[error("CLT experiment requires certified finite positive sigma^2")]
    VarianceNotFinite,
}

/// Bernoulli estimate with standard error and 95% CI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub p_hat: f64,
    pub stderr: f64,
    pub reps: u64,
    pub ci95: (f64, f64),
}

impl Estimate {
    pub fn from_hits(hits: u64, reps: u64) -> Self {
        let p_hat = hits as f64 / reps as f64;
        let stderr = (p_hat * (1.0 - p_hat) / reps as f64).sqrt();
        Estimate {
            p_hat,
            stderr,
            reps,
            ci95: (p_hat - 1.96 * stderr, p_hat + 1.96 * stderr),
        }
    }

    pub fn within(&self, truth: f64, k_stderr: f64) -> bool {
        // degenerate stderr (p_hat 0 or 1) still deserves a finite window
        let s = self.stderr.max((1.0 / self.reps as f64).sqrt() * 0.5);
        (self.p_hat - truth).abs() <= k_stderr * s
    }
}

/// Private stream for trial `index` under `master_seed`.
pub fn trial_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Runs `reps` independent Bernoulli trials in parallel. The reduction is
/// a sum of counts, so the result is independent of scheduling.
pub fn estimate<F>(trial: F, reps: u64, master_seed: u64) -> Estimate
where
    F: Fn(&mut ChaCha8Rng) -> bool + Sync,
{
    assert!(reps >= 100);
    let hits: u64 = (0..reps)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(master_seed, i);
            u64::from(trial(&mut rng))
        })
        .sum();
    Estimate::from_hits(hits, reps)
}

/// Parallel collection of one value per trial, in trial order.
pub fn sample<T, F>(trial: F, reps: u64, master_seed: u64) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> T + Sync,
{
    (0..reps)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(master_seed, i);
            trial(&mut rng)
        })
        .collect()
}

/// Goodness-of-fit report; verdict at significance 0.01.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GofReport {
    pub statistic: f64,
    pub pvalue: f64,
    pub dof: usize,
    pub pass: bool,
}

pub const SIGNIFICANCE: f64 = 0.01;

fn chi_square_pvalue(statistic: f64, dof: usize) -> f64 {
    let chi = ChiSquared::new(dof as f64).expect("dof >= 1");
    1.0 - chi.cdf(statistic)
}

/// Chi-square test of geometric samples on `{1,2,...}` against success
/// probability `r`. The tail is merged so every expected count is ≥ 5.
pub fn gof_geometric(samples: &[u64], r: f64) -> Result<GofReport, McError> {
    if !(r > 0.0 && r < 1.0) {
        return Err(McError::Param(format!("geometric success r={r}")));
    }
    if samples.len() < 10_000 {
        return Err(McError::TooFewSamples {
            need: 10_000,
            got: samples.len(),
        });
    }
    let n = samples.len() as f64;
    // cut where the geometric tail expectation drops below 5
    let mut k_max = 1usize;
    while n * r * (1.0 - r).powi(k_max as i32) >= 5.0 {
        k_max += 1;
    }
    if k_max < 2 {
        return Err(McError::DegenerateBuckets);
    }
    let mut observed = vec![0u64; k_max + 1]; // buckets 1..=k_max, last = tail
    for &s in samples {
        let k = (s as usize).clamp(1, k_max + 1);
        observed[k.min(k_max + 1) - 1] += 1;
    }
    let mut statistic = 0.0;
    for (i, &obs) in observed.iter().enumerate() {
        let k = i + 1;
        let expected = if k <= k_max {
            n * r * (1.0 - r).powi(k as i32 - 1)
        } else {
            n * (1.0 - r).powi(k_max as i32) // P(N > k_max)
        };
        let d = obs as f64 - expected;
        statistic += d * d / expected;
    }
    let dof = k_max; // k_max + 1 buckets, fully specified law
    let pvalue = chi_square_pvalue(statistic, dof);
    Ok(GofReport {
        statistic,
        pvalue,
        dof,
        pass: pvalue > SIGNIFICANCE,
    })
}

/// Asymptotic Kolmogorov distribution `Q(t) = 2 Σ (-1)^{j-1} e^{-2 j² t²}`.
fn kolmogorov_pvalue(t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100u32 {
        let term = (-2.0 * (j as f64) * (j as f64) * t * t).exp();
        sum += if j % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample KS test against the standard normal (asymptotic p-value,
/// valid for sample sizes ≥ 1000).
pub fn ks_standard_normal(z: &[f64]) -> Result<GofReport, McError> {
    if z.len() < 1_000 {
        return Err(McError::TooFewSamples {
            need: 1_000,
            got: z.len(),
        });
    }
    let mut sorted = z.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("no NaN z-values"));
    let n = sorted.len() as f64;
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let cdf = normal.cdf(x);
        d = d.max((cdf - i as f64 / n).abs());
        d = d.max(((i + 1) as f64 / n - cdf).abs());
    }
    let pvalue = kolmogorov_pvalue(n.sqrt() * d);
    Ok(GofReport {
        statistic: d,
        pvalue,
        dof: sorted.len(),
        pass: pvalue > SIGNIFICANCE,
    })
}

/// Two-sample chi-square homogeneity test on nonnegative integer samples
/// (buckets merged from the right until pooled expectations reach 5).
pub fn chi_square_two_sample(
    a: &[u64],
    b: &[u64],
    significance: f64,
) -> Result<GofReport, McError> {
    if a.len() < 100 || b.len() < 100 {
        return Err(McError::TooFewSamples {
            need: 100,
            got: a.len().min(b.len()),
        });
    }
    let max = a.iter().chain(b.iter()).copied().max().unwrap() as usize;
    let mut ca = vec![0u64; max + 1];
    let mut cb = vec![0u64; max + 1];
    for &x in a {
        ca[x as usize] += 1;
    }
    for &x in b {
        cb[x as usize] += 1;
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let total = na + nb;
    // merge buckets from the right until each pooled expected count ≥ 5
    let mut buckets: Vec<(f64, f64)> = Vec::new();
    let (mut acc_a, mut acc_b) = (0.0, 0.0);
    for v in 0..=max {
        acc_a += ca[v] as f64;
        acc_b += cb[v] as f64;
        let pooled = acc_a + acc_b;
        if pooled / total * na.min(nb) >= 5.0 {
            buckets.push((acc_a, acc_b));
            acc_a = 0.0;
            acc_b = 0.0;
        }
    }
    if acc_a + acc_b > 0.0 {
        if let Some(last) = buckets.last_mut() {
            last.0 += acc_a;
            last.1 += acc_b;
        }
    }
    if buckets.len() < 2 {
        return Err(McError::DegenerateBuckets);
    }
    let mut statistic = 0.0;
    for &(oa, ob) in &buckets {
        let pooled = (oa + ob) / total;
        for (obs, nn) in [(oa, na), (ob, nb)] {
            let expected = nn * pooled;
            let d = obs - expected;
            statistic += d * d / expected;
        }
    }
    let dof = buckets.len() - 1;
    let pvalue = chi_square_pvalue(statistic, dof);
    Ok(GofReport {
        statistic,
        pvalue,
        dof,
        pass: pvalue > significance,
    })
}

/// Standardized spreader counts `(N(n) - n/μ) / √(n σ²/μ³)` over `reps`
/// replicates, KS-tested against the standard normal.
pub fn clt_experiment(
    dist: &RadiusDistribution,
    n: u64,
    reps: u64,
    master_seed: u64,
) -> Result<(GofReport, Vec<f64>), McError> {
    if n < 10_000 {
        return Err(McError::Param(format!("need n >= 10^4, got {n}")));
    }
    if reps < 1_000 {
        return Err(McError::TooFewSamples {
            need: 1_000,
            got: reps as usize,
        });
    }
    let stats = mu_sigma(dist, 1e-12);
    let mu = match stats.mu {
        Mean::Finite(mu) => mu,
        Mean::Infinite => return Err(McError::VarianceNotFinite),
    };
    let sigma2 = match stats.sigma2 {
        Variance::Finite(s2) if s2 > 0.0 => s2,
        _ => return Err(McError::VarianceNotFinite),
    };
    let z = standardized_counts(dist, n, reps, master_seed, mu, sigma2);
    let report = ks_standard_normal(&z)?;
    Ok((report, z))
}

/// Same replicates standardized with explicit (μ, σ²) — the negative
/// control plugs in a wrong mean here.
pub fn standardized_counts(
    dist: &RadiusDistribution,
    n: u64,
    reps: u64,
    master_seed: u64,
    mu: f64,
    sigma2: f64,
) -> Vec<f64> {
    let denom = (n as f64 * sigma2 / (mu * mu * mu)).sqrt();
    sample(
        |rng| {
            let count = simulate_spreader_count(dist, n, rng);
            (count as f64 - n as f64 / mu) / denom
        },
        reps,
        master_seed,
    )
}
