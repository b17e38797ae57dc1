//! The Reverse Firework process: the ignorant at site `i` takes the
//! information from a spreader within distance `R_i` on its left. The limit
//! configuration `ζ` is a renewal process: after the 1 at site 0, blocks
//! `0^{K-1}1` with `P(K = k) = q_k` (so `P(ζ_n = 1 | gap g) = 1 - α_g`,
//! where the gap is the number of zeros since the last 1).
//!
//! When `∏ α_k > 0` the rumor dies and the total number of spreaders `N`
//! is geometric with success `∏ α_k`; otherwise `N(n)/n → 1/μ` with a CLT
//! of variance `σ²/μ³` when `σ²` is finite.

use rand::Rng;

use crate::dist::{ProductLimit, RadiusDistribution, TailUnavailable};
use crate::renewal::{mu_sigma, Mean, Variance};

/// Spreader/ignorant bits `ζ_0..ζ_n` of the limit configuration.
#[derive(Debug, Clone)]
pub struct ZetaPath {
    bits: Vec<bool>,
}

impl ZetaPath {
    pub fn new(bits: Vec<bool>) -> Self {
        assert!(bits.first() == Some(&true), "ζ_0 = 1 by construction");
        ZetaPath { bits }
    }

    pub fn bit(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Number of zeros after the last 1; always well defined because
    /// `ζ_0 = 1`.
    pub fn gap(&self) -> u64 {
        self.bits.iter().rev().take_while(|&&b| !b).count() as u64
    }
}

/// Simulates `ζ_0..ζ_n`: a running gap counter `g`, and `ζ_i = 1` with
/// probability `1 - α_g` (i.e. `U_i ≥ α_g`), O(1) per site.
pub fn simulate_rfp<R: Rng>(dist: &RadiusDistribution, n: usize, rng: &mut R) -> ZetaPath {
    assert!(n >= 1);
    let mut bits = Vec::with_capacity(n + 1);
    bits.push(true);
    let mut gap = 0u64;
    for _ in 1..=n {
        if rng.gen::<f64>() >= dist.alpha(gap) {
            bits.push(true);
            gap = 0;
        } else {
            bits.push(false);
            gap += 1;
        }
    }
    ZetaPath::new(bits)
}

/// `N(n) = Σ_{i=1}^n ζ_i` (site 0 excluded).
pub fn count_spreaders(path: &ZetaPath) -> u64 {
    path.bits[1..].iter().filter(|&&b| b).count() as u64
}

/// Streaming version of `count_spreaders ∘ simulate_rfp` for large `n`.
pub fn simulate_spreader_count<R: Rng>(dist: &RadiusDistribution, n: u64, rng: &mut R) -> u64 {
    let mut gap = 0u64;
    let mut count = 0u64;
    for _ in 1..=n {
        if rng.gen::<f64>() >= dist.alpha(gap) {
            count += 1;
            gap = 0;
        } else {
            gap += 1;
        }
    }
    count
}

/// Law of the total number of spreaders `N` (site 0 included).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpreaderLaw {
    /// `∏ α_k = 0`: infinitely many spreaders almost surely.
    Survives,
    /// `∏ α_k > 0`: `N ~ Geom(geom_param)` on `{1, 2, ...}`.
    Dies { geom_param: f64 },
}

pub fn rfp_spreader_law(dist: &RadiusDistribution) -> Result<SpreaderLaw, TailUnavailable> {
    let tail = dist.tail_data().ok_or(TailUnavailable)?;
    Ok(match tail.product_limit() {
        ProductLimit::Zero => SpreaderLaw::Survives,
        ProductLimit::Positive(r) => SpreaderLaw::Dies { geom_param: r },
    })
}

/// Simulates the total spreader count `N` in the dying regime. Stops when
/// the conditional probability of any future 1, `1 - q_∞ / p(gap)`, drops
/// below `cap_tol` (certified via the product limit), or at `horizon_cap`.
pub fn simulate_total_spreaders<R: Rng>(
    dist: &RadiusDistribution,
    cap_tol: f64,
    horizon_cap: u64,
    rng: &mut R,
) -> Result<u64, TailUnavailable> {
    let law = rfp_spreader_law(dist)?;
    let q_inf = match law {
        SpreaderLaw::Dies { geom_param } => geom_param,
        SpreaderLaw::Survives => {
            // N is a.s. infinite; nothing to simulate.
            return Ok(u64::MAX);
        }
    };
    let mut n = 1u64; // site 0
    let mut gap = 0u64;
    let mut p_gap = 1.0; // ∏_{i<gap} α_i
    for _ in 0..horizon_cap {
        if 1.0 - q_inf / p_gap < cap_tol {
            break;
        }
        let a = dist.alpha(gap);
        if rng.gen::<f64>() >= a {
            n += 1;
            gap = 0;
            p_gap = 1.0;
        } else {
            gap += 1;
            p_gap *= a;
        }
    }
    Ok(n)
}

/// LLN limit `1/μ` (0 when μ = ∞) and CLT variance `σ²/μ³` (None when σ²
/// is infinite or undefined).
pub fn lln_clt_params(dist: &RadiusDistribution) -> (f64, Option<f64>) {
    let stats = mu_sigma(dist, 1e-12);
    match stats.mu {
        Mean::Infinite => (0.0, None),
        Mean::Finite(mu) => {
            let var = match stats.sigma2 {
                Variance::Finite(s2) if s2 > 0.0 => Some(s2 / (mu * mu * mu)),
                _ => None,
            };
            (1.0 / mu, var)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_dist;
    use crate::renewal::inter_arrival;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn finite532() -> RadiusDistribution {
        parse_dist("finite:0.5,0.3,0.2").unwrap()
    }

    #[test]
    fn gap_counts_zeros_after_last_one() {
        let p = ZetaPath::new(vec![true, false, false]);
        assert_eq!(p.gap(), 2);
        let p = ZetaPath::new(vec![true, false, true]);
        assert_eq!(p.gap(), 0);
    }

    #[test]
    fn count_excludes_site_zero() {
        let p = ZetaPath::new(vec![true, false, false, true, true]);
        assert_eq!(count_spreaders(&p), 2);
        let p = ZetaPath::new(vec![true; 8]);
        assert_eq!(count_spreaders(&p), 7);
    }

    #[test]
    fn first_site_probability_is_q1() {
        // P(ζ_1 = 1) = 1 - α_0 = q_1 = 0.5
        let d = finite532();
        let reps = 200_000;
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let hits = (0..reps)
            .filter(|_| simulate_rfp(&d, 1, &mut rng).bit(1))
            .count() as f64;
        let p_hat = hits / reps as f64;
        assert!((p_hat - 0.5).abs() < 3.0 * (0.25f64 / reps as f64).sqrt());
    }

    #[test]
    fn block_histogram_matches_q() {
        // inter-1 gaps of ζ are iid with law q_k (censored by ∏α = 0.4)
        let d = finite532();
        let law = inter_arrival(&d, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let reps = 500_000u64;
        let mut counts = [0u64; 4]; // block length 1,2,3, censored
        for _ in 0..reps {
            let path = simulate_rfp(&d, 16, &mut rng);
            // block after site 0: position of the next 1
            let next = (1..path.len()).find(|&i| path.bit(i));
            match next {
                Some(k) if k <= 3 => counts[k - 1] += 1,
                _ => counts[3] += 1,
            }
        }
        let n = reps as f64;
        for (k, &c) in counts.iter().take(3).enumerate() {
            let expect = law.q(k + 1);
            let p_hat = c as f64 / n;
            let stderr = (expect * (1.0 - expect) / n).sqrt().max(1e-9);
            assert!(
                (p_hat - expect).abs() < 4.0 * stderr,
                "block length {}: {p_hat} vs {expect}",
                k + 1
            );
        }
        // censored mass ≈ q_inf = 0.4 (gap beyond 3 never refills: α_2 = 1)
        assert!((counts[3] as f64 / n - 0.4).abs() < 4.0 * (0.24f64 / n).sqrt());
    }

    #[test]
    fn markov_property_in_gap() {
        // P(ζ_n = 1 | gap g) = 1 - α_g
        let d = parse_dist("frac:c=2").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut hits = vec![0u64; 11];
        let mut tries = vec![0u64; 11];
        for _ in 0..40_000 {
            let path = simulate_rfp(&d, 60, &mut rng);
            let mut gap = 0usize;
            for i in 1..path.len() {
                if gap <= 10 {
                    tries[gap] += 1;
                    if path.bit(i) {
                        hits[gap] += 1;
                    }
                }
                gap = if path.bit(i) { 0 } else { gap + 1 };
            }
        }
        for g in 0..=10u64 {
            let expect = 1.0 - d.alpha(g);
            let n = tries[g as usize] as f64;
            let p_hat = hits[g as usize] as f64 / n;
            let stderr = (expect * (1.0 - expect) / n).sqrt();
            assert!(
                (p_hat - expect).abs() < 4.0 * stderr,
                "gap {g}: {p_hat} vs {expect} (n={n})"
            );
        }
    }

    #[test]
    fn spreader_law_catalog() {
        match rfp_spreader_law(&finite532()).unwrap() {
            SpreaderLaw::Dies { geom_param } => {
                assert!((geom_param - 0.4).abs() < 1e-15);
                // E[N] = 1/r = 2.5
                assert!((1.0 / geom_param - 2.5).abs() < 1e-12);
            }
            _ => panic!("finite support must die"),
        }
        assert_eq!(
            rfp_spreader_law(&parse_dist("frac:c=2").unwrap()).unwrap(),
            SpreaderLaw::Survives
        );
        match rfp_spreader_law(&parse_dist("geomdefect:C=0.5,r=0.5").unwrap()).unwrap() {
            SpreaderLaw::Dies { geom_param } => {
                let direct: f64 = (0..200u64).map(|k| 1.0 - 0.5 * 0.5f64.powf(k as f64)).product();
                assert!((geom_param - direct).abs() < 1e-12);
            }
            _ => panic!("positive product must die"),
        }
        assert!(rfp_spreader_law(&parse_dist("sparse(eps=0.5;frac:c=2)").unwrap()).is_err());
    }

    #[test]
    fn total_spreaders_mean() {
        // E[N] = 1/0.4 = 2.5 for finite:0.5,0.3,0.2
        let d = finite532();
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let reps = 100_000u64;
        let sum: u64 = (0..reps)
            .map(|_| simulate_total_spreaders(&d, 1e-6, 1_000_000, &mut rng).unwrap())
            .sum();
        let mean = sum as f64 / reps as f64;
        assert!((mean - 2.5).abs() < 0.05, "mean={mean}");
    }

    #[test]
    fn lln_clt_params_catalog() {
        let (limit, var) = lln_clt_params(&parse_dist("frac:c=2").unwrap());
        assert!((limit - 0.5).abs() < 1e-12);
        assert_eq!(var, None); // σ² = ∞
        let (limit, var) = lln_clt_params(&parse_dist("powratio:a=4").unwrap());
        assert!((limit - 90.0 / std::f64::consts::PI.powi(4)).abs() < 1e-8);
        assert!(var.unwrap() > 0.0);
        let (limit, var) = lln_clt_params(&finite532());
        assert_eq!(limit, 0.0);
        assert_eq!(var, None);
    }

    #[test]
    fn lln_empirical_ratio() {
        let d = parse_dist("frac:c=2").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let n = 200_000u64;
        let count = simulate_spreader_count(&d, n, &mut rng);
        assert!((count as f64 / n as f64 - 0.5).abs() < 0.01);
    }
}
