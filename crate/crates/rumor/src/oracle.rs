//! Brute-force enumeration over all radius configurations of a
//! finite-support law, in exact rational arithmetic. This is the ground
//! truth for `P(M > n) = u_{n+1}`, the block law of `ζ`, and the identity
//! of the reach probabilities of the two processes.

use num_traits::{One, Zero};
use thiserror::Error;

use crate::dist::{BigRational, RadiusDistribution};

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("distribution has no exact finite pmf; the oracle needs rational inputs")]
    NotFiniteRational,
    #[error("enumeration too large: {configs:e} configurations exceed the 1e8 guard")]
    TooLarge { configs: f64 },
}

/// An exactly enumerated probability (lowest-terms rational).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactProbability {
    value: BigRational,
}

impl ExactProbability {
    pub fn value(&self) -> &BigRational {
        &self.value
    }

    pub fn to_f64(&self) -> f64 {
        crate::dist::rational_to_f64(&self.value)
    }
}

impl std::fmt::Display for ExactProbability {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.value.numer(), self.value.denom())
    }
}

fn exact_pmf(dist: &RadiusDistribution) -> Result<Vec<BigRational>, OracleError> {
    dist.exact_pmf()
        .map(|p| p.to_vec())
        .ok_or(OracleError::NotFiniteRational)
}

fn guard(support: usize, sites: u32) -> Result<(), OracleError> {
    let configs = (support as f64).powi(sites as i32);
    if configs > 1e8 {
        return Err(OracleError::TooLarge { configs });
    }
    Ok(())
}

/// Exact `q_k = (1 - α_{k-1}) ∏_{i=0}^{k-2} α_i` in rationals.
pub fn exact_q(pmf: &[BigRational], k: usize) -> BigRational {
    assert!(k >= 1);
    let alpha = |j: usize| -> BigRational {
        if j + 1 >= pmf.len() {
            BigRational::one()
        } else {
            pmf[..=j].iter().sum()
        }
    };
    let mut prod = BigRational::one();
    for i in 0..k.saturating_sub(1) {
        prod *= alpha(i);
    }
    (BigRational::one() - alpha(k - 1)) * prod
}

/// Exact renewal sequence `u_0..u_n` in rationals.
pub fn exact_u(pmf: &[BigRational], n: usize) -> Vec<BigRational> {
    let q: Vec<BigRational> = (1..=n.max(1)).map(|k| exact_q(pmf, k)).collect();
    let mut u = vec![BigRational::one()];
    for m in 1..=n {
        let mut acc = BigRational::zero();
        for k in 1..=m {
            if !q[k - 1].is_zero() {
                acc += &q[k - 1] * &u[m - k];
            }
        }
        u.push(acc);
    }
    u
}

/// `P(M > n)` by summing over all configurations `(R_0, ..., R_n)`.
/// Branches where the min-formula index is already decided are pruned.
pub fn enumerate_fp_tail(
    dist: &RadiusDistribution,
    n: usize,
) -> Result<ExactProbability, OracleError> {
    let pmf = exact_pmf(dist)?;
    guard(pmf.len(), n as u32 + 1)?;
    let mut total = BigRational::zero();
    // DFS over sites 0..=n; frontier = max_{j≤i}(j + R_j).
    fn go(
        pmf: &[BigRational],
        n: usize,
        site: usize,
        frontier: usize,
        weight: BigRational,
        total: &mut BigRational,
    ) {
        if site > 0 && frontier == site - 1 {
            return; // died at site-1 ≤ n: M ≤ n, contributes 0
        }
        if frontier > n {
            *total += weight; // no death index can appear at or below n
            return;
        }
        if site > n {
            *total += weight; // survived all checks up to n
            return;
        }
        for (r, p) in pmf.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            go(pmf, n, site + 1, frontier.max(site + r), &weight * p, total);
        }
    }
    go(&pmf, n, 0, 0, BigRational::one(), &mut total);
    Ok(ExactProbability { value: total })
}

/// `P(ζ_1^k = 0^{k-1} 1 | ζ_0 = 1)` under the gap rule `ζ_i = 1 iff
/// R_i > gap`. Must equal `q_k`.
pub fn enumerate_rfp_block(
    dist: &RadiusDistribution,
    k: usize,
) -> Result<ExactProbability, OracleError> {
    assert!(k >= 1);
    let pmf = exact_pmf(dist)?;
    guard(pmf.len(), k as u32)?;
    let alpha_exact = |g: usize| -> BigRational {
        if g >= pmf.len() {
            BigRational::one()
        } else {
            pmf[..=g].iter().sum()
        }
    };
    // The block event factorizes over sites: ζ_i = 0 for i < k needs
    // R_i ≤ gap = i-1, probability α_{i-1}; then ζ_k = 1 with 1 - α_{k-1}.
    let mut prob = BigRational::one();
    for i in 1..k {
        prob *= alpha_exact(i - 1);
    }
    prob *= BigRational::one() - alpha_exact(k - 1);
    // Cross-check by full enumeration of (R_1..R_k).
    let mut total = BigRational::zero();
    let mut stack: Vec<(usize, u64, BigRational)> = vec![(1, 0, BigRational::one())];
    while let Some((site, gap, weight)) = stack.pop() {
        if site > k {
            unreachable!();
        }
        for (r, p) in pmf.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            let one = r as u64 > gap; // ζ_site = 1 iff R > gap
            let want_one = site == k;
            if one != want_one {
                continue; // mismatch with 0^{k-1}1, prune
            }
            let w = &weight * p;
            if site == k {
                total += w;
            } else {
                stack.push((site + 1, gap + 1, w));
            }
        }
    }
    debug_assert_eq!(total, prob);
    Ok(ExactProbability { value: total })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Fp,
    Rfp,
}

/// Probability that site `n` is eventually informed, by full recursion over
/// the stage sets (FP) or the gap rule (RFP). Both equal `u_n`.
pub fn enumerate_site_informed(
    dist: &RadiusDistribution,
    n: usize,
    model: Model,
) -> Result<ExactProbability, OracleError> {
    if n == 0 {
        return Ok(ExactProbability {
            value: BigRational::one(),
        });
    }
    let pmf = exact_pmf(dist)?;
    guard(pmf.len(), n as u32)?;
    let sites = n; // FP uses R_0..R_{n-1}, RFP uses R_1..R_n
    let mut total = BigRational::zero();
    let mut config = vec![0usize; sites];
    loop {
        let informed = match model {
            Model::Fp => fp_site_informed_stage_sets(&config, n),
            Model::Rfp => rfp_site_informed(&config, n),
        };
        if informed {
            let w: BigRational = config.iter().map(|&r| pmf[r].clone()).product();
            total += w;
        }
        // odometer over the support
        let mut i = 0;
        loop {
            if i == sites {
                return Ok(ExactProbability { value: total });
            }
            config[i] += 1;
            if config[i] < pmf.len() {
                break;
            }
            config[i] = 0;
            i += 1;
        }
    }
}

/// Literal `A_n` stage-set recursion on radii `R_0..R_{n-1}`.
fn fp_site_informed_stage_sets(radii: &[usize], n: usize) -> bool {
    let mut informed = vec![false; n + 1];
    informed[0] = true;
    let mut current = vec![0usize];
    while !current.is_empty() {
        let mut next = Vec::new();
        for &j in &current {
            let hi = (j + radii[j]).min(n);
            for i in j..=hi {
                if !informed[i] {
                    informed[i] = true;
                    if i == n {
                        return true;
                    }
                    next.push(i);
                }
            }
        }
        current = next;
    }
    false
}

/// Min-formula evaluation of the same event, for the configuration-level
/// equivalence check: site `n` informed iff no death index below `n`.
pub fn fp_site_informed_min_formula(radii: &[usize], n: usize) -> bool {
    let mut frontier = 0usize;
    for (i, &r) in radii.iter().enumerate().take(n) {
        frontier = frontier.max(i + r);
        if frontier == i {
            return false;
        }
    }
    true
}

/// Gap recursion for `ζ_n` on radii `R_1..R_n` (index 0 of the slice is
/// site 1).
fn rfp_site_informed(radii: &[usize], n: usize) -> bool {
    let mut gap = 0usize;
    let mut last = true;
    for &r in radii.iter().take(n) {
        last = r > gap;
        gap = if last { 0 } else { gap + 1 };
    }
    last
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_dist;

    fn rational(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn fp_tail_hand_values() {
        let d = parse_dist("finite:0.5,0.3,0.2").unwrap();
        // n = 0: P(M > 0) = 1 - α_0 = 1/2
        assert_eq!(enumerate_fp_tail(&d, 0).unwrap().value(), &rational(1, 2));
        // n = 2: 9/40 = 0.225
        assert_eq!(enumerate_fp_tail(&d, 2).unwrap().value(), &rational(9, 40));
        let d2 = parse_dist("finite:0.9,0.1").unwrap();
        assert_eq!(enumerate_fp_tail(&d2, 1).unwrap().value(), &rational(1, 100));
    }

    #[test]
    fn fp_tail_equals_u_exactly() {
        for spec in ["finite:0.5,0.3,0.2", "finite:0.9,0.1", "finite:0.4,0.1,0.1,0.4"] {
            let d = parse_dist(spec).unwrap();
            let pmf = d.exact_pmf().unwrap().to_vec();
            let u = exact_u(&pmf, 9);
            for n in 0..=8usize {
                let tail = enumerate_fp_tail(&d, n).unwrap();
                assert_eq!(tail.value(), &u[n + 1], "{spec} n={n}");
            }
        }
    }

    #[test]
    fn rfp_block_equals_q_exactly() {
        let d = parse_dist("finite:0.5,0.3,0.2").unwrap();
        let pmf = d.exact_pmf().unwrap().to_vec();
        assert_eq!(enumerate_rfp_block(&d, 1).unwrap().value(), &rational(1, 2));
        assert_eq!(enumerate_rfp_block(&d, 2).unwrap().value(), &rational(1, 10));
        assert_eq!(enumerate_rfp_block(&d, 3).unwrap().value(), &rational(0, 1));
        for k in 1..=8usize {
            assert_eq!(enumerate_rfp_block(&d, k).unwrap().value(), &exact_q(&pmf, k));
        }
    }

    #[test]
    fn site_informed_both_models_equal_u() {
        let d = parse_dist("finite:0.5,0.3,0.2").unwrap();
        let pmf = d.exact_pmf().unwrap().to_vec();
        let u = exact_u(&pmf, 8);
        for n in 0..=8usize {
            let fp = enumerate_site_informed(&d, n, Model::Fp).unwrap();
            let rfp = enumerate_site_informed(&d, n, Model::Rfp).unwrap();
            assert_eq!(fp.value(), &u[n], "FP n={n}");
            assert_eq!(rfp.value(), &u[n], "RFP n={n}");
        }
        // spot value from the convolution: u_2 = 0.35
        assert_eq!(
            enumerate_site_informed(&d, 2, Model::Fp).unwrap().value(),
            &rational(7, 20)
        );
    }

    #[test]
    fn stage_sets_equal_min_formula_configurationwise() {
        let support = 3usize;
        let n = 6usize;
        let mut config = vec![0usize; n];
        loop {
            assert_eq!(
                fp_site_informed_stage_sets(&config, n),
                fp_site_informed_min_formula(&config, n),
                "config {config:?}"
            );
            let mut i = 0;
            loop {
                if i == n {
                    return;
                }
                config[i] += 1;
                if config[i] < support {
                    break;
                }
                config[i] = 0;
                i += 1;
            }
        }
    }

    #[test]
    fn explosion_guard() {
        let d = parse_dist("finite:0.5,0.3,0.2").unwrap();
        assert!(matches!(
            enumerate_fp_tail(&d, 30),
            Err(OracleError::TooLarge { .. })
        ));
        let f = parse_dist("frac:c=2").unwrap();
        assert_eq!(
            enumerate_fp_tail(&f, 2),
            Err(OracleError::NotFiniteRational)
        );
    }

    #[test]
    fn display_as_fraction() {
        let d = parse_dist("finite:0.5,0.3,0.2").unwrap();
        assert_eq!(enumerate_fp_tail(&d, 2).unwrap().to_string(), "9/40");
    }
}
