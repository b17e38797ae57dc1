//! The Firework process: a spreader at site `j` informs all sites in
//! `{j, ..., j + R_j}`. The rightmost informed site is
//! `M = min{i ≥ 0 : R_j ≤ i - j for all j ≤ i}`, and `P(M > n) = u_{n+1}`
//! for the renewal sequence induced by the radius law.
//!
//! Also houses the coupled house-of-cards chains `H^(m)` driven by a shared
//! uniform table, whose monotonicity and coalescence underpin that identity.

use rand::Rng;

use crate::dist::RadiusDistribution;
use crate::renewal::{inter_arrival, renewal_sequence};

/// Outcome of one Firework trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FpOutcome {
    /// The rumor died; `m` is the rightmost informed site.
    Died { m: u64 },
    /// No death index below the horizon was observed. Estimators built on
    /// this outcome are upward-biased by `u_{horizon+1} - 1/μ`.
    AliveAtHorizon { horizon: u64 },
}

impl FpOutcome {
    /// Indicator of `{M > n}`, censored at the horizon.
    pub fn exceeds(&self, n: u64) -> bool {
        match *self {
            FpOutcome::Died { m } => m > n,
            FpOutcome::AliveAtHorizon { .. } => true,
        }
    }
}

/// Exact tail `P(M > n) = u_{n+1}`.
pub fn fp_tail(dist: &RadiusDistribution, n: usize) -> f64 {
    let law = inter_arrival(dist, n + 1);
    renewal_sequence(&law, n + 1).u(n + 1)
}

/// Radius drawn from a uniform: the unique `k` with `α_{k-1} ≤ u < α_k`.
pub fn sample_radius(dist: &RadiusDistribution, u: f64) -> u64 {
    dist.quantile(u)
}

/// Frontier simulation: draws radii lazily, keeps `F_i = max_{j≤i}(j + R_j)`
/// and declares death at the first `i` with `F_i = i`. O(M) time, O(1)
/// memory per trial.
pub fn simulate_fp<R: Rng>(dist: &RadiusDistribution, horizon: u64, rng: &mut R) -> FpOutcome {
    assert!(horizon >= 1);
    let mut frontier = 0u64;
    for i in 0..horizon {
        let r = sample_radius(dist, rng.gen::<f64>());
        frontier = frontier.max(i + r);
        if frontier == i {
            return FpOutcome::Died { m: i };
        }
    }
    FpOutcome::AliveAtHorizon { horizon }
}

/// Same frontier rule on a pre-drawn radius sequence (shared-seed tests).
pub fn fp_from_radii(radii: &[u64]) -> FpOutcome {
    let mut frontier = 0u64;
    for (i, &r) in radii.iter().enumerate() {
        let i = i as u64;
        frontier = frontier.max(i + r);
        if frontier == i {
            return FpOutcome::Died { m: i };
        }
    }
    FpOutcome::AliveAtHorizon {
        horizon: radii.len() as u64,
    }
}

/// Reference simulator that iterates the stage sets `A_n` literally:
/// `A_n` = sites newly covered by some spreader's radius. Used to check the
/// frontier form against the definition.
pub fn fp_from_radii_naive(radii: &[u64]) -> FpOutcome {
    let horizon = radii.len() as u64;
    let mut informed = vec![false; radii.len()];
    informed[0] = true;
    let mut current: Vec<u64> = vec![0];
    let mut rightmost = 0u64;
    while !current.is_empty() {
        let mut next = Vec::new();
        for &j in &current {
            let hi = j + radii[j as usize];
            for i in j..=hi.min(horizon - 1) {
                if !informed[i as usize] {
                    informed[i as usize] = true;
                    next.push(i);
                    rightmost = rightmost.max(i);
                }
            }
            if hi >= horizon {
                // radius escapes the observation window
                return FpOutcome::AliveAtHorizon { horizon };
            }
        }
        current = next;
    }
    FpOutcome::Died { m: rightmost }
}

/// Reversed construction `M̄ = max{i ≤ 0 : U_j < α_{j-i}, j = i..0}`;
/// `-M̄` has the law of `M`. Draws uniforms `U_0, U_{-1}, ...` from the
/// stream in that order.
pub fn simulate_fp_reversed<R: Rng>(
    dist: &RadiusDistribution,
    horizon: u64,
    rng: &mut R,
) -> FpOutcome {
    // -i plays the role of depth d = 0, 1, 2, ...; U_{-j} is drawn lazily.
    let mut u = Vec::with_capacity(16);
    for d in 0..horizon {
        // test i = -d: need U_{-j} < α_{d-j}... indices relative: for
        // j = 0..=d (site -j), condition U_{-j} < α_{d-j}.
        while u.len() <= d as usize {
            u.push(rng.gen::<f64>());
        }
        let ok = (0..=d).all(|j| u[j as usize] < dist.alpha(d - j));
        if ok {
            return FpOutcome::Died { m: d };
        }
    }
    FpOutcome::AliveAtHorizon { horizon }
}

/// Shared table of uniforms indexed by (possibly negative) time.
#[derive(Debug, Clone)]
pub struct UniformTable {
    start: i64,
    u: Vec<f64>,
}

impl UniformTable {
    pub fn generate<R: Rng>(start: i64, end: i64, rng: &mut R) -> Self {
        assert!(end >= start);
        let u = (start..=end).map(|_| rng.gen::<f64>()).collect();
        UniformTable { start, u }
    }

    pub fn get(&self, t: i64) -> f64 {
        self.u[(t - self.start) as usize]
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    pub fn end(&self) -> i64 {
        self.start + self.u.len() as i64 - 1
    }
}

/// Path of a house-of-cards chain started at 0 at time `m`.
#[derive(Debug, Clone)]
pub struct HPath {
    start: i64,
    values: Vec<u64>,
}

impl HPath {
    pub fn start(&self) -> i64 {
        self.start
    }

    pub fn end(&self) -> i64 {
        self.start + self.values.len() as i64 - 1
    }

    pub fn h(&self, t: i64) -> u64 {
        self.values[(t - self.start) as usize]
    }
}

/// `H_m = 0`, then `H_t = (H_{t-1}+1)·1{U_t < α_{H_{t-1}}}` up to time `n`,
/// reading uniforms from the shared table.
pub fn simulate_h_chain(
    dist: &RadiusDistribution,
    m: i64,
    n: i64,
    table: &UniformTable,
) -> HPath {
    assert!(m <= n);
    assert!(m + 1 >= table.start() && n <= table.end() || m == n);
    let mut values = Vec::with_capacity((n - m + 1) as usize);
    values.push(0u64);
    let mut h = 0u64;
    for t in (m + 1)..=n {
        h = if table.get(t) < dist.alpha(h) { h + 1 } else { 0 };
        values.push(h);
    }
    HPath { start: m, values }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingViolation {
    Monotonicity,
    Coalescence,
}

/// Report of the pathwise coupling checks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CouplingReport {
    pub pass: bool,
    /// (time, earlier-start path index, later-start path index, kind)
    pub first_violation: Option<(i64, usize, usize, CouplingViolation)>,
}

/// Asserts, pathwise at every index, monotonicity
/// (`H^(m)_t ≥ H^(k)_t` for `m < k ≤ t`) and coalescence at 0
/// (`H^(m)_t0 = 0 ⇒ H^(m)_t = H^(k)_t` for all `t ≥ t0 ≥ k`).
/// All paths must be built from one shared uniform table.
pub fn check_monotone_coalescence(paths: &[HPath]) -> CouplingReport {
    for (a, pa) in paths.iter().enumerate() {
        for (b, pb) in paths.iter().enumerate() {
            if pa.start() >= pb.start() || a == b {
                continue;
            }
            let end = pa.end().min(pb.end());
            let mut coalesced = false;
            for t in pb.start().max(pa.start())..=end {
                if pa.h(t) < pb.h(t) {
                    return CouplingReport {
                        pass: false,
                        first_violation: Some((t, a, b, CouplingViolation::Monotonicity)),
                    };
                }
                if coalesced && pa.h(t) != pb.h(t) {
                    return CouplingReport {
                        pass: false,
                        first_violation: Some((t, a, b, CouplingViolation::Coalescence)),
                    };
                }
                if pa.h(t) == 0 {
                    coalesced = true;
                }
            }
        }
    }
    CouplingReport {
        pass: true,
        first_violation: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_dist;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn finite532() -> RadiusDistribution {
        parse_dist("finite:0.5,0.3,0.2").unwrap()
    }

    #[test]
    fn fp_tail_matches_renewal_values() {
        let d = finite532();
        assert!((fp_tail(&d, 0) - 0.5).abs() < 1e-15); // u_1 = 1 - α_0
        assert!((fp_tail(&d, 2) - 0.225).abs() < 1e-15); // u_3
    }

    #[test]
    fn fp_tail_limit_is_survival_probability() {
        let d = parse_dist("frac:c=2").unwrap();
        assert!((fp_tail(&d, 5_000) - 0.5).abs() < 1e-3);
    }

    #[test]
    fn frontier_hand_cases() {
        assert_eq!(fp_from_radii(&[0, 1, 1]), FpOutcome::Died { m: 0 });
        assert_eq!(fp_from_radii(&[2, 0, 0, 5]), FpOutcome::Died { m: 2 });
        assert_eq!(
            fp_from_radii(&[1, 1, 1]),
            FpOutcome::AliveAtHorizon { horizon: 3 }
        );
    }

    #[test]
    fn frontier_agrees_with_stage_sets() {
        // shared radii, both definitions of M
        let d = finite532();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let radii: Vec<u64> = (0..64)
                .map(|_| sample_radius(&d, rng.gen::<f64>()))
                .collect();
            assert_eq!(fp_from_radii(&radii), fp_from_radii_naive(&radii));
        }
    }

    #[test]
    fn empirical_tail_matches_exact() {
        let d = finite532();
        let expect = fp_tail(&d, 2); // 0.225
        let reps = 200_000u64;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let hits = (0..reps)
            .filter(|_| simulate_fp(&d, 1_000, &mut rng).exceeds(2))
            .count() as f64;
        let p_hat = hits / reps as f64;
        let stderr = (expect * (1.0 - expect) / reps as f64).sqrt();
        assert!(
            (p_hat - expect).abs() < 3.0 * stderr,
            "p_hat={p_hat}, expect={expect}"
        );
    }

    #[test]
    fn reversed_variable_same_law() {
        // two-sample chi-square on M between forward and reversed builds
        let d = finite532();
        let reps = 100_000usize;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut fwd = Vec::with_capacity(reps);
        let mut rev = Vec::with_capacity(reps);
        for _ in 0..reps {
            if let FpOutcome::Died { m } = simulate_fp(&d, 10_000, &mut rng) {
                fwd.push(m);
            }
            if let FpOutcome::Died { m } = simulate_fp_reversed(&d, 10_000, &mut rng) {
                rev.push(m);
            }
        }
        let report = crate::mc::chi_square_two_sample(&fwd, &rev, 0.01).unwrap();
        assert!(report.pass, "p={}", report.pvalue);
    }

    #[test]
    fn h_chain_initial_condition_and_steps() {
        let d = finite532();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let table = UniformTable::generate(-10, 20, &mut rng);
        let p = simulate_h_chain(&d, 0, 0, &table);
        assert_eq!(p.h(0), 0);
        let p = simulate_h_chain(&d, -5, 20, &table);
        assert_eq!(p.h(-5), 0);
        for t in -4..=20i64 {
            let prev = p.h(t - 1);
            let step = if table.get(t) < d.alpha(prev) { prev + 1 } else { 0 };
            assert_eq!(p.h(t), step);
            assert!(p.h(t) <= (t - p.start()) as u64);
        }
    }

    #[test]
    fn h_chain_marginal_is_u() {
        // P(H^(0)_3 = 0) = u_3 = 0.225
        let d = finite532();
        let reps = 200_000;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut hits = 0u64;
        for _ in 0..reps {
            let table = UniformTable::generate(0, 3, &mut rng);
            if simulate_h_chain(&d, 0, 3, &table).h(3) == 0 {
                hits += 1;
            }
        }
        let p_hat = hits as f64 / reps as f64;
        let stderr = (0.225f64 * 0.775 / reps as f64).sqrt();
        assert!((p_hat - 0.225).abs() < 3.0 * stderr, "p_hat={p_hat}");
    }

    #[test]
    fn coupling_holds_on_shared_table() {
        let d = finite532();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..2_000 {
            let table = UniformTable::generate(-20, 30, &mut rng);
            let paths: Vec<HPath> = [-20i64, -13, -5, -2, 0]
                .iter()
                .map(|&m| simulate_h_chain(&d, m, 30, &table))
                .collect();
            let report = check_monotone_coalescence(&paths);
            assert!(report.pass, "{:?}", report.first_violation);
        }
    }

    #[test]
    fn coupling_negative_control_desynchronized() {
        // independent tables per chain: violations must show up
        let d = finite532();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut violated = false;
        for _ in 0..500 {
            let paths: Vec<HPath> = [-20i64, -5, 0]
                .iter()
                .map(|&m| {
                    let table = UniformTable::generate(-20, 30, &mut rng);
                    simulate_h_chain(&d, m, 30, &table)
                })
                .collect();
            if !check_monotone_coalescence(&paths).pass {
                violated = true;
                break;
            }
        }
        assert!(violated, "desynchronized chains never violated the coupling");
    }

    #[test]
    fn single_path_passes_vacuously() {
        let d = finite532();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let table = UniformTable::generate(0, 10, &mut rng);
        let p = simulate_h_chain(&d, 0, 10, &table);
        assert!(check_monotone_coalescence(&[p]).pass);
    }

    #[test]
    fn tail_monotone_in_stochastic_order() {
        // pointwise smaller α (larger radii) cannot shrink P(M > n)
        let small = parse_dist("frac:c=2").unwrap();
        let big = parse_dist("sparse(eps=0.5;frac:c=2)").unwrap(); // α raised
        for n in 0..100 {
            assert!(fp_tail(&big, n) <= fp_tail(&small, n) + 1e-12, "n={n}");
        }
    }
}
