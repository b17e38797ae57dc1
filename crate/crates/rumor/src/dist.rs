//! Radius distributions: the law of the transmission radius `R`.
//!
//! A distribution is described by its pmf `λ_k = P(R = k)` and cdf
//! `α_k = P(R ≤ k)`, with the standing assumption `α_0 = λ_0 ∈ (0,1)`.
//! Besides finite pmfs, the catalog ships the parametric families used for
//! explicit tail bounds, and three model-variant transforms (sparse sites,
//! random group sizes via a pgf, distance-dependent susceptibility).
//! Each family carries analytic tail data (the limit of the running product
//! `∏_{i<j} α_i` and a certified remainder rule for `Σ_{j≥J} ∏_{i<j} α_i`)
//! so downstream series can be truncated with known error.

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

pub type BigRational = Ratio<BigInt>;

#[derive(Debug, Error, PartialEq)]
pub enum DistError {
    #[error("pmf must sum to 1 (got {0})")]
    PmfSum(f64),
    #[error("pmf entries must be nonnegative")]
    NegativePmf,
    #[error("alpha_0 must lie in (0,1), got {0}")]
    Alpha0OutOfRange(f64),
    #[error("parameter out of range: {0}")]
    Param(String),
    #[error("susceptibility sequence must be nonincreasing in [0,1]")]
    NonMonotoneSusceptibility,
    #[error("count law must be supported on {{1,2,...}}")]
    CountLawAtZero,
    #[error("cannot parse distribution spec: {0}")]
    Parse(String),
}

/// Certified tail information for the running product `p(j) = ∏_{i<j} α_i`.
#[derive(Debug, Clone)]
pub enum TailData {
    /// `α` saturates at exactly 1 from `sat_index` on; the product limit
    /// `∏ α_i = p(sat_index)` is positive and the series `Σ_j p(j)` diverges.
    FiniteSupport {
        sat_index: u64,
        product_limit: f64,
        exact_product: Option<BigRational>,
    },
    /// Family `α_k = (k+1)/(k+1+c)`, `c > 1`: `p(j) = Γ(1+c)Γ(j+1)/Γ(j+1+c)`.
    Frac { c: f64 },
    /// Family `α_k = ((k+1)/(k+2))^a`, `a > 0`: `p(j) = (j+1)^{-a}`.
    PowRatio { a: f64 },
    /// `1 - α_k ≤ coeff · ratio^k`; the product limit is positive.
    GeomBound {
        coeff: f64,
        ratio: f64,
        product_limit: f64,
    },
    /// Family `1 - α_k = r/k` for `k ≥ 1`: product limit 0, divergent series.
    Harmonic { r: f64, alpha0: f64 },
}

/// Limit of the running product `∏_{i≥0} α_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProductLimit {
    Zero,
    Positive(f64),
}

/// Certified tail of the series `Σ_{j≥J} p(j)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SeriesTail {
    /// Upper bound on the tail; `exact` marks bounds that are equalities.
    Bound { value: f64, exact: bool },
    Divergent,
}

impl TailData {
    pub fn product_limit(&self) -> ProductLimit {
        match *self {
            TailData::FiniteSupport { product_limit, .. } => ProductLimit::Positive(product_limit),
            TailData::GeomBound { product_limit, .. } => ProductLimit::Positive(product_limit),
            TailData::Frac { .. } | TailData::PowRatio { .. } | TailData::Harmonic { .. } => {
                ProductLimit::Zero
            }
        }
    }

    /// Tail `Σ_{j≥j_from} ∏_{i<j} α_i`, certified.
    pub fn series_tail(&self, j_from: u64) -> SeriesTail {
        let j = j_from as f64;
        match *self {
            // Positive product limit: the terms do not vanish.
            TailData::FiniteSupport { .. } | TailData::GeomBound { .. } => SeriesTail::Divergent,
            // Telescoping: Σ_{j≥J} Γ(1+c)Γ(j+1)/Γ(j+1+c) = Γ(1+c)Γ(J+1)/((c-1)Γ(J+c)).
            TailData::Frac { c } => SeriesTail::Bound {
                value: (ln_gamma(1.0 + c) + ln_gamma(j + 1.0) - ln_gamma(j + c)).exp() / (c - 1.0),
                exact: true,
            },
            // Σ_{j≥J} (j+1)^{-a} ≤ ∫_{J-1}^∞ (x+1)^{-a} dx = J^{1-a}/(a-1) for a > 1.
            TailData::PowRatio { a } => {
                if a > 1.0 {
                    SeriesTail::Bound {
                        value: j.powf(1.0 - a) / (a - 1.0),
                        exact: false,
                    }
                } else {
                    SeriesTail::Divergent
                }
            }
            // p(j) ~ const · j^{-r} with r < 1: harmonic-type divergence.
            TailData::Harmonic { .. } => SeriesTail::Divergent,
        }
    }

    /// Tail `Σ_{k>k_last} k² q_k` where `q_k = p(k-1) - p(k)`, given the
    /// running product `p_k = p(k_last)`. Abel summation gives
    /// `(K+1)² p(K) + Σ_{j≥K+1} (2j+1) p(j)`.
    pub fn second_moment_tail(&self, k_last: u64, p_k: f64) -> SeriesTail {
        let k = k_last as f64;
        match *self {
            TailData::Frac { c } => {
                if c > 2.0 {
                    // (2j+1)p(j) ≤ 2Γ(1+c)Γ(j+2)/Γ(j+1+c); telescopes to
                    // 2Γ(1+c)Γ(J+2)/((c-2)Γ(J+c)) at J = K+1.
                    let j = k + 1.0;
                    let s = 2.0 * (ln_gamma(1.0 + c) + ln_gamma(j + 2.0) - ln_gamma(j + c)).exp()
                        / (c - 2.0);
                    SeriesTail::Bound {
                        value: (k + 1.0) * (k + 1.0) * p_k + s,
                        exact: false,
                    }
                } else {
                    SeriesTail::Divergent
                }
            }
            TailData::PowRatio { a } => {
                if a > 2.0 {
                    // Σ_{j≥J}(2j+1)(j+1)^{-a} ≤ 2[(J+1)^{1-a} + (J+1)^{2-a}/(a-2)].
                    let j1 = k + 2.0;
                    let s = 2.0 * (j1.powf(1.0 - a) + j1.powf(2.0 - a) / (a - 2.0));
                    SeriesTail::Bound {
                        value: (k + 1.0) * (k + 1.0) * p_k + s,
                        exact: false,
                    }
                } else {
                    SeriesTail::Divergent
                }
            }
            // μ = ∞ for these; the second moment is never requested.
            _ => SeriesTail::Divergent,
        }
    }
}

/// Count law on `{1,2,...}` for the pgf transform (random group sizes).
#[derive(Debug, Clone, PartialEq)]
pub enum CountLaw {
    /// Exactly `m ≥ 1` individuals per site: `g(s) = s^m`.
    Const(u64),
    /// Geometric on `{1,2,...}` with success `p`: `g(s) = ps/(1-(1-p)s)`.
    Geom1(f64),
}

impl CountLaw {
    pub fn pgf(&self, s: f64) -> f64 {
        match *self {
            CountLaw::Const(m) => s.powi(m as i32),
            CountLaw::Geom1(p) => p * s / (1.0 - (1.0 - p) * s),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            CountLaw::Const(m) => m as f64,
            CountLaw::Geom1(p) => 1.0 / p,
        }
    }

    fn validate(&self) -> Result<(), DistError> {
        match *self {
            CountLaw::Const(m) if m >= 1 => Ok(()),
            CountLaw::Const(_) => Err(DistError::CountLawAtZero),
            CountLaw::Geom1(p) if p > 0.0 && p <= 1.0 => Ok(()),
            CountLaw::Geom1(p) => Err(DistError::Param(format!("geom1 success p={p}"))),
        }
    }
}

/// Susceptibility profile `p_k` (nonincreasing, in `[0,1]`).
#[derive(Debug, Clone, PartialEq)]
pub enum SusceptProfile {
    Const(f64),
    /// `p_k = 1/(k+1)`.
    Recip,
    /// Explicit prefix; constant at the last value beyond the end.
    Seq(Vec<f64>),
}

impl SusceptProfile {
    pub fn p(&self, k: u64) -> f64 {
        match self {
            SusceptProfile::Const(p) => *p,
            SusceptProfile::Recip => 1.0 / (k as f64 + 1.0),
            SusceptProfile::Seq(v) => v[(k as usize).min(v.len() - 1)],
        }
    }

    fn validate(&self) -> Result<(), DistError> {
        match self {
            SusceptProfile::Const(p) if (0.0..=1.0).contains(p) => Ok(()),
            SusceptProfile::Const(_) => Err(DistError::NonMonotoneSusceptibility),
            SusceptProfile::Recip => Ok(()),
            SusceptProfile::Seq(v) => {
                if v.is_empty()
                    || v.windows(2).any(|w| w[1] > w[0])
                    || v.iter().any(|p| !(0.0..=1.0).contains(p))
                {
                    Err(DistError::NonMonotoneSusceptibility)
                } else {
                    Ok(())
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Kind {
    Finite {
        pmf: Vec<f64>,
        cdf: Vec<f64>,
        exact: Option<Vec<BigRational>>,
    },
    Frac {
        c: f64,
    },
    PowRatio {
        a: f64,
    },
    GeomDefect {
        coeff: f64,
        ratio: f64,
    },
    Harmonic {
        r: f64,
        alpha0: f64,
    },
    Sparse {
        base: Box<RadiusDistribution>,
        eps: f64,
    },
    Pgf {
        base: Box<RadiusDistribution>,
        count: CountLaw,
    },
    Suscept {
        base: Box<RadiusDistribution>,
        profile: SusceptProfile,
    },
}

/// The law of the transmission radius. Immutable after construction.
#[derive(Debug, Clone)]
pub struct RadiusDistribution {
    kind: Kind,
    tail: Option<TailData>,
}

const PMF_SUM_TOL: f64 = 1e-12;

impl RadiusDistribution {
    fn build(kind: Kind) -> Result<Self, DistError> {
        let mut dist = RadiusDistribution { kind, tail: None };
        let a0 = dist.alpha(0);
        if !(a0 > 0.0 && a0 < 1.0) {
            return Err(DistError::Alpha0OutOfRange(a0));
        }
        dist.tail = derive_tail(&dist);
        Ok(dist)
    }

    /// Finite pmf from floats; exact rationals are recovered from the
    /// shortest round-tripping decimal rendering of each entry.
    pub fn finite(pmf: &[f64]) -> Result<Self, DistError> {
        let exact = pmf
            .iter()
            .map(|&x| parse_decimal_rational(&format!("{x}")))
            .collect::<Option<Vec<_>>>();
        Self::finite_inner(pmf.to_vec(), exact)
    }

    /// Finite pmf from exact rationals (the oracle's preferred entry point).
    pub fn finite_exact(pmf: Vec<BigRational>) -> Result<Self, DistError> {
        if pmf.iter().any(|p| p.is_negative()) {
            return Err(DistError::NegativePmf);
        }
        let sum: BigRational = pmf.iter().sum();
        if !sum.is_one() {
            let s: f64 = rational_to_f64(&sum);
            return Err(DistError::PmfSum(s));
        }
        let floats: Vec<f64> = pmf.iter().map(rational_to_f64).collect();
        Self::finite_inner(floats, Some(pmf))
    }

    fn finite_inner(pmf: Vec<f64>, exact: Option<Vec<BigRational>>) -> Result<Self, DistError> {
        if pmf.is_empty() || pmf.iter().any(|&p| p < 0.0) {
            return Err(DistError::NegativePmf);
        }
        let sum: f64 = pmf.iter().sum();
        if (sum - 1.0).abs() > PMF_SUM_TOL {
            return Err(DistError::PmfSum(sum));
        }
        let mut cdf = Vec::with_capacity(pmf.len());
        let mut acc = 0.0;
        for &p in &pmf {
            acc += p;
            cdf.push(acc);
        }
        *cdf.last_mut().unwrap() = 1.0;
        Self::build(Kind::Finite { pmf, cdf, exact })
    }

    pub fn frac(c: f64) -> Result<Self, DistError> {
        if !(c > 1.0) {
            return Err(DistError::Param(format!("frac requires c > 1, got {c}")));
        }
        Self::build(Kind::Frac { c })
    }

    pub fn powratio(a: f64) -> Result<Self, DistError> {
        if !(a > 0.0) {
            return Err(DistError::Param(format!("powratio requires a > 0, got {a}")));
        }
        Self::build(Kind::PowRatio { a })
    }

    pub fn geomdefect(coeff: f64, ratio: f64) -> Result<Self, DistError> {
        if !(coeff > 0.0 && coeff < 1.0 && ratio > 0.0 && ratio < 1.0) {
            return Err(DistError::Param(format!(
                "geomdefect requires C, r in (0,1), got C={coeff}, r={ratio}"
            )));
        }
        Self::build(Kind::GeomDefect { coeff, ratio })
    }

    /// `1 - α_k = r/k` for `k ≥ 1`; `α_0` defaults to `1 - r`.
    pub fn harmonic(r: f64, alpha0: Option<f64>) -> Result<Self, DistError> {
        if !(r > 0.0 && r < 1.0) {
            return Err(DistError::Param(format!(
                "harmonic requires r in (0,1), got {r}"
            )));
        }
        let alpha0 = alpha0.unwrap_or(1.0 - r);
        // Monotonicity at k=1 needs alpha0 ≤ α_1 = 1 - r.
        if !(alpha0 > 0.0 && alpha0 <= 1.0 - r) {
            return Err(DistError::Param(format!(
                "harmonic requires alpha0 in (0, 1-r], got {alpha0}"
            )));
        }
        Self::build(Kind::Harmonic { r, alpha0 })
    }

    /// Sparse-sites variant: `α_k = 1 - eps·(1 - ᾱ_k)`.
    pub fn sparse(base: RadiusDistribution, eps: f64) -> Result<Self, DistError> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(DistError::Param(format!(
                "sparseness eps must lie in (0,1], got {eps}"
            )));
        }
        Self::build(Kind::Sparse {
            base: Box::new(base),
            eps,
        })
    }

    /// Random-group-size variant: `α_k = g(ᾱ_k)` with `g` the pgf of the
    /// per-site individual count.
    pub fn pgf(base: RadiusDistribution, count: CountLaw) -> Result<Self, DistError> {
        count.validate()?;
        Self::build(Kind::Pgf {
            base: Box::new(base),
            count,
        })
    }

    /// Susceptibility variant: `α_k = 1 - p_k·(1 - ᾱ_k)`.
    pub fn susceptible(
        base: RadiusDistribution,
        profile: SusceptProfile,
    ) -> Result<Self, DistError> {
        profile.validate()?;
        Self::build(Kind::Suscept {
            base: Box::new(base),
            profile,
        })
    }

    /// cdf `α_k = P(R ≤ k)`.
    pub fn alpha(&self, k: u64) -> f64 {
        match &self.kind {
            Kind::Finite { cdf, .. } => {
                if (k as usize) < cdf.len() {
                    cdf[k as usize]
                } else {
                    1.0
                }
            }
            Kind::Frac { c } => (k as f64 + 1.0) / (k as f64 + 1.0 + c),
            Kind::PowRatio { a } => ((k as f64 + 1.0) / (k as f64 + 2.0)).powf(*a),
            Kind::GeomDefect { coeff, ratio } => 1.0 - coeff * ratio.powf(k as f64),
            Kind::Harmonic { r, alpha0 } => {
                if k == 0 {
                    *alpha0
                } else {
                    1.0 - r / k as f64
                }
            }
            Kind::Sparse { base, eps } => 1.0 - eps * (1.0 - base.alpha(k)),
            Kind::Pgf { base, count } => count.pgf(base.alpha(k)),
            Kind::Suscept { base, profile } => 1.0 - profile.p(k) * (1.0 - base.alpha(k)),
        }
    }

    /// pmf `λ_k = α_k - α_{k-1}` (with `α_{-1} = 0`).
    pub fn pmf(&self, k: u64) -> f64 {
        if let Kind::Finite { pmf, .. } = &self.kind {
            return if (k as usize) < pmf.len() {
                pmf[k as usize]
            } else {
                0.0
            };
        }
        if k == 0 {
            self.alpha(0)
        } else {
            self.alpha(k) - self.alpha(k - 1)
        }
    }

    /// Smallest `k` with `u < α_k`, i.e. the radius produced by the uniform
    /// `u` under the inverse-cdf construction. Total on `u ∈ [0,1)`: the
    /// bracket doubles until `α` exceeds `u`, then bisects.
    pub fn quantile(&self, u: f64) -> u64 {
        debug_assert!((0.0..1.0).contains(&u));
        if u < self.alpha(0) {
            return 0;
        }
        let mut lo = 0u64;
        let mut hi = 1u64;
        while self.alpha(hi) <= u {
            lo = hi;
            hi *= 2;
        }
        while hi > lo + 1 {
            let mid = lo + (hi - lo) / 2;
            if self.alpha(mid) <= u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }

    /// Analytic tail data, when the family or transform provides it.
    pub fn tail_data(&self) -> Option<&TailData> {
        self.tail.as_ref()
    }

    pub(crate) fn kind(&self) -> &Kind {
        &self.kind
    }

    /// Exact rational pmf, when available (finite pmfs built from decimals
    /// or rationals).
    pub fn exact_pmf(&self) -> Option<&[BigRational]> {
        match &self.kind {
            Kind::Finite { exact, .. } => exact.as_deref(),
            _ => None,
        }
    }

    /// Finite support size (number of pmf entries), if the pmf is finite.
    pub fn finite_support(&self) -> Option<usize> {
        match &self.kind {
            Kind::Finite { pmf, .. } => Some(pmf.len()),
            _ => None,
        }
    }

    /// Certified upper bound on `Σ_{j≥J} ∏_{i<j} α_i`, the tail of the
    /// series defining μ. `Divergent` doubles as the +∞ flag for
    /// distributions whose running product has a positive limit.
    pub fn tail_remainder_bound(&self, j_from: u64) -> Result<SeriesTail, TailUnavailable> {
        assert!(j_from >= 1, "remainder is defined for J >= 1");
        self.tail
            .as_ref()
            .map(|t| t.series_tail(j_from))
            .ok_or(TailUnavailable)
    }
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("no analytic tail data for this distribution; use an explicit horizon")]
pub struct TailUnavailable;

fn derive_tail(dist: &RadiusDistribution) -> Option<TailData> {
    match &dist.kind {
        Kind::Finite { pmf, exact, .. } => {
            let sat_index = (pmf.len() - 1) as u64;
            let product_limit = running_product(dist, sat_index);
            let exact_product = exact.as_ref().map(|pmf| {
                let mut cdf = BigRational::zero();
                let mut prod = BigRational::one();
                for p in &pmf[..pmf.len() - 1] {
                    cdf += p;
                    prod *= &cdf;
                }
                prod
            });
            Some(TailData::FiniteSupport {
                sat_index,
                product_limit,
                exact_product,
            })
        }
        Kind::Frac { c } => Some(TailData::Frac { c: *c }),
        Kind::PowRatio { a } => Some(TailData::PowRatio { a: *a }),
        Kind::GeomDefect { coeff, ratio } => Some(TailData::GeomBound {
            coeff: *coeff,
            ratio: *ratio,
            product_limit: product_limit_geom(dist, *coeff, *ratio),
        }),
        Kind::Harmonic { r, alpha0 } => Some(TailData::Harmonic {
            r: *r,
            alpha0: *alpha0,
        }),
        Kind::Sparse { base, eps } => match base.tail_data() {
            Some(TailData::FiniteSupport { sat_index, .. }) => {
                finite_support_tail(dist, *sat_index)
            }
            Some(TailData::GeomBound { coeff, ratio, .. }) => {
                // 1 - α_k = eps(1 - ᾱ_k) ≤ eps·coeff·ratio^k.
                geom_bound_tail(dist, eps * coeff, *ratio)
            }
            _ => None,
        },
        Kind::Pgf { base, count } => match base.tail_data() {
            Some(TailData::FiniteSupport { sat_index, .. }) => {
                finite_support_tail(dist, *sat_index)
            }
            Some(TailData::GeomBound { coeff, ratio, .. }) => {
                // 1 - g(s) ≤ g'(1)(1-s) = E[X](1-s) by convexity of g.
                geom_bound_tail(dist, count.mean() * coeff, *ratio)
            }
            _ => None,
        },
        Kind::Suscept { base, profile } => match base.tail_data() {
            Some(TailData::FiniteSupport { sat_index, .. }) => {
                finite_support_tail(dist, *sat_index)
            }
            Some(TailData::GeomBound { coeff, ratio, .. }) => {
                // p_k nonincreasing: 1 - α_k = p_k(1 - ᾱ_k) ≤ p_0·coeff·ratio^k.
                geom_bound_tail(dist, profile.p(0) * coeff, *ratio)
            }
            _ => None,
        },
    }
}

fn running_product(dist: &RadiusDistribution, j: u64) -> f64 {
    (0..j).map(|i| dist.alpha(i)).product()
}

fn finite_support_tail(dist: &RadiusDistribution, sat_index: u64) -> Option<TailData> {
    Some(TailData::FiniteSupport {
        sat_index,
        product_limit: running_product(dist, sat_index),
        exact_product: None,
    })
}

fn geom_bound_tail(dist: &RadiusDistribution, coeff: f64, ratio: f64) -> Option<TailData> {
    Some(TailData::GeomBound {
        coeff,
        ratio,
        product_limit: product_limit_geom(dist, coeff, ratio),
    })
}

/// `∏_{i≥0} α_i` when `1 - α_k ≤ coeff·ratio^k`: multiply until the
/// remaining factor is provably within 1e-15 of 1.
fn product_limit_geom(dist: &RadiusDistribution, coeff: f64, ratio: f64) -> f64 {
    let mut p = 1.0;
    let mut k = 0u64;
    let mut defect = coeff;
    while defect / (1.0 - ratio) > 1e-15 {
        p *= dist.alpha(k);
        k += 1;
        defect *= ratio;
    }
    p
}

pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    // Good enough for probabilities: numerator/denominator both fit after
    // the division even when the BigInts are large.
    let n = r.numer();
    let d = r.denom();
    let scale = BigInt::from(1u64 << 60);
    let q = (n * &scale) / d;
    let qf: f64 = q.to_string().parse().unwrap_or(f64::NAN);
    qf / (1u64 << 60) as f64
}

/// Parse a terminating decimal (or integer, or `a/b`) into an exact rational.
pub(crate) fn parse_decimal_rational(s: &str) -> Option<BigRational> {
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    let (int_part, frac_part) = match s.split_once('.') {
        Some((i, f)) => (i, f),
        None => (s, ""),
    };
    if frac_part.contains(['e', 'E']) || int_part.contains(['e', 'E']) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let n: BigInt = digits.parse().ok()?;
    let d = BigInt::from(10u32).pow(frac_part.len() as u32);
    Some(BigRational::new(n, d))
}
