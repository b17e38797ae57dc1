//! The induced discrete renewal process: inter-arrival law `q_k`, renewal
//! sequence `u_n`, mean and variance of the inter-arrival law, recurrence
//! classification, the survival probability `1/μ`, and the explicit tail
//! bounds used for the rate-of-convergence checks.
//!
//! The inter-arrival law is `q_k = (1 - α_{k-1}) ∏_{i=0}^{k-2} α_i` with
//! defect `q_∞ = ∏_{i≥0} α_i`, and `μ = 1 + Σ_{j≥1} ∏_{i<j} α_i`.

use thiserror::Error;

use crate::dist::{ProductLimit, RadiusDistribution, SeriesTail, TailUnavailable};

/// Inter-arrival law `q_1..q_K` plus defect mass.
#[derive(Debug, Clone)]
pub struct InterArrivalLaw {
    /// `q[k]` holds `q_k`; `q[0]` is unused and zero.
    q: Vec<f64>,
    q_inf: DefectMass,
    /// Index of the last nonzero `q_k` (0 when all zero).
    support_end: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DefectMass {
    Exact(f64),
    /// Only a bracket is certified (no analytic tail data).
    Bracket { lower: f64, upper: f64 },
}

impl InterArrivalLaw {
    pub fn q(&self, k: usize) -> f64 {
        if k >= 1 && k < self.q.len() {
            self.q[k]
        } else {
            0.0
        }
    }

    pub fn horizon(&self) -> usize {
        self.q.len() - 1
    }

    pub fn q_inf(&self) -> DefectMass {
        self.q_inf
    }
}

/// Computes `q_1..q_K` with a single running product.
pub fn inter_arrival(dist: &RadiusDistribution, k_max: usize) -> InterArrivalLaw {
    assert!(k_max >= 1);
    let mut q = vec![0.0; k_max + 1];
    let mut product = 1.0; // ∏_{i=0}^{k-2} α_i
    let mut support_end = 0;
    for (k, slot) in q.iter_mut().enumerate().skip(1) {
        let a = dist.alpha(k as u64 - 1);
        *slot = (1.0 - a) * product;
        if *slot > 0.0 {
            support_end = k;
        }
        product *= a;
    }
    let q_inf = match dist.tail_data().map(|t| t.product_limit()) {
        Some(ProductLimit::Zero) => DefectMass::Exact(0.0),
        Some(ProductLimit::Positive(v)) => DefectMass::Exact(v),
        None => DefectMass::Bracket {
            lower: 0.0,
            upper: product,
        },
    };
    InterArrivalLaw {
        q,
        q_inf,
        support_end,
    }
}

/// Renewal sequence `u_0..u_n`, `u_n = P(renewal at n)`.
#[derive(Debug, Clone)]
pub struct RenewalSequence {
    u: Vec<f64>,
}

impl RenewalSequence {
    pub fn u(&self, n: usize) -> f64 {
        self.u[n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.u
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }
}

/// Direct convolution `u_n = Σ_{k=1}^n q_k u_{n-k}`, `u_0 = 1`. O(n·s)
/// where `s` is the support of `q`.
pub fn renewal_sequence(law: &InterArrivalLaw, n: usize) -> RenewalSequence {
    assert!(n <= law.horizon(), "renewal horizon exceeds inter-arrival horizon");
    let mut u = Vec::with_capacity(n + 1);
    u.push(1.0);
    for m in 1..=n {
        let kmax = m.min(law.support_end);
        let mut acc = 0.0;
        for k in 1..=kmax {
            acc += law.q[k] * u[m - k];
        }
        u.push(acc);
    }
    RenewalSequence { u }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecurrenceClass {
    Transient,
    NullRecurrent,
    PositiveRecurrent,
}

impl std::fmt::Display for RecurrenceClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RecurrenceClass::Transient => write!(f, "transient"),
            RecurrenceClass::NullRecurrent => write!(f, "null_recurrent"),
            RecurrenceClass::PositiveRecurrent => write!(f, "positive_recurrent"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mean {
    Finite(f64),
    Infinite,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Variance {
    Finite(f64),
    Infinite,
    /// σ² is undefined whenever μ = ∞.
    Undefined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Certification {
    /// Truncation error certified below the requested tolerance.
    Certified,
    /// No analytic tail data: values are horizon-limited partial sums.
    HorizonLimited { horizon: u64 },
}

#[derive(Debug, Clone)]
pub struct RenewalStats {
    pub mu: Mean,
    pub sigma2: Variance,
    /// Known only when tail data certifies the classification.
    pub class: Option<RecurrenceClass>,
    /// `1/μ` when μ < ∞, else 0 (lower bound when horizon-limited).
    pub survival_prob: f64,
    pub cert: Certification,
}

const UNCERTIFIED_HORIZON: u64 = 100_000;

/// μ and σ² of the induced inter-arrival law, with certified truncation
/// error ≤ `tol` when tail data is available.
pub fn mu_sigma(dist: &RadiusDistribution, tol: f64) -> RenewalStats {
    assert!(tol > 0.0);
    let Some(tail) = dist.tail_data() else {
        return horizon_limited(dist);
    };

    // μ = 1 + Σ_{j≥1} p(j) with p(j) = ∏_{i<j} α_i.
    if let ProductLimit::Positive(_) = tail.product_limit() {
        // terms do not vanish: μ = ∞, class transient, T = ∞ w.p. q_∞ > 0
        return RenewalStats {
            mu: Mean::Infinite,
            sigma2: Variance::Undefined,
            class: Some(RecurrenceClass::Transient),
            survival_prob: 0.0,
            cert: Certification::Certified,
        };
    }
    if tail.series_tail(1) == SeriesTail::Divergent {
        return RenewalStats {
            mu: Mean::Infinite,
            sigma2: Variance::Undefined,
            class: Some(RecurrenceClass::NullRecurrent),
            survival_prob: 0.0,
            cert: Certification::Certified,
        };
    }

    let mut partial = 1.0;
    let mut p = 1.0;
    let mut j = 0u64;
    let mu = loop {
        match tail.series_tail(j + 1) {
            SeriesTail::Bound { value, exact } => {
                if exact {
                    break partial + value;
                }
                if value <= tol {
                    break partial + value / 2.0;
                }
            }
            SeriesTail::Divergent => unreachable!("divergence decided above"),
        }
        p *= dist.alpha(j);
        partial += p;
        j += 1;
    };

    // σ² = Σ_{k≥1} k² q_k − μ², same certification.
    let sigma2 = if tail.second_moment_tail(1, 1.0) == SeriesTail::Divergent {
        Variance::Infinite
    } else {
        let mut sum = 0.0;
        let mut p = 1.0; // p(k-1)
        let mut k = 1u64;
        loop {
            let a = dist.alpha(k - 1);
            sum += (k * k) as f64 * (1.0 - a) * p;
            p *= a;
            match tail.second_moment_tail(k, p) {
                SeriesTail::Bound { value, .. } if value <= tol => {
                    break Variance::Finite(sum + value / 2.0 - mu * mu);
                }
                _ => {}
            }
            k += 1;
        }
    };

    RenewalStats {
        mu: Mean::Finite(mu),
        sigma2,
        class: Some(RecurrenceClass::PositiveRecurrent),
        survival_prob: 1.0 / mu,
        cert: Certification::Certified,
    }
}

fn horizon_limited(dist: &RadiusDistribution) -> RenewalStats {
    let mut partial = 1.0;
    let mut sum2 = 0.0;
    let mut p = 1.0;
    for j in 0..UNCERTIFIED_HORIZON {
        let a = dist.alpha(j);
        sum2 += ((j + 1) * (j + 1)) as f64 * (1.0 - a) * p;
        p *= a;
        partial += p;
    }
    RenewalStats {
        mu: Mean::Finite(partial),
        sigma2: Variance::Finite(sum2 - partial * partial),
        class: None,
        survival_prob: 1.0 / partial,
        cert: Certification::HorizonLimited {
            horizon: UNCERTIFIED_HORIZON,
        },
    }
}

/// transient iff `∏ α_i > 0`; else positive recurrent iff μ < ∞.
pub fn classify(dist: &RadiusDistribution) -> Result<RecurrenceClass, TailUnavailable> {
    if dist.tail_data().is_none() {
        return Err(TailUnavailable);
    }
    Ok(mu_sigma(dist, 1e-9).class.expect("tail data present"))
}

/// `P(survival) = 1/μ`, exactly 0 when μ = ∞ is proven.
pub fn survival_probability(dist: &RadiusDistribution, tol: f64) -> (f64, Certification) {
    let stats = mu_sigma(dist, tol);
    (stats.survival_prob, stats.cert)
}

#[derive(Debug, Error)]
pub enum BoundError {
    #[error("parameter out of range for {variant}: {detail}")]
    Param {
        variant: &'static str,
        detail: String,
    },
    #[error("bound requires k >= 2 when it contains log k (got {0})")]
    SmallK(u64),
}

/// Shapes of the explicit upper bounds on `u_k` / `P(M ≥ k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundVariant {
    /// `(1/C_r)(e^{C_r} r)^k`, valid for `1-α_k ≤ C_r r^k`, `C_r ∈ (0, ln(1/r))`.
    Exp { r: f64, c_r: f64 },
    /// `(log k)^β k^{-α}` (constant left unspecified, evaluated with C = 1).
    PolyLog { alpha: f64, beta: f64 },
    /// `(ln k)^{3+r} k^{-(2-(1+r)²)}` for `1-α_k = r/k`.
    Harmonic { r: f64 },
    /// `k^{-(1-α)}` for regularly varying running products, `α ∈ (1/2, 1)`.
    RegVar { alpha: f64 },
}

impl BoundVariant {
    fn validate(&self) -> Result<(), BoundError> {
        match *self {
            BoundVariant::Exp { r, c_r } => {
                if !(r > 0.0 && r < 1.0) || !(c_r > 0.0 && c_r < (1.0 / r).ln()) {
                    return Err(BoundError::Param {
                        variant: "exp",
                        detail: format!("need r in (0,1), C_r in (0, ln(1/r)); got r={r}, C_r={c_r}"),
                    });
                }
            }
            BoundVariant::PolyLog { alpha, .. } => {
                if !(alpha > 1.0) {
                    return Err(BoundError::Param {
                        variant: "polylog",
                        detail: format!("need alpha > 1; got {alpha}"),
                    });
                }
            }
            BoundVariant::Harmonic { r } => {
                if !(r > 0.0 && r < 1.0) {
                    return Err(BoundError::Param {
                        variant: "harmonic",
                        detail: format!("need r in (0,1); got {r}"),
                    });
                }
            }
            BoundVariant::RegVar { alpha } => {
                if !(alpha > 0.5 && alpha < 1.0) {
                    return Err(BoundError::Param {
                        variant: "regvar",
                        detail: format!("need alpha in (1/2,1); got {alpha}"),
                    });
                }
            }
        }
        Ok(())
    }

    /// The exponent `2-(1+r)²` turns negative for `r > √2 − 1`: the bound
    /// shape is nondecreasing there and only shape reports are meaningful.
    pub fn verdict_meaningful(&self) -> bool {
        match *self {
            BoundVariant::Harmonic { r } => r < std::f64::consts::SQRT_2 - 1.0,
            _ => true,
        }
    }
}

/// Value of the bound at `k` (with C = 1 for the unspecified-constant
/// variants).
pub fn tail_bound(variant: BoundVariant, k: u64) -> Result<f64, BoundError> {
    variant.validate()?;
    let kf = k as f64;
    match variant {
        BoundVariant::Exp { r, c_r } => Ok((c_r.exp() * r).powi(k as i32) / c_r),
        BoundVariant::PolyLog { alpha, beta } => {
            if k < 2 {
                return Err(BoundError::SmallK(k));
            }
            Ok(kf.ln().powf(beta) * kf.powf(-alpha))
        }
        BoundVariant::Harmonic { r } => {
            if k < 2 {
                return Err(BoundError::SmallK(k));
            }
            Ok(kf.ln().powf(3.0 + r) / kf.powf(2.0 - (1.0 + r) * (1.0 + r)))
        }
        BoundVariant::RegVar { alpha } => Ok(kf.powf(-(1.0 - alpha))),
    }
}

/// Empirical comparison of a renewal sequence against a bound shape.
#[derive(Debug, Clone)]
pub struct BoundReport {
    /// `sup_{k ≥ k_min} u_k / bound_k`.
    pub max_ratio: f64,
    pub arg_max: usize,
    /// Max ratio over the last decade `[n/10, n]`.
    pub last_decade_max: f64,
    /// Max ratio before the last decade.
    pub earlier_max: f64,
    /// Estimate of the unspecified constant (last-decade max ratio).
    pub estimated_constant: f64,
    /// The ratio looks bounded: finite everywhere and not growing over the
    /// last decade of indices.
    pub pass: bool,
}

/// Compares `u_k` against `bound_k` for `k ≥ k_min` (sequences share
/// indexing: entry `k` is index `k`).
pub fn verify_bound(u: &[f64], bound: &[f64], k_min: usize) -> BoundReport {
    assert_eq!(u.len(), bound.len());
    assert!(k_min >= 1 && k_min < u.len());
    let n = u.len() - 1;
    let decade_start = (n / 10).max(k_min);
    let mut max_ratio = 0.0f64;
    let mut arg_max = k_min;
    let mut last_decade_max = 0.0f64;
    let mut earlier_max = 0.0f64;
    let mut finite = true;
    for k in k_min..=n {
        let ratio = u[k] / bound[k];
        if !ratio.is_finite() {
            finite = false;
            continue;
        }
        if ratio > max_ratio {
            max_ratio = ratio;
            arg_max = k;
        }
        if k >= decade_start {
            last_decade_max = last_decade_max.max(ratio);
        } else {
            earlier_max = earlier_max.max(ratio);
        }
    }
    // "Not growing": the last decade does not push the running sup upward
    // beyond slack for ratios that converge to their limit from below.
    let growing = earlier_max > 0.0 && last_decade_max > earlier_max * 1.05;
    BoundReport {
        max_ratio,
        arg_max,
        last_decade_max,
        earlier_max,
        estimated_constant: last_decade_max,
        pass: finite && !growing,
    }
}
