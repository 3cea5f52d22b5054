//! Concentration bounds and error estimators.
//!
//! * [`hoeffding_epsilon`]: one-sided Hoeffding deviation for a mean of
//!   `[0, 1]`-bounded variables.
//! * [`box_guarantee`]: per-box error bound from held-out samples landing in
//!   the box (empirical error plus Hoeffding deviation).
//! * [`clopper_pearson_upper`] / [`coverage_guarantee`]: exact one-sided
//!   binomial bound on the probability that a fresh input falls outside
//!   every confirmed box.
//! * [`generalization_error`]: 0-1 loss weighted by an operational profile.
//!
//! Both bounds assume the held-out samples are i.i.d. draws from the
//! operational distribution and were not used to build the monitor.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};
use crate::geometry::{AbstractionBox, ClusterId};
use crate::monitor::{Monitor, MonitoredSample};

/// Bisection tolerance on `p` for the exact binomial bound.
pub const BISECTION_TOL: f64 = 1e-12;

fn check_confidence(delta: f64, upper: f64, what: &str) -> Result<()> {
    if !(delta > 0.0 && delta < upper) {
        return Err(Error::invalid(format!("{what} must lie in (0, {upper}), got {delta}")));
    }
    Ok(())
}

/// `sqrt(ln(1/delta) / (2m))`.
pub fn hoeffding_epsilon(m: usize, delta: f64) -> Result<f64> {
    if m == 0 {
        return Err(Error::invalid("hoeffding_epsilon requires m >= 1"));
    }
    check_confidence(delta, 1.0, "delta")?;
    Ok((-delta.ln() / (2.0 * m as f64)).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxGuarantee {
    pub cluster: ClusterId,
    /// Held-out samples inside the box.
    pub evidence: usize,
    /// Held-out samples whose correctness disagrees with the box polarity.
    pub errors: usize,
    pub empirical_error: f64,
    pub epsilon: f64,
    pub delta: f64,
}

/// Error bound for one box.
///
/// Only held-out samples predicted with the box's label and lying inside it
/// count as evidence. An error is a sample whose correctness disagrees with
/// the box polarity, so for negative boxes a correct prediction is an error.
pub fn box_guarantee(b: &AbstractionBox, holdout: &[MonitoredSample], delta: f64) -> Result<BoxGuarantee> {
    check_confidence(delta, 0.5, "box delta")?;
    let mut evidence = 0usize;
    let mut errors = 0usize;
    for s in holdout {
        if s.predicted != b.label || !b.contains(&s.features)? {
            continue;
        }
        evidence += 1;
        if !b.polarity.agrees_with(s.correct) {
            errors += 1;
        }
    }
    if evidence == 0 {
        return Err(Error::NoEvidence {
            cluster: b.cluster.0.clone(),
        });
    }
    let empirical_error = errors as f64 / evidence as f64;
    let epsilon = (empirical_error + hoeffding_epsilon(evidence, delta)?).min(1.0);
    Ok(BoxGuarantee {
        cluster: b.cluster.clone(),
        evidence,
        errors,
        empirical_error,
        epsilon,
        delta,
    })
}

/// `P(Binomial(n, p) <= k)` through the regularized incomplete beta function.
pub fn binomial_cdf(k: u64, n: u64, p: f64) -> f64 {
    if k >= n || p <= 0.0 {
        return 1.0;
    }
    if p >= 1.0 {
        return 0.0;
    }
    beta_reg((n - k) as f64, (k + 1) as f64, 1.0 - p).clamp(0.0, 1.0)
}

/// Smallest `p` with `P(Binomial(n, p) <= misses) <= delta`.
pub fn clopper_pearson_upper(misses: u64, n: u64, delta: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("clopper_pearson_upper requires n >= 1"));
    }
    if misses > n {
        return Err(Error::invalid(format!("misses ({misses}) exceed trials ({n})")));
    }
    check_confidence(delta, 1.0, "delta")?;
    if misses == n {
        return Ok(1.0);
    }
    if misses == 0 {
        // (1 - p)^n = delta
        return Ok(-(delta.ln() / n as f64).exp_m1());
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > BISECTION_TOL {
        let mid = lo + (hi - lo) / 2.0;
        if binomial_cdf(misses, n, mid) > delta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverageMethod {
    #[default]
    ClopperPearson,
    Hoeffding,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageGuarantee {
    pub n_holdout: usize,
    /// Held-out samples outside every confirmed box of their predicted label.
    pub misses: usize,
    pub m_min: usize,
    pub method: CoverageMethod,
    pub epsilon: f64,
    pub delta: f64,
}

/// Bound on the probability that a fresh input falls outside the confirmed region.
pub fn coverage_guarantee(
    monitor: &Monitor,
    holdout: &[MonitoredSample],
    m_min: usize,
    delta: f64,
    method: CoverageMethod,
) -> Result<CoverageGuarantee> {
    if holdout.is_empty() {
        return Err(Error::Empty("held-out samples"));
    }
    if m_min == 0 {
        return Err(Error::invalid("m_min must be at least 1"));
    }
    check_confidence(delta, 0.5, "coverage delta")?;
    let mut misses = 0usize;
    for s in holdout {
        if !monitor.in_confirmed_region(&s.features, &s.predicted, m_min)? {
            misses += 1;
        }
    }
    let n = holdout.len();
    let epsilon = match method {
        CoverageMethod::ClopperPearson => clopper_pearson_upper(misses as u64, n as u64, delta)?,
        CoverageMethod::Hoeffding => (misses as f64 / n as f64 + hoeffding_epsilon(n, delta)?).min(1.0),
    };
    Ok(CoverageGuarantee {
        n_holdout: n,
        misses,
        m_min,
        method,
        epsilon,
        delta,
    })
}

/// Input identifier to probability, summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<String, f64>", into = "BTreeMap<String, f64>")]
pub struct OperationalProfile(BTreeMap<String, f64>);

impl OperationalProfile {
    pub const SUM_TOL: f64 = 1e-9;

    pub fn new(weights: BTreeMap<String, f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Empty("operational profile"));
        }
        if let Some((k, p)) = weights.iter().find(|(_, p)| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::invalid(format!("profile probability for `{k}` is {p}")));
        }
        let total: f64 = weights.values().sum();
        if (total - 1.0).abs() > Self::SUM_TOL {
            return Err(Error::invalid(format!("profile sums to {total}, not 1")));
        }
        Ok(OperationalProfile(weights))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn get(&self, input: &str) -> Option<f64> {
        self.0.get(input).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<BTreeMap<String, f64>> for OperationalProfile {
    type Error = Error;

    fn try_from(m: BTreeMap<String, f64>) -> Result<Self> {
        OperationalProfile::new(m)
    }
}

impl From<OperationalProfile> for BTreeMap<String, f64> {
    fn from(p: OperationalProfile) -> Self {
        p.0
    }
}

/// Sum of profile mass over inputs the component gets wrong.
pub fn generalization_error(predictions: &BTreeMap<String, bool>, profile: &OperationalProfile) -> Result<f64> {
    let mut total = 0.0;
    for (input, p) in profile.iter() {
        let correct = predictions
            .get(input)
            .ok_or_else(|| Error::MissingPrediction(input.to_owned()))?;
        if !correct {
            total += p;
        }
    }
    Ok(total)
}
