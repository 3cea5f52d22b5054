//! Synthetic ground truth and Monte Carlo validation of emitted guarantees.
//!
//! Samples come from a diagonal Gaussian mixture whose components carry class
//! labels. The simulated classifier is the true class passed through label
//! noise, so its misprediction rate is known exactly without training
//! anything. Each validation run draws a construction set, a held-out set and
//! a fresh oracle set from independent seed streams, builds a monitor,
//! assesses it, and checks the claim against the oracle estimate.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::FeatureVector;
use crate::guarantee::{assess, AssessConfig, CompositionMode};
use crate::monitor::{build_monitor, Monitor, MonitorConfig, MonitoredSample, VerdictKind};
use crate::stats::CoverageMethod;

/// Smallest Monte Carlo budget the oracles accept.
pub const MIN_ORACLE_DRAWS: usize = 10_000;
/// Smallest number of validation runs.
pub const MIN_RUNS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureComponent {
    pub label: String,
    pub weight: f64,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticDistribution {
    pub components: Vec<MixtureComponent>,
    /// Per-class probability that the simulated classifier mispredicts.
    #[serde(default)]
    pub label_noise: BTreeMap<String, f64>,
}

impl SyntheticDistribution {
    pub fn validate(&self) -> Result<()> {
        let first = self.components.first().ok_or(Error::Empty("mixture components"))?;
        let dim = first.mean.len();
        if dim == 0 {
            return Err(Error::Config("mixture components need at least one dimension".into()));
        }
        for c in &self.components {
            if c.label.is_empty() {
                return Err(Error::Config("component label must be non-empty".into()));
            }
            if c.mean.len() != dim || c.std.len() != dim {
                return Err(Error::Config(format!("component `{}` has inconsistent dimension", c.label)));
            }
            if !(c.weight.is_finite() && c.weight > 0.0) {
                return Err(Error::Config(format!("component `{}` weight must be positive", c.label)));
            }
            if c.mean.iter().any(|m| !m.is_finite()) || c.std.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
                return Err(Error::Config(format!(
                    "component `{}` needs finite means and positive standard deviations",
                    c.label
                )));
            }
        }
        let total: f64 = self.components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("mixture weights sum to {total}, not 1")));
        }
        for (class, p) in &self.label_noise {
            if !(p.is_finite() && (0.0..=1.0).contains(p)) {
                return Err(Error::Config(format!("noise for `{class}` must lie in [0, 1]")));
            }
        }
        let classes = self.classes();
        if classes.len() < 2 && self.label_noise.values().any(|p| *p > 0.0) {
            return Err(Error::Config("label noise needs at least two classes".into()));
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.components.first().map_or(0, |c| c.mean.len())
    }

    /// Sorted label alphabet: component labels plus noise-map keys.
    pub fn classes(&self) -> Vec<String> {
        let set: BTreeSet<&String> = self
            .components
            .iter()
            .map(|c| &c.label)
            .chain(self.label_noise.keys())
            .collect();
        set.into_iter().cloned().collect()
    }

    /// Exact misprediction probability of the simulated classifier.
    pub fn misprediction_rate(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.weight * self.label_noise.get(&c.label).copied().unwrap_or(0.0))
            .sum()
    }
}

struct Sampler<'a> {
    dist: &'a SyntheticDistribution,
    classes: Vec<String>,
    cumulative: Vec<f64>,
    rng: ChaCha8Rng,
}

impl<'a> Sampler<'a> {
    fn new(dist: &'a SyntheticDistribution, seed: u64) -> Result<Self> {
        dist.validate()?;
        let mut acc = 0.0;
        let cumulative = dist
            .components
            .iter()
            .map(|c| {
                acc += c.weight;
                acc
            })
            .collect();
        Ok(Sampler {
            dist,
            classes: dist.classes(),
            cumulative,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    fn draw(&mut self) -> MonitoredSample {
        let u: f64 = self.rng.random::<f64>() * self.cumulative.last().copied().unwrap_or(1.0);
        let idx = self
            .cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.cumulative.len() - 1);
        let comp = &self.dist.components[idx];
        let features: Vec<f64> = comp
            .mean
            .iter()
            .zip(&comp.std)
            .map(|(m, s)| {
                let z: f64 = self.rng.sample(StandardNormal);
                m + s * z
            })
            .collect();
        let noise = self.dist.label_noise.get(&comp.label).copied().unwrap_or(0.0);
        let flip = self.rng.random::<f64>() < noise;
        let predicted = if flip {
            let others: Vec<&String> = self.classes.iter().filter(|c| **c != comp.label).collect();
            others[self.rng.random_range(0..others.len())].clone()
        } else {
            comp.label.clone()
        };
        MonitoredSample {
            features: FeatureVector::new(features).expect("finite Gaussian draw"),
            correct: predicted == comp.label,
            predicted,
        }
    }
}

pub fn gen_samples(dist: &SyntheticDistribution, seed: u64, n: usize) -> Result<Vec<MonitoredSample>> {
    if n == 0 {
        return Err(Error::invalid("gen_samples requires n >= 1"));
    }
    let mut sampler = Sampler::new(dist, seed)?;
    Ok((0..n).map(|_| sampler.draw()).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    WholeSpace,
    /// Inputs inside a confirmed box recorded for their predicted label.
    ConfirmedBoxes { m_min: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleEstimate {
    pub estimate: f64,
    pub std_error: f64,
    /// Draws that landed in the region.
    pub hits: usize,
    pub draws: usize,
}

impl OracleEstimate {
    fn from_counts(events: usize, hits: usize, draws: usize) -> Result<Self> {
        if hits == 0 {
            return Err(Error::NoMass { draws });
        }
        let p = events as f64 / hits as f64;
        Ok(OracleEstimate {
            estimate: p,
            std_error: (p * (1.0 - p) / hits as f64).sqrt(),
            hits,
            draws,
        })
    }
}

fn check_draws(n_mc: usize) -> Result<()> {
    if n_mc < MIN_ORACLE_DRAWS {
        return Err(Error::invalid(format!("oracle needs at least {MIN_ORACLE_DRAWS} draws, got {n_mc}")));
    }
    Ok(())
}

/// Fresh Monte Carlo estimate of the component's misprediction probability,
/// optionally conditioned on landing in the confirmed region.
pub fn true_error_oracle(
    dist: &SyntheticDistribution,
    monitor: &Monitor,
    region: Region,
    n_mc: usize,
    seed: u64,
) -> Result<OracleEstimate> {
    check_draws(n_mc)?;
    let mut sampler = Sampler::new(dist, seed)?;
    let (mut hits, mut wrong) = (0usize, 0usize);
    for _ in 0..n_mc {
        let s = sampler.draw();
        let inside = match region {
            Region::WholeSpace => true,
            Region::ConfirmedBoxes { m_min } => monitor.in_confirmed_region(&s.features, &s.predicted, m_min)?,
        };
        if inside {
            hits += 1;
            if !s.correct {
                wrong += 1;
            }
        }
    }
    OracleEstimate::from_counts(wrong, hits, n_mc)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonitoredErrorEstimate {
    /// Probability that the monitored component errs: the input leaves the
    /// confirmed region, or the confirmed boxes containing it do not
    /// unanimously match the actual outcome.
    pub error: OracleEstimate,
    /// Probability mass outside the confirmed region.
    pub outside: OracleEstimate,
}

/// Fresh Monte Carlo estimate of the error the composed guarantee bounds.
pub fn monitored_error_oracle(
    dist: &SyntheticDistribution,
    monitor: &Monitor,
    m_min: usize,
    n_mc: usize,
    seed: u64,
) -> Result<MonitoredErrorEstimate> {
    check_draws(n_mc)?;
    let mut sampler = Sampler::new(dist, seed)?;
    let (mut errors, mut outside) = (0usize, 0usize);
    for _ in 0..n_mc {
        let s = sampler.draw();
        let v = monitor.query_confirmed(&s.features, &s.predicted, m_min)?;
        let ok = match v.kind {
            VerdictKind::Accept => s.correct,
            VerdictKind::Reject => !s.correct,
            VerdictKind::Uncertain => false,
        };
        if v.no_coverage() {
            outside += 1;
        }
        if !ok {
            errors += 1;
        }
    }
    Ok(MonitoredErrorEstimate {
        error: OracleEstimate::from_counts(errors, n_mc, n_mc)?,
        outside: OracleEstimate::from_counts(outside, n_mc, n_mc)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSeeds {
    pub train: u64,
    pub holdout: u64,
    pub oracle: u64,
}

impl RunSeeds {
    /// Independent per-run streams derived from one master seed.
    pub fn derive(master: u64, run: u64) -> Self {
        let base = splitmix64(master ^ splitmix64(run.wrapping_add(0x5EED)));
        RunSeeds {
            train: splitmix64(base ^ 0x7472_6169_6e00_0001),
            holdout: splitmix64(base ^ 0x686f_6c64_6f75_7402),
            oracle: splitmix64(base ^ 0x6f72_6163_6c65_0003),
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.oracle == self.holdout {
            return Err(Error::SeedReuse("oracle stream equals the holdout stream".into()));
        }
        if self.oracle == self.train {
            return Err(Error::SeedReuse("oracle stream equals the training stream".into()));
        }
        if self.train == self.holdout {
            return Err(Error::SeedReuse("training stream equals the holdout stream".into()));
        }
        Ok(())
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidationProtocol {
    pub n_train: usize,
    pub n_holdout: usize,
    pub delta_cov: f64,
    pub delta_box: f64,
    #[serde(default)]
    pub coverage_method: CoverageMethod,
    #[serde(default)]
    pub monitor: MonitorConfig,
    #[serde(default = "default_n_mc")]
    pub n_mc: usize,
    #[serde(default)]
    pub master_seed: u64,
}

fn default_n_mc() -> usize {
    MIN_ORACLE_DRAWS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunOutcome {
    Claimed {
        epsilon: f64,
        delta: f64,
        vacuous: bool,
        confirmed_boxes: usize,
        true_error: f64,
        true_error_se: f64,
        violated: bool,
        coverage_epsilon: f64,
        coverage_delta: f64,
        outside_mass: f64,
        coverage_violated: bool,
    },
    Failed {
        error: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub seeds: RunSeeds,
    #[serde(flatten)]
    pub outcome: RunOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoundnessCheck {
    pub violations: usize,
    pub claims: usize,
    pub rate: f64,
    /// Mean claimed δ over runs that produced a claim.
    pub delta: f64,
    /// `delta + 3 * sqrt(delta * (1 - delta) / claims)`.
    pub threshold: f64,
    pub sound: bool,
}

impl SoundnessCheck {
    pub fn new(violations: usize, claims: usize, delta: f64) -> Self {
        if claims == 0 {
            return SoundnessCheck {
                violations,
                claims,
                rate: f64::NAN,
                delta,
                threshold: f64::NAN,
                sound: false,
            };
        }
        let r = claims as f64;
        let rate = violations as f64 / r;
        let threshold = delta + 3.0 * (delta * (1.0 - delta) / r).sqrt();
        SoundnessCheck {
            violations,
            claims,
            rate,
            delta,
            threshold,
            sound: rate <= threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub runs: usize,
    pub distribution: SyntheticDistribution,
    pub protocol: ValidationProtocol,
    pub failures: usize,
    /// Composed component guarantee versus the monitored error.
    pub component: SoundnessCheck,
    /// Coverage guarantee alone versus the mass outside the confirmed region.
    pub coverage: SoundnessCheck,
    pub records: Vec<RunRecord>,
}

impl ValidationReport {
    pub fn sound(&self) -> bool {
        self.component.sound
    }
}

fn run_once(dist: &SyntheticDistribution, protocol: &ValidationProtocol, run: usize) -> RunRecord {
    let seeds = RunSeeds::derive(protocol.master_seed, run as u64);
    let outcome = (|| -> Result<RunOutcome> {
        seeds.check()?;
        let train = gen_samples(dist, seeds.train, protocol.n_train)?;
        let monitor = build_monitor(&train, &protocol.monitor)?;
        let holdout = gen_samples(dist, seeds.holdout, protocol.n_holdout)?;
        let cfg = AssessConfig {
            m_min: protocol.monitor.m_min,
            delta_cov: protocol.delta_cov,
            delta_box: protocol.delta_box,
            coverage_method: protocol.coverage_method,
            mode: CompositionMode::UnionBound,
        };
        let claim = assess(&monitor, &holdout, &cfg)?;
        let truth = monitored_error_oracle(dist, &monitor, cfg.m_min, protocol.n_mc, seeds.oracle)?;
        Ok(RunOutcome::Claimed {
            epsilon: claim.epsilon,
            delta: claim.delta,
            vacuous: claim.vacuous,
            confirmed_boxes: claim.boxes.len(),
            true_error: truth.error.estimate,
            true_error_se: truth.error.std_error,
            violated: truth.error.estimate > claim.epsilon,
            coverage_epsilon: claim.coverage.epsilon,
            coverage_delta: claim.coverage.delta,
            outside_mass: truth.outside.estimate,
            coverage_violated: truth.outside.estimate > claim.coverage.epsilon,
        })
    })()
    .unwrap_or_else(|e| RunOutcome::Failed { error: e.to_string() });
    RunRecord { run, seeds, outcome }
}

/// Runs the full build/assess/check protocol `runs` times.
pub fn validate_guarantee(
    dist: &SyntheticDistribution,
    protocol: &ValidationProtocol,
    runs: usize,
) -> Result<ValidationReport> {
    if runs < MIN_RUNS {
        return Err(Error::invalid(format!("validation needs at least {MIN_RUNS} runs, got {runs}")));
    }
    dist.validate()?;
    protocol.monitor.validate()?;
    if protocol.n_train == 0 || protocol.n_holdout == 0 {
        return Err(Error::Config("n_train and n_holdout must be positive".into()));
    }
    for d in [protocol.delta_cov, protocol.delta_box] {
        if !(d > 0.0 && d < 0.5) {
            return Err(Error::Config(format!("δ targets must lie in (0, 1/2), got {d}")));
        }
    }
    check_draws(protocol.n_mc)?;

    let records: Vec<RunRecord> = (0..runs).into_par_iter().map(|r| run_once(dist, protocol, r)).collect();

    let (mut claims, mut violations, mut cov_violations, mut failures) = (0, 0, 0, 0);
    let (mut delta_sum, mut cov_delta_sum) = (0.0, 0.0);
    for rec in &records {
        match &rec.outcome {
            RunOutcome::Claimed {
                delta,
                violated,
                coverage_delta,
                coverage_violated,
                ..
            } => {
                claims += 1;
                delta_sum += delta;
                cov_delta_sum += coverage_delta;
                violations += usize::from(*violated);
                cov_violations += usize::from(*coverage_violated);
            }
            RunOutcome::Failed { .. } => failures += 1,
        }
    }
    let mean = |s: f64| if claims > 0 { s / claims as f64 } else { f64::NAN };
    Ok(ValidationReport {
        runs,
        distribution: dist.clone(),
        protocol: protocol.clone(),
        failures,
        component: SoundnessCheck::new(violations, claims, mean(delta_sum)),
        coverage: SoundnessCheck::new(cov_violations, claims, mean(cov_delta_sum)),
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_class(noise: f64) -> SyntheticDistribution {
        SyntheticDistribution {
            components: vec![
                MixtureComponent {
                    label: "a".into(),
                    weight: 0.5,
                    mean: vec![0.0, 0.0],
                    std: vec![1.0, 1.0],
                },
                MixtureComponent {
                    label: "b".into(),
                    weight: 0.5,
                    mean: vec![8.0, 0.0],
                    std: vec![1.0, 1.0],
                },
            ],
            label_noise: [("a".to_string(), noise), ("b".to_string(), noise)].into_iter().collect(),
        }
    }

    #[test]
    fn noise_free_samples_are_correct() {
        let s = gen_samples(&two_class(0.0), 1, 500).unwrap();
        assert!(s.iter().all(|x| x.correct));
    }

    #[test]
    fn full_noise_flips_to_the_other_class() {
        let dist = SyntheticDistribution {
            components: vec![MixtureComponent {
                label: "a".into(),
                weight: 1.0,
                mean: vec![0.0],
                std: vec![1.0],
            }],
            label_noise: [("a".to_string(), 1.0), ("b".to_string(), 0.0)].into_iter().collect(),
        };
        let s = gen_samples(&dist, 3, 200).unwrap();
        assert!(s.iter().all(|x| !x.correct && x.predicted == "b"));
    }

    #[test]
    fn noise_rate_within_three_sigma() {
        let n = 10_000;
        let s = gen_samples(&two_class(0.1), 11, n).unwrap();
        let wrong = s.iter().filter(|x| !x.correct).count() as f64 / n as f64;
        let sigma = (0.1f64 * 0.9 / n as f64).sqrt();
        assert!((wrong - 0.1).abs() <= 3.0 * sigma, "rate {wrong}");
    }

    #[test]
    fn generation_is_deterministic() {
        assert_eq!(
            gen_samples(&two_class(0.2), 5, 100).unwrap(),
            gen_samples(&two_class(0.2), 5, 100).unwrap()
        );
        assert_ne!(
            gen_samples(&two_class(0.2), 5, 100).unwrap(),
            gen_samples(&two_class(0.2), 6, 100).unwrap()
        );
    }

    #[test]
    fn invalid_distributions() {
        let mut d = two_class(0.1);
        d.components[0].weight = 0.7;
        assert!(gen_samples(&d, 0, 10).is_err());
        let mut d = two_class(0.1);
        d.components[1].std[0] = 0.0;
        assert!(gen_samples(&d, 0, 10).is_err());
        let d = SyntheticDistribution {
            components: vec![MixtureComponent {
                label: "a".into(),
                weight: 1.0,
                mean: vec![0.0],
                std: vec![1.0],
            }],
            label_noise: [("a".to_string(), 0.5)].into_iter().collect(),
        };
        assert!(gen_samples(&d, 0, 10).is_err());
        assert!(gen_samples(&two_class(0.1), 0, 0).is_err());
    }

    fn monitor_for(dist: &SyntheticDistribution, cfg: &MonitorConfig) -> Monitor {
        build_monitor(&gen_samples(dist, 100, 1000).unwrap(), cfg).unwrap()
    }

    #[test]
    fn oracle_noise_free_is_zero() {
        let d = two_class(0.0);
        let m = monitor_for(&d, &MonitorConfig::default());
        let e = true_error_oracle(&d, &m, Region::WholeSpace, 10_000, 9).unwrap();
        assert_eq!(e.estimate, 0.0);
    }

    #[test]
    fn oracle_recovers_flip_probability() {
        let d = two_class(0.2);
        let m = monitor_for(&d, &MonitorConfig::default());
        let e = true_error_oracle(&d, &m, Region::WholeSpace, 40_000, 9).unwrap();
        assert!((e.estimate - d.misprediction_rate()).abs() <= 4.0 * e.std_error);
        let inside = true_error_oracle(&d, &m, Region::ConfirmedBoxes { m_min: 1 }, 40_000, 9).unwrap();
        assert!(inside.hits < 40_000 && inside.hits > 30_000);
    }

    #[test]
    fn oracle_reports_no_mass_for_empty_region() {
        let d = two_class(0.0);
        let m = monitor_for(&d, &MonitorConfig::default());
        // All noise-free samples are correct, so no negative boxes exist, and
        // m_min above every box leaves no confirmed region.
        let err = true_error_oracle(&d, &m, Region::ConfirmedBoxes { m_min: 1_000_000 }, 10_000, 1).unwrap_err();
        assert!(matches!(err, Error::NoMass { draws: 10_000 }));
        assert!(true_error_oracle(&d, &m, Region::WholeSpace, 10, 1).is_err());
    }

    #[test]
    fn seed_streams_are_distinct() {
        for run in 0..1000 {
            let s = RunSeeds::derive(42, run);
            s.check().unwrap();
        }
        let same = RunSeeds {
            train: 1,
            holdout: 2,
            oracle: 2,
        };
        assert!(matches!(same.check(), Err(Error::SeedReuse(_))));
        assert_ne!(RunSeeds::derive(1, 0), RunSeeds::derive(1, 1));
        assert_ne!(RunSeeds::derive(1, 0), RunSeeds::derive(2, 0));
    }

    fn small_protocol() -> ValidationProtocol {
        ValidationProtocol {
            n_train: 400,
            n_holdout: 300,
            delta_cov: 0.05,
            delta_box: 0.05,
            coverage_method: CoverageMethod::ClopperPearson,
            monitor: MonitorConfig {
                k: Some(1),
                m_min: 5,
                ..MonitorConfig::default()
            },
            n_mc: 10_000,
            master_seed: 7,
        }
    }

    #[test]
    fn noise_free_validation_has_no_violations() {
        let report = validate_guarantee(&two_class(0.0), &small_protocol(), 100).unwrap();
        assert_eq!(report.failures, 0);
        assert_eq!(report.component.violations, 0);
        for r in &report.records {
            if let RunOutcome::Claimed { epsilon, .. } = r.outcome {
                assert!(epsilon > 0.0);
            }
        }
        assert!(report.sound());
    }

    #[test]
    fn validation_is_reproducible() {
        let a = validate_guarantee(&two_class(0.05), &small_protocol(), 100).unwrap();
        let b = validate_guarantee(&two_class(0.05), &small_protocol(), 100).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn validation_preconditions() {
        assert!(validate_guarantee(&two_class(0.05), &small_protocol(), 0).is_err());
        assert!(validate_guarantee(&two_class(0.05), &small_protocol(), 99).is_err());
        let mut p = small_protocol();
        p.n_mc = 100;
        assert!(validate_guarantee(&two_class(0.05), &p, 100).is_err());
    }

    #[test]
    fn soundness_rule_is_exact() {
        let c = SoundnessCheck::new(70, 1000, 0.05);
        assert!((c.threshold - (0.05 + 3.0 * (0.05f64 * 0.95 / 1000.0).sqrt())).abs() < 1e-15);
        assert!(c.sound);
        assert!(!SoundnessCheck::new(71, 1000, 0.05).sound);
        assert!(!SoundnessCheck::new(0, 0, 0.05).sound);
    }
}
