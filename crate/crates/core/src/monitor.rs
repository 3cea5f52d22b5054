//! Box-abstraction runtime monitor.
//!
//! Logged decisions are grouped by predicted label and split by correctness,
//! each group is clustered, and every cluster becomes one box. Correct samples
//! yield positive boxes and incorrect samples negative ones, so every box is
//! homogeneous in polarity. Queries consult only the boxes recorded for the
//! queried label and answer with a traffic-light verdict.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::clustering::{self, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::geometry::{AbstractionBox, ClusterId, FeatureVector, Polarity};

/// One logged decision of the monitored component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitoredSample {
    pub features: FeatureVector,
    pub predicted: String,
    /// Whether the prediction matched ground truth.
    pub correct: bool,
}

impl MonitoredSample {
    pub fn new(features: FeatureVector, predicted: impl Into<String>, correct: bool) -> Result<Self> {
        let predicted = predicted.into();
        if predicted.is_empty() {
            return Err(Error::invalid("predicted label must be non-empty"));
        }
        Ok(MonitoredSample {
            features,
            predicted,
            correct,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonitorConfig {
    /// Clusters per (label, polarity) group; `None` picks `choose_k(n)`.
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    /// Multiplicative radius inflation.
    #[serde(default)]
    pub inflation: f64,
    /// Additive radius floor applied after inflation.
    #[serde(default)]
    pub inflation_floor: f64,
    /// Minimum abstracted samples for a box to count as confirmed.
    #[serde(default = "default_m_min")]
    pub m_min: usize,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_m_min() -> usize {
    10
}
fn default_max_iter() -> usize {
    DEFAULT_MAX_ITER
}
fn default_tol() -> f64 {
    DEFAULT_TOL
}

impl Default for MonitorConfig {
    fn default() -> Self {
        MonitorConfig {
            k: None,
            seed: 0,
            inflation: 0.0,
            inflation_floor: 0.0,
            m_min: default_m_min(),
            max_iter: default_max_iter(),
            tol: default_tol(),
        }
    }
}

impl MonitorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.inflation.is_finite() && self.inflation >= 0.0) {
            return Err(Error::Config(format!("inflation must be >= 0, got {}", self.inflation)));
        }
        if !(self.inflation_floor.is_finite() && self.inflation_floor >= 0.0) {
            return Err(Error::Config(format!(
                "inflation floor must be >= 0, got {}",
                self.inflation_floor
            )));
        }
        if self.m_min == 0 {
            return Err(Error::Config("m_min must be at least 1".into()));
        }
        if self.k == Some(0) {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::Config("tol must be positive".into()));
        }
        Ok(())
    }
}

/// Number of construction samples that went into one (label, polarity) group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupProvenance {
    pub label: String,
    pub polarity: Polarity,
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerdictKind {
    Accept,
    Reject,
    Uncertain,
}

impl fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VerdictKind::Accept => "accept",
            VerdictKind::Reject => "reject",
            VerdictKind::Uncertain => "uncertain",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub kind: VerdictKind,
    /// Clusters whose boxes contain the query.
    pub hits: Vec<ClusterId>,
}

impl Verdict {
    /// No box of the queried label contained the input.
    pub fn no_coverage(&self) -> bool {
        self.hits.is_empty()
    }

    fn from_hits<'a>(hits: impl Iterator<Item = &'a AbstractionBox>) -> Self {
        let mut positive = false;
        let mut negative = false;
        let mut ids = Vec::new();
        for b in hits {
            match b.polarity {
                Polarity::Positive => positive = true,
                Polarity::Negative => negative = true,
            }
            ids.push(b.cluster.clone());
        }
        let kind = match (positive, negative) {
            (true, false) => VerdictKind::Accept,
            (false, true) => VerdictKind::Reject,
            _ => VerdictKind::Uncertain,
        };
        Verdict { kind, hits: ids }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Monitor {
    dimension: usize,
    config: MonitorConfig,
    boxes: BTreeMap<String, Vec<AbstractionBox>>,
    provenance: Vec<GroupProvenance>,
}

impl Monitor {
    /// Reassembles a monitor from persisted parts, checking its invariants.
    pub fn from_parts(
        dimension: usize,
        config: MonitorConfig,
        boxes: Vec<AbstractionBox>,
        provenance: Vec<GroupProvenance>,
    ) -> Result<Self> {
        config.validate()?;
        if dimension == 0 {
            return Err(Error::EmptyFeatureVector);
        }
        let mut grouped: BTreeMap<String, Vec<AbstractionBox>> = BTreeMap::new();
        let mut seen = std::collections::BTreeSet::new();
        for b in boxes {
            if b.dim() != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    actual: b.dim(),
                });
            }
            if !seen.insert(b.cluster.clone()) {
                return Err(Error::invalid(format!("duplicate cluster id {}", b.cluster)));
            }
            grouped.entry(b.label.clone()).or_default().push(b);
        }
        for list in grouped.values_mut() {
            list.sort_by(|a, b| a.polarity.cmp(&b.polarity).then_with(|| a.cluster.cmp(&b.cluster)));
        }
        Ok(Monitor {
            dimension,
            config,
            boxes: grouped,
            provenance,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn config(&self) -> &MonitorConfig {
        &self.config
    }

    pub fn provenance(&self) -> &[GroupProvenance] {
        &self.provenance
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.boxes.keys().map(String::as_str)
    }

    /// All boxes in canonical order: label, then polarity, then cluster id.
    pub fn boxes(&self) -> impl Iterator<Item = &AbstractionBox> {
        self.boxes.values().flatten()
    }

    pub fn boxes_for(&self, label: &str) -> &[AbstractionBox] {
        self.boxes.get(label).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn box_count(&self) -> usize {
        self.boxes.values().map(Vec::len).sum()
    }

    /// Traffic-light verdict for `x` under the boxes recorded for `predicted`.
    pub fn query(&self, x: &FeatureVector, predicted: &str) -> Result<Verdict> {
        self.check_dim(x)?;
        let hits = self
            .boxes_for(predicted)
            .iter()
            .filter(|b| b.contains_unchecked(x.as_slice()));
        Ok(Verdict::from_hits(hits))
    }

    /// Like [`Monitor::query`] but only confirmed boxes (`m >= m_min`) take part.
    pub fn query_confirmed(&self, x: &FeatureVector, predicted: &str, m_min: usize) -> Result<Verdict> {
        self.check_dim(x)?;
        let hits = self
            .boxes_for(predicted)
            .iter()
            .filter(|b| b.count >= m_min && b.contains_unchecked(x.as_slice()));
        Ok(Verdict::from_hits(hits))
    }

    /// Boxes abstracting at least `m_min` construction samples.
    pub fn confirmed_boxes(&self, m_min: usize) -> Vec<&AbstractionBox> {
        self.boxes().filter(|b| b.count >= m_min).collect()
    }

    /// True when `x` lies in some confirmed box recorded for `predicted`.
    pub fn in_confirmed_region(&self, x: &FeatureVector, predicted: &str, m_min: usize) -> Result<bool> {
        self.check_dim(x)?;
        Ok(self
            .boxes_for(predicted)
            .iter()
            .any(|b| b.count >= m_min && b.contains_unchecked(x.as_slice())))
    }

    fn check_dim(&self, x: &FeatureVector) -> Result<()> {
        if x.dim() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                actual: x.dim(),
            });
        }
        Ok(())
    }
}

/// Canonical order used before clustering: features, then label, then flag.
pub fn canonical_order(samples: &mut [MonitoredSample]) {
    samples.sort_by(|a, b| {
        a.features
            .total_cmp(&b.features)
            .then_with(|| a.predicted.cmp(&b.predicted))
            .then_with(|| a.correct.cmp(&b.correct))
    });
}

pub fn build_monitor(samples: &[MonitoredSample], config: &MonitorConfig) -> Result<Monitor> {
    config.validate()?;
    let first = samples.first().ok_or(Error::Empty("monitor construction samples"))?;
    let dimension = first.features.dim();
    if let Some(s) = samples.iter().find(|s| s.features.dim() != dimension) {
        return Err(Error::DimensionMismatch {
            expected: dimension,
            actual: s.features.dim(),
        });
    }

    let mut sorted = samples.to_vec();
    canonical_order(&mut sorted);

    let mut groups: BTreeMap<(String, Polarity), Vec<FeatureVector>> = BTreeMap::new();
    for s in sorted {
        groups
            .entry((s.predicted, Polarity::from_correct(s.correct)))
            .or_default()
            .push(s.features);
    }

    let mut boxes = Vec::new();
    let mut provenance = Vec::new();
    for ((label, polarity), points) in groups {
        let n = points.len();
        let k = match config.k {
            Some(k) => k.min(n),
            None => clustering::choose_k(n)?,
        };
        let clusters = clustering::kmeans(&points, k, config.seed, config.max_iter, config.tol)?;
        for (i, members) in clusters.groups(&points).into_iter().enumerate() {
            let members: Vec<FeatureVector> = members.into_iter().cloned().collect();
            let id = ClusterId(format!("{label}/{polarity}/{i}"));
            let b = AbstractionBox::from_points(&members, id, label.clone(), polarity)?
                .inflate(config.inflation, config.inflation_floor)?;
            boxes.push(b);
        }
        provenance.push(GroupProvenance {
            label,
            polarity,
            samples: n,
        });
    }
    Monitor::from_parts(dimension, config.clone(), boxes, provenance)
}
