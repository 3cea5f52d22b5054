//! Turning detector frame records into proposition traces.
//!
//! A frame lists detections as `(id, class, pr, bb)` tuples, optionally with
//! the feature vector the detector produced for them. Extraction rules map an
//! atom name to a counting predicate over a frame. A rule marked `gated`
//! additionally asks the runtime monitor about every matching detection and
//! only counts detections the monitor accepts.

use serde::{Deserialize, Serialize};

use super::eval::{State, ThreeValued, Trace};
use crate::error::{Error, Result};
use crate::geometry::FeatureVector;
use crate::monitor::{Monitor, VerdictKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Detection {
    pub id: u64,
    pub class: String,
    pub pr: f64,
    /// `[x_min, y_min, x_max, y_max]`.
    pub bb: [f64; 4],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub features: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameRecord {
    pub frame: u64,
    #[serde(default)]
    pub detections: Vec<Detection>,
}

impl FrameRecord {
    pub fn validate(&self) -> Result<()> {
        for d in &self.detections {
            if !(d.pr.is_finite() && (0.0..=1.0).contains(&d.pr)) {
                return Err(Error::invalid(format!(
                    "frame {}: detection {} has pr {} outside [0, 1]",
                    self.frame, d.id, d.pr
                )));
            }
            let [x0, y0, x1, y1] = d.bb;
            if !(d.bb.iter().all(|v| v.is_finite()) && x0 <= x1 && y0 <= y1) {
                return Err(Error::invalid(format!(
                    "frame {}: detection {} has a malformed bounding box",
                    self.frame, d.id
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleKind {
    /// Some detection of `class` has `pr >= min_pr`.
    Exists,
    /// At least `at_least` detections of `class` have `pr >= min_pr`.
    Count,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomRule {
    pub atom: String,
    pub kind: RuleKind,
    pub class: String,
    #[serde(default)]
    pub min_pr: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub at_least: Option<usize>,
    /// Let the runtime monitor vet each matching detection.
    #[serde(default)]
    pub gated: bool,
}

impl AtomRule {
    fn threshold(&self) -> Result<usize> {
        match (self.kind, self.at_least) {
            (RuleKind::Exists, None) => Ok(1),
            (RuleKind::Exists, Some(_)) => Err(Error::Config(format!(
                "rule `{}`: `at_least` only applies to count rules",
                self.atom
            ))),
            (RuleKind::Count, Some(n)) => Ok(n),
            (RuleKind::Count, None) => Err(Error::Config(format!("rule `{}`: count rule needs `at_least`", self.atom))),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.atom.is_empty() {
            return Err(Error::Config("rule with empty atom name".into()));
        }
        if !(self.min_pr.is_finite() && (0.0..=1.0).contains(&self.min_pr)) {
            return Err(Error::Config(format!("rule `{}`: min_pr outside [0, 1]", self.atom)));
        }
        self.threshold().map(|_| ())
    }

    /// Three-valued truth of the rule on one frame.
    pub fn evaluate(&self, frame: &FrameRecord, monitor: Option<&Monitor>) -> Result<ThreeValued> {
        let needed = self.threshold()?;
        let mut definite = 0usize;
        let mut possible = 0usize;
        for d in frame.detections.iter().filter(|d| d.class == self.class && d.pr >= self.min_pr) {
            let value = if self.gated {
                let monitor = monitor.ok_or_else(|| {
                    Error::Config(format!("rule `{}` is monitor-gated but no monitor was given", self.atom))
                })?;
                let features = d.features.clone().ok_or_else(|| {
                    Error::invalid(format!(
                        "frame {}: detection {} has no features for gated rule `{}`",
                        frame.frame, d.id, self.atom
                    ))
                })?;
                match monitor.query(&FeatureVector::new(features)?, &d.class)?.kind {
                    VerdictKind::Accept => ThreeValued::True,
                    VerdictKind::Reject => ThreeValued::False,
                    VerdictKind::Uncertain => ThreeValued::Unknown,
                }
            } else {
                ThreeValued::True
            };
            match value {
                ThreeValued::True => {
                    definite += 1;
                    possible += 1;
                }
                ThreeValued::Unknown => possible += 1,
                ThreeValued::False => {}
            }
        }
        Ok(if definite >= needed {
            ThreeValued::True
        } else if possible >= needed {
            ThreeValued::Unknown
        } else {
            ThreeValued::False
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleSet {
    pub format_version: String,
    pub rules: Vec<AtomRule>,
}

pub fn frames_to_trace(frames: &[FrameRecord], rules: &[AtomRule], monitor: Option<&Monitor>) -> Result<Trace> {
    for r in rules {
        r.validate()?;
    }
    let mut seen = std::collections::BTreeSet::new();
    if let Some(r) = rules.iter().find(|r| !seen.insert(r.atom.as_str())) {
        return Err(Error::Config(format!("atom `{}` has more than one rule", r.atom)));
    }
    let mut states = Vec::with_capacity(frames.len());
    for frame in frames {
        frame.validate()?;
        let mut state = State::new();
        for r in rules {
            state.insert(r.atom.clone(), r.evaluate(frame, monitor)?);
        }
        states.push(state);
    }
    Trace::new(states)
}
