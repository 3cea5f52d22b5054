//! Composition of statistical guarantees.
//!
//! A component guarantee combines the coverage bound with the per-box bounds
//! of the confirmed region by a union bound: the monitored component errs on
//! an input only if the input leaves the confirmed region or lands in a box
//! whose polarity disagrees with the actual outcome, so
//!
//! ```text
//! err <= P(outside) + P(inside) * max_b eps_b <= eps_cov + max_b eps_b
//! ```
//!
//! and the claim fails with probability at most `delta_cov + sum_b delta_b`.
//!
//! Formula guarantees lift atom-level claims to a trace verdict. An
//! instance-level atom pays its δ once per evaluation, a model-level atom
//! pays it once in total.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::monitor::{Monitor, MonitoredSample};
use crate::speclang::{atoms_of, Formula, Level, ThreeValued};
use crate::stats::{box_guarantee, coverage_guarantee, BoxGuarantee, CoverageGuarantee, CoverageMethod};

pub const IID_ASSUMPTION: &str = "held-out samples are i.i.d. draws from the operational distribution \
and disjoint from the samples used to build the monitor";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompositionMode {
    /// `eps_cov + max_b eps_b`; sound given the constituent bounds.
    #[default]
    UnionBound,
    /// `eps_cov + sum_b w_b eps_b` with box masses estimated from held-out
    /// evidence. Uses estimated weights and carries no soundness claim.
    MassWeighted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentGuarantee {
    pub epsilon: f64,
    pub delta: f64,
    /// Set when ε or δ reached 1 and the claim says nothing.
    pub vacuous: bool,
    pub mode: CompositionMode,
    pub coverage: CoverageGuarantee,
    pub boxes: Vec<BoxGuarantee>,
    pub assumption: String,
}

pub fn compose_component(cov: &CoverageGuarantee, boxes: &[BoxGuarantee]) -> Result<ComponentGuarantee> {
    compose_component_with(cov, boxes, CompositionMode::UnionBound)
}

pub fn compose_component_with(
    cov: &CoverageGuarantee,
    boxes: &[BoxGuarantee],
    mode: CompositionMode,
) -> Result<ComponentGuarantee> {
    if boxes.is_empty() {
        return Err(Error::Empty("box guarantees to compose"));
    }
    let inside = match mode {
        CompositionMode::UnionBound => boxes.iter().map(|b| b.epsilon).fold(0.0, f64::max),
        CompositionMode::MassWeighted => {
            let n = cov.n_holdout as f64;
            boxes.iter().map(|b| b.evidence as f64 / n * b.epsilon).sum()
        }
    };
    let epsilon = (cov.epsilon + inside).min(1.0);
    let delta = (cov.delta + boxes.iter().map(|b| b.delta).sum::<f64>()).min(1.0);
    Ok(ComponentGuarantee {
        epsilon,
        delta,
        vacuous: epsilon >= 1.0 || delta >= 1.0,
        mode,
        coverage: cov.clone(),
        boxes: boxes.to_vec(),
        assumption: IID_ASSUMPTION.to_owned(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssessConfig {
    #[serde(default = "default_m_min")]
    pub m_min: usize,
    pub delta_cov: f64,
    pub delta_box: f64,
    #[serde(default)]
    pub coverage_method: CoverageMethod,
    #[serde(default)]
    pub mode: CompositionMode,
}

fn default_m_min() -> usize {
    10
}

impl Default for AssessConfig {
    fn default() -> Self {
        AssessConfig {
            m_min: default_m_min(),
            delta_cov: 0.025,
            delta_box: 0.025,
            coverage_method: CoverageMethod::default(),
            mode: CompositionMode::default(),
        }
    }
}

/// Box guarantees for every confirmed box plus the coverage guarantee, composed.
///
/// A confirmed box without held-out evidence cannot carry a guarantee, so
/// the whole assessment fails with [`Error::NoEvidence`].
pub fn assess(monitor: &Monitor, holdout: &[MonitoredSample], cfg: &AssessConfig) -> Result<ComponentGuarantee> {
    if holdout.is_empty() {
        return Err(Error::Empty("held-out samples"));
    }
    let confirmed = monitor.confirmed_boxes(cfg.m_min);
    if confirmed.is_empty() {
        return Err(Error::Empty("confirmed boxes"));
    }
    let boxes = confirmed
        .into_iter()
        .map(|b| box_guarantee(b, holdout, cfg.delta_box))
        .collect::<Result<Vec<_>>>()?;
    let cov = coverage_guarantee(monitor, holdout, cfg.m_min, cfg.delta_cov, cfg.coverage_method)?;
    compose_component_with(&cov, &boxes, cfg.mode)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomGuarantee {
    pub epsilon: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomContribution {
    pub atom: String,
    pub level: Level,
    pub epsilon: f64,
    pub delta: f64,
    pub evaluations: usize,
    /// δ charged for this atom: `delta * evaluations` or `delta` once.
    pub delta_charged: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormulaGuarantee {
    pub verdict: ThreeValued,
    pub epsilon: f64,
    pub delta: f64,
    pub vacuous: bool,
    pub contributions: Vec<AtomContribution>,
    /// Total atomic-proposition evaluations the verdict consumed.
    pub evaluation_count: usize,
}

/// Guarantees written into the formula's own annotations.
pub fn annotated_guarantees(formula: &Formula) -> Result<BTreeMap<String, AtomGuarantee>> {
    Ok(atoms_of(formula)?
        .into_iter()
        .filter_map(|(name, a)| {
            a.annotation.map(|ann| {
                (
                    name,
                    AtomGuarantee {
                        epsilon: ann.epsilon,
                        delta: ann.delta,
                    },
                )
            })
        })
        .collect())
}

pub fn compose_formula(
    formula: &Formula,
    verdict: ThreeValued,
    guarantees: &BTreeMap<String, AtomGuarantee>,
    evaluations: &BTreeMap<String, usize>,
) -> Result<FormulaGuarantee> {
    let atoms = atoms_of(formula)?;
    let mut contributions = Vec::with_capacity(atoms.len());
    for (name, atom) in &atoms {
        let g = guarantees
            .get(name)
            .ok_or_else(|| Error::MissingGuarantee(name.clone()))?;
        let evals = evaluations.get(name).copied().unwrap_or(0);
        let delta_charged = match atom.level {
            Level::Instance => g.delta * evals as f64,
            Level::Model => g.delta,
        };
        contributions.push(AtomContribution {
            atom: name.clone(),
            level: atom.level,
            epsilon: g.epsilon,
            delta: g.delta,
            evaluations: evals,
            delta_charged,
        });
    }
    let contributing = contributions
        .iter()
        .filter(|c| c.level == Level::Model || c.evaluations > 0);
    let epsilon = contributing.clone().map(|c| c.epsilon).fold(0.0, f64::max);
    let delta = contributing.map(|c| c.delta_charged).sum::<f64>().min(1.0);
    Ok(FormulaGuarantee {
        verdict,
        epsilon,
        delta,
        vacuous: epsilon >= 1.0 || delta >= 1.0,
        evaluation_count: contributions.iter().map(|c| c.evaluations).sum(),
        contributions,
    })
}
