//! Runtime monitors built from box abstractions of a component's feature
//! space, with statistical (ε, δ) guarantees on their verdicts and a bounded
//! temporal specification language that consumes those guarantees.
//!
//! The usual pipeline:
//!
//! 1. [`build_monitor`] clusters logged decisions into labelled boxes.
//! 2. [`assess`] bounds the monitored component's error on held-out data.
//! 3. [`evaluate`] checks a formula over a trace and [`compose_formula`]
//!    turns per-atom guarantees into one for the verdict.

pub mod clustering;
pub mod error;
pub mod geometry;
pub mod guarantee;
pub mod io;
pub mod monitor;
pub mod simharness;
pub mod speclang;
pub mod stats;

pub use clustering::{choose_k, kmeans, ClusteringResult};
pub use error::{Error, Result};
pub use geometry::{AbstractionBox, ClusterId, FeatureVector, Polarity};
pub use guarantee::{
    annotated_guarantees, assess, compose_component, compose_component_with, compose_formula, AssessConfig,
    AtomContribution, AtomGuarantee, ComponentGuarantee, CompositionMode, FormulaGuarantee,
};
pub use monitor::{
    build_monitor, canonical_order, GroupProvenance, Monitor, MonitorConfig, MonitoredSample, Verdict, VerdictKind,
};
pub use simharness::{
    gen_samples, monitored_error_oracle, true_error_oracle, validate_guarantee, MixtureComponent, OracleEstimate,
    Region, SyntheticDistribution, ValidationProtocol, ValidationReport,
};
pub use speclang::{eval3, evaluate, parse, pretty, Formula, ThreeValued, Trace};
pub use stats::{
    box_guarantee, clopper_pearson_upper, coverage_guarantee, generalization_error, hoeffding_epsilon, BoxGuarantee,
    CoverageGuarantee, CoverageMethod, OperationalProfile,
};
