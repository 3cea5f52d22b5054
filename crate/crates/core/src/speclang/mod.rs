//! Bounded temporal logic with (ε, δ)-annotated atomic propositions.

mod ast;
mod eval;
mod frames;
mod parser;

pub use ast::{atoms_of, Annotation, Atom, Formula, Interval, Level};
pub use eval::{atom_evaluations, eval3, evaluate, valuation, Evaluation, State, ThreeValued, Trace};
pub use frames::{frames_to_trace, AtomRule, Detection, FrameRecord, RuleKind, RuleSet};
pub use parser::{parse, pretty, ParseError, ParseErrorKind};
