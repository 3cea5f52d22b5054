use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Granularity of an atomic proposition's statistical claim.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    /// The claim is about the current input; it is paid for on every evaluation.
    #[default]
    Instance,
    /// The claim quantifies over the input distribution; it is paid for once.
    Model,
}

impl Level {
    pub fn as_str(self) -> &'static str {
        match self {
            Level::Instance => "instance",
            Level::Model => "model",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub epsilon: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub name: String,
    pub level: Level,
    pub annotation: Option<Annotation>,
}

impl Atom {
    pub fn plain(name: impl Into<String>) -> Self {
        Atom {
            name: name.into(),
            level: Level::Instance,
            annotation: None,
        }
    }
}

/// Closed interval of relative positions `[lo, hi]`, `lo <= hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawInterval")]
pub struct Interval {
    lo: usize,
    hi: usize,
}

#[derive(Deserialize)]
struct RawInterval {
    lo: usize,
    hi: usize,
}

impl TryFrom<RawInterval> for Interval {
    type Error = Error;

    fn try_from(raw: RawInterval) -> Result<Self> {
        Interval::new(raw.lo, raw.hi)
    }
}

impl Interval {
    pub fn new(lo: usize, hi: usize) -> Result<Self> {
        if hi < lo {
            return Err(Error::invalid(format!("empty interval [{lo},{hi}]")));
        }
        Ok(Interval { lo, hi })
    }

    pub fn lo(self) -> usize {
        self.lo
    }

    pub fn hi(self) -> usize {
        self.hi
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Formula {
    Atom(Atom),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Next(Box<Formula>),
    Always(Interval, Box<Formula>),
    Eventually(Interval, Box<Formula>),
    Until(Interval, Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(name: &str) -> Self {
        Formula::Atom(Atom::plain(name))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn next(f: Formula) -> Self {
        Formula::Next(Box::new(f))
    }

    pub fn always(lo: usize, hi: usize, f: Formula) -> Result<Self> {
        Ok(Formula::Always(Interval::new(lo, hi)?, Box::new(f)))
    }

    pub fn eventually(lo: usize, hi: usize, f: Formula) -> Result<Self> {
        Ok(Formula::Eventually(Interval::new(lo, hi)?, Box::new(f)))
    }

    pub fn until(lo: usize, hi: usize, a: Formula, b: Formula) -> Result<Self> {
        Ok(Formula::Until(Interval::new(lo, hi)?, Box::new(a), Box::new(b)))
    }

    pub fn depth(&self) -> usize {
        match self {
            Formula::Atom(_) => 1,
            Formula::Not(f) | Formula::Next(f) | Formula::Always(_, f) | Formula::Eventually(_, f) => 1 + f.depth(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Until(_, a, b) => {
                1 + a.depth().max(b.depth())
            }
        }
    }

    pub(crate) fn visit_atoms<'a>(&'a self, out: &mut impl FnMut(&'a Atom)) {
        match self {
            Formula::Atom(a) => out(a),
            Formula::Not(f) | Formula::Next(f) | Formula::Always(_, f) | Formula::Eventually(_, f) => {
                f.visit_atoms(out)
            }
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Until(_, a, b) => {
                a.visit_atoms(out);
                b.visit_atoms(out);
            }
        }
    }
}

/// Distinct atoms of `formula`, keyed by name.
///
/// The same name must carry the same level and annotation everywhere.
pub fn atoms_of(formula: &Formula) -> Result<BTreeMap<String, Atom>> {
    let mut out: BTreeMap<String, Atom> = BTreeMap::new();
    let mut conflict = None;
    formula.visit_atoms(&mut |a| {
        if conflict.is_some() {
            return;
        }
        match out.get(&a.name) {
            Some(prev) if prev != a => conflict = Some(a.name.clone()),
            Some(_) => {}
            None => {
                out.insert(a.name.clone(), a.clone());
            }
        }
    });
    match conflict {
        Some(name) => Err(Error::ConflictingAnnotation(name)),
        None => Ok(out),
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::pretty(self))
    }
}
