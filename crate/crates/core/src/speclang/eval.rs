//! Three-valued evaluation over finite traces.
//!
//! Connectives follow strong Kleene logic. Bounded temporal operators expand
//! over the positions they cover; positions past the end of the trace read as
//! `Unknown`, so a truncated trace can never fabricate a violation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::ast::{Formula, Level};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThreeValued {
    False,
    Unknown,
    True,
}

impl ThreeValued {
    pub fn and(self, other: Self) -> Self {
        self.min(other)
    }

    pub fn or(self, other: Self) -> Self {
        self.max(other)
    }

    pub fn implies(self, other: Self) -> Self {
        self.not().or(other)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        match self {
            ThreeValued::False => ThreeValued::True,
            ThreeValued::Unknown => ThreeValued::Unknown,
            ThreeValued::True => ThreeValued::False,
        }
    }

    pub fn is_definite(self) -> bool {
        self != ThreeValued::Unknown
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ThreeValued::False => "false",
            ThreeValued::Unknown => "unknown",
            ThreeValued::True => "true",
        }
    }
}

impl From<bool> for ThreeValued {
    fn from(b: bool) -> Self {
        if b {
            ThreeValued::True
        } else {
            ThreeValued::False
        }
    }
}

impl fmt::Display for ThreeValued {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Atom valuation at one position; absent atoms read as `Unknown`.
pub type State = BTreeMap<String, ThreeValued>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<State>", into = "Vec<State>")]
pub struct Trace(Vec<State>);

impl Trace {
    pub fn new(states: Vec<State>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::Empty("trace"));
        }
        Ok(Trace(states))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn states(&self) -> &[State] {
        &self.0
    }

    /// Value of an instance-level atom at `t`.
    pub fn get(&self, t: usize, atom: &str) -> ThreeValued {
        self.0
            .get(t)
            .and_then(|s| s.get(atom))
            .copied()
            .unwrap_or(ThreeValued::Unknown)
    }

    /// Value of a model-level atom: constant over the trace, taken from the
    /// first state that records it.
    pub fn constant(&self, atom: &str) -> ThreeValued {
        self.0
            .iter()
            .find_map(|s| s.get(atom).copied())
            .unwrap_or(ThreeValued::Unknown)
    }
}

impl TryFrom<Vec<State>> for Trace {
    type Error = Error;

    fn try_from(states: Vec<State>) -> Result<Self> {
        Trace::new(states)
    }
}

impl From<Trace> for Vec<State> {
    fn from(t: Trace) -> Self {
        t.0
    }
}

/// Truth value of `formula` at position `t` of `trace`.
pub fn eval3(formula: &Formula, trace: &Trace, t: usize) -> Result<ThreeValued> {
    if t >= trace.len() {
        return Err(Error::PositionOutOfRange {
            position: t,
            len: trace.len(),
        });
    }
    Ok(valuation(formula, trace)[t])
}

/// Values of `formula` at every position of `trace`, computed bottom-up.
pub fn valuation(formula: &Formula, trace: &Trace) -> Vec<ThreeValued> {
    use ThreeValued::Unknown;
    let n = trace.len();
    let at = |v: &[ThreeValued], i: usize| v.get(i).copied().unwrap_or(Unknown);
    match formula {
        Formula::Atom(a) => match a.level {
            Level::Instance => (0..n).map(|t| trace.get(t, &a.name)).collect(),
            Level::Model => vec![trace.constant(&a.name); n],
        },
        Formula::Not(f) => valuation(f, trace).into_iter().map(ThreeValued::not).collect(),
        Formula::And(a, b) => zip_with(valuation(a, trace), valuation(b, trace), ThreeValued::and),
        Formula::Or(a, b) => zip_with(valuation(a, trace), valuation(b, trace), ThreeValued::or),
        Formula::Implies(a, b) => zip_with(valuation(a, trace), valuation(b, trace), ThreeValued::implies),
        Formula::Next(f) => {
            let v = valuation(f, trace);
            (0..n).map(|t| at(&v, t + 1)).collect()
        }
        Formula::Always(iv, f) => {
            let v = valuation(f, trace);
            (0..n)
                .map(|t| {
                    window(t, iv, n)
                        .map(|i| at(&v, i))
                        .fold(ThreeValued::True, ThreeValued::and)
                })
                .collect()
        }
        Formula::Eventually(iv, f) => {
            let v = valuation(f, trace);
            (0..n)
                .map(|t| {
                    window(t, iv, n)
                        .map(|i| at(&v, i))
                        .fold(ThreeValued::False, ThreeValued::or)
                })
                .collect()
        }
        Formula::Until(iv, a, b) => {
            let va = valuation(a, trace);
            let vb = valuation(b, trace);
            (0..n)
                .map(|t| {
                    // hold = conjunction of `a` over [t, i)
                    let mut hold = ThreeValued::True;
                    let mut acc = ThreeValued::False;
                    // Every position from n on reads Unknown, so stopping at n is exact.
                    let lo = t.saturating_add(iv.lo());
                    for i in t..=t.saturating_add(iv.hi()).min(n) {
                        if i >= lo || i == n {
                            acc = acc.or(hold.and(at(&vb, i)));
                        }
                        hold = hold.and(at(&va, i));
                        if hold == ThreeValued::False {
                            break;
                        }
                    }
                    acc
                })
                .collect()
        }
    }
}

/// Positions `[t + lo, t + hi]` clamped to `[0, n]`; position `n` stands in
/// for everything past the end, which all reads `Unknown`.
fn window(t: usize, iv: &super::ast::Interval, n: usize) -> std::ops::RangeInclusive<usize> {
    t.saturating_add(iv.lo()).min(n)..=t.saturating_add(iv.hi()).min(n)
}

fn zip_with(
    a: Vec<ThreeValued>,
    b: Vec<ThreeValued>,
    op: impl Fn(ThreeValued, ThreeValued) -> ThreeValued,
) -> Vec<ThreeValued> {
    a.into_iter().zip(b).map(|(x, y)| op(x, y)).collect()
}

/// Number of distinct in-trace positions at which each atom is consulted
/// when `formula` is evaluated at `t`.
pub fn atom_evaluations(formula: &Formula, trace_len: usize, t: usize) -> BTreeMap<String, usize> {
    let mut positions: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();
    let root: BTreeSet<usize> = [t].into_iter().filter(|&p| p < trace_len).collect();
    collect_positions(formula, &root, trace_len, &mut positions);
    let mut out = BTreeMap::new();
    formula.visit_atoms(&mut |a| {
        out.entry(a.name.clone()).or_insert(0);
    });
    for (name, set) in positions {
        out.insert(name, set.len());
    }
    out
}

fn collect_positions(
    f: &Formula,
    at: &BTreeSet<usize>,
    len: usize,
    out: &mut BTreeMap<String, BTreeSet<usize>>,
) {
    if at.is_empty() {
        return;
    }
    let shift = |lo: usize, hi: usize| -> BTreeSet<usize> {
        at.iter()
            .flat_map(|&t| (t.saturating_add(lo)..=t.saturating_add(hi)).take_while(move |&p| p < len))
            .collect()
    };
    match f {
        Formula::Atom(a) => {
            out.entry(a.name.clone()).or_default().extend(at.iter().copied());
        }
        Formula::Not(g) => collect_positions(g, at, len, out),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            collect_positions(a, at, len, out);
            collect_positions(b, at, len, out);
        }
        Formula::Next(g) => collect_positions(g, &shift(1, 1), len, out),
        Formula::Always(iv, g) | Formula::Eventually(iv, g) => {
            collect_positions(g, &shift(iv.lo(), iv.hi()), len, out)
        }
        Formula::Until(iv, a, b) => {
            if iv.hi() > 0 {
                collect_positions(a, &shift(0, iv.hi() - 1), len, out);
            }
            collect_positions(b, &shift(iv.lo(), iv.hi()), len, out);
        }
    }
}

/// Verdict plus the evaluation counts needed for guarantee composition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub verdict: ThreeValued,
    pub evaluations: BTreeMap<String, usize>,
}

pub fn evaluate(formula: &Formula, trace: &Trace, t: usize) -> Result<Evaluation> {
    Ok(Evaluation {
        verdict: eval3(formula, trace, t)?,
        evaluations: atom_evaluations(formula, trace.len(), t),
    })
}
