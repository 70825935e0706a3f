//! Syntactic class membership: linear, guarded and sticky rule sets.
//!
//! Stickiness uses the variable-marking procedure: first mark every body
//! variable that does not reach the head; then, whenever a marked variable
//! sits at body position `π` of some rule, mark each body variable of any rule
//! whose head carries it at `π`. The set is sticky iff, at the fixpoint, no
//! marked variable occurs more than once in the body of its rule.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::model::{Position, Symbol, Term};
use crate::rules::Tgd;

/// A rule that falls outside a class, with a short reason.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub rule: Symbol,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.rule, self.detail)
    }
}

/// Outcome of one membership test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Membership {
    pub holds: bool,
    pub violations: Vec<Violation>,
}

impl Membership {
    fn from_violations(violations: Vec<Violation>) -> Self {
        Membership {
            holds: violations.is_empty(),
            violations,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassReport {
    pub linear: Membership,
    pub guarded: Membership,
    pub sticky: Membership,
}

impl ClassReport {
    /// Linear and sticky sets both guarantee that rewriting terminates.
    pub fn terminates(&self) -> bool {
        self.linear.holds || self.sticky.holds
    }
}

impl fmt::Display for ClassReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, m) in [
            ("linear", &self.linear),
            ("guarded", &self.guarded),
            ("sticky", &self.sticky),
        ] {
            writeln!(f, "{name}={}", m.holds)?;
            for v in &m.violations {
                writeln!(f, "  {name}: {v}")?;
            }
        }
        Ok(())
    }
}

pub fn is_linear(sigmas: &[Tgd]) -> Membership {
    Membership::from_violations(
        sigmas
            .iter()
            .filter(|s| s.body.len() != 1)
            .map(|s| Violation {
                rule: s.name.clone(),
                detail: format!("{} body atoms", s.body.len()),
            })
            .collect(),
    )
}

pub fn is_guarded(sigmas: &[Tgd]) -> Membership {
    Membership::from_violations(
        sigmas
            .iter()
            .filter(|s| {
                let vars = s.body_variables();
                !s.body.iter().any(|a| {
                    let in_atom: BTreeSet<&Symbol> = a.variables().collect();
                    vars.iter().all(|v| in_atom.contains(v))
                })
            })
            .map(|s| Violation {
                rule: s.name.clone(),
                detail: "no body atom contains every body variable".to_string(),
            })
            .collect(),
    )
}

/// Marked body variables per rule, at the fixpoint of the marking procedure.
pub fn sticky_marking(sigmas: &[Tgd]) -> Vec<BTreeSet<Symbol>> {
    let mut marked: Vec<BTreeSet<Symbol>> = sigmas
        .iter()
        .map(|s| {
            let head: HashSet<&Symbol> = s.head.iter().flat_map(|a| a.variables()).collect();
            s.body_variables().into_iter().filter(|v| !head.contains(v)).collect()
        })
        .collect();
    loop {
        let marked_positions: HashSet<Position> = sigmas
            .iter()
            .zip(&marked)
            .flat_map(|(s, m)| {
                s.body.iter().flat_map(move |a| {
                    a.args.iter().enumerate().filter_map(move |(i, t)| match t {
                        Term::Var(v) if m.contains(v) => Some(Position {
                            predicate: a.predicate.clone(),
                            index: i + 1,
                        }),
                        _ => None,
                    })
                })
            })
            .collect();
        let mut changed = false;
        for (s, m) in sigmas.iter().zip(marked.iter_mut()) {
            let body = s.body_variables();
            for h in &s.head {
                for (i, t) in h.args.iter().enumerate() {
                    let Term::Var(v) = t else { continue };
                    let pos = Position {
                        predicate: h.predicate.clone(),
                        index: i + 1,
                    };
                    if body.contains(v) && marked_positions.contains(&pos) && m.insert(v.clone()) {
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return marked;
        }
    }
}

pub fn is_sticky(sigmas: &[Tgd]) -> Membership {
    let marking = sticky_marking(sigmas);
    let mut violations = Vec::new();
    for (s, m) in sigmas.iter().zip(&marking) {
        for v in m {
            let count = s.body.iter().flat_map(|a| a.variables()).filter(|x| *x == v).count();
            if count > 1 {
                violations.push(Violation {
                    rule: s.name.clone(),
                    detail: format!("marked variable {v} occurs {count} times in the body"),
                });
            }
        }
    }
    Membership::from_violations(violations)
}

/// Always an error: membership is not decided here.
pub fn is_sticky_join(_sigmas: &[Tgd]) -> Result<Membership> {
    Err(Error::StickyJoinUnsupported)
}

pub fn classify(sigmas: &[Tgd]) -> ClassReport {
    ClassReport {
        linear: is_linear(sigmas),
        guarded: is_guarded(sigmas),
        sticky: is_sticky(sigmas),
    }
}
