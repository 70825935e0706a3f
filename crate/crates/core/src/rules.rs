//! Tuple-generating dependencies, negative constraints and key dependencies.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::model::{write_atoms, Atom, Position, Substitution, Symbol, Term};

/// `body -> exists Z. head`; head-only variables are existential.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Tgd {
    pub name: Symbol,
    pub body: Vec<Atom>,
    pub head: Vec<Atom>,
}

impl Tgd {
    pub fn new(name: &str, body: Vec<Atom>, head: Vec<Atom>) -> Self {
        Tgd {
            name: Arc::from(name),
            body,
            head,
        }
    }

    pub fn body_variables(&self) -> BTreeSet<Symbol> {
        self.body.iter().flat_map(|a| a.variables()).cloned().collect()
    }

    /// Head variables in order of first occurrence.
    pub fn head_variables(&self) -> Vec<Symbol> {
        let mut seen = Vec::new();
        for v in self.head.iter().flat_map(|a| a.variables()) {
            if !seen.contains(v) {
                seen.push(v.clone());
            }
        }
        seen
    }

    /// Variables occurring in both body and head, in head order.
    pub fn frontier(&self) -> Vec<Symbol> {
        let body = self.body_variables();
        self.head_variables().into_iter().filter(|v| body.contains(v)).collect()
    }

    /// Head-only variables, in head order.
    pub fn existentials(&self) -> Vec<Symbol> {
        let body = self.body_variables();
        self.head_variables()
            .into_iter()
            .filter(|v| !body.contains(v))
            .collect()
    }

    pub fn is_full(&self) -> bool {
        self.existentials().is_empty()
    }

    pub fn is_linear(&self) -> bool {
        self.body.len() == 1
    }

    /// One head atom and at most one existential variable, occurring once.
    pub fn is_normal(&self) -> bool {
        if self.head.len() != 1 {
            return false;
        }
        let ex = self.existentials();
        match ex.as_slice() {
            [] => true,
            [z] => self.head[0].positions_of(&Term::Var(z.clone())).len() == 1,
            _ => false,
        }
    }

    /// The single head atom of a normalized rule.
    pub fn head_atom(&self) -> &Atom {
        &self.head[0]
    }

    /// Head slot holding the existential variable, for normalized rules.
    pub fn existential_position(&self) -> Option<Position> {
        let z = self.existentials().into_iter().next()?;
        let head = self.head.iter().find(|a| a.variables().any(|v| *v == z))?;
        let index = head.positions_of(&Term::Var(z)).first().copied()?;
        Some(Position {
            predicate: head.predicate.clone(),
            index,
        })
    }

    /// Copy with every variable prefixed by `prefix`.
    pub fn renamed(&self, prefix: &str) -> Tgd {
        let mut sub = Substitution::identity();
        for v in self.body_variables().into_iter().chain(self.head_variables()) {
            let renamed = Term::Var(Arc::from(format!("{prefix}{v}").as_str()));
            sub.bind(v, renamed);
        }
        Tgd {
            name: self.name.clone(),
            body: sub.apply_atoms(&self.body),
            head: sub.apply_atoms(&self.head),
        }
    }

    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.body.iter().chain(&self.head)
    }
}

impl fmt::Display for Tgd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.name)?;
        write_atoms(f, &self.body)?;
        f.write_str(" -> ")?;
        write_atoms(f, &self.head)?;
        f.write_str(".")
    }
}

/// `body -> false`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NegativeConstraint {
    pub name: Symbol,
    pub body: Vec<Atom>,
}

impl NegativeConstraint {
    pub fn new(name: &str, body: Vec<Atom>) -> Self {
        NegativeConstraint {
            name: Arc::from(name),
            body,
        }
    }
}

impl fmt::Display for NegativeConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.name)?;
        write_atoms(f, &self.body)?;
        f.write_str(" -> false.")
    }
}

/// The positions in `key_positions` (1-based) functionally determine the
/// whole tuple of `predicate`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct KeyDependency {
    pub predicate: Symbol,
    pub key_positions: Vec<usize>,
}

impl KeyDependency {
    pub fn new(predicate: &str, key_positions: Vec<usize>) -> Self {
        KeyDependency {
            predicate: Arc::from(predicate),
            key_positions,
        }
    }
}

impl fmt::Display for KeyDependency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let keys: Vec<String> = self.key_positions.iter().map(|k| k.to_string()).collect();
        write!(f, "key({}) = [{}].", self.predicate, keys.join(", "))
    }
}
