//! Terms, atoms, conjunctive queries, substitutions and schemas.
//!
//! Constants, variables and labeled nulls live in disjoint namespaces. Nulls
//! only ever appear inside chase instances; parsed rules and queries are
//! null-free.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Interned-ish symbol text shared between terms and atoms.
pub type Symbol = Arc<str>;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Const(Symbol),
    Var(Symbol),
    Null(u64),
}

impl Term {
    pub fn constant(name: &str) -> Self {
        Term::Const(Arc::from(name))
    }

    pub fn var(name: &str) -> Self {
        Term::Var(Arc::from(name))
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn is_const(&self) -> bool {
        matches!(self, Term::Const(_))
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Term::Null(_))
    }

    pub fn as_var(&self) -> Option<&Symbol> {
        match self {
            Term::Var(v) => Some(v),
            _ => None,
        }
    }
}

/// True if `name` can be written as a bare lowercase constant.
pub(crate) fn is_bare_constant(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() || c.is_ascii_digit() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(c) if is_bare_constant(c) => write!(f, "{c}"),
            Term::Const(c) => write!(f, "'{}'", c.replace('\'', "''")),
            Term::Var(v) => write!(f, "{v}"),
            Term::Null(n) => write!(f, "_z{n}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub predicate: Symbol,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: &str, args: Vec<Term>) -> Self {
        Atom {
            predicate: Arc::from(predicate),
            args,
        }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn variables(&self) -> impl Iterator<Item = &Symbol> {
        self.args.iter().filter_map(Term::as_var)
    }

    pub fn is_ground(&self) -> bool {
        !self.args.iter().any(Term::is_var)
    }

    pub fn has_nulls(&self) -> bool {
        self.args.iter().any(Term::is_null)
    }

    /// 1-based positions at which `term` occurs.
    pub fn positions_of(&self, term: &Term) -> Vec<usize> {
        self.args
            .iter()
            .enumerate()
            .filter(|(_, t)| *t == term)
            .map(|(i, _)| i + 1)
            .collect()
    }

    pub fn term_at(&self, position: &Position) -> Option<&Term> {
        if position.predicate != self.predicate || position.index == 0 {
            return None;
        }
        self.args.get(position.index - 1)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.predicate)?;
        for (i, t) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{t}")?;
        }
        f.write_str(")")
    }
}

/// An argument slot `r[i]`, 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Position {
    pub predicate: Symbol,
    pub index: usize,
}

impl Position {
    pub fn new(predicate: &str, index: usize) -> Self {
        Position {
            predicate: Arc::from(predicate),
            index,
        }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.predicate, self.index)
    }
}

pub(crate) fn write_atoms(f: &mut fmt::Formatter<'_>, atoms: &[Atom]) -> fmt::Result {
    for (i, a) in atoms.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{a}")?;
    }
    Ok(())
}

/// `head_predicate(head) <- body`. The body is kept sorted and duplicate-free.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConjunctiveQuery {
    pub head_predicate: Symbol,
    pub head: Vec<Term>,
    body: Vec<Atom>,
}

impl ConjunctiveQuery {
    pub fn new(head_predicate: &str, head: Vec<Term>, body: Vec<Atom>) -> Self {
        Self::with_symbol(Arc::from(head_predicate), head, body)
    }

    pub(crate) fn with_symbol(head_predicate: Symbol, head: Vec<Term>, mut body: Vec<Atom>) -> Self {
        body.sort();
        body.dedup();
        ConjunctiveQuery {
            head_predicate,
            head,
            body,
        }
    }

    /// Boolean query `q() <- body`.
    pub fn boolean(body: Vec<Atom>) -> Self {
        Self::new("q", Vec::new(), body)
    }

    pub fn body(&self) -> &[Atom] {
        &self.body
    }

    pub fn is_boolean(&self) -> bool {
        self.head.is_empty()
    }

    pub fn with_body(&self, body: Vec<Atom>) -> Self {
        Self::with_symbol(self.head_predicate.clone(), self.head.clone(), body)
    }

    pub fn variables(&self) -> BTreeSet<Symbol> {
        self.head
            .iter()
            .filter_map(Term::as_var)
            .chain(self.body.iter().flat_map(|a| a.variables()))
            .cloned()
            .collect()
    }

    /// Number of argument-slot occurrences of each variable, counting the
    /// head as well as the body.
    pub fn occurrence_counts(&self) -> BTreeMap<Symbol, usize> {
        let mut counts = BTreeMap::new();
        let head = self.head.iter().filter_map(Term::as_var);
        for v in head.chain(self.body.iter().flat_map(|a| a.variables())) {
            *counts.entry(v.clone()).or_insert(0) += 1;
        }
        counts
    }

    /// Variables occurring more than once in the query. Head occurrences
    /// count, so every head variable of a safe query is shared.
    pub fn shared_variables(&self) -> BTreeSet<Symbol> {
        self.occurrence_counts()
            .into_iter()
            .filter(|(_, n)| *n > 1)
            .map(|(v, _)| v)
            .collect()
    }

    /// The first head variable that does not occur in the body, if any.
    pub fn unsafe_variable(&self) -> Option<&Symbol> {
        let body_vars: BTreeSet<&Symbol> = self.body.iter().flat_map(|a| a.variables()).collect();
        self.head
            .iter()
            .filter_map(Term::as_var)
            .find(|v| !body_vars.contains(v))
    }

    pub fn predicates(&self) -> BTreeSet<Symbol> {
        self.body.iter().map(|a| a.predicate.clone()).collect()
    }
}

impl fmt::Display for ConjunctiveQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.head_predicate)?;
        for (i, t) in self.head.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{t}")?;
        }
        f.write_str(") <- ")?;
        write_atoms(f, &self.body)
    }
}

/// A finite map from variables to terms; unbound variables map to themselves.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Substitution {
    bindings: BTreeMap<Symbol, Term>,
}

impl Substitution {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn from_pairs<I: IntoIterator<Item = (Symbol, Term)>>(pairs: I) -> Self {
        Substitution {
            bindings: pairs.into_iter().collect(),
        }
    }

    pub fn bind(&mut self, var: Symbol, term: Term) {
        self.bindings.insert(var, term);
    }

    pub fn unbind(&mut self, var: &str) {
        self.bindings.remove(var);
    }

    pub fn get(&self, var: &str) -> Option<&Term> {
        self.bindings.get(var)
    }

    pub fn is_identity(&self) -> bool {
        self.bindings.iter().all(|(v, t)| t.as_var() == Some(v))
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Symbol, &Term)> {
        self.bindings.iter()
    }

    pub fn apply_term(&self, term: &Term) -> Term {
        match term {
            Term::Var(v) => self.bindings.get(v).cloned().unwrap_or_else(|| term.clone()),
            _ => term.clone(),
        }
    }

    pub fn apply_atom(&self, atom: &Atom) -> Atom {
        Atom {
            predicate: atom.predicate.clone(),
            args: atom.args.iter().map(|t| self.apply_term(t)).collect(),
        }
    }

    pub fn apply_atoms(&self, atoms: &[Atom]) -> Vec<Atom> {
        atoms.iter().map(|a| self.apply_atom(a)).collect()
    }

    /// Applies to head and body; the body is re-deduplicated.
    pub fn apply_query(&self, q: &ConjunctiveQuery) -> ConjunctiveQuery {
        ConjunctiveQuery::with_symbol(
            q.head_predicate.clone(),
            q.head.iter().map(|t| self.apply_term(t)).collect(),
            self.apply_atoms(q.body()),
        )
    }

    /// The substitution `t -> next(self(t))`.
    pub fn then(&self, next: &Substitution) -> Substitution {
        let mut out = Substitution::identity();
        for (v, t) in &self.bindings {
            out.bind(v.clone(), next.apply_term(t));
        }
        for (v, t) in &next.bindings {
            if !self.bindings.contains_key(v) {
                out.bind(v.clone(), t.clone());
            }
        }
        out
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (v, t)) in self.bindings.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v} -> {t}")?;
        }
        f.write_str("}")
    }
}

/// Predicate arities plus the set of predicates introduced by normalization.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Schema {
    arities: BTreeMap<Symbol, usize>,
    auxiliary: BTreeSet<Symbol>,
}

impl Schema {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records `predicate/arity`, failing if the predicate is known with a
    /// different arity.
    pub fn declare(&mut self, predicate: &str, arity: usize) -> Result<()> {
        match self.arities.get(predicate) {
            Some(&known) if known != arity => Err(Error::ArityConflict {
                predicate: predicate.to_string(),
                expected: known,
                found: arity,
            }),
            Some(_) => Ok(()),
            None => {
                self.arities.insert(Arc::from(predicate), arity);
                Ok(())
            }
        }
    }

    pub fn declare_atoms<'a, I: IntoIterator<Item = &'a Atom>>(&mut self, atoms: I) -> Result<()> {
        for a in atoms {
            self.declare(&a.predicate, a.arity())?;
        }
        Ok(())
    }

    pub fn declare_auxiliary(&mut self, predicate: &str, arity: usize) {
        let sym: Symbol = Arc::from(predicate);
        self.arities.insert(sym.clone(), arity);
        self.auxiliary.insert(sym);
    }

    pub fn arity(&self, predicate: &str) -> Option<usize> {
        self.arities.get(predicate).copied()
    }

    pub fn is_auxiliary(&self, predicate: &str) -> bool {
        self.auxiliary.contains(predicate)
    }

    pub fn predicates(&self) -> impl Iterator<Item = (&Symbol, usize)> {
        self.arities.iter().map(|(p, a)| (p, *a))
    }

    pub fn positions(&self) -> Vec<Position> {
        self.arities
            .iter()
            .flat_map(|(p, &n)| {
                (1..=n).map(move |i| Position {
                    predicate: p.clone(),
                    index: i,
                })
            })
            .collect()
    }

    pub fn position_count(&self) -> usize {
        self.arities.values().sum()
    }
}
