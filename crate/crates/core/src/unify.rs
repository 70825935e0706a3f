//! Most general unifiers and homomorphism search.

use std::collections::{BTreeMap, HashMap};
use std::ops::ControlFlow;

use crate::model::{Atom, Substitution, Symbol, Term};

fn resolve(bindings: &BTreeMap<Symbol, Term>, term: &Term) -> Term {
    let mut current = term.clone();
    while let Term::Var(v) = &current {
        match bindings.get(v) {
            Some(next) => current = next.clone(),
            None => break,
        }
    }
    current
}

fn unify_terms(bindings: &mut BTreeMap<Symbol, Term>, left: &Term, right: &Term) -> bool {
    let l = resolve(bindings, left);
    let r = resolve(bindings, right);
    if l == r {
        return true;
    }
    match (&l, &r) {
        // Larger variable name is bound to the smaller one.
        (Term::Var(a), Term::Var(b)) => {
            if a > b {
                bindings.insert(a.clone(), r.clone());
            } else {
                bindings.insert(b.clone(), l.clone());
            }
            true
        }
        (Term::Var(a), _) => {
            bindings.insert(a.clone(), r.clone());
            true
        }
        (_, Term::Var(b)) => {
            bindings.insert(b.clone(), l.clone());
            true
        }
        _ => false,
    }
}

/// Most general unifier of a set of atoms, or `None` when they do not
/// unify. A singleton set yields the identity.
pub fn unify<'a, I>(atoms: I) -> Option<Substitution>
where
    I: IntoIterator<Item = &'a Atom>,
{
    let mut iter = atoms.into_iter();
    let first = match iter.next() {
        Some(a) => a,
        None => return Some(Substitution::identity()),
    };
    let mut bindings = BTreeMap::new();
    for other in iter {
        if other.predicate != first.predicate || other.arity() != first.arity() {
            return None;
        }
        for (l, r) in first.args.iter().zip(&other.args) {
            if !unify_terms(&mut bindings, l, r) {
                return None;
            }
        }
    }
    let solved: Vec<(Symbol, Term)> = bindings
        .keys()
        .map(|v| (v.clone(), resolve(&bindings, &Term::Var(v.clone()))))
        .collect();
    Some(Substitution::from_pairs(solved))
}

/// Target atoms indexed by predicate for repeated homomorphism queries.
pub struct AtomIndex<'a> {
    by_predicate: HashMap<&'a str, Vec<&'a Atom>>,
    by_argument: HashMap<(&'a str, usize, &'a Term), usize>,
    argument_lists: Vec<Vec<&'a Atom>>,
}

impl<'a> AtomIndex<'a> {
    pub fn new<I: IntoIterator<Item = &'a Atom>>(atoms: I) -> Self {
        let mut by_predicate: HashMap<&'a str, Vec<&'a Atom>> = HashMap::new();
        let mut by_argument: HashMap<(&'a str, usize, &'a Term), usize> = HashMap::new();
        let mut argument_lists: Vec<Vec<&'a Atom>> = Vec::new();
        for a in atoms {
            by_predicate.entry(&a.predicate).or_default().push(a);
            for (i, t) in a.args.iter().enumerate() {
                let slot = *by_argument.entry((&a.predicate, i, t)).or_insert_with(|| {
                    argument_lists.push(Vec::new());
                    argument_lists.len() - 1
                });
                argument_lists[slot].push(a);
            }
        }
        AtomIndex {
            by_predicate,
            by_argument,
            argument_lists,
        }
    }

    /// Smallest candidate list given the arguments already fixed by `sub`.
    fn bound_candidates(&self, atom: &Atom, sub: &Substitution) -> &[&'a Atom] {
        let by_argument: &HashMap<(&str, usize, &Term), usize> = &self.by_argument;
        let mut best = self.candidates(atom);
        for (i, s) in atom.args.iter().enumerate() {
            let fixed = match s {
                Term::Var(v) => sub.get(v),
                t => Some(t),
            };
            if let Some(t) = fixed {
                let list = match by_argument.get(&(&*atom.predicate, i, t)) {
                    Some(&slot) => self.argument_lists[slot].as_slice(),
                    None => &[],
                };
                if list.len() < best.len() {
                    best = list;
                }
                if best.is_empty() {
                    break;
                }
            }
        }
        best
    }

    fn candidates(&self, atom: &Atom) -> &[&'a Atom] {
        self.by_predicate
            .get(&*atom.predicate)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn contains(&self, atom: &Atom) -> bool {
        self.candidates(atom).contains(&atom)
    }

    /// First homomorphism of `source` into the index extending `seed`.
    pub fn extend(&self, source: &[Atom], seed: &Substitution) -> Option<Substitution> {
        let mut found = None;
        self.for_each(source, seed, |h| {
            found = Some(h.clone());
            ControlFlow::Break(())
        });
        found
    }

    /// Visits every homomorphism of `source` into the index extending
    /// `seed` until the visitor breaks.
    pub fn for_each<F>(&self, source: &[Atom], seed: &Substitution, mut visit: F)
    where
        F: FnMut(&Substitution) -> ControlFlow<()>,
    {
        let mut order: Vec<&Atom> = source.iter().collect();
        order.sort_by_key(|a| self.candidates(a).len());
        let mut sub = seed.clone();
        let _ = self.search(&order, 0, &mut sub, &mut visit);
    }

    fn search<F>(&self, order: &[&Atom], depth: usize, sub: &mut Substitution, visit: &mut F) -> ControlFlow<()>
    where
        F: FnMut(&Substitution) -> ControlFlow<()>,
    {
        let Some(atom) = order.get(depth) else {
            return visit(sub);
        };
        for candidate in self.bound_candidates(atom, sub) {
            if candidate.arity() != atom.arity() {
                continue;
            }
            let mut added: Vec<Symbol> = Vec::new();
            let mut ok = true;
            for (s, t) in atom.args.iter().zip(&candidate.args) {
                match s {
                    Term::Var(v) => match sub.get(v) {
                        Some(bound) if bound != t => {
                            ok = false;
                            break;
                        }
                        Some(_) => {}
                        None => {
                            sub.bind(v.clone(), t.clone());
                            added.push(v.clone());
                        }
                    },
                    _ if s != t => {
                        ok = false;
                        break;
                    }
                    _ => {}
                }
            }
            let flow = if ok {
                self.search(order, depth + 1, sub, visit)
            } else {
                ControlFlow::Continue(())
            };
            for v in &added {
                sub.unbind(v);
            }
            flow?;
        }
        ControlFlow::Continue(())
    }
}

/// A substitution `h` fixing constants and nulls with `h(source) ⊆ target`.
pub fn find_homomorphism(source: &[Atom], target: &[Atom]) -> Option<Substitution> {
    AtomIndex::new(target).extend(source, &Substitution::identity())
}

/// Like [`find_homomorphism`] but every binding of `seed` is kept.
pub fn extend_homomorphism(source: &[Atom], target: &[Atom], seed: &Substitution) -> Option<Substitution> {
    AtomIndex::new(target).extend(source, seed)
}
