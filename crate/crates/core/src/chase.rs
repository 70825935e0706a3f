//! Restricted breadth-first chase, entailment and constraint checks.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::ops::ControlFlow;

use crate::model::{Atom, ConjunctiveQuery, Substitution, Symbol, Term};
use crate::rules::{KeyDependency, NegativeConstraint, Tgd};
use crate::unify::{find_homomorphism, AtomIndex};

/// Engine-internal disequality predicate used by the key check.
pub const NEQ: &str = "neq";

/// A set of atoms over constants and labelled nulls.
#[derive(Clone, Debug, Default)]
pub struct Instance {
    atoms: Vec<Atom>,
    seen: HashSet<Atom>,
    nulls: u64,
}

impl Instance {
    pub fn new() -> Self {
        Instance::default()
    }

    pub fn from_atoms<I: IntoIterator<Item = Atom>>(atoms: I) -> Self {
        let mut inst = Instance::new();
        for a in atoms {
            inst.insert(a);
        }
        inst
    }

    /// Adds `atom`; returns false if it was already present.
    pub fn insert(&mut self, atom: Atom) -> bool {
        if let Some(max) = atom
            .args
            .iter()
            .filter_map(|t| match t {
                Term::Null(n) => Some(*n),
                _ => None,
            })
            .max()
        {
            self.nulls = self.nulls.max(max);
        }
        if self.seen.contains(&atom) {
            return false;
        }
        self.seen.insert(atom.clone());
        self.atoms.push(atom);
        true
    }

    pub fn contains(&self, atom: &Atom) -> bool {
        self.seen.contains(atom)
    }

    /// Atoms in insertion order.
    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn fresh_null(&mut self) -> Term {
        self.nulls += 1;
        Term::Null(self.nulls)
    }

    pub fn constants(&self) -> BTreeSet<Symbol> {
        self.atoms
            .iter()
            .flat_map(|a| a.args.iter())
            .filter_map(|t| match t {
                Term::Const(c) => Some(c.clone()),
                _ => None,
            })
            .collect()
    }

    pub fn has_nulls(&self) -> bool {
        self.atoms.iter().any(Atom::has_nulls)
    }
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        self.seen == other.seen
    }
}

impl Eq for Instance {}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.atoms {
            writeln!(f, "{a}.")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct ChaseResult {
    pub instance: Instance,
    /// No rule is applicable to `instance`.
    pub saturated: bool,
    pub rounds_used: usize,
}

fn head_satisfied(index: &AtomIndex<'_>, sigma: &Tgd, h: &Substitution) -> bool {
    let frontier: Vec<(Symbol, Term)> = sigma
        .frontier()
        .into_iter()
        .filter_map(|v| h.get(&v).map(|t| (v, t.clone())))
        .collect();
    index.extend(&sigma.head, &Substitution::from_pairs(frontier)).is_some()
}

/// Active triggers of `sigma` that use at least one atom of `delta`.
fn delta_triggers(index: &AtomIndex<'_>, sigma: &Tgd, delta: &[Atom]) -> BTreeSet<Substitution> {
    let mut out = BTreeSet::new();
    for b in &sigma.body {
        for d in delta.iter().filter(|d| d.predicate == b.predicate) {
            let Some(seed) =
                AtomIndex::new(std::iter::once(d)).extend(std::slice::from_ref(b), &Substitution::identity())
            else {
                continue;
            };
            index.for_each(&sigma.body, &seed, |h| {
                if !out.contains(h) && !head_satisfied(index, sigma, h) {
                    out.insert(h.clone());
                }
                ControlFlow::Continue(())
            });
        }
    }
    out
}

/// Breadth-first restricted chase of `database` for at most `depth` rounds.
pub fn chase(database: &Instance, sigmas: &[Tgd], depth: usize) -> ChaseResult {
    chase_bounded(database, sigmas, depth, usize::MAX)
}

/// Like [`chase`], but also stops, unsaturated, once the instance holds
/// `max_atoms` atoms.
///
/// Each round collects the triggers active at the start of the round (only
/// those touching atoms added by the previous round can be new) and fires
/// them in rule order. A trigger is skipped when its head has become
/// satisfied by atoms added earlier in the same round.
pub fn chase_bounded(database: &Instance, sigmas: &[Tgd], depth: usize, max_atoms: usize) -> ChaseResult {
    let mut instance = database.clone();
    let mut delta_start = 0;
    let mut rounds_used = 0;
    let mut index = PredicateIndex::default();
    let saturated = loop {
        let pending: Vec<BTreeSet<Substitution>> = {
            let index = AtomIndex::new(instance.atoms());
            let delta = &instance.atoms()[delta_start..];
            sigmas.iter().map(|s| delta_triggers(&index, s, delta)).collect()
        };
        if pending.iter().all(BTreeSet::is_empty) {
            break true;
        }
        if rounds_used >= depth || instance.len() >= max_atoms {
            break false;
        }
        rounds_used += 1;
        let round_start = instance.len();
        'round: for (sigma, hs) in sigmas.iter().zip(pending) {
            let existentials = sigma.existentials();
            for mut h in hs {
                if instance.len() >= max_atoms {
                    break 'round;
                }
                if instance.len() > round_start && index.satisfied(&instance, sigma, &h) {
                    continue;
                }
                for z in &existentials {
                    let null = instance.fresh_null();
                    h.bind(z.clone(), null);
                }
                for a in h.apply_atoms(&sigma.head) {
                    instance.insert(a);
                }
            }
        }
        delta_start = round_start;
    };
    ChaseResult {
        instance,
        saturated,
        rounds_used,
    }
}

/// Atom positions grouped by predicate, caught up with the instance before
/// each check so atoms fired earlier in the round are visible.
#[derive(Default)]
struct PredicateIndex {
    by_predicate: HashMap<Symbol, Vec<usize>>,
    by_argument: HashMap<(Symbol, usize, Term), Vec<usize>>,
    indexed: usize,
}

impl PredicateIndex {
    fn catch_up(&mut self, instance: &Instance) {
        for (i, a) in instance.atoms().iter().enumerate().skip(self.indexed) {
            self.by_predicate.entry(a.predicate.clone()).or_default().push(i);
            for (k, t) in a.args.iter().enumerate() {
                self.by_argument
                    .entry((a.predicate.clone(), k, t.clone()))
                    .or_default()
                    .push(i);
            }
        }
        self.indexed = instance.len();
    }

    /// Can `pattern` be mapped into the instance, extending `bound`?
    fn extendable<'a>(
        &self,
        instance: &'a Instance,
        pattern: &'a [Atom],
        bound: &mut Vec<(&'a Symbol, &'a Term)>,
    ) -> bool {
        let Some((first, rest)) = pattern.split_first() else {
            return true;
        };
        let Some(mut candidates) = self.by_predicate.get(&first.predicate).map(Vec::as_slice) else {
            return false;
        };
        for (k, p) in first.args.iter().enumerate() {
            let fixed = match p {
                Term::Var(v) => bound.iter().find(|(w, _)| *w == v).map(|(_, t)| *t),
                t => Some(t),
            };
            if let Some(t) = fixed {
                let list = self
                    .by_argument
                    .get(&(first.predicate.clone(), k, t.clone()))
                    .map_or(&[][..], Vec::as_slice);
                if list.len() < candidates.len() {
                    candidates = list;
                }
            }
        }
        for &i in candidates {
            let target = &instance.atoms()[i];
            if target.arity() != first.arity() {
                continue;
            }
            let mark = bound.len();
            let ok = first.args.iter().zip(&target.args).all(|(p, t)| match p {
                Term::Var(v) => match bound.iter().find(|(w, _)| *w == v) {
                    Some((_, u)) => *u == t,
                    None => {
                        bound.push((v, t));
                        true
                    }
                },
                _ => p == t,
            });
            if ok && self.extendable(instance, rest, bound) {
                return true;
            }
            bound.truncate(mark);
        }
        false
    }

    fn satisfied(&mut self, instance: &Instance, sigma: &Tgd, h: &Substitution) -> bool {
        self.catch_up(instance);
        let pattern = h.apply_atoms(&sigma.head);
        self.extendable(instance, &pattern, &mut Vec::new())
    }
}

/// True iff the body of `q` maps into `instance`.
pub fn entails(instance: &Instance, q: &ConjunctiveQuery) -> bool {
    find_homomorphism(q.body(), instance.atoms()).is_some()
}

/// Three-valued outcome of a bounded check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Answer {
    True,
    False,
    Unknown,
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Answer::True => "true",
            Answer::False => "false",
            Answer::Unknown => "unknown",
        })
    }
}

fn verdict(result: &ChaseResult, q: &ConjunctiveQuery) -> Answer {
    if entails(&result.instance, q) {
        Answer::True
    } else if result.saturated {
        Answer::False
    } else {
        Answer::Unknown
    }
}

/// Certain answer of a Boolean query, decided on a bounded chase. Chase
/// instances only grow, so checking the final prefix suffices.
pub fn certain_answer(q: &ConjunctiveQuery, database: &Instance, sigmas: &[Tgd], depth: usize) -> Answer {
    verdict(&chase(database, sigmas, depth), q)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Consistency {
    Consistent,
    Inconsistent,
    Unknown,
}

impl fmt::Display for Consistency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Consistency::Consistent => "consistent",
            Consistency::Inconsistent => "inconsistent",
            Consistency::Unknown => "unknown",
        })
    }
}

/// Evaluates each constraint body as a Boolean query over the chase.
pub fn check_consistency(database: &Instance, sigmas: &[Tgd], ncs: &[NegativeConstraint], depth: usize) -> Consistency {
    let result = chase(database, sigmas, depth);
    consistency_of(&result, ncs)
}

/// Constraint check against an already computed chase.
pub fn consistency_of(result: &ChaseResult, ncs: &[NegativeConstraint]) -> Consistency {
    let mut all_false = true;
    for nc in ncs {
        match verdict(result, &ConjunctiveQuery::boolean(nc.body.clone())) {
            Answer::True => return Consistency::Inconsistent,
            Answer::False => {}
            Answer::Unknown => all_false = false,
        }
    }
    if all_false {
        Consistency::Consistent
    } else {
        Consistency::Unknown
    }
}

/// Constraints `r(X), r(Y), neq(Xi,Yi) -> false`, where `X` and `Y` agree on
/// the key positions, one per non-key position `i`.
pub fn kd_constraints(kd: &KeyDependency, arity: usize) -> Vec<NegativeConstraint> {
    let xs: Vec<Term> = (1..=arity).map(|i| Term::var(&format!("X{i}"))).collect();
    let ys: Vec<Term> = (1..=arity)
        .map(|i| {
            if kd.key_positions.contains(&i) {
                xs[i - 1].clone()
            } else {
                Term::var(&format!("Y{i}"))
            }
        })
        .collect();
    (1..=arity)
        .filter(|i| !kd.key_positions.contains(i))
        .map(|i| {
            NegativeConstraint::new(
                &format!("key_{}_{i}", kd.predicate),
                vec![
                    Atom::new(&kd.predicate, xs.clone()),
                    Atom::new(&kd.predicate, ys.clone()),
                    Atom::new(NEQ, vec![xs[i - 1].clone(), ys[i - 1].clone()]),
                ],
            )
        })
        .collect()
}

/// True iff `database` satisfies every key dependency.
pub fn check_kds(database: &Instance, kds: &[KeyDependency]) -> bool {
    if kds.is_empty() {
        return true;
    }
    let constants: Vec<Symbol> = database.constants().into_iter().collect();
    let mut with_neq = database.clone();
    for a in &constants {
        for b in &constants {
            if a != b {
                with_neq.insert(Atom::new(NEQ, vec![Term::Const(a.clone()), Term::Const(b.clone())]));
            }
        }
    }
    let saturated = ChaseResult {
        instance: with_neq,
        saturated: true,
        rounds_used: 0,
    };
    kds.iter().all(|kd| {
        let arity = database
            .atoms()
            .iter()
            .find(|a| a.predicate == kd.predicate)
            .map(Atom::arity);
        match arity {
            Some(n) => consistency_of(&saturated, &kd_constraints(kd, n)) == Consistency::Consistent,
            None => true,
        }
    })
}
