//! Query elimination for linear rule sets.
//!
//! An atom `a` covers an atom `b` of the same query when chasing `a` alone
//! through some chain of rules yields an atom onto which `b` maps while every
//! shared variable and constant of `b` stays fixed. Covered atoms are implied
//! by their cover in every model of the rules, so they can be dropped.
//!
//! Coverage is decided by chasing `a` symbolically along one rule chain at a
//! time. Each chain step is exactly an equality-type inclusion between the
//! previous atom and the next rule body, and each carried term follows an edge
//! of the dependency graph, so a successful chain witnesses the path condition
//! for all shared terms at once.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;

use crate::error::{Error, Result};
use crate::model::{Atom, ConjunctiveQuery, Position, Schema, Substitution, Symbol, Term};
use crate::rules::Tgd;
use crate::unify::AtomIndex;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub from: Position,
    pub to: Position,
    pub rule: Symbol,
}

/// Positions of the schema with one edge per rule and propagated variable
/// slot pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DependencyGraph {
    pub nodes: Vec<Position>,
    pub edges: Vec<Edge>,
}

impl DependencyGraph {
    pub fn successors<'a>(&'a self, from: &'a Position) -> impl Iterator<Item = &'a Edge> {
        self.edges.iter().filter(move |e| &e.from == from)
    }
}

impl fmt::Display for DependencyGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.edges {
            writeln!(f, "{} -> {} [{}]", e.from, e.to, e.rule)?;
        }
        Ok(())
    }
}

pub fn build_dependency_graph(sigmas: &[Tgd], schema: &Schema) -> DependencyGraph {
    let mut nodes: BTreeSet<Position> = schema.positions().into_iter().collect();
    let mut edges = BTreeSet::new();
    for sigma in sigmas {
        for b in &sigma.body {
            for (i, bt) in b.args.iter().enumerate() {
                if !bt.is_var() {
                    continue;
                }
                for h in &sigma.head {
                    for (j, ht) in h.args.iter().enumerate() {
                        if ht == bt {
                            let from = Position {
                                predicate: b.predicate.clone(),
                                index: i + 1,
                            };
                            let to = Position {
                                predicate: h.predicate.clone(),
                                index: j + 1,
                            };
                            nodes.insert(from.clone());
                            nodes.insert(to.clone());
                            edges.insert(Edge {
                                from,
                                to,
                                rule: sigma.name.clone(),
                            });
                        }
                    }
                }
            }
        }
    }
    DependencyGraph {
        nodes: nodes.into_iter().collect(),
        edges: edges.into_iter().collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Equality {
    /// `r[i] = r[j]` with `i < j`.
    Positions(Position, Position),
    /// `r[i] = c`.
    Constant(Position, Symbol),
}

impl fmt::Display for Equality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Equality::Positions(a, b) => write!(f, "{a}={b}"),
            Equality::Constant(p, c) => write!(f, "{p}={}", Term::Const(c.clone())),
        }
    }
}

pub type EqualitySet = BTreeSet<Equality>;

pub fn equality_type(atom: &Atom) -> EqualitySet {
    let pos = |i: usize| Position {
        predicate: atom.predicate.clone(),
        index: i + 1,
    };
    let mut out = EqualitySet::new();
    for (i, ti) in atom.args.iter().enumerate() {
        match ti {
            Term::Const(c) => {
                out.insert(Equality::Constant(pos(i), c.clone()));
            }
            _ => {
                for (j, tj) in atom.args.iter().enumerate().skip(i + 1) {
                    if ti == tj {
                        out.insert(Equality::Positions(pos(i), pos(j)));
                    }
                }
            }
        }
    }
    out
}

/// Replaces nulls by their order of first appearance, so chase states that
/// differ only in null names compare equal.
fn state_key(atom: &Atom) -> Atom {
    let mut seen: Vec<u64> = Vec::new();
    let args = atom
        .args
        .iter()
        .map(|t| match t {
            Term::Null(n) => {
                let idx = seen.iter().position(|m| m == n).unwrap_or_else(|| {
                    seen.push(*n);
                    seen.len() - 1
                });
                Term::Null(idx as u64)
            }
            other => other.clone(),
        })
        .collect();
    Atom {
        predicate: atom.predicate.clone(),
        args,
    }
}

/// Coverage and elimination against a fixed linear, normalized rule set.
pub struct QueryEliminator {
    sigmas: Vec<Tgd>,
    graph: DependencyGraph,
    chain_bound: usize,
    /// `follows[i]` lists the rules whose body equality type is contained
    /// in the equality type of rule `i`'s head.
    follows: Vec<BTreeSet<usize>>,
}

fn follow_table(sigmas: &[Tgd]) -> Vec<BTreeSet<usize>> {
    sigmas
        .iter()
        .map(|prev| {
            let head = prev.head_atom();
            let eq = equality_type(head);
            sigmas
                .iter()
                .enumerate()
                .filter(|(_, next)| {
                    let body = &next.body[0];
                    body.predicate == head.predicate
                        && body.arity() == head.arity()
                        && equality_type(body).is_subset(&eq)
                })
                .map(|(j, _)| j)
                .collect()
        })
        .collect()
}

impl QueryEliminator {
    pub fn new(sigmas: &[Tgd], schema: &Schema) -> Result<Self> {
        if let Some(s) = sigmas.iter().find(|s| !s.is_linear()) {
            return Err(Error::EliminationRequiresLinear {
                rule: s.name.to_string(),
                body_atoms: s.body.len(),
            });
        }
        if let Some(s) = sigmas.iter().find(|s| !s.is_normal()) {
            return Err(Error::NotNormalized {
                rule: s.name.to_string(),
            });
        }
        let mut schema = schema.clone();
        for s in sigmas {
            for a in s.atoms() {
                if schema.arity(&a.predicate).is_none() {
                    schema.declare_auxiliary(&a.predicate, a.arity());
                }
            }
        }
        let graph = build_dependency_graph(sigmas, &schema);
        let chain_bound = graph.nodes.len().max(1);
        Ok(QueryEliminator {
            sigmas: sigmas.to_vec(),
            graph,
            chain_bound,
            follows: follow_table(sigmas),
        })
    }

    pub fn graph(&self) -> &DependencyGraph {
        &self.graph
    }

    /// Does `a` cover `b` within `q`?
    pub fn covers(&self, a: &Atom, b: &Atom, q: &ConjunctiveQuery) -> bool {
        if a == b {
            return false;
        }
        let shared = q.shared_variables();
        let fixed: Vec<&Symbol> = b.variables().filter(|v| shared.contains(*v)).collect();
        let a_terms: HashSet<&Term> = a.args.iter().collect();
        let carries_fixed_terms = b
            .args
            .iter()
            .filter(|t| t.is_const() || t.as_var().is_some_and(|v| shared.contains(v)))
            .all(|t| a_terms.contains(t));
        if !carries_fixed_terms {
            return false;
        }
        let mut seed = Substitution::identity();
        for v in fixed {
            seed.bind(v.clone(), Term::Var(v.clone()));
        }
        self.chain_reaches(a, b, &seed)
    }

    /// Breadth-first search over chains `a, σ1(a), σ2(σ1(a)), ...` for an
    /// atom that `target` maps into with `seed` fixed. After the first step a
    /// rule may only follow another if its body equality type is contained
    /// in the previous head's, so equalities that hold by accident in `a`
    /// are not carried along the chain.
    fn chain_reaches(&self, start: &Atom, target: &Atom, seed: &Substitution) -> bool {
        let mut next_null = 0u64;
        let mut visited: HashSet<(Atom, Option<usize>)> = HashSet::new();
        let mut queue: VecDeque<(Atom, Option<usize>, usize)> = VecDeque::new();
        visited.insert((state_key(start), None));
        queue.push_back((start.clone(), None, 0));
        let source = std::slice::from_ref(target);
        while let Some((state, previous, depth)) = queue.pop_front() {
            if depth >= self.chain_bound {
                continue;
            }
            let index = AtomIndex::new(std::iter::once(&state));
            for (i, sigma) in self.sigmas.iter().enumerate() {
                if previous.is_some_and(|p| !self.follows[p].contains(&i)) {
                    continue;
                }
                let Some(mut h) = index.extend(&sigma.body, &Substitution::identity()) else {
                    continue;
                };
                for z in sigma.existentials() {
                    next_null += 1;
                    h.bind(z, Term::Null(next_null));
                }
                let derived = h.apply_atom(sigma.head_atom());
                if AtomIndex::new(std::iter::once(&derived)).extend(source, seed).is_some() {
                    return true;
                }
                if visited.insert((state_key(&derived), Some(i))) {
                    queue.push_back((derived, Some(i), depth + 1));
                }
            }
        }
        false
    }

    /// `cover[i]` holds the indices of body atoms covering body atom `i`.
    pub fn cover_sets(&self, q: &ConjunctiveQuery) -> Vec<BTreeSet<usize>> {
        let body = q.body();
        (0..body.len())
            .map(|i| {
                (0..body.len())
                    .filter(|&j| j != i && self.covers(&body[j], &body[i], q))
                    .collect()
            })
            .collect()
    }

    /// Indices of body atoms removed when visiting atoms in `strategy`
    /// order (a permutation of body indices).
    pub fn eliminated(&self, q: &ConjunctiveQuery, strategy: &[usize]) -> BTreeSet<usize> {
        let mut cover = self.cover_sets(q);
        let mut removed = BTreeSet::new();
        for &i in strategy {
            if cover[i].is_empty() {
                continue;
            }
            removed.insert(i);
            for (j, c) in cover.iter_mut().enumerate() {
                if !removed.contains(&j) {
                    c.remove(&i);
                }
            }
        }
        removed
    }

    /// `q` without the atoms eliminated under the canonical (sorted body)
    /// strategy.
    pub fn eliminate(&self, q: &ConjunctiveQuery) -> ConjunctiveQuery {
        let strategy: Vec<usize> = (0..q.body().len()).collect();
        let removed = self.eliminated(q, &strategy);
        if removed.is_empty() {
            return q.clone();
        }
        let kept = q
            .body()
            .iter()
            .enumerate()
            .filter(|(i, _)| !removed.contains(i))
            .map(|(_, a)| a.clone())
            .collect();
        q.with_body(kept)
    }
}

/// Coverage test against an explicit rule set and its dependency graph.
pub fn covers(a: &Atom, b: &Atom, q: &ConjunctiveQuery, sigmas: &[Tgd], graph: &DependencyGraph) -> bool {
    let eliminator = QueryEliminator {
        sigmas: sigmas.to_vec(),
        graph: graph.clone(),
        chain_bound: graph.nodes.len().max(1),
        follows: follow_table(sigmas),
    };
    eliminator.covers(a, b, q)
}

/// Drops covered atoms from `q` under the canonical elimination strategy.
pub fn eliminate(q: &ConjunctiveQuery, sigmas: &[Tgd], schema: &Schema) -> Result<ConjunctiveQuery> {
    Ok(QueryEliminator::new(sigmas, schema)?.eliminate(q))
}
