//! Perfect UCQ rewriting by alternating factorization and rewriting steps
//! until no new query (modulo variable renaming) appears.
//!
//! Every stored query carries a label: `Rewritten` queries (the input and
//! everything produced by a rewriting step) form the output, while
//! `Factorized` queries only feed further steps. Both kinds are expanded.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::canonical::canonical_form;
use crate::classify::classify;
use crate::error::{Error, Result};
use crate::model::{Atom, ConjunctiveQuery, Schema, Substitution, Symbol, Term};
use crate::optimize::QueryEliminator;
use crate::rules::{NegativeConstraint, Tgd};
use crate::unify::{find_homomorphism, unify};

/// Prefix given to rule variables before they meet query variables.
/// Query variables start with an uppercase letter, so the two never clash.
const RULE_VAR_PREFIX: &str = "_";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteOptions {
    pub factorization: bool,
    pub elimination: bool,
    pub nc_pruning: bool,
    /// Stop after this many rounds even without a fixpoint.
    pub max_rounds: Option<usize>,
    pub trace: bool,
    /// Report queries over auxiliary predicates introduced by normalization.
    pub keep_auxiliary: bool,
}

impl Default for RewriteOptions {
    fn default() -> Self {
        RewriteOptions {
            factorization: true,
            elimination: false,
            nc_pruning: true,
            max_rounds: None,
            trace: false,
            keep_auxiliary: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Factorized = 0,
    Rewritten = 1,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepKind {
    Factorize,
    Rewrite,
}

impl fmt::Display for StepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StepKind::Factorize => "factorize",
            StepKind::Rewrite => "rewrite",
        })
    }
}

/// How an entry was first produced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    pub kind: StepKind,
    pub rule: Symbol,
    pub parent: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteEntry {
    pub query: ConjunctiveQuery,
    pub key: String,
    pub label: Label,
    pub derivation: Option<Derivation>,
}

/// One derivation that added (or relabelled) an entry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceLine {
    pub step: usize,
    pub kind: StepKind,
    pub rule: Symbol,
    pub parent: String,
    pub child: String,
}

impl fmt::Display for TraceLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "step={} kind={} tgd={} parent={} child={}",
            self.step, self.kind, self.rule, self.parent, self.child
        )
    }
}

/// The labelled query set, deduplicated by canonical form.
#[derive(Clone, Debug, Default)]
pub struct RewriteState {
    entries: Vec<RewriteEntry>,
    index: HashMap<String, usize>,
    pub rounds: usize,
}

impl RewriteState {
    pub fn entries(&self) -> &[RewriteEntry] {
        &self.entries
    }

    pub fn get(&self, key: &str) -> Option<&RewriteEntry> {
        self.index.get(key).map(|&i| &self.entries[i])
    }

    fn push(&mut self, entry: RewriteEntry) -> usize {
        let id = self.entries.len();
        self.index.insert(entry.key.clone(), id);
        self.entries.push(entry);
        id
    }

    /// Chain of derivations leading to entry `id`, newest first.
    pub fn provenance(&self, id: usize) -> Vec<&Derivation> {
        let mut out = Vec::new();
        let mut current = id;
        while let Some(d) = &self.entries[current].derivation {
            out.push(d);
            current = d.parent;
        }
        out
    }
}

/// Result of a rewriting run.
#[derive(Clone, Debug)]
pub struct Rewriting {
    /// Output queries in canonical-form order.
    pub queries: Vec<ConjunctiveQuery>,
    /// False when the round bound stopped the fixpoint early.
    pub complete: bool,
    pub state: RewriteState,
    pub trace: Vec<TraceLine>,
}

impl Rewriting {
    pub fn len(&self) -> usize {
        self.queries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queries.is_empty()
    }

    /// State indices of the reported queries, in output order.
    pub fn output_ids(&self) -> Vec<usize> {
        self.queries
            .iter()
            .filter_map(|q| self.state.index.get(&canonical_form(q)).copied())
            .collect()
    }
}

/// Fresh variable names `V1, V2, ...`, counted across one rewriting run.
#[derive(Clone, Debug, Default)]
pub struct FreshVars {
    next: usize,
}

impl FreshVars {
    pub fn fresh(&mut self, avoid: &BTreeSet<Symbol>) -> Symbol {
        loop {
            self.next += 1;
            let name: Symbol = Arc::from(format!("V{}", self.next).as_str());
            if !avoid.contains(&name) {
                return name;
            }
        }
    }
}

fn blocked_at_existential(shared: &BTreeSet<Symbol>, sigma: &Tgd, atoms: &[&Atom]) -> bool {
    let Some(pos) = sigma.existential_position() else {
        return false;
    };
    atoms.iter().any(|a| match a.term_at(&pos) {
        Some(Term::Const(_)) | Some(Term::Null(_)) => true,
        Some(Term::Var(v)) => shared.contains(v),
        None => false,
    })
}

/// Can `sigma` rewrite the atoms `subset` of `q`? The subset together with
/// the rule head must unify, and no atom may carry a constant or shared
/// variable at the rule's existential position.
pub fn is_applicable(sigma: &Tgd, subset: &[Atom], q: &ConjunctiveQuery) -> bool {
    if subset.is_empty() || sigma.head.len() != 1 {
        return false;
    }
    let shared = q.shared_variables();
    let atoms: Vec<&Atom> = subset.iter().collect();
    if blocked_at_existential(&shared, sigma, &atoms) {
        return false;
    }
    let renamed = sigma.renamed(RULE_VAR_PREFIX);
    unify(subset.iter().chain(std::iter::once(renamed.head_atom()))).is_some()
}

/// Every factorizable subset of `q` with respect to `sigma`, one per
/// candidate variable, in canonical body order of that variable's first
/// occurrence.
pub fn factorizable_sets(q: &ConjunctiveQuery, sigma: &Tgd) -> Vec<Vec<Atom>> {
    let Some(pos) = sigma.existential_position() else {
        return Vec::new();
    };
    let head_vars: BTreeSet<&Symbol> = q.head.iter().filter_map(Term::as_var).collect();
    let mut candidates: Vec<&Symbol> = Vec::new();
    for a in q.body() {
        if let Some(Term::Var(v)) = a.term_at(&pos) {
            if !candidates.contains(&v) {
                candidates.push(v);
            }
        }
    }
    let mut out = Vec::new();
    for v in candidates {
        if head_vars.contains(v) {
            continue;
        }
        let term = Term::Var(v.clone());
        let holders: Vec<&Atom> = q.body().iter().filter(|a| a.args.contains(&term)).collect();
        if holders.len() < 2 {
            continue;
        }
        let only_at_pos = holders
            .iter()
            .all(|a| a.predicate == pos.predicate && a.positions_of(&term) == [pos.index]);
        if only_at_pos && unify(holders.iter().copied()).is_some() {
            out.push(holders.into_iter().cloned().collect());
        }
    }
    out
}

/// The first factorizable subset, if any.
pub fn factorizable_set(q: &ConjunctiveQuery, sigma: &Tgd) -> Option<Vec<Atom>> {
    factorizable_sets(q, sigma).into_iter().next()
}

fn apply_unifier(q: &ConjunctiveQuery, set: &[Atom]) -> ConjunctiveQuery {
    match unify(set) {
        Some(m) => m.apply_query(q),
        None => q.clone(),
    }
}

/// Applies the unifier of the first factorizable set, or returns `q`.
pub fn factorize(q: &ConjunctiveQuery, sigma: &Tgd) -> ConjunctiveQuery {
    match factorizable_set(q, sigma) {
        Some(set) => apply_unifier(q, &set),
        None => q.clone(),
    }
}

/// Replaces `subset` by the body of `sigma` and applies the unifier of
/// `subset` and the rule head to the whole query. Rule variables left over
/// afterwards get fresh names. Returns `None` if the atoms do not unify.
pub fn rewrite_step(
    q: &ConjunctiveQuery,
    subset: &[Atom],
    sigma: &Tgd,
    fresh: &mut FreshVars,
) -> Option<ConjunctiveQuery> {
    let renamed = sigma.renamed(RULE_VAR_PREFIX);
    let gamma = unify(subset.iter().chain(std::iter::once(renamed.head_atom())))?;
    let mut body: Vec<Atom> = q.body().iter().filter(|a| !subset.contains(a)).cloned().collect();
    body.extend(renamed.body.iter().cloned());
    let replaced = ConjunctiveQuery::with_symbol(q.head_predicate.clone(), q.head.clone(), body);
    let unified = gamma.apply_query(&replaced);

    let mut avoid = unified.variables();
    let mut rename = Substitution::identity();
    let leftovers: Vec<Symbol> = avoid
        .iter()
        .filter(|v| v.starts_with(RULE_VAR_PREFIX))
        .cloned()
        .collect();
    for v in leftovers {
        let name = fresh.fresh(&avoid);
        avoid.insert(name.clone());
        rename.bind(v, Term::Var(name));
    }
    Some(rename.apply_query(&unified))
}

/// True if some constraint body maps into the body of `q`.
pub fn prune_by_ncs(q: &ConjunctiveQuery, ncs: &[NegativeConstraint]) -> bool {
    ncs.iter().any(|nc| find_homomorphism(&nc.body, q.body()).is_some())
}

/// Nonempty subsets of `atoms` in order of increasing size, then
/// lexicographic index order.
fn subsets_by_size(atoms: &[&Atom]) -> Vec<Vec<Atom>> {
    let n = atoms.len();
    let mut out: Vec<Vec<usize>> = Vec::new();
    fn combos(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            combos(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    for k in 1..=n {
        combos(0, n, k, &mut Vec::new(), &mut out);
    }
    out.into_iter()
        .map(|idx| idx.into_iter().map(|i| atoms[i].clone()).collect())
        .collect()
}

/// A configured rewriting engine over a normalized rule set.
pub struct Rewriter {
    sigmas: Vec<Tgd>,
    ncs: Vec<NegativeConstraint>,
    schema: Schema,
    options: RewriteOptions,
    eliminator: Option<QueryEliminator>,
}

impl Rewriter {
    /// Fails when a rule is not normalized, when elimination is requested for
    /// non-linear rules, or when the rules carry no termination guarantee and
    /// no round bound is given.
    pub fn new(sigmas: &[Tgd], ncs: &[NegativeConstraint], schema: &Schema, options: RewriteOptions) -> Result<Self> {
        if let Some(s) = sigmas.iter().find(|s| !s.is_normal()) {
            return Err(Error::NotNormalized {
                rule: s.name.to_string(),
            });
        }
        if options.max_rounds.is_none() {
            let report = classify(sigmas);
            if !report.terminates() {
                let detail = report
                    .linear
                    .violations
                    .iter()
                    .chain(&report.sticky.violations)
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join("; ");
                return Err(Error::NoTerminationGuarantee { detail });
            }
        }
        let eliminator = if options.elimination {
            Some(QueryEliminator::new(sigmas, schema)?)
        } else {
            None
        };
        Ok(Rewriter {
            sigmas: sigmas.to_vec(),
            ncs: ncs.to_vec(),
            schema: schema.clone(),
            options,
            eliminator,
        })
    }

    pub fn options(&self) -> &RewriteOptions {
        &self.options
    }

    fn reduce(&self, q: ConjunctiveQuery) -> ConjunctiveQuery {
        match &self.eliminator {
            Some(el) => el.eliminate(&q),
            None => q,
        }
    }

    fn pruned(&self, q: &ConjunctiveQuery) -> bool {
        self.options.nc_pruning && prune_by_ncs(q, &self.ncs)
    }

    fn mentions_auxiliary(&self, q: &ConjunctiveQuery) -> bool {
        q.body().iter().any(|a| self.schema.is_auxiliary(&a.predicate))
    }

    pub fn rewrite(&self, q: &ConjunctiveQuery) -> Rewriting {
        let mut state = RewriteState::default();
        let mut trace = Vec::new();
        let mut fresh = FreshVars::default();
        let start = self.reduce(q.clone());
        if self.pruned(&start) {
            return Rewriting {
                queries: Vec::new(),
                complete: true,
                state,
                trace,
            };
        }
        let key = canonical_form(&start);
        let mut frontier = vec![state.push(RewriteEntry {
            query: start,
            key,
            label: Label::Rewritten,
            derivation: None,
        })];
        let mut step = 0usize;
        let complete = loop {
            if frontier.is_empty() {
                break true;
            }
            if self.options.max_rounds.is_some_and(|max| state.rounds >= max) {
                break false;
            }
            state.rounds += 1;
            let mut next = Vec::new();
            for parent in frontier {
                let q = state.entries[parent].query.clone();
                let mut record = |state: &mut RewriteState,
                                  child: ConjunctiveQuery,
                                  kind: StepKind,
                                  rule: &Symbol,
                                  next: &mut Vec<usize>| {
                    let child = self.reduce(child);
                    if self.pruned(&child) {
                        return;
                    }
                    let key = canonical_form(&child);
                    let derivation = Derivation {
                        kind,
                        rule: rule.clone(),
                        parent,
                    };
                    let changed = match (state.index.get(&key).copied(), kind) {
                        (None, _) => {
                            let label = match kind {
                                StepKind::Factorize => Label::Factorized,
                                StepKind::Rewrite => Label::Rewritten,
                            };
                            next.push(state.push(RewriteEntry {
                                query: child,
                                key: key.clone(),
                                label,
                                derivation: Some(derivation),
                            }));
                            true
                        }
                        (Some(id), StepKind::Rewrite) if state.entries[id].label == Label::Factorized => {
                            state.entries[id].label = Label::Rewritten;
                            true
                        }
                        _ => false,
                    };
                    if changed && self.options.trace {
                        step += 1;
                        trace.push(TraceLine {
                            step,
                            kind,
                            rule: rule.clone(),
                            parent: state.entries[parent].key.clone(),
                            child: key,
                        });
                    }
                };

                if self.options.factorization {
                    for sigma in &self.sigmas {
                        for set in factorizable_sets(&q, sigma) {
                            record(
                                &mut state,
                                apply_unifier(&q, &set),
                                StepKind::Factorize,
                                &sigma.name,
                                &mut next,
                            );
                        }
                    }
                }
                for sigma in &self.sigmas {
                    let head = sigma.head_atom();
                    let candidates: Vec<&Atom> = q
                        .body()
                        .iter()
                        .filter(|a| a.predicate == head.predicate && a.arity() == head.arity())
                        .collect();
                    for subset in subsets_by_size(&candidates) {
                        if !is_applicable(sigma, &subset, &q) {
                            continue;
                        }
                        if let Some(child) = rewrite_step(&q, &subset, sigma, &mut fresh) {
                            record(&mut state, child, StepKind::Rewrite, &sigma.name, &mut next);
                        }
                    }
                }
            }
            frontier = next;
        };

        let mut queries: Vec<(String, ConjunctiveQuery)> = state
            .entries
            .iter()
            .filter(|e| e.label == Label::Rewritten)
            .filter(|e| self.options.keep_auxiliary || !self.mentions_auxiliary(&e.query))
            .map(|e| (e.key.clone(), e.query.clone()))
            .collect();
        queries.sort_by(|a, b| a.0.cmp(&b.0));
        Rewriting {
            queries: queries.into_iter().map(|(_, q)| q).collect(),
            complete,
            state,
            trace,
        }
    }
}

/// One-shot rewriting of `q` under normalized `sigmas` and constraints `ncs`.
pub fn rewrite(
    q: &ConjunctiveQuery,
    sigmas: &[Tgd],
    ncs: &[NegativeConstraint],
    schema: &Schema,
    options: RewriteOptions,
) -> Result<Rewriting> {
    Ok(Rewriter::new(sigmas, ncs, schema, options)?.rewrite(q))
}
