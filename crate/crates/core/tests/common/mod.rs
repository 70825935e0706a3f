//! Random generators and chase-based oracles shared by the integration
//! suites. Every verdict here is computed by brute force (bounded chase plus
//! homomorphism search), independently of the rewriting code.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::ops::ControlFlow;

use ontorew::unify::AtomIndex;
use ontorew::{chase, normalize, Atom, ConjunctiveQuery, Instance, Schema, Substitution, Term, Tgd};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const PREDICATES: [&str; 4] = ["p", "r", "s", "t"];
pub const CONSTANTS: [&str; 3] = ["a", "b", "c"];
pub const VARIABLES: [&str; 4] = ["A", "B", "C", "D"];

pub fn parse_file(path: &str) -> ontorew::Program {
    let full = format!("{}/{path}", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&full).unwrap_or_else(|e| panic!("{full}: {e}"));
    ontorew::parse_program(&text).unwrap()
}

/// Random arities for the four predicates, each in `1..=3`.
pub fn random_signature(rng: &mut ChaCha8Rng) -> Vec<(&'static str, usize)> {
    let n = rng.gen_range(2..=PREDICATES.len());
    PREDICATES[..n].iter().map(|p| (*p, rng.gen_range(1..=3))).collect()
}

fn random_rule_atom(rng: &mut ChaCha8Rng, pred: (&str, usize), pool: &[&str]) -> Atom {
    let args = (0..pred.1).map(|_| Term::var(pool.choose(rng).unwrap())).collect();
    Atom::new(pred.0, args)
}

/// A linear rule. Head terms are body variables or fresh existential
/// variables; at most `max_existentials` distinct existentials appear and
/// the body occasionally carries a constant.
pub fn random_linear_rule(
    rng: &mut ChaCha8Rng,
    sig: &[(&'static str, usize)],
    name: &str,
    max_existentials: usize,
    max_heads: usize,
) -> Tgd {
    let body_pred = *sig.choose(rng).unwrap();
    let mut body = random_rule_atom(rng, body_pred, &["X", "Y", "W"]);
    if rng.gen_bool(0.1) {
        let i = rng.gen_range(0..body.arity());
        body.args[i] = Term::constant(CONSTANTS.choose(rng).unwrap());
    }
    let body_vars: Vec<String> = body.variables().map(|v| v.to_string()).collect();
    let existentials: Vec<String> = (1..=rng.gen_range(0..=max_existentials))
        .map(|i| format!("Z{i}"))
        .collect();
    let heads = rng.gen_range(1..=max_heads);
    let mut head = Vec::new();
    for _ in 0..heads {
        let pred = *sig.choose(rng).unwrap();
        let args = (0..pred.1)
            .map(|_| {
                let use_existential = !existentials.is_empty() && (body_vars.is_empty() || rng.gen_bool(0.35));
                if use_existential {
                    Term::var(existentials.choose(rng).unwrap())
                } else if body_vars.is_empty() {
                    Term::constant(CONSTANTS.choose(rng).unwrap())
                } else {
                    Term::var(body_vars.choose(rng).unwrap())
                }
            })
            .collect();
        head.push(Atom::new(pred.0, args));
    }
    Tgd::new(name, vec![body], head)
}

/// Up to six linear single-head rules with at most two existentials each.
pub fn random_linear_ontology(rng: &mut ChaCha8Rng, sig: &[(&'static str, usize)]) -> Vec<Tgd> {
    let n = rng.gen_range(1..=6);
    (1..=n)
        .map(|i| random_linear_rule(rng, sig, &format!("s{i}"), 2, 1))
        .collect()
}

/// Up to six linear rules with up to three head atoms and three existentials.
pub fn random_multi_head_ontology(rng: &mut ChaCha8Rng, sig: &[(&'static str, usize)]) -> Vec<Tgd> {
    let n = rng.gen_range(1..=6);
    (1..=n)
        .map(|i| random_linear_rule(rng, sig, &format!("s{i}"), 3, 3))
        .collect()
}

pub fn random_database(rng: &mut ChaCha8Rng, sig: &[(&'static str, usize)], max_atoms: usize) -> Instance {
    let n = rng.gen_range(0..=max_atoms);
    Instance::from_atoms((0..n).map(|_| {
        let (p, k) = *sig.choose(rng).unwrap();
        Atom::new(
            p,
            (0..k).map(|_| Term::constant(CONSTANTS.choose(rng).unwrap())).collect(),
        )
    }))
}

pub fn random_query_atom(rng: &mut ChaCha8Rng, sig: &[(&'static str, usize)]) -> Atom {
    let (p, k) = *sig.choose(rng).unwrap();
    let args = (0..k)
        .map(|_| {
            if rng.gen_bool(0.1) {
                Term::constant(CONSTANTS.choose(rng).unwrap())
            } else {
                Term::var(VARIABLES.choose(rng).unwrap())
            }
        })
        .collect();
    Atom::new(p, args)
}

pub fn random_bcq(rng: &mut ChaCha8Rng, sig: &[(&'static str, usize)], max_atoms: usize) -> ConjunctiveQuery {
    let n = rng.gen_range(1..=max_atoms);
    ConjunctiveQuery::boolean((0..n).map(|_| random_query_atom(rng, sig)).collect())
}

pub fn schema_of(sig: &[(&'static str, usize)]) -> Schema {
    let mut schema = Schema::new();
    for (p, k) in sig {
        schema.declare(p, *k).unwrap();
    }
    schema
}

/// True iff some CQ of `ucq` maps into `db`.
pub fn ucq_holds(ucq: &[ConjunctiveQuery], db: &Instance) -> bool {
    ucq.iter().any(|q| ontorew::entails(db, q))
}

/// Null-free head tuples of all homomorphisms of `q` into `instance`.
pub fn answers(q: &ConjunctiveQuery, instance: &Instance) -> BTreeSet<Vec<Term>> {
    let index = AtomIndex::new(instance.atoms());
    let mut out = BTreeSet::new();
    index.for_each(q.body(), &Substitution::identity(), |h| {
        let tuple: Vec<Term> = q.head.iter().map(|t| h.apply_term(t)).collect();
        if !tuple.iter().any(Term::is_null) {
            out.insert(tuple);
        }
        ControlFlow::Continue(())
    });
    out
}

pub fn ucq_answers(ucq: &[ConjunctiveQuery], db: &Instance) -> BTreeSet<Vec<Term>> {
    ucq.iter().flat_map(|q| answers(q, db)).collect()
}

/// Chase verdict for a Boolean query, or `None` when the chase did not
/// saturate within `depth` rounds.
pub fn chase_verdict(db: &Instance, rules: &[Tgd], q: &ConjunctiveQuery, depth: usize) -> Option<bool> {
    let result = chase::chase_bounded(db, rules, depth, 2000);
    result.saturated.then(|| ontorew::entails(&result.instance, q))
}

/// Normalizes and returns rules plus the extended schema.
pub fn normalized(rules: &[Tgd], sig: &[(&'static str, usize)]) -> (Vec<Tgd>, Schema) {
    normalize(rules, &schema_of(sig))
}
