//! Rewrites arbitrary rule sets into single-head rules with at most one
//! existential variable occurring once, introducing auxiliary predicates.
//!
//! Auxiliary predicates are named `_aux_<rule>_<step>`, where `<rule>` is the
//! 1-based index of the originating rule. Step `0` is the head-splitting
//! predicate and steps `1..=m` are the existential chain. User predicates
//! cannot start with `_`, so these never collide with the input schema.

use std::sync::Arc;

use crate::model::{Atom, Schema, Symbol, Term};
use crate::rules::Tgd;

fn aux_name(schema: &Schema, rule: usize, step: usize) -> String {
    let base = format!("_aux_{rule}_{step}");
    if schema.arity(&base).is_none() {
        return base;
    }
    (1..)
        .map(|n| format!("{base}_{n}"))
        .find(|n| schema.arity(n).is_none())
        .expect("unbounded suffix search")
}

fn var_atom(predicate: &str, vars: &[Symbol]) -> Atom {
    Atom::new(predicate, vars.iter().map(|v| Term::Var(v.clone())).collect())
}

fn derived_name(base: &Symbol, n: usize) -> String {
    format!("{base}/{n}")
}

fn split_heads_of(sigma: &Tgd, rule: usize, schema: &mut Schema) -> Vec<Tgd> {
    if sigma.head.len() <= 1 {
        return vec![sigma.clone()];
    }
    let vars = sigma.head_variables();
    let aux = aux_name(schema, rule, 0);
    schema.declare_auxiliary(&aux, vars.len());
    let link = var_atom(&aux, &vars);
    let mut out = vec![Tgd {
        name: Arc::from(derived_name(&sigma.name, 0).as_str()),
        body: sigma.body.clone(),
        head: vec![link.clone()],
    }];
    for (i, a) in sigma.head.iter().enumerate() {
        out.push(Tgd {
            name: Arc::from(derived_name(&sigma.name, i + 1).as_str()),
            body: vec![link.clone()],
            head: vec![a.clone()],
        });
    }
    out
}

fn split_existentials_of(sigma: &Tgd, rule: usize, schema: &mut Schema) -> Vec<Tgd> {
    let existentials = sigma.existentials();
    let needs_chain = match existentials.as_slice() {
        [] => false,
        [z] => {
            sigma
                .head
                .iter()
                .map(|a| a.positions_of(&Term::Var(z.clone())).len())
                .sum::<usize>()
                > 1
        }
        _ => true,
    };
    if !needs_chain || sigma.head.len() != 1 {
        return vec![sigma.clone()];
    }
    let mut carried = sigma.frontier();
    let mut out = Vec::new();
    let mut previous: Vec<Atom> = sigma.body.clone();
    for (step, z) in existentials.iter().enumerate() {
        carried.push(z.clone());
        let aux = aux_name(schema, rule, step + 1);
        schema.declare_auxiliary(&aux, carried.len());
        let next = var_atom(&aux, &carried);
        out.push(Tgd {
            name: Arc::from(derived_name(&sigma.name, step + 1).as_str()),
            body: previous,
            head: vec![next.clone()],
        });
        previous = vec![next];
    }
    out.push(Tgd {
        name: Arc::from(derived_name(&sigma.name, existentials.len() + 1).as_str()),
        body: previous,
        head: sigma.head.clone(),
    });
    out
}

/// Replaces every multi-head rule `body -> a1,...,ak` by
/// `body -> r(X)` and `r(X) -> ai`, where `X` are the head variables.
pub fn split_heads(sigmas: &[Tgd], schema: &Schema) -> (Vec<Tgd>, Schema) {
    let mut schema = schema.clone();
    let out = sigmas
        .iter()
        .enumerate()
        .flat_map(|(i, s)| split_heads_of(s, i + 1, &mut schema))
        .collect();
    (out, schema)
}

/// Replaces single-head rules with several existential variables (or one
/// repeated existential) by a chain of auxiliary rules, each introducing one
/// existential slot.
pub fn split_existentials(sigmas: &[Tgd], schema: &Schema) -> (Vec<Tgd>, Schema) {
    let mut schema = schema.clone();
    let out = sigmas
        .iter()
        .enumerate()
        .flat_map(|(i, s)| split_existentials_of(s, i + 1, &mut schema))
        .collect();
    (out, schema)
}

/// Head splitting followed by existential splitting, rule by rule, so
/// auxiliary names carry the index of the user rule they came from.
pub fn normalize(sigmas: &[Tgd], schema: &Schema) -> (Vec<Tgd>, Schema) {
    let mut schema = schema.clone();
    let mut out = Vec::new();
    for (i, sigma) in sigmas.iter().enumerate() {
        for single in split_heads_of(sigma, i + 1, &mut schema) {
            out.extend(split_existentials_of(&single, i + 1, &mut schema));
        }
    }
    (out, schema)
}

pub fn is_normalized(sigmas: &[Tgd]) -> bool {
    sigmas.iter().all(Tgd::is_normal)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom(p: &str, vars: &[&str]) -> Atom {
        Atom::new(p, vars.iter().map(|v| Term::var(v)).collect())
    }

    fn render(rules: &[Tgd]) -> Vec<String> {
        rules.iter().map(|r| r.to_string()).collect()
    }

    #[test]
    fn multi_head_rule_is_split() {
        let s = Tgd::new(
            "s",
            vec![atom("p", &["X"])],
            vec![atom("t", &["X", "Z"]), atom("s", &["Z"])],
        );
        let (out, schema) = split_heads(&[s], &Schema::new());
        assert_eq!(
            render(&out),
            [
                "s/0: p(X) -> _aux_1_0(X,Z).",
                "s/1: _aux_1_0(X,Z) -> t(X,Z).",
                "s/2: _aux_1_0(X,Z) -> s(Z).",
            ]
        );
        assert!(schema.is_auxiliary("_aux_1_0"));
        assert!(is_normalized(&out));
    }

    #[test]
    fn single_head_rule_passes_through_head_split() {
        let s = Tgd::new("s", vec![atom("p", &["X"])], vec![atom("t", &["X", "Z"])]);
        let (out, _) = split_heads(std::slice::from_ref(&s), &Schema::new());
        assert_eq!(out, vec![s]);
    }

    #[test]
    fn two_existentials_become_a_chain() {
        let s = Tgd::new("s", vec![atom("p", &["X"])], vec![atom("t", &["X", "Z1", "Z2"])]);
        let (out, _) = split_existentials(&[s], &Schema::new());
        assert_eq!(
            render(&out),
            [
                "s/1: p(X) -> _aux_1_1(X,Z1).",
                "s/2: _aux_1_1(X,Z1) -> _aux_1_2(X,Z1,Z2).",
                "s/3: _aux_1_2(X,Z1,Z2) -> t(X,Z1,Z2).",
            ]
        );
        assert!(is_normalized(&out));
    }

    #[test]
    fn repeated_existential_is_chained() {
        let s = Tgd::new("s", vec![atom("p", &["X"])], vec![atom("t", &["X", "Z", "Z"])]);
        let (out, _) = split_existentials(&[s], &Schema::new());
        assert_eq!(out.len(), 2);
        assert!(is_normalized(&out));
    }

    #[test]
    fn normal_and_full_rules_are_unchanged() {
        let s1 = Tgd::new("s1", vec![atom("s", &["X"])], vec![atom("t", &["X", "X", "Z"])]);
        let full = Tgd::new("f", vec![atom("r", &["X", "Y"])], vec![atom("s", &["Y", "X"])]);
        let input = vec![s1, full];
        let (out, schema) = normalize(&input, &Schema::new());
        assert_eq!(out, input);
        assert_eq!(schema, Schema::new());
    }

    #[test]
    fn multi_head_multi_existential_is_fully_normalized() {
        let s = Tgd::new(
            "s",
            vec![atom("p", &["X"])],
            vec![atom("t", &["X", "Z1"]), atom("u", &["Z1", "Z2"])],
        );
        let (out, schema) = normalize(&[s], &Schema::new());
        assert!(is_normalized(&out));
        assert_eq!(
            render(&out),
            [
                "s/0/1: p(X) -> _aux_1_1(X,Z1).",
                "s/0/2: _aux_1_1(X,Z1) -> _aux_1_2(X,Z1,Z2).",
                "s/0/3: _aux_1_2(X,Z1,Z2) -> _aux_1_0(X,Z1,Z2).",
                "s/1: _aux_1_0(X,Z1,Z2) -> t(X,Z1).",
                "s/2: _aux_1_0(X,Z1,Z2) -> u(Z1,Z2).",
            ]
        );
        assert_eq!(schema.arity("_aux_1_0"), Some(3));
    }

    #[test]
    fn normalization_preserves_linearity() {
        let s = Tgd::new(
            "s",
            vec![atom("p", &["X"])],
            vec![atom("t", &["X", "V", "W"]), atom("r", &["W"])],
        );
        let (out, _) = normalize(&[s], &Schema::new());
        assert!(out.iter().all(Tgd::is_linear));
    }
}
