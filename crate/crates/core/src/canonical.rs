//! Canonical text keys for conjunctive queries, equal exactly when two
//! queries are related by a bijective variable renaming.
//!
//! Head variables are numbered first, in head order. The body is then
//! serialized as the lexicographically least sequence of renamed atoms over
//! all atom orderings; the search branches only where several atoms tie for
//! the smallest serialization under the renaming built so far.

use std::collections::HashMap;
use std::fmt::Write;

use crate::model::{Atom, ConjunctiveQuery, Symbol, Term};

#[derive(Clone)]
struct Renaming {
    names: HashMap<Symbol, usize>,
    next: usize,
}

impl Renaming {
    fn write_term(&self, out: &mut String, term: &Term, fresh: &mut Vec<Symbol>) {
        match term {
            Term::Var(v) => {
                let idx = match self.names.get(v) {
                    Some(&i) => i,
                    None => match fresh.iter().position(|f| f == v) {
                        Some(p) => self.next + p,
                        None => {
                            fresh.push(v.clone());
                            self.next + fresh.len() - 1
                        }
                    },
                };
                let _ = write!(out, "X{idx}");
            }
            Term::Const(c) => {
                let _ = write!(out, "'{}'", c.replace('\'', "''"));
            }
            Term::Null(n) => {
                let _ = write!(out, "_z{n}");
            }
        }
    }

    fn serialize(&self, atom: &Atom) -> (String, Vec<Symbol>) {
        let mut out = String::new();
        let mut fresh = Vec::new();
        out.push_str(&atom.predicate);
        out.push('(');
        for (i, t) in atom.args.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            self.write_term(&mut out, t, &mut fresh);
        }
        out.push(')');
        (out, fresh)
    }

    fn extend(&mut self, fresh: Vec<Symbol>) {
        for v in fresh {
            self.names.insert(v, self.next);
            self.next += 1;
        }
    }
}

struct Search<'a> {
    body: &'a [Atom],
    best: Option<Vec<String>>,
}

impl Search<'_> {
    fn run(&mut self, renaming: Renaming, remaining: Vec<usize>, prefix: &mut Vec<String>) {
        if remaining.is_empty() {
            if self
                .best
                .as_ref()
                .is_none_or(|best| prefix.as_slice() < best.as_slice())
            {
                self.best = Some(prefix.clone());
            }
            return;
        }
        let serialized: Vec<(usize, String, Vec<Symbol>)> = remaining
            .iter()
            .map(|&i| {
                let (s, fresh) = renaming.serialize(&self.body[i]);
                (i, s, fresh)
            })
            .collect();
        let min = serialized.iter().map(|(_, s, _)| s).min().cloned().unwrap_or_default();
        for (i, s, fresh) in serialized {
            if s != min {
                continue;
            }
            prefix.push(s);
            if let Some(best) = &self.best {
                if prefix.as_slice() > &best[..prefix.len()] {
                    prefix.pop();
                    return;
                }
            }
            let mut next = renaming.clone();
            next.extend(fresh);
            let rest: Vec<usize> = remaining.iter().copied().filter(|&j| j != i).collect();
            self.run(next, rest, prefix);
            prefix.pop();
        }
    }
}

/// Canonical key of `q` modulo bijective variable renaming.
pub fn canonical_form(q: &ConjunctiveQuery) -> String {
    let mut renaming = Renaming {
        names: HashMap::new(),
        next: 0,
    };
    let mut out = String::new();
    out.push_str(&q.head_predicate);
    out.push('(');
    let mut fresh = Vec::new();
    for (i, t) in q.head.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        renaming.write_term(&mut out, t, &mut fresh);
    }
    renaming.extend(fresh);
    out.push_str(") :- ");

    let mut search = Search {
        body: q.body(),
        best: None,
    };
    search.run(renaming, (0..q.body().len()).collect(), &mut Vec::new());
    out.push_str(&search.best.unwrap_or_default().join(", "));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Term;

    fn atom(p: &str, vars: &[&str]) -> Atom {
        Atom::new(p, vars.iter().map(|v| Term::var(v)).collect())
    }

    #[test]
    fn renaming_gives_same_key() {
        let a = ConjunctiveQuery::boolean(vec![atom("t", &["A", "B"])]);
        let b = ConjunctiveQuery::boolean(vec![atom("t", &["X", "Y"])]);
        assert_eq!(canonical_form(&a), canonical_form(&b));
    }

    #[test]
    fn non_bijective_relation_differs() {
        let a = ConjunctiveQuery::boolean(vec![atom("t", &["A", "A"])]);
        let b = ConjunctiveQuery::boolean(vec![atom("t", &["A", "B"])]);
        assert_ne!(canonical_form(&a), canonical_form(&b));
    }

    #[test]
    fn body_order_is_irrelevant() {
        let a = ConjunctiveQuery::boolean(vec![atom("p", &["A"]), atom("r", &["A"])]);
        let b = ConjunctiveQuery::boolean(vec![atom("r", &["B"]), atom("p", &["B"])]);
        assert_eq!(canonical_form(&a), canonical_form(&b));
    }

    #[test]
    fn head_order_matters() {
        let a = ConjunctiveQuery::new("q", vec![Term::var("A"), Term::var("B")], vec![atom("r", &["A", "B"])]);
        let b = ConjunctiveQuery::new("q", vec![Term::var("B"), Term::var("A")], vec![atom("r", &["A", "B"])]);
        assert_ne!(canonical_form(&a), canonical_form(&b));
    }

    #[test]
    fn symmetric_cycle_is_canonical() {
        // Two renamings of a directed 3-cycle with a tail.
        let a = ConjunctiveQuery::boolean(vec![
            atom("e", &["A", "B"]),
            atom("e", &["B", "C"]),
            atom("e", &["C", "A"]),
            atom("p", &["B"]),
        ]);
        let b = ConjunctiveQuery::boolean(vec![
            atom("e", &["Z", "X"]),
            atom("e", &["X", "Y"]),
            atom("e", &["Y", "Z"]),
            atom("p", &["Y"]),
        ]);
        assert_eq!(canonical_form(&a), canonical_form(&b));
    }
}
