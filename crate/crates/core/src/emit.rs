//! Rewriting metrics and UCQ serialization to SQL and Datalog text.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::Add;

use crate::error::{Error, Result};
use crate::model::{write_atoms, ConjunctiveQuery, Schema, Symbol, Term};

/// `size` counts CQs, `length` body atoms and `width` pairwise variable
/// equalities across bodies.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Metrics {
    pub size: usize,
    pub length: usize,
    pub width: usize,
}

impl Add for Metrics {
    type Output = Metrics;

    fn add(self, rhs: Metrics) -> Metrics {
        Metrics {
            size: self.size + rhs.size,
            length: self.length + rhs.length,
            width: self.width + rhs.width,
        }
    }
}

impl fmt::Display for Metrics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "size={} length={} width={}", self.size, self.length, self.width)
    }
}

/// Sum over body variables of `m * (m - 1) / 2`, `m` being the number of
/// argument slots holding the variable.
pub fn width(q: &ConjunctiveQuery) -> usize {
    let mut counts: HashMap<&Symbol, usize> = HashMap::new();
    for t in q.body().iter().flat_map(|a| a.args.iter()) {
        if let Term::Var(v) = t {
            *counts.entry(v).or_default() += 1;
        }
    }
    counts.values().map(|m| m * m.saturating_sub(1) / 2).sum()
}

pub fn metrics<'a, I: IntoIterator<Item = &'a ConjunctiveQuery>>(ucq: I) -> Metrics {
    ucq.into_iter()
        .map(|q| Metrics {
            size: 1,
            length: q.body().len(),
            width: width(q),
        })
        .fold(Metrics::default(), Add::add)
}

/// Table and column names backing each predicate.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TableMap {
    tables: BTreeMap<Symbol, (String, Vec<String>)>,
}

impl TableMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// One table per non-auxiliary predicate, named after it, with columns
    /// `c1..cn`.
    pub fn from_schema(schema: &Schema) -> Self {
        let mut map = TableMap::new();
        for (p, n) in schema.predicates() {
            if !schema.is_auxiliary(p) {
                map.insert(p, p, (1..=n).map(|i| format!("c{i}")).collect());
            }
        }
        map
    }

    pub fn insert(&mut self, predicate: &str, table: &str, columns: Vec<String>) {
        self.tables.insert(predicate.into(), (table.to_string(), columns));
    }

    fn lookup(&self, predicate: &str) -> Result<&(String, Vec<String>)> {
        self.tables
            .get(predicate)
            .ok_or_else(|| Error::MissingTable(predicate.to_string()))
    }
}

fn sql_literal(c: &str) -> String {
    format!("'{}'", c.replace('\'', "''"))
}

/// Output column names taken from the first CQ's head, lowercased and
/// made unique.
fn column_names(q: &ConjunctiveQuery) -> Vec<String> {
    let mut names: Vec<String> = Vec::new();
    for (i, t) in q.head.iter().enumerate() {
        let base = match t {
            Term::Var(v) => v.to_lowercase(),
            _ => format!("c{}", i + 1),
        };
        let mut name = base.clone();
        let mut n = 1;
        while names.contains(&name) {
            n += 1;
            name = format!("{base}_{n}");
        }
        names.push(name);
    }
    names
}

fn select(q: &ConjunctiveQuery, columns: &[String], tables: &TableMap) -> Result<String> {
    let mut from = Vec::new();
    let mut conditions = Vec::new();
    let mut first_seen: HashMap<&Symbol, String> = HashMap::new();
    for (i, a) in q.body().iter().enumerate() {
        let (table, cols) = tables.lookup(&a.predicate)?;
        let alias = format!("t{i}");
        from.push(format!("{table} {alias}"));
        for (j, t) in a.args.iter().enumerate() {
            let col = match cols.get(j) {
                Some(c) => format!("{alias}.{c}"),
                None => format!("{alias}.c{}", j + 1),
            };
            match t {
                Term::Var(v) => match first_seen.get(v) {
                    Some(prev) => conditions.push(format!("{prev} = {col}")),
                    None => {
                        first_seen.insert(v, col);
                    }
                },
                Term::Const(c) => conditions.push(format!("{col} = {}", sql_literal(c))),
                Term::Null(n) => conditions.push(format!("{col} = {}", sql_literal(&format!("_z{n}")))),
            }
        }
    }
    let projections: Vec<String> = if q.head.is_empty() {
        vec!["1 AS answer".to_string()]
    } else {
        q.head
            .iter()
            .zip(columns)
            .map(|(t, name)| match t {
                Term::Var(v) => match first_seen.get(v) {
                    Some(col) => format!("{col} AS {name}"),
                    None => format!("NULL AS {name}"),
                },
                Term::Const(c) => format!("{} AS {name}", sql_literal(c)),
                Term::Null(n) => format!("{} AS {name}", sql_literal(&format!("_z{n}"))),
            })
            .collect()
    };
    let mut sql = format!("SELECT {}", projections.join(", "));
    if !from.is_empty() {
        sql.push_str(&format!(" FROM {}", from.join(", ")));
    }
    if !conditions.is_empty() {
        sql.push_str(&format!(" WHERE {}", conditions.join(" AND ")));
    }
    Ok(sql)
}

/// One `SELECT` per CQ, combined with `UNION`. An empty UCQ becomes a
/// select with a false condition.
pub fn to_sql(ucq: &[ConjunctiveQuery], tables: &TableMap) -> Result<String> {
    let Some(first) = ucq.first() else {
        return Ok("SELECT 1 AS answer WHERE 1 = 0".to_string());
    };
    let columns = column_names(first);
    let selects = ucq
        .iter()
        .map(|q| select(q, &columns, tables))
        .collect::<Result<Vec<_>>>()?;
    Ok(selects.join("\nUNION\n"))
}

struct DatalogRule<'a>(&'a ConjunctiveQuery);

impl fmt::Display for DatalogRule<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let q = self.0;
        write!(f, "{}(", q.head_predicate)?;
        for (i, t) in q.head.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{t}")?;
        }
        f.write_str(") :- ")?;
        write_atoms(f, q.body())?;
        f.write_str(".")
    }
}

/// One rule line per CQ, in the input grammar.
pub fn to_datalog(ucq: &[ConjunctiveQuery]) -> String {
    if ucq.is_empty() {
        return "% empty rewriting\n".to_string();
    }
    ucq.iter().map(|q| format!("{}\n", DatalogRule(q))).collect()
}
