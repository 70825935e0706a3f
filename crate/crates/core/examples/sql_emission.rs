//! Emits a rewriting as SQL over custom table and column names.

use ontorew::{normalize, parse_program, rewrite, to_sql, RewriteOptions, TableMap};

fn main() -> ontorew::Result<()> {
    let onto = parse_program("manager(X) -> employee(X).\nemployee(X) -> person(X,Y).")?;
    let q = parse_program("q(N) :- person(N,B).")?.query()?.clone();
    let (rules, schema) = normalize(&onto.tgds, &onto.schema);
    let out = rewrite(&q, &rules, &onto.ncs, &schema, RewriteOptions::default())?;

    let mut tables = TableMap::from_schema(&schema);
    tables.insert("person", "people", vec!["name".into(), "birthplace".into()]);
    tables.insert("employee", "staff", vec!["name".into()]);
    println!("{}", to_sql(&out.queries, &tables)?);
    Ok(())
}
