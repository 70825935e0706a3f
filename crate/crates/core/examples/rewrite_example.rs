//! Rewrites a query under two rules and prints each step of the fixpoint.

use ontorew::{normalize, parse_program, rewrite, RewriteOptions};

fn main() -> ontorew::Result<()> {
    let onto = parse_program("s1: s(X) -> t(X,X,Z).\ns2: t(X,Y,Z) -> r(Y,Z).")?;
    let q = parse_program("q() :- t(A,B,C), r(B,C).")?.query()?.clone();
    let (rules, schema) = normalize(&onto.tgds, &onto.schema);

    let options = RewriteOptions {
        trace: true,
        ..RewriteOptions::default()
    };
    let out = rewrite(&q, &rules, &onto.ncs, &schema, options)?;
    for line in &out.trace {
        println!("{line}");
    }
    println!();
    for cq in &out.queries {
        println!("{cq}");
    }
    Ok(())
}
