//! Splits multi-atom heads and multiple existentials into single-step rules.

use ontorew::{normalize, parse_program};

fn main() -> ontorew::Result<()> {
    let onto = parse_program("s: p(X) -> t(X,Z1,Z2), r(Z1,X).")?;
    let (rules, schema) = normalize(&onto.tgds, &onto.schema);
    for rule in &rules {
        println!("{rule}");
    }
    let auxiliary: Vec<_> = schema
        .predicates()
        .filter(|(p, _)| schema.is_auxiliary(p))
        .map(|(p, k)| format!("{p}/{k}"))
        .collect();
    println!("auxiliary predicates: {}", auxiliary.join(", "));
    Ok(())
}
