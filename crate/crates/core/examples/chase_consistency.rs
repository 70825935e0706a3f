//! Chases a small database, then checks negative constraints and keys.
//! Key checks apply to databases; nulls are never treated as distinct.

use ontorew::chase::{check_consistency, check_kds};
use ontorew::{certain_answer, chase, parse_program};

fn main() -> ontorew::Result<()> {
    let program = parse_program(
        "emp(X) -> works_for(X,D), dept(D).\n\
         nc1: dept(X), emp(X) -> false.\n\
         key(works_for) = [1].\n\
         emp(ann). emp(bob). works_for(bob,sales).",
    )?;

    let result = chase(&program.facts, &program.tgds, 10);
    print!("{}", result.instance);
    println!("saturated={} rounds={}", result.saturated, result.rounds_used);

    let q = parse_program("q() :- works_for(ann,D), dept(D).")?.query()?.clone();
    println!(
        "certain answer: {}",
        certain_answer(&q, &program.facts, &program.tgds, 10)
    );
    println!(
        "consistency: {}",
        check_consistency(&program.facts, &program.tgds, &program.ncs, 10)
    );
    println!("keys hold: {}", check_kds(&program.facts, &program.kds));

    let mut clashing = program.facts.clone();
    clashing.insert(parse_program("works_for(bob,hr).")?.facts.atoms()[0].clone());
    println!(
        "keys hold with works_for(bob,hr): {}",
        check_kds(&clashing, &program.kds)
    );
    Ok(())
}
