//! Removes body atoms that are implied by other atoms under linear rules.

use ontorew::{parse_program, QueryEliminator};

fn main() -> ontorew::Result<()> {
    let onto = parse_program("s1: p(X,Y) -> r(X,Y,Z).\ns2: r(X,Y,c) -> s(X,Y,Y).\ns3: s(X,X,Y) -> p(X,Y).")?;
    let q = parse_program("q() :- p(A,B), r(A,B,C), s(A,A,D).")?.query()?.clone();
    let eliminator = QueryEliminator::new(&onto.tgds, &onto.schema)?;

    for (i, covering) in eliminator.cover_sets(&q).iter().enumerate() {
        let names: Vec<String> = covering.iter().map(|j| q.body()[*j].to_string()).collect();
        println!("cover({}) = {{{}}}", q.body()[i], names.join(", "));
    }
    println!("{}", eliminator.eliminate(&q));
    Ok(())
}
