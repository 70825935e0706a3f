//! Reports linear, guarded and sticky membership for a few rule sets.

use ontorew::{classify, parse_program};

fn main() -> ontorew::Result<()> {
    let sets = [
        ("linear", "p(X,Y) -> r(Y,Z).\nr(X,Y) -> p(Y,X)."),
        ("guarded", "r(X,Y), s(Y) -> t(X)."),
        ("sticky", "r(X,Y), s(Y,Z) -> t(X,Y,Z)."),
        ("transitive", "r(X,Y), r(Y,Z) -> r(X,Z)."),
    ];
    for (name, text) in sets {
        let report = classify(&parse_program(text)?.tgds);
        println!("== {name} (terminates: {})", report.terminates());
        print!("{report}");
    }
    Ok(())
}
