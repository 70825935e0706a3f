//! Compares the rewriting of the stock exchange query with and without
//! query elimination.

use ontorew::{metrics, normalize, parse_program, rewrite, RewriteOptions};

const ONTOLOGY: &str = include_str!("../data/stock_exchange.onto");
const QUERY: &str = include_str!("../data/stock_exchange.query");

fn main() -> ontorew::Result<()> {
    let onto = parse_program(ONTOLOGY)?;
    let q = parse_program(QUERY)?.query()?.clone();
    let (rules, schema) = normalize(&onto.tgds, &onto.schema);

    for elimination in [true, false] {
        let options = RewriteOptions {
            elimination,
            ..RewriteOptions::default()
        };
        let out = rewrite(&q, &rules, &onto.ncs, &schema, options)?;
        println!("elimination={elimination}: {}", metrics(&out.queries));
        if elimination {
            for cq in &out.queries {
                println!("  {cq}");
            }
        }
    }
    Ok(())
}
