mod common;

use common::*;
use ontorew::{chase, normalize, rewrite, Instance, RewriteOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SIG: [(&str, usize); 8] = [
    ("stock_portf", 3),
    ("company", 3),
    ("stock", 3),
    ("list_comp", 2),
    ("fin_idx", 3),
    ("has_stock", 2),
    ("fin_ins", 1),
    ("legal_person", 1),
];

fn random_db(rng: &mut ChaCha8Rng) -> Instance {
    let n = rng.gen_range(1..=6);
    Instance::from_atoms((0..n).map(|_| {
        let (p, k) = SIG[rng.gen_range(0..SIG.len())];
        ontorew::Atom::new(
            p,
            (0..k)
                .map(|_| ontorew::Term::constant(CONSTANTS[rng.gen_range(0..2)]))
                .collect(),
        )
    }))
}

/// Certain answers computed by chasing agree with the evaluation of the
/// rewriting, with and without elimination.
#[test]
fn rewriting_matches_chase_answers() {
    let onto = parse_file("data/stock_exchange.onto");
    let q = parse_file("data/stock_exchange.query").queries[0].clone();
    let (rules, schema) = normalize(&onto.tgds, &onto.schema);
    let plain = rewrite(&q, &rules, &[], &schema, RewriteOptions::default()).unwrap();
    let opts = RewriteOptions {
        elimination: true,
        ..RewriteOptions::default()
    };
    let reduced = rewrite(&q, &rules, &[], &schema, opts).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    for _ in 0..400 {
        let db = random_db(&mut rng);
        let result = chase::chase_bounded(&db, &onto.tgds, 20, 5000);
        if !result.saturated {
            continue;
        }
        let expected = answers(&q, &result.instance);
        assert_eq!(ucq_answers(&plain.queries, &db), expected, "db:\n{db}");
        assert_eq!(ucq_answers(&reduced.queries, &db), expected, "db:\n{db}");
        checked += 1;
    }
    assert!(checked > 300, "only {checked} saturated draws");
}
