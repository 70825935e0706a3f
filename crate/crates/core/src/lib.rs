//! Perfect UCQ rewriting of conjunctive queries under tuple-generating
//! dependencies and negative constraints.
//!
//! The pipeline parses an ontology ([`parser`]), normalizes its rules
//! ([`normalize`]), checks for a termination guarantee ([`classify`]),
//! rewrites a query into a union of conjunctive queries ([`rewrite`]),
//! optionally minimizing each query first under linear rules ([`optimize`]),
//! and serializes the result ([`emit`]). A bounded chase ([`chase`]) serves
//! as a reference semantics and checks constraints against data.
//!
//! ```
//! use ontorew::{parse_program, normalize, rewrite, RewriteOptions};
//!
//! let onto = parse_program("s(X) -> t(X,X,Z).\nt(X,Y,Z) -> r(Y,Z).").unwrap();
//! let q = parse_program("q() :- t(A,B,C), r(B,C).").unwrap().queries[0].clone();
//! let (rules, schema) = normalize(&onto.tgds, &onto.schema);
//! let out = rewrite(&q, &rules, &onto.ncs, &schema, RewriteOptions::default()).unwrap();
//! assert_eq!(out.len(), 3);
//! ```

pub mod canonical;
pub mod chase;
pub mod classify;
pub mod cli;
pub mod emit;
pub mod error;
pub mod model;
pub mod normalize;
pub mod optimize;
pub mod parser;
pub mod rewrite;
pub mod rules;
pub mod unify;

pub use canonical::canonical_form;
pub use chase::{
    certain_answer, chase, check_consistency, check_kds, entails, Answer, ChaseResult, Consistency, Instance,
};
pub use classify::{classify, ClassReport};
pub use emit::{metrics, to_datalog, to_sql, Metrics, TableMap};
pub use error::{Error, Result};
pub use model::{Atom, ConjunctiveQuery, Position, Schema, Substitution, Symbol, Term};
pub use normalize::normalize;
pub use optimize::{eliminate, QueryEliminator};
pub use parser::{parse_program, Program};
pub use rewrite::{rewrite, RewriteOptions, Rewriter, Rewriting};
pub use rules::{KeyDependency, NegativeConstraint, Tgd};
pub use unify::{find_homomorphism, unify};
