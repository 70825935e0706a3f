use thiserror::Error;

/// Errors raised by parsing, rewriting and emission.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("predicate `{predicate}` used with arity {found}, but it was first used with arity {expected}")]
    ArityConflict {
        predicate: String,
        expected: usize,
        found: usize,
    },
    #[error("{line}:{column}: `{symbol}` is reserved: {reason}")]
    Reserved {
        line: usize,
        column: usize,
        symbol: String,
        reason: &'static str,
    },
    #[error("query `{query}` is unsafe: head variable {variable} does not occur in the body")]
    UnsafeQuery { query: String, variable: String },
    #[error(
        "no termination guarantee: the rule set is neither linear nor sticky ({detail}); pass an explicit round bound"
    )]
    NoTerminationGuarantee { detail: String },
    #[error("query elimination requires linear rules, but `{rule}` has {body_atoms} body atoms")]
    EliminationRequiresLinear { rule: String, body_atoms: usize },
    #[error("rule `{rule}` is not in normal form (one head atom, at most one existential variable occurring once)")]
    NotNormalized { rule: String },
    #[error("sticky-join membership is PSPACE-complete and is not decided by this engine")]
    StickyJoinUnsupported,
    #[error("predicate `{0}` has no table mapping")]
    MissingTable(String),
    #[error("{0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
