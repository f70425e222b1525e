//! Partitioned balanced tournament designs: representation, verification,
//! and search.
//!
//! A PBTD of side `n` arranges all pairs of a `2n`-set into an
//! `n x (2n-1)` array so that every column is a perfect matching, every
//! element occurs at most twice per row, and each row's first `n` and last
//! `n` columns both hold perfect matchings.

pub mod cli;
pub mod design;
pub mod io;
pub mod search;
pub mod verify;

pub use design::{
    DesignArray, DesignError, Dims, ElementPermutation, Pair, Permutation, Side, Window,
};
pub use io::{emit_structured, emit_text, parse_structured, parse_text, table1, ParseError};
pub use search::{
    anneal_search, backtrack_search, count_solutions, portfolio_search, round_robin_factorization,
    search, ColumnStructuredState, Engine, Outcome, SearchConfig, SearchError, SearchOutcome,
};
pub use verify::{verify, VerificationReport, Violation, ViolationKind};
