//! Sequence alignment on the simulated array: pairwise local, global and
//! semi-global runs, and whole-database local search.

mod db;
mod engine;
pub mod layout;
mod scheme;

pub use db::{db_search, init_database, reset_after_query, top_k, SearchOutcome};
pub use engine::{
    align, align_pairwise_global, align_pairwise_local, align_semi_global, match_truth_table, sigma_entries, AlignMode,
    EngineOptions, PairwiseOutcome,
};
pub use layout::{ad_roles, AdRoles, DatabaseLayout, DbEntry, WavefrontLayout};
pub use scheme::{blosum62, Alphabet, EncodedSequence, ScoringScheme, Substitution};
