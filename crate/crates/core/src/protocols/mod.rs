//! Concrete protocols: Equality with a public coin and with a code, the
//! matching promise problem, and hidden matching.

mod equality;
pub mod fixtures;
mod hidden_matching;
mod matching;

pub use equality::{equality_code, equality_public, EqualityCode, EqualityCodeRound, EqualityPublic};
pub use hidden_matching::{hidden_matching_relation, xor_matching, HiddenMatching, HiddenMatchingOutput};
pub use matching::{
    default_classical_subset, edge_parity_distribution, edge_projection_probability, matching_classical, matching_qc,
    matching_referee_acceptance, matching_value, random_promise_instance, shared_subset, BobMatching,
    MatchingClassical, MatchingInstance, MatchingQc, MatchingQcParams, CLASSICAL_SUBSET_FACTOR,
};

/// Names accepted by the experiment runner.
pub const FIXTURE_NAMES: [&str; 5] = ["eq-public", "eq-code", "matching-qc", "matching-classical", "hidden-matching"];
