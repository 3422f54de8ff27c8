//! Message replacement: derandomizing a classical Alice, the deterministic
//! state-learning message, and the quantum-to-classical compiler built on it.

mod compile;
mod derandomize;
mod learn;

use thiserror::Error;

use crate::qcore::QcoreError;
use crate::smp::SmpError;

pub use compile::{compile_qc_to_cc, compile_qc_to_cc_with, CompileDiagnostics, CompiledProtocol};
pub use derandomize::{
    derandomize_alice, DerandomizeConfig, Derandomized, DeterministicMessageTable, CLOSENESS, MAX_BOB_BITS,
};
pub use learn::{
    bad_count_bound, default_copies, index_bits, learn_state_message, learn_state_message_with, reconstruct_estimates,
    reconstruct_estimates_with, LearnConfig, LearnEntry, LearnOutcome, LearnRecord, LearnStep,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransformError {
    #[error(transparent)]
    Qcore(#[from] QcoreError),
    #[error(transparent)]
    Smp(#[from] SmpError),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("malformed record: {0}")]
    Format(String),
    #[error("record does not replay: {0}")]
    Divergence(String),
    #[error("projection at b = {b} vanished (weight {weight:e})")]
    VanishingProjection { b: u64, weight: f64 },
    #[error("no verified multiset for input {x_index}: best deviation {deviation} at b = {b}; increase s")]
    DerandomizationFailed { x_index: usize, b: u64, deviation: f64 },
}

pub type Result<T, E = TransformError> = std::result::Result<T, E>;
