//! Exact simulation of simultaneous message passing (SMP) protocols in which
//! Alice's message may be quantum, together with the compilers that replace
//! a randomized or quantum message by a deterministic classical one, and
//! brute-force oracles for tiny instances.

pub mod bits;
pub mod codes;
pub mod experiment;
pub mod oracle;
pub mod protocols;
pub mod qcore;
pub mod rng;
pub mod smp;
pub mod transforms;

pub use bits::BitString;
