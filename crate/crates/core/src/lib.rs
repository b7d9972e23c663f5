//! Reversibility of cardinal sequences and disconnected binary structures.
//!
//! A sequence `⟨κ_i : i ∈ I⟩` of non-zero cardinals is reversible when every
//! surjection `f: I → I` with `κ_j = Σ_{f(i)=j} κ_i` is a bijection. This
//! crate decides reversibility for finitely described sequences, emits
//! checkable certificates for the negative answers, and lifts the decision
//! to disjoint unions of catalog structures and to piecewise integer
//! functions.

pub mod baire;
pub mod corpus;
pub mod dsl;
pub mod error;
pub mod semigroup;
pub mod sequence;
pub mod structures;
pub mod witness;

pub use error::{Error, Result};
pub use semigroup::{Decomposition, GeneratorSet, Semigroup};
pub use sequence::{
    classify, decide, Cardinal, CardinalSpec, Classification, Count, Entry, ReasonCode,
    ValueFamily, ValueSetDescriptor, Verdict,
};
pub use witness::{
    build_witness, verify_witness, NonRevCase, Reject, VerificationReport, WitnessMap,
};
