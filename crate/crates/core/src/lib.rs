//! Exact decision procedures for trace refinement and distribution
//! bisimulation of labelled Markov chains and Markov decision processes.
//!
//! Everything is computed over arbitrary-precision rationals; there are no
//! floating-point code paths and no tolerances. The crate is organised
//! bottom-up:
//!
//! - [`linalg`]: rational vectors/matrices, span bases, exact LP feasibility
//! - [`model`]: the labelled MDP type (an MC is an MDP with one move per state)
//! - [`io`]: JSON wire format for models and strategies
//! - [`semantics`]: transition matrices, sub-distributions, trace probabilities
//! - [`mc_equiv`]: trace equivalence of two Markov chains
//! - [`refinement`]: trace refinement of an MC by an MDP (polynomial route)
//! - [`bisim`]: distribution bisimulation spaces and certificates
//! - [`restricted`]: memoryless-strategy refinement and ETR emission
//! - [`gadgets`]: reduction gadget generators
//! - [`oracle`]: bounded-depth brute-force reference procedures

pub mod bisim;
pub mod fixtures;
pub mod gadgets;
pub mod io;
pub mod linalg;
pub mod mc_equiv;
pub mod model;
pub mod oracle;
pub mod refinement;
pub mod restricted;
pub mod semantics;
pub mod smtlib;

use thiserror::Error;

/// Default ceiling on enumerations (pure-strategy products, word counts).
pub const DEFAULT_GUARD: u64 = 1_000_000;

#[derive(Debug, Error)]
pub enum Error {
    /// Input text could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    /// A structurally well-formed model violates a semantic invariant.
    #[error("validation failed:\n{}", .0.join("\n"))]
    Validation(Vec<String>),

    /// An operation's precondition does not hold (wrong kind of model,
    /// mismatched label sets, malformed strategy, ...).
    #[error("{0}")]
    Precondition(String),

    /// An enumeration would exceed the configured guard.
    #[error("enumeration of {required} candidates exceeds guard {limit}")]
    GuardExceeded { required: u128, limit: u64 },

    /// An internal invariant failed; indicates a bug, not bad input.
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
