//! Desk-scale simulation of quantum query algorithms for *search with
//! wildcards* and *combinatorial group testing* (CGT).
//!
//! The crate is organised bottom-up:
//!
//! - [`combinatorics`]: bit strings, binomials (exact and log-space),
//!   Krawtchouk polynomials and the Walsh–Hadamard transform over Z₂ⁿ.
//! - [`gram`]: exact Pretty Good Measurement statistics for the subset-state
//!   family `|ψᵏₓ⟩`, with a brute-force matrix-square-root oracle.
//! - [`oracles`]: sealed hidden-input oracles with a query ledger.
//! - [`cgt_quantum`]: the one-query `k = 1` algorithm and the Las Vegas
//!   `O(k log k)` CGT solver, driven by the exact outcome law of a phase query.
//! - [`wildcard_search`]: the staged PGM-based wildcard search.
//! - [`baselines`]: classical algorithms and information-theoretic bounds.
//! - [`adversary`]: the weighted adversary bound evaluated by enumeration.
//! - [`harness`] and [`acceptance`]: seeded Monte Carlo plumbing and the
//!   end-to-end acceptance checks.

pub mod acceptance;
pub mod adversary;
pub mod baselines;
pub mod cgt_quantum;
pub mod combinatorics;
mod error;
pub mod gram;
pub mod harness;
pub mod oracles;
pub mod wildcard_search;

pub use combinatorics::{BitString, LogReal};
pub use error::{Error, Result};
