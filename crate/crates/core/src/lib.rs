//! A fully polynomial-time approximation scheme for the 0-1 knapsack
//! problem running in Õ(n + ε^{-9/4}) time.
//!
//! Given items with positive weights and profits, a capacity W, and an
//! accuracy ε ∈ (0, 1/2], [`solve`](solver::solve) returns a value SOL with
//!
//! ```text
//! SOL ≤ OPT ≤ (1 + ε) · SOL,
//! ```
//!
//! where OPT is the exact optimum, along with an approximate profit profile
//! (a step function mapping every capacity to an achievable profit). The
//! scheme combines:
//!
//! - monotone step functions with approximate (max,+)-merging
//!   ([`stepfn`]),
//! - SMAWK-based row minima for merging items of equal profit ([`smawk`]),
//! - number-theoretic set towers that round profits onto coarse lattices
//!   with scale-dependent quanta ([`towers`], [`multilevel`]),
//! - a subset-sum sketch for medium-profit items ([`subsetsum`]),
//! - a greedy three-way split of items by unit profit ([`solver`]),
//! - exact reference oracles for validation ([`oracle`]).
//!
//! All approximation contracts are one-sided: computed profiles never exceed
//! the true profile, and undershoot by at most the documented factor.

pub mod error;
pub mod instance;
pub mod multilevel;
pub mod oracle;
pub mod smawk;
pub mod solver;
pub mod stepfn;
pub mod subsetsum;
pub mod tol;
pub mod towers;

pub use error::{Error, Result};
pub use instance::{parse_instance, Instance, Item};
pub use solver::{solve, Solution};
