//! Construction and verification of two-player nonlocal games.
//!
//! The crate builds finite nonlocal games and quantum strategies, evaluates
//! winning probabilities exactly (classical side) or numerically (quantum
//! side), and assembles machine-checkable certificates for game-theoretic
//! properties: pseudo-telepathy, perfect-strategy extraction from disjunction
//! games, Kochen-Specker-derived quantum independent sets, and
//! coprime-Schmidt-rank refutations of state self-testing.
//!
//! Modules mirror the pipeline:
//!
//! * [`numerics`] — dense complex matrices, Schmidt decomposition, POVM and
//!   projection predicates.
//! * [`games`] — the classical game model: verification tables, deterministic
//!   strategies, exact classical value, perfect-strategy search.
//! * [`strategies`] — quantum strategies, winning probability, correlations,
//!   support restriction, local-dilation residuals.
//! * [`orgame`] — the disjunction combinator of two games, strategy lifting
//!   and perfect-component extraction.
//! * [`magicsquare`] — the magic square game, its synchronous variant, and
//!   their Pauli reference strategies.
//! * [`kochenspecker`] — ray sets, marking functions, weak Kochen-Specker
//!   verification, orthogonality graphs (includes the bundled 33-ray set).
//! * [`graphgames`] — graphs, exact independence number, independent set
//!   games, quantum independent sets.
//! * [`analysis`] — certificate reports combining the above.

pub mod analysis;
pub mod games;
pub mod graphgames;
pub mod kochenspecker;
pub mod magicsquare;
pub mod numerics;
pub mod orgame;
pub mod parallel;
pub mod strategies;

pub use numerics::{BipartiteState, ComplexMatrix, SchmidtDecomposition, Tolerance};
pub use parallel::EvalBackend;
