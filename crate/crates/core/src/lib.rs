//! Minimizing the maximum of `N` convex Lipschitz functions.
//!
//! The crate provides, at desk scale:
//!
//! - [`problem`] — function families with value/subgradient oracles and a
//!   [`problem::QueryLedger`] that charges every oracle call under a
//!   configurable cost model.
//! - [`smoothing`] — the max objective, its softmax surrogate, the
//!   exponentiated softmax used for stochastic gradients, and their gradients.
//! - [`qsampler`] — softmax sampling with top-K truncation and rejection,
//!   charging the ledger with square-root-type query costs while producing
//!   statistically exact samples.
//! - [`broo`] — a ball regularized optimization oracle implemented by
//!   projected epoch SGD, with quantum-cost and classical-cost sampling arms.
//! - [`solver`] — end-to-end drivers: projected subgradient baseline and a
//!   proximal outer loop over BROO calls.
//! - [`hardness`] — zero-chain hard instances, hidden-rotation shuffling, and
//!   progress-measurement experiments for lower-bound studies.
//! - [`searchsim`] — a dense state-vector simulator for the multi-round
//!   unstructured search problem.
//!
//! Multi-trial experiments fan out through [`trials`], which runs on a rayon
//! pool when the default `parallel` feature is enabled and falls back to a
//! sequential loop otherwise. Results are merged by trial index, so outputs
//! are identical either way.

pub mod broo;
pub mod error;
pub mod hardness;
pub mod problem;
pub mod qsampler;
pub mod rng;
pub mod searchsim;
pub mod smoothing;
pub mod solver;
pub mod stats;
pub mod trials;
pub mod vecmath;

pub use error::{Error, Result};
