//! Fixed-confidence pure exploration for finite-arm linear bandits.
//!
//! The crate provides, as a library plus a benchmark CLI:
//!
//! * game-theoretic sampling rules (`lingame`, `lingame-c`) built from a
//!   regret-minimizing learner facing nature's best responses, with
//!   optimistic gains and C-tracking;
//! * the GLR stopping rule with its confidence threshold `β(t,δ)`;
//! * pure-exploration problem families: best-arm identification (plain,
//!   norm-bounded, transductive) and threshold bandits;
//! * optimal transductive design solvers (Frank-Wolfe and a saddle-point
//!   variant) for the characteristic time `T*(θ)` and the G/XY
//!   complexities;
//! * baseline samplers and a seeded, reproducible Monte Carlo harness.

pub mod bench;
pub mod design;
pub mod error;
pub mod learners;
pub mod linalg;
pub mod problems;
pub mod samplers;
pub mod simulator;
pub mod stopping;

#[cfg(test)]
mod testkit;

pub use error::{Error, Result};
