//! Rate regions of two-user multiple-access channels whose encoders both
//! cooperate over rate-limited links and crib a deterministic function of
//! each other's channel input.
//!
//! The crate is organized bottom-up:
//!
//! - [`info`]: dense joint tables and Shannon measures in bits.
//! - [`regions`]: per-distribution inequality systems and their polytopes.
//! - [`geometry`]: convex hulls of downward-closed rate regions.
//! - [`search`]: factorized distribution families and frontier searches.
//! - [`gaussian`]: the Gaussian MAC with quantized cribbing.
//! - [`sim`]: a Monte Carlo run of the block-Markov random coding scheme.
//! - [`checks`]: randomized cross-checks between the region evaluators.
//! - [`fixtures`]: small binary channels and schemes shared by examples and tests.
//! - [`cli`]: the logic behind the `coopcrib` binary.

// Negated comparisons are how parameter checks reject NaN alongside bad values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod cli;
pub mod fixtures;
pub mod gaussian;
pub mod geometry;
pub mod info;
pub mod regions;
pub mod search;
pub mod sim;

pub use geometry::{Frontier, Plane, RatePoint};
pub use info::{Axis, DeterministicMap, JointPmf, Pmf};
pub use regions::{LinkCapacities, RegionBounds};
