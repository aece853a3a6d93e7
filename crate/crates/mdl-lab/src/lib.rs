//! Minimum-description-length learning over a tiny bit-predicate language.
//!
//! The crate studies what happens when the shortest program that perfectly
//! fits a noisy sample is used as the predictor. It provides:
//!
//! - [`bitlang`]: a prefix-free binary code for boolean programs over 64-bit
//!   instances, with evaluation and length-ordered enumeration;
//! - [`bounds`]: entropy, divergence, and the generalization bounds that
//!   relate program length to population error;
//! - [`hash_family`]: a seeded hash family and the search for short seeds
//!   that realize prescribed labels, used to build short interpolators;
//! - [`sources`]: seeded generative sources (noisy reference programs, a
//!   two-branch mixture, constant labels, sparse bits) and sample statistics;
//! - [`learners`]: shortest-interpolator and penalized structural searches,
//!   with exact or Monte Carlo population loss;
//! - [`experiments`]: multi-trial experiment drivers, bound audits, and CSV
//!   reporting behind the `mdl-lab` command line tool.
//!
//! The `examples/` directory has a runnable walkthrough per area.

mod bits;

pub mod bitlang;
pub mod bounds;
pub mod experiments;
pub mod hash_family;
pub mod learners;
pub mod sources;

pub use bits::BitVec;
