//! Randomly swept, stochastically perturbed block-coordinate fixed-point
//! iterations together with a deterministic engine for their mean-square
//! and linear convergence bounds.
//!
//! The crate is organised bottom-up:
//!
//! - [`blockspace`]: block vectors over a direct sum and weighted norms.
//! - [`sweeping`]: activation laws over nonzero masks and their marginals.
//! - [`streams`]: reproducible, mutually independent RNG streams.
//! - [`schedule`]: closed-form parameter sequences with certifiable limits.
//! - [`operators`]: operator families with blockwise contraction certificates.
//! - [`engine`]: the relaxed, masked, perturbed block update and trajectories.
//! - [`bounds`]: the bound recursions and the rate analysis.
//! - [`harness`]: Monte-Carlo estimation, exact enumeration, dominance checks,
//!   rate fitting and file formats.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blockspace;
pub mod bounds;
pub mod engine;
pub mod error;
pub mod harness;
pub mod operators;
pub mod schedule;
pub mod streams;
pub mod sweeping;

pub use blockspace::{BlockLayout, BlockVector, WeightVector};
pub use error::{Error, Result};
