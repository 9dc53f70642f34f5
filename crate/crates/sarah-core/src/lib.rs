//! SARAH-family stochastic recursive-gradient optimizers for finite-sum
//! smooth problems, with theorem-driven step-size planners and verification
//! oracles that check the method's identities and convergence bounds on
//! enumerable instances.
//!
//! The crate is `no_std` (with `alloc`): every algorithm is pure computation
//! over in-memory datasets. File formats, CLI, and plotting live in the
//! companion `sarah-bench` crate.
//!
//! Modules, bottom up:
//!
//! * [`rng`] — documented counter-based PRNG (SplitMix64) and the sampling
//!   routines all stochastic runs draw from, so traces are reproducible
//!   bit-for-bit from a seed.
//! * [`linalg`] — dense weight vectors and sparse data rows with
//!   fixed-order summation.
//! * [`data`] — in-memory datasets and seeded synthetic generators.
//! * [`problems`] — finite-sum objectives (logistic, ridge, logistic with a
//!   bounded nonconvex regularizer) with gradients and smoothness constants.
//! * [`optimizer`] — SARAH, SARAH+, SARAH++, SARAH Adaptive, GD runners,
//!   trace recording, and step-size/complexity planners.
//! * [`oracle`] — independent verification engines: exact expectations by
//!   sample-path enumeration, Monte-Carlo estimates with CLT slack,
//!   finite-difference gradients, and reference solves.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod data;
pub mod fmt;
pub mod linalg;
pub mod optimizer;
pub mod oracle;
pub mod problems;
pub mod rng;
