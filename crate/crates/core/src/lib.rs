#![no_std]

//! Numerical verification of low-pass filters for orthonormal scale functions.
//!
//! A one-periodic squared-modulus filter `M(ξ) = |m(2πξ)|²` induces, for each
//! `ξ ∈ [0,1)`, a consistent family of probabilities `P_ξ^N` on the integers
//! `−2^N ≤ k < 2^N`, built from partial products of the filter along the dyadic
//! orbit `(ξ + k)/2^j`. The filter is a genuine low-pass filter exactly when these
//! families are tight for almost every `ξ` and the dyadic limits of `|φ̂|²` reach one
//! on sets of positive measure for both signs of `k`.
//!
//! The crate is organised bottom-up:
//!
//! - [`filter`]: periodic filters, the QMF identity, built-in filters.
//! - [`dyadic`]: the signed dyadic embedding of `Z` into a sequence space.
//! - [`phase`]: exact rational frequencies and orbit arithmetic.
//! - [`measure`]: partial products `Q`, `Q̃`, the assembled `P_ξ^N` tables and limits.
//! - [`tail`]: certified tail bounds for the limiting measure.
//! - [`diagnostics`]: tightness, condition (C), dyadic limits and the final verdict.
//! - [`lattice`]: similarity dilations on `Z^d`, digit systems, tiles and
//!   multidimensional measures.
//!
//! Everything here is pure computation; IO, file formats and the command line live
//! in the companion `lowpass` crate.

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod diagnostics;
pub mod dyadic;
pub mod error;
pub mod filter;
pub mod lattice;
pub mod measure;
pub mod numeric;
pub mod phase;
pub mod tail;

pub use error::{Error, Result};
pub use filter::{FilterKind, PeriodicFilter, ReflectedFilter, UnitFilter, ValidationOutcome};
pub use phase::Phase;
