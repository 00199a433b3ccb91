//! Desk-scale computations around matrix summability of subsequences.
//!
//! The crate is organised in layers:
//!
//! - [`setlang`]: a tiny description language for subsets of `N = {1, 2, ...}` with exact
//!   membership, prefix counts and density analysis.
//! - [`ideals`]: presentations of the ideals `Fin`, `Z`, `BD`, `Fin x Fin` and ideals induced by
//!   nonnegative regular matrices, with three-valued membership verdicts and interval-partition
//!   witnesses.
//! - [`summability`]: summability matrices, exact transforms, row profiles and regularity verdicts.
//! - [`sigma`]: strictly increasing selectors, the image metric and its modulus of continuity.
//! - [`constructions`]: ideal-limit estimation, oscillation certificates, escape extensions and
//!   the 0/1 adversary.
//! - [`games`]: the filter game on an ideal, strategies for both players and diagonalization data.
//!
//! All verdict-path arithmetic is exact ([`Rational`] is an arbitrary-precision fraction).

pub mod constructions;
pub mod error;
pub mod games;
pub mod ideals;
pub mod rational;
pub mod sequence;
pub mod setlang;
pub mod sigma;
pub mod summability;

pub use error::{Error, Result};
pub use rational::Rational;
