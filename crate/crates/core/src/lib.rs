//! Numerical companion for Riesz potentials against non-doubling measures:
//! finite point-mass measures, the operators `I_α`, `M_α` and `M`, dyadic
//! coverings, weights and empirical good-λ constants.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod covering;
pub mod error;
pub mod generators;
pub mod harness;
pub mod measure;
pub mod potential;
pub mod weights;

pub use error::{Error, Result};
