//! Numerics for local isoperimetric inequalities on one-dimensional
//! MCP(K,N) spaces.
//!
//! The crate is `no_std` (with `alloc`): comparison kernels, the optimal
//! model densities and their isoperimetric profile, Minkowski content on
//! interval sets, and synthetic needle decompositions. IO and the command
//! line live in the companion `isoprofile` crate.
#![no_std]
// negated comparisons double as NaN rejection
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod config;
pub mod density;
pub mod error;
pub mod geometry;
pub mod kernels;
pub mod needles;
pub mod profile;
pub mod quadrature;
pub mod roots;

pub use error::{Error, Result};
