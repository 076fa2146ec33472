//! Operator monotone functions of positive matrices, realized as compressed
//! Schur complements of affine matrix pencils.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod builders;
pub mod cli;
pub mod error;
pub mod exec;
pub mod measures;
pub mod numlin;
pub mod pencil;
pub mod shorted;
pub mod verify;

pub use error::{Error, Result};
pub use exec::Execution;
