//! High-dimensional quadratic discriminant analysis under the rare-and-weak signal model.
//!
//! The crate is `no_std` (with `alloc`). The `std` feature forwards to the `std` features of
//! its dependencies.

#![cfg_attr(not(any(test, feature = "std")), no_std)]
// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod arw;
pub mod classify;
pub mod error;
pub mod linalg;
pub mod math;
pub mod moments;
pub mod precision;
pub mod rng;

pub use error::{Error, Result};
