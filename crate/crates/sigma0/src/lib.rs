//! Exact arithmetic in real quadratic fields, relative quadratic orders and
//! the closed-geodesic statistics built on top of them.
//!
//! The crate is `no_std` with `alloc`. Floating point goes through
//! [`num_traits::Float`] backed by `libm`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod beurling;
mod error;
pub mod field;
pub mod geodesics;
pub mod intmat;
pub mod lattice;
pub mod mu;
pub mod orders;
pub mod quad;
pub mod stats;
pub mod testfn;

pub use error::{Error, Result};
pub use field::{BaseField, FieldElement, IdealK, SignReport};
