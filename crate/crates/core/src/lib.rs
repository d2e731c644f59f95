//! Pseudohermitian geometry on the Heisenberg group.
//!
//! The crate is `no_std` with `alloc`. Float math goes through `libm`.
//! Enable the `std` feature only to get `std::error::Error` interop through
//! `core::error::Error`; nothing else depends on it.

#![cfg_attr(not(any(test, feature = "std")), no_std)]

extern crate alloc;

pub mod diffops;
pub mod error;
pub mod fefferman;
pub mod field;
pub mod flat_boundary;
pub mod heis;
pub mod immersions;
pub mod linalg;
pub mod scalar;
pub mod weierstrass;
pub mod yamabe;

pub use error::{Constraint, Error, Result};
pub use heis::{FrameKind, HPoint, TangentVector};
pub use num_complex::Complex64;
