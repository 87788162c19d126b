//! Numerical core for random products of operators driven by rotations and
//! the doubling map.
//!
//! Everything here is pure computation: exact torus arithmetic, continued
//! fractions, Birkhoff sums of step functions, Monte-Carlo distribution
//! statistics, and truncated models of adjoint multipliers on the Hardy space
//! and of differential/affine operators on entire functions. The crate is
//! `no_std` and only needs `alloc`; IO, file formats and the command line live
//! in the `ergolin` crate.

#![no_std]

extern crate alloc;

pub mod birkhoff;
pub mod cf;
pub mod clt;
pub mod entire;
mod error;
pub mod hardy;
pub mod precision;
pub mod rng;
pub mod stats;
pub mod torus;
pub mod xfloat;

pub use error::{Error, Result};
