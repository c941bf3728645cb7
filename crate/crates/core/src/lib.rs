//! Higher-order polynomial lattice rules over prime fields.
//!
//! The crate is `no_std` (it needs `alloc`). It covers:
//!
//! - [`gfpoly`]: polynomials over `F_b`, moduli, generators and the `v_n` map,
//! - [`walsh`]: the one-dimensional Walsh kernel `omega_alpha` by several routes,
//! - [`wce`]: worst-case errors in the weighted Walsh space,
//! - [`convolve`]: arbitrary-length FFT and circular correlation,
//! - [`pointgen`]: point sets and generating matrices,
//! - [`cbc`]: naive and fast component-by-component construction.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod cbc;
pub mod convolve;
mod error;
pub mod gfpoly;
pub mod pointgen;
pub mod walsh;
pub mod wce;

pub use error::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;
