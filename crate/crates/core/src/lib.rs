//! Pseudo-spectral machinery for the stochastic surface quasi-geostrophic
//! equation on the unit torus, together with sample-path rate functionals,
//! quasi-potential estimates and Monte Carlo diagnostics.
//!
//! Everything here is `no_std` with `alloc`. File formats, configuration,
//! parallel executors and the command line live in the `sqg` crate.
//!
//! Fourier convention: `f(x) = sum_k c_k exp(2 pi i k.x)` with real fields
//! stored on the positive half-lattice. Every multiplier uses `|2 pi k|`.

#![no_std]
#![forbid(unsafe_code)]
// `!(x > 0.0)` rejects NaN as well; that is the point.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod galerkin;
pub mod ldp;
pub mod mc;
pub mod quasipotential;
pub mod rng;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
pub use num_complex::Complex64;
