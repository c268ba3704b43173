//! Spectral representation of real, mean-zero fields on the unit torus.

mod field;
mod grid;
pub mod lp;
mod mode;
pub(crate) mod ops;

pub use field::SpectralField;
pub use grid::{dealiased_product, Grid, PhysicalField};
pub use lp::{lp_block, lp_high, lp_low, lp_split, LpProfile, LpSplit};
pub use mode::ModeIndex;
pub use ops::{
    advection, apply_lambda, apply_multiplier, commutator, derivative, nonlinear_pairing, nonlinear_pairing_commutator,
    riesz, riesz_velocity, sobolev_inner, sobolev_norm, sobolev_norm_sq,
};
