//! Galerkin-truncated skeleton equation and stochastic dynamics.
//!
//! The truncation `P_m` keeps the modes `0 < |k| <= m`. Internally the state is
//! a vector of real-basis coordinates (see [`RealBasis`]); trajectories and
//! controls are exposed as [`SpectralField`](crate::spectral::SpectralField)s.

mod basis;
mod energy;
mod integrate;
mod noise;
mod params;
mod system;

pub use basis::{b_coefficient, BTensor, Component, RealBasis};
pub use energy::energy_identity_residual;
pub(crate) use integrate::trapezoid;
pub use integrate::{
    sample_gaussian_initial, simulate_sde, simulate_sde_recorded, solve_skeleton, ControlPath, NoiseIncrements,
    Recorder, SdeRecord, Trajectory,
};
pub use noise::{hs_norm_sq, hs_norm_sq_cutoff, noise_spec, scaling_ok, scaling_table, NoiseSpec, ScalingDiagnostic};
pub use params::SqgParams;
pub use system::{DriftMode, GalerkinSystem, Kernel, Observer};
