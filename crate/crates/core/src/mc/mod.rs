//! Ensembles of the stochastic Galerkin system and the statistics built on
//! them: threshold probabilities, stationary moments, time reversal,
//! importance sampling under a Girsanov tilt, the exponential
//! supermartingale and Gaussian exponential moments.
//!
//! Trajectory `i` of a seed always uses noise stream `i`, so results do not
//! depend on how an [`Executor`] schedules the work.

mod ensemble;
mod moments;
mod reversibility;
mod stationary;
mod supermartingale;
mod tilt;

pub use ensemble::{mc_estimate, EnsembleConfig, Executor, Functional, InitialLaw, McEstimate, Sequential};
pub use moments::{gaussian_exp_moment, ExpMomentReport};
pub use reversibility::{
    default_panel, reversibility_test, PanelEntry, PanelRow, ReversibilityConfig, ReversibilityReport,
};
pub use stationary::{stationary_moments, InvarianceReport, MomentRow, StationaryConfig};
pub use supermartingale::{supermartingale_check, SupermartingaleReport};
pub use tilt::{tilt_simulate, TiltResult, TiltTarget};

/// |z| below which a studentized difference passes.
pub const Z_PASS: f64 = 4.0;
