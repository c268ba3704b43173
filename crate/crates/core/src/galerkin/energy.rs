use alloc::vec::Vec;

use super::basis::RealBasis;
use super::integrate::{cumulative_trapezoid, NoiseIncrements, Trajectory};
use super::noise::{hs_norm_sq, regulariser};
use crate::error::{Error, Result};
use crate::spectral::sobolev_norm_sq;

/// Residual of the Ito energy balance in `H^(alpha - 2 beta)` at every grid time:
///
/// ```text
/// 1/2 |theta(t)|^2 + int_0^t |theta|^2_{H^(2 alpha - 2 beta)}
///   - 1/2 |theta(0)|^2 - sqrt(eps) int <Lambda^(2 alpha - 2 beta) theta, sqrt(Q) dW>
///   - (eps/2) |Lambda^alpha sqrt(Q)|_HS^2 t
/// ```
///
/// The time integral is trapezoidal; the stochastic integral uses the left
/// endpoint of each step (Ito). Only meaningful for uncontrolled runs.
/// Increments may be omitted when `epsilon = 0`.
pub fn energy_identity_residual(traj: &Trajectory, increments: Option<&NoiseIncrements>) -> Result<Vec<f64>> {
    let quiet;
    let inc = match increments {
        Some(inc) => inc,
        None if traj.params.epsilon == 0.0 => {
            quiet = NoiseIncrements {
                dw: alloc::vec![alloc::vec![0.0; RealBasis::new(traj.params.m).dim()]; traj.steps()],
            };
            &quiet
        }
        None => return Err(Error::usage("energy audit needs the recorded noise increments")),
    };
    if inc.dw.len() != traj.steps() {
        return Err(Error::usage(alloc::format!(
            "{} increments for {} steps; record the run with stride 1",
            inc.dw.len(),
            traj.steps()
        )));
    }
    let p = &traj.params;
    let dt = traj.dt();
    let s_energy = p.energy_index();
    let s_diss = p.dissipation_index();
    let basis = RealBasis::new(p.m);
    let weight: Vec<f64> = (0..basis.dim())
        .map(|i| {
            let k = basis.wave(i);
            k.wavenumber_pow(s_diss) * regulariser(k.wavenumber(), p.delta, p.s_reg)
        })
        .collect();

    let energy: Vec<f64> = traj.states.iter().map(|s| 0.5 * sobolev_norm_sq(s, s_energy)).collect();
    let diss: Vec<f64> = traj.states.iter().map(|s| sobolev_norm_sq(s, s_diss)).collect();
    let diss_int = cumulative_trapezoid(&diss, dt);
    let hs = if p.epsilon > 0.0 { hs_norm_sq(p) } else { 0.0 };
    let sqrt_eps = libm::sqrt(p.epsilon);

    let mut out = Vec::with_capacity(traj.len());
    let mut mart = 0.0;
    for (n, t) in traj.times.iter().enumerate() {
        if n > 0 {
            let x = basis.to_real(&traj.states[n - 1]);
            let dw = &inc.dw[n - 1];
            let mut s = 0.0;
            for i in 0..x.len() {
                s += weight[i] * x[i] * dw[i];
            }
            mart += sqrt_eps * s;
        }
        out.push(energy[n] + diss_int[n] - energy[0] - mart - 0.5 * p.epsilon * hs * t);
    }
    Ok(out)
}
