//! Sample-path rate functional of the skeleton equation: control recovery,
//! initial and dynamic costs, the variational form, time reversal and the
//! energy balances.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::galerkin::{ControlPath, Trajectory};
use crate::spectral::ops::{advection_on, lambda};
use crate::spectral::{nonlinear_pairing_commutator, sobolev_inner, sobolev_norm_sq, Grid, LpProfile, SpectralField};

/// A smooth-in-time test function sampled on a trajectory grid.
pub type TestFunctionPath = ControlPath;

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    /// `|theta(0)|^2_{H^(alpha - 2 beta)}`.
    pub i0: f64,
    /// `1/2 int |g|^2_{L2}`, trapezoidal.
    pub i_dyna: f64,
    pub total: f64,
    pub recovered_control: ControlPath,
    /// `|g(t_i)|_{L2}` per grid point: the skeleton residual in `H^(-2 beta)`.
    pub per_step_residual_norm: Vec<f64>,
}

/// Time derivative on a uniform grid: central differences inside, second-order
/// one-sided stencils at both ends.
pub fn time_derivative(states: &[SpectralField], dt: f64) -> Result<Vec<SpectralField>> {
    let n = states.len();
    if n < 3 {
        return Err(Error::usage("time derivative needs at least two steps"));
    }
    let h = 1.0 / (2.0 * dt);
    let mut out = Vec::with_capacity(n);
    let combo = |terms: &[(f64, &SpectralField)]| {
        let mut f = SpectralField::zeros(states[0].kmax());
        for &(c, s) in terms {
            f.axpy(c * h, s)?;
        }
        Ok::<_, Error>(f)
    };
    out.push(combo(&[(-3.0, &states[0]), (4.0, &states[1]), (-1.0, &states[2])])?);
    for i in 1..n - 1 {
        out.push(combo(&[(1.0, &states[i + 1]), (-1.0, &states[i - 1])])?);
    }
    out.push(combo(&[(3.0, &states[n - 1]), (-4.0, &states[n - 2]), (1.0, &states[n - 3])])?);
    Ok(out)
}

/// `P_m N(theta)` with the box of `theta` kept.
pub(crate) fn galerkin_nonlinearity(theta: &SpectralField, m: usize, grid: &Grid) -> SpectralField {
    let mut n = advection_on(theta, grid);
    let r2 = (m * m) as i64;
    for i in 0..n.len() {
        if n.mode_at(i).norm_sq() > r2 {
            n.coeffs_mut()[i] = Default::default();
        }
    }
    n
}

/// Skeleton residual `D_t theta + Lambda^(2 alpha) theta + P_m N(theta)` at every grid point.
pub(crate) fn skeleton_residual(traj: &Trajectory, sign_linear: f64) -> Result<Vec<SpectralField>> {
    if traj.steps() < 2 {
        return Err(Error::usage("control recovery needs a trajectory with at least two steps"));
    }
    let p = &traj.params;
    let dtheta = time_derivative(&traj.states, traj.dt())?;
    let grid = Grid::for_kmax(traj.kmax(), 2);
    let mut out = Vec::with_capacity(traj.len());
    for (th, d) in traj.states.iter().zip(dtheta) {
        let mut r = d;
        r.axpy(sign_linear, &lambda(th, 2.0 * p.alpha))?;
        r.axpy(1.0, &galerkin_nonlinearity(th, p.m, &grid))?;
        out.push(r);
    }
    Ok(out)
}

/// The unique control that drives `traj` through the skeleton equation:
/// `g = Lambda^(-2 beta) (D_t theta + Lambda^(2 alpha) theta + P_m N(theta))`.
pub fn recover_control(traj: &Trajectory) -> Result<ControlPath> {
    let res = skeleton_residual(traj, 1.0)?;
    let beta = traj.params.beta;
    let values = res.iter().map(|r| lambda(r, -2.0 * beta)).collect();
    ControlPath::new(traj.times.clone(), values)
}

pub fn rate(traj: &Trajectory) -> Result<RateReport> {
    let g = recover_control(traj)?;
    let i0 = sobolev_norm_sq(traj.first(), traj.params.energy_index());
    let per_step_residual_norm: Vec<f64> = g.values.iter().map(|v| v.l2_norm()).collect();
    let i_dyna = 0.5 * g.l2_sq_integral();
    Ok(RateReport { i0, i_dyna, total: i0 + i_dyna, recovered_control: g, per_step_residual_norm })
}

/// `Lambda_1^T(phi, theta) = F^T(phi, theta) - 1/2 int |Lambda^(2 beta) phi|^2`, with
///
/// ```text
/// F^T = <theta(T), phi(T)> - <theta(0), phi(0)> - int <theta, d_t phi>
///       + int <theta, Lambda^(2 alpha) phi> + int <N(theta), phi>
/// ```
///
/// The nonlinear pairing uses the commutator split at level `j`
/// (the midpoint of the admissible range when `None`). For Galerkin
/// trajectories the bound `Lambda_1^T <= I_dyna` holds for `phi` in `P_m`.
pub fn variational_functional(traj: &Trajectory, phi: &TestFunctionPath, j: Option<i32>) -> Result<f64> {
    if phi.len() != traj.len() {
        return Err(Error::shape("test function and trajectory grids differ"));
    }
    if traj.steps() < 2 {
        return Err(Error::usage("variational functional needs at least two steps"));
    }
    let p = &traj.params;
    let k = traj.kmax();
    let j = j.unwrap_or_else(|| LpProfile::for_kmax(k).midpoint());
    let dt = traj.dt();
    let dphi = time_derivative(&phi.values, dt)?;
    let n = traj.len();
    let mut integrand = Vec::with_capacity(n);
    for i in 0..n {
        let th = &traj.states[i];
        let ph = phi.values[i].resized(k);
        let lin = th.inner(&lambda(&ph, 2.0 * p.alpha))? - th.inner(&dphi[i].resized(k))?;
        let nl = nonlinear_pairing_commutator(th, &phi.values[i], j)?;
        let quad = 0.5 * sobolev_norm_sq(&phi.values[i], 2.0 * p.beta);
        integrand.push(lin + nl - quad);
    }
    let boundary = traj.last().inner(&phi.values[n - 1].resized(k))? - traj.first().inner(&phi.values[0].resized(k))?;
    Ok(boundary + crate::galerkin::trapezoid(&integrand, dt))
}

/// `theta -> -theta(T - .)` on the same grid.
pub fn time_reverse(traj: &Trajectory) -> Trajectory {
    let states = traj.states.iter().rev().map(|s| s.scaled(-1.0)).collect();
    Trajectory { params: traj.params, times: traj.times.clone(), states }
}

/// Control that drives the reversed path:
/// `g~(t) = g(T - t) - 2 Lambda^(2 alpha - 2 beta) theta(T - t)`.
pub fn reversed_control(traj: &Trajectory, g: &ControlPath) -> Result<ControlPath> {
    if g.len() != traj.len() {
        return Err(Error::shape("control and trajectory grids differ"));
    }
    let s = traj.params.dissipation_index();
    let k = traj.kmax();
    let values = traj
        .states
        .iter()
        .zip(&g.values)
        .rev()
        .map(|(th, gv)| {
            let mut v = gv.resized(k);
            v.axpy(-2.0, &lambda(th, s)).map(|_| v)
        })
        .collect::<Result<Vec<_>>>()?;
    ControlPath::new(traj.times.clone(), values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnergyMode {
    /// `L2` balance, available when `beta = alpha/2`.
    Kinetic,
    /// `H^(alpha - 2 beta)` balance.
    Generalized,
}

/// Defect of the energy equality over the whole horizon,
/// `1/2 |theta(T)|_a^2 + int |theta|_b^2 - 1/2 |theta(0)|_a^2 - int <Lambda^c theta, g>`,
/// with `(a, b, c) = (0, alpha, alpha)` for the kinetic balance and
/// `(alpha - 2 beta, 2 alpha - 2 beta, 2 alpha - 2 beta)` for the generalized one.
/// Trapezoidal in time.
pub fn energy_residual(traj: &Trajectory, g: &ControlPath, mode: EnergyMode) -> Result<f64> {
    let p = &traj.params;
    let (a, b, pair) = match mode {
        EnergyMode::Kinetic => {
            if !p.is_kinetic() {
                return Err(Error::usage("kinetic energy balance requires beta = alpha/2"));
            }
            (0.0, p.alpha, p.alpha)
        }
        EnergyMode::Generalized => (p.energy_index(), p.dissipation_index(), p.dissipation_index()),
    };
    if g.len() != traj.len() {
        return Err(Error::shape("control and trajectory grids differ"));
    }
    let k = traj.kmax();
    let mut integrand = Vec::with_capacity(traj.len());
    for (th, gv) in traj.states.iter().zip(&g.values) {
        let flux = lambda(th, pair).inner(&gv.resized(k))?;
        integrand.push(sobolev_norm_sq(th, b) - flux);
    }
    let end = 0.5 * sobolev_norm_sq(traj.last(), a) - 0.5 * sobolev_norm_sq(traj.first(), a);
    Ok(end + crate::galerkin::trapezoid(&integrand, traj.dt()))
}

/// Right-hand side of the reversed-path cost identity:
/// `|theta(T)|^2_{H^(alpha-2beta)} + 1/2 int |g|^2 + 2 int |theta|^2_{H^(2alpha-2beta)}
///  - 2 int <Lambda^(2alpha-2beta) theta, g>`.
pub fn reversed_cost_identity(traj: &Trajectory, g: &ControlPath) -> Result<f64> {
    let p = &traj.params;
    let s = p.dissipation_index();
    let k = traj.kmax();
    let mut integrand = Vec::with_capacity(traj.len());
    for (th, gv) in traj.states.iter().zip(&g.values) {
        let gk = gv.resized(k);
        integrand.push(
            0.5 * gk.l2_norm_sq() + 2.0 * sobolev_norm_sq(th, s) - 2.0 * sobolev_inner(&lambda(th, s), &gk, 0.0)?,
        );
    }
    Ok(sobolev_norm_sq(traj.last(), p.energy_index()) + crate::galerkin::trapezoid(&integrand, traj.dt()))
}
