//! Restricted quasi-potential through the reversed relaxation path.
//!
//! Relaxing the unforced dynamics from `-phi` and applying
//! `theta -> -theta(-.)` gives a path that ends at `phi` and solves the
//! reversed (anti-dissipative) equation. Its cost is compared with the
//! Gaussian rate `|phi|^2_{H^(alpha - 2 beta)}`; the infinite-horizon tail is
//! reported explicitly instead of being dropped.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::galerkin::{trapezoid, GalerkinSystem, SqgParams, Trajectory};
use crate::ldp::{skeleton_residual, time_reverse};
use crate::spectral::{sobolev_norm, sobolev_norm_sq, SpectralField};

#[derive(Debug, Clone, PartialEq)]
pub struct RelaxationResult {
    /// Unforced path on `[0, T*]`, uniform grid with `dt' <= dt`.
    pub path: Trajectory,
    pub t_star: f64,
    /// `|theta(T*)|^2_{H^(alpha - 2 beta)}`.
    pub tail: f64,
}

const SECANT_ITERS: usize = 40;

fn energy_norm(sys: &GalerkinSystem, x: &[f64]) -> f64 {
    let p = sys.params();
    sobolev_norm(&sys.basis().from_real(x), p.energy_index())
}

/// Runs `n` uniform steps over `[0, t]`, returning every state.
fn integrate(params: &SqgParams, x0: &[f64], t: f64, n: usize) -> Result<(GalerkinSystem, Vec<Vec<f64>>)> {
    let p = SqgParams { epsilon: 0.0, t_final: t, dt: t / n as f64, ..*params };
    let sys = GalerkinSystem::new(&p)?;
    let mut rec = crate::galerkin::Recorder::new(1, false);
    sys.run(x0, None, 0, &mut rec)?;
    Ok((sys, rec.states))
}

/// Unforced Galerkin relaxation from `phi` until
/// `|theta(t)|_{H^(alpha - 2 beta)} = tol_rel |phi|_{H^(alpha - 2 beta)}`.
///
/// The first crossing is located on the grid of `params.dt`, then `T*` is
/// refined by secant iteration with the step count held fixed, so the final
/// path has a uniform step `T*/N <= dt` and hits the threshold exactly.
/// `params.t_final` bounds the search.
pub fn relax(phi: &SpectralField, params: &SqgParams, tol_rel: f64) -> Result<RelaxationResult> {
    if !(tol_rel > 0.0 && tol_rel < 1.0) {
        return Err(Error::param("tol_rel", "must lie in (0, 1)"));
    }
    let p0 = SqgParams { epsilon: 0.0, ..*params };
    let sys = GalerkinSystem::new(&p0)?;
    let x0 = sys.basis().to_real(phi);
    let norm0 = energy_norm(&sys, &x0);
    if norm0 == 0.0 {
        let path = Trajectory::new(
            SqgParams { t_final: 0.0, ..p0 },
            alloc::vec![0.0],
            alloc::vec![sys.basis().from_real(&x0)],
        )?;
        return Ok(RelaxationResult { path, t_star: 0.0, tail: 0.0 });
    }
    let target = tol_rel * norm0;

    // Coarse search on the nominal grid.
    let mut x = x0.clone();
    let mut work = Default::default();
    let zero = alloc::vec![0.0; x.len()];
    let mut n = 0usize;
    let mut prev = norm0;
    let mut cur = norm0;
    let max_steps = params.n_steps();
    while cur >= target {
        if n == max_steps {
            return Err(Error::NonConvergence {
                what: "relaxation",
                detail: alloc::format!("norm ratio {:e} at T_max = {}", cur / norm0, params.t_final),
            });
        }
        prev = cur;
        sys.step(&mut x, &zero, &mut work);
        n += 1;
        cur = energy_norm(&sys, &x);
        if !cur.is_finite() {
            return Err(Error::BlowUp { time: n as f64 * params.dt, norm: cur });
        }
    }

    // Secant on h(T) = |theta_N(T)| - target with N = n steps; bracket from
    // log-linear interpolation of the coarse crossing.
    let dt = params.dt;
    let (lo, hi) = ((n - 1) as f64 * dt, n as f64 * dt);
    let guess = if prev > cur { lo + dt * libm::log(prev / target) / libm::log(prev / cur) } else { hi };
    let h = |t: f64| -> Result<(f64, Vec<Vec<f64>>, GalerkinSystem)> {
        let (s, states) = integrate(params, &x0, t, n)?;
        let v = energy_norm(&s, states.last().expect("states")) - target;
        Ok((v, states, s))
    };
    let mut t_a = hi;
    let (mut h_a, mut best, mut best_sys) = h(t_a)?;
    let mut t_b = guess.clamp(lo.max(dt * 1e-3), hi);
    let mut t_star = t_a;
    for _ in 0..SECANT_ITERS {
        let (h_b, states_b, sys_b) = h(t_b)?;
        t_star = t_b;
        best = states_b;
        best_sys = sys_b;
        if h_b.abs() <= 1e-14 * target || h_b == h_a {
            break;
        }
        let t_next = t_b - h_b * (t_b - t_a) / (h_b - h_a);
        t_a = t_b;
        h_a = h_b;
        t_b = t_next.clamp(0.5 * lo, 1.5 * hi);
        if (t_b - t_a).abs() <= 1e-15 * t_a {
            break;
        }
    }

    let tail = sobolev_norm_sq(&best_sys.basis().from_real(best.last().expect("states")), params.energy_index());
    let step = t_star / n as f64;
    let params_path = SqgParams { epsilon: 0.0, t_final: t_star, dt: step, ..*params };
    let times = (0..=n).map(|i| i as f64 * step).collect();
    let states = best.iter().map(|x| best_sys.basis().from_real(x)).collect();
    Ok(RelaxationResult { path: Trajectory::new(params_path, times, states)?, t_star, tail })
}

/// `1/2 int |d_t theta + Lambda^(2 alpha) theta + N(theta)|^2_{H^(-2 beta)}`,
/// with the same stencils and quadrature as control recovery.
pub fn s_cost(path: &Trajectory) -> Result<f64> {
    if path.steps() < 2 {
        return trivial_path(path);
    }
    residual_cost(path, 1.0)
}

fn trivial_path(path: &Trajectory) -> Result<f64> {
    if path.states.iter().all(|s| s.max_abs() == 0.0) {
        Ok(0.0)
    } else {
        Err(Error::usage("path cost needs at least two steps"))
    }
}

fn residual_cost(path: &Trajectory, sign_linear: f64) -> Result<f64> {
    let res = skeleton_residual(path, sign_linear)?;
    let b = path.params.beta;
    let v: Vec<f64> = res.iter().map(|r| sobolev_norm_sq(r, -2.0 * b)).collect();
    Ok(0.5 * trapezoid(&v, path.dt()))
}

/// The two terms of `S = 1/2 int |d_t theta - Lambda^(2 alpha) theta + N|^2_{H^(-2 beta)}
/// + (|theta(end)|^2 - |theta(start)|^2)_{H^(alpha - 2 beta)}`.
pub fn s_cost_split(path: &Trajectory) -> Result<(f64, f64)> {
    if path.steps() < 2 {
        return trivial_path(path).map(|_| (0.0, 0.0));
    }
    let s = path.params.energy_index();
    let boundary = sobolev_norm_sq(path.last(), s) - sobolev_norm_sq(path.first(), s);
    Ok((residual_cost(path, -1.0)?, boundary))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiPotentialReport {
    /// Cost of the reversed relaxation path.
    pub estimate: f64,
    /// `|phi|^2_{H^(alpha - 2 beta)}`.
    pub gaussian_rate: f64,
    pub tail: f64,
    pub t_star: f64,
    /// Step of the refined path.
    pub dt: f64,
    /// `(estimate + tail - gaussian_rate) / gaussian_rate`.
    pub relative_gap: f64,
}

/// Reversed relaxation path ending at `phi`.
pub fn reversed_relaxation(
    phi: &SpectralField,
    params: &SqgParams,
    tol_rel: f64,
) -> Result<(Trajectory, RelaxationResult)> {
    let relaxed = relax(&phi.scaled(-1.0), params, tol_rel)?;
    Ok((time_reverse(&relaxed.path), relaxed))
}

pub fn quasi_potential(phi: &SpectralField, params: &SqgParams, tol_rel: f64) -> Result<QuasiPotentialReport> {
    let rate = sobolev_norm_sq(phi, params.energy_index());
    if rate == 0.0 {
        return Ok(QuasiPotentialReport {
            estimate: 0.0,
            gaussian_rate: 0.0,
            tail: 0.0,
            t_star: 0.0,
            dt: params.dt,
            relative_gap: 0.0,
        });
    }
    let (path, relaxed) = reversed_relaxation(phi, params, tol_rel)?;
    let estimate = s_cost(&path)?;
    Ok(QuasiPotentialReport {
        estimate,
        gaussian_rate: rate,
        tail: relaxed.tail,
        t_star: relaxed.t_star,
        dt: path.dt(),
        relative_gap: (estimate + relaxed.tail - rate) / rate,
    })
}
