use alloc::vec;
use alloc::vec::Vec;

use super::ensemble::{collect, EnsembleConfig, Executor};
use crate::error::{Error, Result};
use crate::galerkin::Observer;
use crate::ldp::{time_derivative, TestFunctionPath};
use crate::spectral::sobolev_norm_sq;
use crate::stats::{log_sum_exp, mean, std_error};

#[derive(Debug, Clone, PartialEq)]
pub struct SupermartingaleReport {
    pub times: Vec<f64>,
    /// Ensemble mean of `Q(t)` at each checkpoint; `Q(0) = 1`.
    pub mean: Vec<f64>,
    pub se: Vec<f64>,
    /// Studentized mean increment between consecutive checkpoints.
    pub increment_z: Vec<f64>,
    /// Every increment has `z <= 3`.
    pub non_increasing: bool,
}

/// Streams `F^t(phi, theta) - (1/2) int_0^t |phi|^2_{H^(2 beta)}` along a path.
struct Exponent<'a> {
    /// `phi`, `d phi/dt` and `A phi` in real coordinates at every grid time.
    phi: &'a [Vec<f64>],
    dphi: &'a [Vec<f64>],
    a_phi: &'a [Vec<f64>],
    half_sq: &'a [f64],
    nl: Vec<f64>,
    sys: &'a crate::galerkin::GalerkinSystem,
    dt: f64,
    prev: f64,
    integral: f64,
    boundary0: f64,
    every: usize,
    out: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(a, b)| a * b).sum()
}

impl Observer for Exponent<'_> {
    fn state(&mut self, n: usize, _t: f64, x: &[f64]) {
        self.sys.nonlinearity(x, &mut self.nl);
        let f = dot(x, &self.a_phi[n]) - dot(x, &self.dphi[n]) + dot(&self.nl, &self.phi[n]) - self.half_sq[n];
        if n == 0 {
            self.boundary0 = dot(x, &self.phi[0]);
        } else {
            self.integral += 0.5 * self.dt * (self.prev + f);
        }
        self.prev = f;
        if n.is_multiple_of(self.every) {
            self.out.push(dot(x, &self.phi[n]) - self.boundary0 + self.integral);
        }
    }
}

/// Ensemble mean of `Q(t) = exp{(F^t(phi, theta) - (1/2) int_0^t |phi|^2_{H^(2 beta)}) / eps}`
/// at `n_checkpoints + 1` equally spaced times, starting from the invariant
/// Gaussian. The initial functional is taken to be zero, so `Q(0) = 1`.
///
/// The exponent is evaluated with the trapezoidal rule on the integration grid.
pub fn supermartingale_check(
    phi: &TestFunctionPath,
    cfg: &EnsembleConfig,
    n_checkpoints: usize,
    exec: &impl Executor,
) -> Result<SupermartingaleReport> {
    let sys = cfg.system()?;
    let p = *sys.params();
    if !(p.epsilon > 0.0) {
        return Err(Error::param("epsilon", "the diagnostic needs epsilon > 0"));
    }
    let n_steps = p.n_steps();
    if phi.len() != n_steps + 1 {
        return Err(Error::shape("test function must be sampled on the integration grid"));
    }
    if n_checkpoints == 0 || n_steps % n_checkpoints != 0 {
        return Err(Error::param("n_checkpoints", "must divide the number of steps"));
    }
    let every = n_steps / n_checkpoints;
    let basis = sys.basis();
    let dphi_fields = time_derivative(&phi.values, p.dt)?;
    let phi_r: Vec<Vec<f64>> = phi.values.iter().map(|f| basis.to_real(f)).collect();
    let dphi_r: Vec<Vec<f64>> = dphi_fields.iter().map(|f| basis.to_real(f)).collect();
    let a_phi: Vec<Vec<f64>> = phi_r.iter().map(|v| v.iter().zip(sys.decay()).map(|(x, a)| a * x).collect()).collect();
    let half_sq: Vec<f64> = phi.values.iter().map(|f| 0.5 * sobolev_norm_sq(f, 2.0 * p.beta)).collect();

    let exponents = collect(exec.map(cfg.n_traj, |i| {
        let traj = cfg.first_traj + i as u64;
        let x0 = cfg.initial_state(&sys, traj);
        let mut obs = Exponent {
            phi: &phi_r,
            dphi: &dphi_r,
            a_phi: &a_phi,
            half_sq: &half_sq,
            nl: vec![0.0; sys.dim()],
            sys: &sys,
            dt: p.dt,
            prev: 0.0,
            integral: 0.0,
            boundary0: 0.0,
            every,
            out: Vec::with_capacity(n_checkpoints + 1),
        };
        sys.run(&x0, None, traj, &mut obs)?;
        Ok(obs.out.iter().map(|v| v / p.epsilon).collect::<Vec<f64>>())
    }))?;

    // One common shift keeps every exponential finite; it cancels in z.
    let all: Vec<f64> = exponents.iter().flatten().copied().collect();
    let shift = all.iter().copied().fold(f64::NEG_INFINITY, f64::max).max(0.0);
    let scale = libm::exp(shift);
    let q: Vec<Vec<f64>> = exponents.iter().map(|e| e.iter().map(|v| libm::exp(v - shift)).collect()).collect();

    let mut times = Vec::with_capacity(n_checkpoints + 1);
    let mut means = Vec::with_capacity(n_checkpoints + 1);
    let mut ses = Vec::with_capacity(n_checkpoints + 1);
    for c in 0..=n_checkpoints {
        times.push((c * every) as f64 * p.dt);
        let col: Vec<f64> = exponents.iter().map(|e| e[c]).collect();
        means.push(libm::exp(log_sum_exp(&col) - libm::log(col.len() as f64)));
        let scaled: Vec<f64> = q.iter().map(|r| r[c]).collect();
        ses.push(std_error(&scaled) * scale);
    }
    let mut increment_z = Vec::with_capacity(n_checkpoints);
    for c in 0..n_checkpoints {
        let d: Vec<f64> = q.iter().map(|r| r[c + 1] - r[c]).collect();
        let se = std_error(&d);
        let m = mean(&d);
        increment_z.push(if se > 0.0 {
            m / se
        } else if m > 0.0 {
            f64::INFINITY
        } else {
            0.0
        });
    }
    let non_increasing = increment_z.iter().all(|z| *z <= 3.0);
    Ok(SupermartingaleReport { times, mean: means, se: ses, increment_z, non_increasing })
}
