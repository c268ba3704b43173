use alloc::vec;
use alloc::vec::Vec;

use super::basis::{BTensor, RealBasis};
use super::noise::regulariser;
use super::params::SqgParams;
use crate::error::{Error, Result};
use crate::rng::CounterRng;
use crate::spectral::{ops::advection_on, Grid};

/// How `P_m N` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    /// Contraction with the sparse structure tensor.
    Tensor,
    /// Dealiased pseudo-spectral product.
    Spectral,
}

/// Test hooks for the drift.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriftMode {
    Full,
    /// Nonlinearity switched off: independent Ornstein-Uhlenbeck modes.
    Linear,
    /// Nonlinearity with its sign flipped on every sine coordinate. Breaks
    /// energy conservation and hence the Gaussian invariant law.
    Mutated,
}

/// Largest real dimension for which [`Kernel::Tensor`] is picked automatically.
const TENSOR_AUTO_DIM: usize = 64;

/// Receives the state after each step and the Brownian increments that
/// produced it.
pub trait Observer {
    fn state(&mut self, _n: usize, _t: f64, _x: &[f64]) {}
    /// `dw` drives the step from `t_n` to `t_{n+1}`; entries are `N(0, dt)`.
    fn increment(&mut self, _n: usize, _dw: &[f64]) {}
}

impl Observer for () {}

/// The truncated system `dX = (-A X - P_m N(X) + Lambda^(2 beta) g) dt + sigma dW`
/// in real coordinates, with its exponential time-stepping coefficients.
///
/// One step (second-order exponential Runge-Kutta, Cox-Matthews form):
///
/// ```text
/// y      = E x + phi1 D(x) + eta
/// x_next = y + phi2 (D(y) - D(x))
/// ```
///
/// where `E = exp(-A dt)`, `D = -P_m N` and `eta` is the additive forcing of
/// the step: the exact integral of the piecewise-linear control against the
/// semigroup plus the exact stochastic convolution of the noise. With no noise
/// and no control `eta = 0` bit for bit, so the stochastic and deterministic
/// solvers coincide.
#[derive(Debug, Clone)]
pub struct GalerkinSystem {
    params: SqgParams,
    basis: RealBasis,
    decay: Vec<f64>,
    e: Vec<f64>,
    phi1: Vec<f64>,
    phi2: Vec<f64>,
    force: Vec<f64>,
    sigma: Vec<f64>,
    noise_scale: Vec<f64>,
    lambda: Vec<f64>,
    tensor: Option<BTensor>,
    grid: Grid,
    kernel: Kernel,
    drift: DriftMode,
    blowup_factor: f64,
    blowup_floor: f64,
}

/// `(1 - e^-z) / z` and `(e^-z - 1 + z) / z^2`, stable for small `z`.
fn etd_weights(z: f64) -> (f64, f64) {
    if z < 1e-3 {
        let w1 = 1.0 - z / 2.0 + z * z / 6.0 - z * z * z / 24.0;
        let w2 = 0.5 - z / 6.0 + z * z / 24.0 - z * z * z / 120.0;
        (w1, w2)
    } else {
        let em1 = libm::expm1(-z);
        (-em1 / z, (em1 + z) / (z * z))
    }
}

impl GalerkinSystem {
    pub fn new(params: &SqgParams) -> Result<Self> {
        params.validate()?;
        let basis = RealBasis::new(params.m);
        let dim = basis.dim();
        let dt = params.dt;
        let decay = basis.multiplier(2.0 * params.alpha);
        let force = basis.multiplier(2.0 * params.beta);
        let mut e = vec![0.0; dim];
        let mut phi1 = vec![0.0; dim];
        let mut phi2 = vec![0.0; dim];
        let mut sigma = vec![0.0; dim];
        let mut noise_scale = vec![0.0; dim];
        let mut lambda = vec![0.0; dim];
        let sqrt_eps = libm::sqrt(params.epsilon);
        for i in 0..dim {
            let a = decay[i];
            let z = a * dt;
            let (w1, w2) = etd_weights(z);
            e[i] = libm::exp(-z);
            phi1[i] = w1 * dt;
            phi2[i] = w2 * dt;
            lambda[i] = regulariser(basis.wave(i).wavenumber(), params.delta, params.s_reg);
            sigma[i] = sqrt_eps * force[i] * lambda[i];
            // Var of int_0^dt e^{-a(dt-s)} dW(s) is (1 - e^{-2z}) / (2a).
            let conv = -libm::expm1(-2.0 * z) / (2.0 * z);
            noise_scale[i] = sigma[i] * libm::sqrt(conv);
        }
        let kernel = if dim <= TENSOR_AUTO_DIM { Kernel::Tensor } else { Kernel::Spectral };
        let tensor = (kernel == Kernel::Tensor).then(|| BTensor::new(&basis));
        Ok(GalerkinSystem {
            params: *params,
            grid: Grid::for_kmax(params.m, 2),
            basis,
            decay,
            e,
            phi1,
            phi2,
            force,
            sigma,
            noise_scale,
            lambda,
            tensor,
            kernel,
            drift: DriftMode::Full,
            blowup_factor: 1e3,
            blowup_floor: 1.0,
        })
    }

    pub fn with_kernel(mut self, kernel: Kernel) -> Self {
        if kernel == Kernel::Tensor && self.tensor.is_none() {
            self.tensor = Some(BTensor::new(&self.basis));
        }
        self.kernel = kernel;
        self
    }

    pub fn with_drift(mut self, drift: DriftMode) -> Self {
        self.drift = drift;
        self
    }

    /// Abort once `|X| > factor * max(|X(0)|, floor)`.
    pub fn with_blowup_guard(mut self, factor: f64, floor: f64) -> Self {
        self.blowup_factor = factor;
        self.blowup_floor = floor;
        self
    }

    pub fn params(&self) -> &SqgParams {
        &self.params
    }

    pub fn basis(&self) -> &RealBasis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn drift_mode(&self) -> DriftMode {
        self.drift
    }

    /// `|2 pi k|^(2 alpha)` per coordinate.
    pub fn decay(&self) -> &[f64] {
        &self.decay
    }

    /// `sqrt(eps) |2 pi k|^(2 beta) lambda_k` per coordinate.
    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    /// Factor turning a recorded `N(0, dt)` increment into the applied noise.
    pub fn noise_scale(&self) -> &[f64] {
        &self.noise_scale
    }

    /// `P_m N(x)` in real coordinates, unaffected by [`DriftMode`].
    pub fn nonlinearity(&self, x: &[f64], out: &mut [f64]) {
        match self.kernel {
            Kernel::Tensor => self.tensor.as_ref().expect("tensor built").contract(x, out),
            Kernel::Spectral => {
                let theta = self.basis.from_real(x);
                let n = advection_on(&theta, &self.grid);
                out.copy_from_slice(&self.basis.to_real(&n));
            }
        }
    }

    /// Autonomous nonlinear drift `D(x)` under the current [`DriftMode`].
    pub fn drift(&self, x: &[f64], out: &mut [f64]) {
        match self.drift {
            DriftMode::Linear => out.iter_mut().for_each(|o| *o = 0.0),
            DriftMode::Full => {
                self.nonlinearity(x, out);
                out.iter_mut().for_each(|o| *o = -*o);
            }
            DriftMode::Mutated => {
                self.nonlinearity(x, out);
                for (i, o) in out.iter_mut().enumerate() {
                    if i % 2 == 0 {
                        *o = -*o;
                    }
                }
            }
        }
    }

    /// Forcing of one step from control coordinates at both ends:
    /// `phi1 F g0 + phi2 F (g1 - g0)` with `F = |2 pi k|^(2 beta)`, the exact
    /// semigroup integral of the linear interpolant.
    pub fn control_increment(&self, g0: &[f64], g1: &[f64], out: &mut [f64]) {
        for i in 0..out.len() {
            out[i] = self.force[i] * (self.phi1[i] * g0[i] + self.phi2[i] * (g1[i] - g0[i]));
        }
    }

    /// Advances `x` in place by one step with additive forcing `eta`.
    pub fn step(&self, x: &mut [f64], eta: &[f64], work: &mut StepWork) {
        let dim = x.len();
        work.ensure(dim);
        let StepWork { d0, d1, y } = work;
        if self.drift == DriftMode::Linear {
            for i in 0..dim {
                x[i] = self.e[i] * x[i] + eta[i];
            }
            return;
        }
        self.drift(x, d0);
        for i in 0..dim {
            y[i] = self.e[i] * x[i] + self.phi1[i] * d0[i] + eta[i];
        }
        self.drift(y, d1);
        for i in 0..dim {
            x[i] = y[i] + self.phi2[i] * (d1[i] - d0[i]);
        }
    }

    /// Integrates from `x0` over the horizon of the parameters. `control`, if
    /// given, holds coordinates of `g` at every grid time. `traj` selects the
    /// noise stream; noise is drawn only when `epsilon > 0`.
    pub fn run(
        &self,
        x0: &[f64],
        control: Option<&[Vec<f64>]>,
        traj: u64,
        observer: &mut impl Observer,
    ) -> Result<Vec<f64>> {
        let n_steps = self.params.n_steps();
        let dim = self.dim();
        if x0.len() != dim {
            return Err(Error::shape(alloc::format!("state has {} coordinates, system {dim}", x0.len())));
        }
        if let Some(g) = control {
            if g.len() != n_steps + 1 || g.iter().any(|v| v.len() != dim) {
                return Err(Error::shape("control must give every grid time on the Galerkin modes"));
            }
        }
        let noisy = self.params.epsilon > 0.0;
        let rng = CounterRng::new(self.params.seed).stream(traj);
        let sqrt_dt = libm::sqrt(self.params.dt);
        let bound = self.blowup_factor * norm(x0).max(self.blowup_floor);

        let mut x = x0.to_vec();
        let mut eta = vec![0.0; dim];
        let mut dw = vec![0.0; dim];
        let mut work = StepWork::default();
        observer.state(0, 0.0, &x);
        for n in 0..n_steps {
            match control {
                Some(g) => self.control_increment(&g[n], &g[n + 1], &mut eta),
                None => eta.iter_mut().for_each(|v| *v = 0.0),
            }
            if noisy {
                rng.fill_normals(n as u64, &mut dw);
                for i in 0..dim {
                    dw[i] *= sqrt_dt;
                    eta[i] += self.noise_scale[i] * dw[i];
                }
                observer.increment(n, &dw);
            } else {
                observer.increment(n, &dw);
            }
            self.step(&mut x, &eta, &mut work);
            let t = (n + 1) as f64 * self.params.dt;
            let nx = norm(&x);
            if !(nx <= bound) {
                return Err(Error::BlowUp { time: t, norm: nx });
            }
            observer.state(n + 1, t, &x);
        }
        Ok(x)
    }

    /// Stationary Gaussian draw: coordinate `i` has variance
    /// `(eps/2) lambda_i^2 |2 pi k|^(4 beta - 2 alpha)`.
    pub fn gaussian_initial(&self, traj: u64) -> Vec<f64> {
        let rng = CounterRng::new(self.params.seed).stream(traj);
        let mut x = vec![0.0; self.dim()];
        rng.fill_normals(crate::rng::INITIAL_STEP, &mut x);
        for (i, v) in x.iter_mut().enumerate() {
            *v *= self.initial_sd(i);
        }
        x
    }

    pub fn initial_sd(&self, i: usize) -> f64 {
        // sigma^2 / (2 a) = (eps/2) lambda^2 |2 pi k|^(4 beta - 2 alpha)
        self.sigma[i] / libm::sqrt(2.0 * self.decay[i])
    }
}

/// Scratch buffers reused across steps.
#[derive(Debug, Default, Clone)]
pub struct StepWork {
    d0: Vec<f64>,
    d1: Vec<f64>,
    y: Vec<f64>,
}

impl StepWork {
    fn ensure(&mut self, dim: usize) {
        if self.d0.len() != dim {
            self.d0 = vec![0.0; dim];
            self.d1 = vec![0.0; dim];
            self.y = vec![0.0; dim];
        }
    }
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    libm::sqrt(x.iter().map(|v| v * v).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn etd_weights_are_continuous_at_the_switch() {
        let (a1, a2) = etd_weights(1e-3 - 1e-12);
        let (b1, b2) = etd_weights(1e-3 + 1e-12);
        assert!((a1 - b1).abs() < 1e-12 && (a2 - b2).abs() < 1e-10);
        let (w1, w2) = etd_weights(2.0);
        assert!((w1 - (1.0 - (-2.0f64).exp()) / 2.0).abs() < 1e-15);
        assert!((w2 - ((-2.0f64).exp() - 1.0 + 2.0) / 4.0).abs() < 1e-15);
    }

    #[test]
    fn tensor_and_spectral_kernels_agree() {
        for m in [1, 2, 3, 4] {
            let p = SqgParams { m, ..SqgParams::default() };
            let a = GalerkinSystem::new(&p).unwrap().with_kernel(Kernel::Tensor);
            let b = GalerkinSystem::new(&p).unwrap().with_kernel(Kernel::Spectral);
            let rng = CounterRng::new(m as u64);
            let mut x = vec![0.0; a.dim()];
            rng.fill_normals(0, &mut x);
            let mut na = vec![0.0; a.dim()];
            let mut nb = vec![0.0; a.dim()];
            a.nonlinearity(&x, &mut na);
            b.nonlinearity(&x, &mut nb);
            let scale = norm(&na).max(1.0);
            for (u, v) in na.iter().zip(&nb) {
                assert!((u - v).abs() < 1e-10 * scale, "m={m}: {u} vs {v}");
            }
        }
    }

    #[test]
    fn mutated_drift_breaks_energy_balance() {
        let p = SqgParams { m: 2, ..SqgParams::default() };
        let rng = CounterRng::new(3);
        let mut x = vec![0.0; 12];
        rng.fill_normals(0, &mut x);
        let mut d = vec![0.0; 12];
        let full = GalerkinSystem::new(&p).unwrap();
        full.drift(&x, &mut d);
        let e_full: f64 = x.iter().zip(&d).map(|(a, b)| a * b).sum();
        assert!(e_full.abs() < 1e-12);
        let mutated = full.clone().with_drift(DriftMode::Mutated);
        mutated.drift(&x, &mut d);
        let e_mut: f64 = x.iter().zip(&d).map(|(a, b)| a * b).sum();
        assert!(e_mut.abs() > 1e-3);
    }
}
