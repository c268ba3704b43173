use alloc::format;
use alloc::vec::Vec;

use super::params::SqgParams;
use super::system::{GalerkinSystem, Observer};
use crate::error::{Error, Result};
use crate::spectral::SpectralField;

/// States on the uniform grid `t_i = i * dt`, all with the same `kmax`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub params: SqgParams,
    pub times: Vec<f64>,
    pub states: Vec<SpectralField>,
}

fn check_grid(times: &[f64], len: usize) -> Result<f64> {
    if times.len() != len || times.is_empty() {
        return Err(Error::shape(format!("{} times for {} states", times.len(), len)));
    }
    if times.len() == 1 {
        return Ok(0.0);
    }
    let dt = times[1] - times[0];
    for (i, w) in times.windows(2).enumerate() {
        let h = w[1] - w[0];
        if !(h > 0.0) || (h - dt).abs() > 1e-9 * dt {
            return Err(Error::shape(format!("time grid is not uniform at index {i}")));
        }
    }
    Ok(dt)
}

pub(crate) fn uniform_times(n: usize, dt: f64) -> Vec<f64> {
    (0..n).map(|i| i as f64 * dt).collect()
}

impl Trajectory {
    pub fn new(params: SqgParams, times: Vec<f64>, states: Vec<SpectralField>) -> Result<Self> {
        check_grid(&times, states.len())?;
        if let Some(first) = states.first() {
            if states.iter().any(|s| s.kmax() != first.kmax()) {
                return Err(Error::shape("trajectory states differ in kmax"));
            }
        }
        Ok(Trajectory { params, times, states })
    }

    /// `n + 1` copies of the zero field on the grid of the parameters.
    pub fn zeros(params: SqgParams) -> Self {
        let n = params.n_steps() + 1;
        Trajectory {
            params,
            times: uniform_times(n, params.dt),
            states: alloc::vec![SpectralField::zeros(params.m); n],
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn steps(&self) -> usize {
        self.states.len().saturating_sub(1)
    }

    /// Grid spacing; zero for a single-point path.
    pub fn dt(&self) -> f64 {
        if self.times.len() < 2 {
            0.0
        } else {
            self.times[1] - self.times[0]
        }
    }

    pub fn kmax(&self) -> usize {
        self.states.first().map_or(self.params.m, |s| s.kmax())
    }

    pub fn first(&self) -> &SpectralField {
        &self.states[0]
    }

    pub fn last(&self) -> &SpectralField {
        &self.states[self.states.len() - 1]
    }
}

/// A control `g(t)` sampled on a trajectory grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlPath {
    pub times: Vec<f64>,
    pub values: Vec<SpectralField>,
}

impl ControlPath {
    pub fn new(times: Vec<f64>, values: Vec<SpectralField>) -> Result<Self> {
        check_grid(&times, values.len())?;
        if let Some(first) = values.first() {
            if values.iter().any(|s| s.kmax() != first.kmax()) {
                return Err(Error::shape("control values differ in kmax"));
            }
        }
        Ok(ControlPath { times, values })
    }

    pub fn zeros(params: &SqgParams) -> Self {
        let n = params.n_steps() + 1;
        ControlPath { times: uniform_times(n, params.dt), values: alloc::vec![SpectralField::zeros(params.m); n] }
    }

    /// Samples `f(t)` on the grid of the parameters.
    pub fn from_fn(params: &SqgParams, mut f: impl FnMut(f64) -> SpectralField) -> Result<Self> {
        let times = uniform_times(params.n_steps() + 1, params.dt);
        let values = times.iter().map(|&t| f(t)).collect();
        ControlPath::new(times, values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dt(&self) -> f64 {
        if self.times.len() < 2 {
            0.0
        } else {
            self.times[1] - self.times[0]
        }
    }

    /// Trapezoidal `int ||g||_{L2}^2 dt`.
    pub fn l2_sq_integral(&self) -> f64 {
        let v: Vec<f64> = self.values.iter().map(|g| g.l2_norm_sq()).collect();
        trapezoid(&v, self.dt())
    }

    /// True if the grid matches a trajectory's.
    pub fn matches(&self, traj: &Trajectory) -> bool {
        self.values.len() == traj.states.len() && (self.dt() - traj.dt()).abs() <= 1e-12 * traj.dt().max(1e-300)
    }
}

pub(crate) fn trapezoid(v: &[f64], dt: f64) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let inner: f64 = v[1..v.len() - 1].iter().sum();
    dt * (inner + 0.5 * (v[0] + v[v.len() - 1]))
}

/// Cumulative trapezoid, starting at 0.
pub(crate) fn cumulative_trapezoid(v: &[f64], dt: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(v.len());
    let mut acc = 0.0;
    for i in 0..v.len() {
        if i > 0 {
            acc += 0.5 * dt * (v[i - 1] + v[i]);
        }
        out.push(acc);
    }
    out
}

/// Brownian increments, one `N(0, dt)` vector per step.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NoiseIncrements {
    pub dw: Vec<Vec<f64>>,
}

/// Collects states at a stride and optionally every increment.
#[derive(Debug, Clone, Default)]
pub struct Recorder {
    stride: usize,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub increments: Option<Vec<Vec<f64>>>,
}

impl Recorder {
    pub fn new(stride: usize, record_increments: bool) -> Self {
        Recorder {
            stride: stride.max(1),
            times: Vec::new(),
            states: Vec::new(),
            increments: record_increments.then(Vec::new),
        }
    }
}

impl Observer for Recorder {
    fn state(&mut self, n: usize, t: f64, x: &[f64]) {
        if n.is_multiple_of(self.stride) {
            self.times.push(t);
            self.states.push(x.to_vec());
        }
    }

    fn increment(&mut self, _n: usize, dw: &[f64]) {
        if let Some(v) = self.increments.as_mut() {
            v.push(dw.to_vec());
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdeRecord {
    pub trajectory: Trajectory,
    pub increments: Option<NoiseIncrements>,
}

impl GalerkinSystem {
    pub fn control_coordinates(&self, g: &ControlPath) -> Result<Vec<Vec<f64>>> {
        if g.len() != self.params().n_steps() + 1 {
            return Err(Error::shape(format!(
                "control has {} samples, the grid needs {}",
                g.len(),
                self.params().n_steps() + 1
            )));
        }
        Ok(g.values.iter().map(|v| self.basis().to_real(v)).collect())
    }

    /// Runs from `theta0` and returns the states every `stride` steps.
    pub fn trajectory(
        &self,
        theta0: &SpectralField,
        g: Option<&ControlPath>,
        traj: u64,
        stride: usize,
        record_increments: bool,
    ) -> Result<SdeRecord> {
        let control = g.map(|g| self.control_coordinates(g)).transpose()?;
        let x0 = self.basis().to_real(theta0);
        let mut rec = Recorder::new(stride, record_increments);
        self.run(&x0, control.as_deref(), traj, &mut rec)?;
        let mut params = *self.params();
        let stride = stride.max(1);
        if stride > 1 {
            params.dt *= stride as f64;
            params.t_final = params.dt * (rec.states.len() - 1) as f64;
        }
        let states = rec.states.iter().map(|x| self.basis().from_real(x)).collect();
        Ok(SdeRecord {
            trajectory: Trajectory { params, times: rec.times, states },
            increments: rec.increments.map(|dw| NoiseIncrements { dw }),
        })
    }
}

/// Deterministic controlled Galerkin dynamics
/// `d theta/dt = -Lambda^(2 alpha) theta - P_m N(theta) + Lambda^(2 beta) g`.
pub fn solve_skeleton(theta0: &SpectralField, g: &ControlPath, params: &SqgParams) -> Result<Trajectory> {
    let p = SqgParams { epsilon: 0.0, ..*params };
    let sys = GalerkinSystem::new(&p)?;
    Ok(sys.trajectory(theta0, Some(g), 0, 1, false)?.trajectory)
}

/// Stochastic Galerkin dynamics from `theta0`, optionally with a control.
pub fn simulate_sde(theta0: &SpectralField, params: &SqgParams, g: Option<&ControlPath>) -> Result<Trajectory> {
    let sys = GalerkinSystem::new(params)?;
    Ok(sys.trajectory(theta0, g, 0, 1, false)?.trajectory)
}

/// As [`simulate_sde`] for trajectory `traj` of the seed, keeping every increment.
pub fn simulate_sde_recorded(
    theta0: &SpectralField,
    params: &SqgParams,
    g: Option<&ControlPath>,
    traj: u64,
) -> Result<SdeRecord> {
    GalerkinSystem::new(params)?.trajectory(theta0, g, traj, 1, true)
}

/// Draw from the invariant Gaussian `G(0, eps Q / 2)` of the truncated system,
/// expressed in the energy space.
pub fn sample_gaussian_initial(params: &SqgParams) -> Result<SpectralField> {
    let sys = GalerkinSystem::new(params)?;
    Ok(sys.basis().from_real(&sys.gaussian_initial(0)))
}
