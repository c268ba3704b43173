use alloc::format;

use crate::error::{Error, Result};

/// Physical and numerical parameters of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqgParams {
    /// Dissipation exponent: the linear term is `Lambda^(2 alpha)`.
    pub alpha: f64,
    /// Noise and control enter through `Lambda^(2 beta)`.
    pub beta: f64,
    pub epsilon: f64,
    /// Strength of the noise regulariser; zero gives projected white noise.
    pub delta: f64,
    pub s_reg: f64,
    /// Galerkin cutoff, modes `0 < |k| <= m`.
    pub m: usize,
    /// Horizon.
    pub t_final: f64,
    pub dt: f64,
    pub seed: u64,
}

const BETA_TOL: f64 = 1e-12;

impl Default for SqgParams {
    fn default() -> Self {
        SqgParams {
            alpha: 0.5,
            beta: 0.25,
            epsilon: 0.1,
            delta: 0.0,
            s_reg: 2.0,
            m: 2,
            t_final: 1.0,
            dt: 1e-3,
            seed: 0,
        }
    }
}

impl SqgParams {
    pub fn validate(&self) -> Result<()> {
        let a = self.alpha;
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::param("alpha", format!("alpha must lie in (0, 1), got {a}")));
        }
        let kinetic = (self.beta - a / 2.0).abs() <= BETA_TOL;
        let shifted = (self.beta - (a / 2.0 + 0.25)).abs() <= BETA_TOL;
        if a < 0.5 && !kinetic {
            return Err(Error::param(
                "beta",
                format!("beta must equal alpha/2 when alpha < 1/2 (alpha = {a}, beta = {})", self.beta),
            ));
        }
        if !(kinetic || shifted) {
            return Err(Error::param(
                "beta",
                format!("beta must equal alpha/2 or alpha/2+1/4 (alpha = {a}, beta = {})", self.beta),
            ));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::param("epsilon", "epsilon must be finite and >= 0"));
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(Error::param("delta", "delta must be finite and >= 0"));
        }
        if !(self.s_reg > a + 1.0) || !self.s_reg.is_finite() {
            return Err(Error::param("s_reg", format!("s_reg must exceed alpha+1 = {} (got {})", a + 1.0, self.s_reg)));
        }
        if self.m < 1 {
            return Err(Error::param("m", "m must be at least 1"));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::param("T", "T must be finite and > 0"));
        }
        if !(self.dt > 0.0 && self.dt <= self.t_final) {
            return Err(Error::param("dt", format!("dt must lie in (0, T], got {}", self.dt)));
        }
        let ratio = self.t_final / self.dt;
        if (ratio - libm::round(ratio)).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::param("dt", format!("T/dt must be an integer, got {ratio}")));
        }
        Ok(())
    }

    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn n_steps(&self) -> usize {
        libm::round(self.t_final / self.dt) as usize
    }

    /// `beta = alpha/2`: the kinetic energy is the conserved quantity of the
    /// nonlinearity and the invariant Gaussian is white.
    pub fn is_kinetic(&self) -> bool {
        (self.beta - self.alpha / 2.0).abs() <= BETA_TOL
    }

    /// Sobolev index of the energy space, `alpha - 2 beta`.
    pub fn energy_index(&self) -> f64 {
        self.alpha - 2.0 * self.beta
    }

    /// Sobolev index of the dissipation, `2 alpha - 2 beta`.
    pub fn dissipation_index(&self) -> f64 {
        2.0 * self.alpha - 2.0 * self.beta
    }

    /// Same parameters on a different horizon and step.
    pub fn with_grid(mut self, t_final: f64, dt: f64) -> Self {
        self.t_final = t_final;
        self.dt = dt;
        self
    }
}
