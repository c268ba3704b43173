use alloc::vec;
use alloc::vec::Vec;

use super::ensemble::{collect, Executor};
use crate::error::{Error, Result};
use crate::galerkin::{DriftMode, GalerkinSystem, Observer, SqgParams};
use crate::spectral::ModeIndex;
use crate::stats::SeriesEstimate;

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryConfig {
    /// `t_final` is the length of each chain.
    pub params: SqgParams,
    pub n_chains: usize,
    /// Fraction of each chain discarded before averaging.
    pub burn_in: f64,
    /// Keep every `stride`-th step of the `X_i^2` series.
    pub stride: usize,
    pub drift: DriftMode,
    /// Start from the invariant Gaussian rather than from rest.
    pub stationary_start: bool,
}

impl StationaryConfig {
    pub fn new(params: SqgParams) -> Self {
        StationaryConfig {
            params,
            n_chains: 1,
            burn_in: 0.2,
            stride: 10,
            drift: DriftMode::Full,
            stationary_start: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentRow {
    pub mode: ModeIndex,
    /// `(eps/2) lambda^2 |2 pi k|^(4 beta - 2 alpha)`.
    pub expected: f64,
    pub estimate: f64,
    /// Autocorrelation-adjusted standard error.
    pub se: f64,
    pub tau_int: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceReport {
    pub rows: Vec<MomentRow>,
    /// Largest `|z|` over the rows.
    pub max_abs_z: f64,
}

impl InvarianceReport {
    pub fn pass(&self, z: f64) -> bool {
        self.max_abs_z < z
    }
}

struct SquareSeries {
    stride: usize,
    skip: usize,
    series: Vec<Vec<f64>>,
}

impl Observer for SquareSeries {
    fn state(&mut self, n: usize, _t: f64, x: &[f64]) {
        if n >= self.skip && n.is_multiple_of(self.stride) {
            for (s, v) in self.series.iter_mut().zip(x) {
                s.push(v * v);
            }
        }
    }
}

/// Per-coordinate second moments of long runs, compared with the invariant
/// Gaussian. Chains are independent noise streams; their means are averaged.
pub fn stationary_moments(cfg: &StationaryConfig, exec: &impl Executor) -> Result<InvarianceReport> {
    if !(0.0..1.0).contains(&cfg.burn_in) {
        return Err(Error::param("burn_in", "must lie in [0, 1)"));
    }
    if !(cfg.params.epsilon > 0.0) {
        return Err(Error::param("epsilon", "stationary moments need epsilon > 0"));
    }
    let sys = GalerkinSystem::new(&cfg.params)?.with_drift(cfg.drift);
    let dim = sys.dim();
    let n_chains = cfg.n_chains.max(1);
    let skip = (cfg.burn_in * cfg.params.n_steps() as f64) as usize;
    let per_chain = collect(exec.map(n_chains, |c| {
        let x0 = if cfg.stationary_start { sys.gaussian_initial(c as u64) } else { vec![0.0; dim] };
        let mut obs = SquareSeries { stride: cfg.stride.max(1), skip, series: vec![Vec::new(); dim] };
        sys.run(&x0, None, c as u64, &mut obs)?;
        Ok(obs.series.iter().map(|s| SeriesEstimate::of(s)).collect::<Vec<_>>())
    }))?;

    let mut rows = Vec::with_capacity(dim);
    let mut max_abs_z: f64 = 0.0;
    for i in 0..dim {
        let nc = n_chains as f64;
        let estimate = per_chain.iter().map(|c| c[i].mean).sum::<f64>() / nc;
        let se = libm::sqrt(per_chain.iter().map(|c| c[i].se * c[i].se).sum::<f64>()) / nc;
        let tau_int = per_chain.iter().map(|c| c[i].tau_int).sum::<f64>() / nc;
        let sd = sys.initial_sd(i);
        let expected = sd * sd;
        let z = (estimate - expected) / se;
        max_abs_z = max_abs_z.max(z.abs());
        rows.push(MomentRow { mode: sys.basis().label(i), expected, estimate, se, tau_int, z });
    }
    Ok(InvarianceReport { rows, max_abs_z })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::Sequential;

    #[test]
    fn rejects_bad_burn_in() {
        let mut cfg = StationaryConfig::new(SqgParams::default());
        cfg.burn_in = 1.0;
        assert!(stationary_moments(&cfg, &Sequential).is_err());
    }

    #[test]
    fn linear_modes_have_ou_variance() {
        let p = SqgParams { m: 1, t_final: 400.0, dt: 5e-3, ..SqgParams::default() };
        let cfg = StationaryConfig { drift: DriftMode::Linear, stride: 2, ..StationaryConfig::new(p) };
        let r = stationary_moments(&cfg, &Sequential).unwrap();
        assert_eq!(r.rows.len(), 4);
        assert!(r.pass(4.0), "{r:?}");
    }
}
