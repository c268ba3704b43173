use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::ensemble::{collect, Executor};
use super::Z_PASS;
use crate::error::{Error, Result};
use crate::galerkin::{BTensor, DriftMode, GalerkinSystem, Observer, RealBasis, SqgParams};
use crate::stats::{mean, std_error};

/// Triple correlation `E[X_k(0) X_l(tau) X_n(2 tau)]`; `tau = 0` is the
/// single-time odd moment `E[X_k X_l X_n]`. `tau` counts recorded samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PanelEntry {
    pub k: usize,
    pub l: usize,
    pub n: usize,
    pub tau: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReversibilityConfig {
    pub params: SqgParams,
    pub n_traj: usize,
    pub panel: Vec<PanelEntry>,
    /// Record every `stride`-th step; lags and window starts use this grid.
    pub stride: usize,
    pub drift: DriftMode,
    pub first_traj: u64,
}

impl ReversibilityConfig {
    /// Panel from [`default_panel`] with lags of 0, 0.05 and 0.1 time units.
    pub fn new(params: SqgParams, n_traj: usize) -> Result<Self> {
        let stride = (libm::round(0.05 / params.dt) as usize).max(1);
        let basis = RealBasis::new(params.m);
        Ok(ReversibilityConfig {
            params,
            n_traj,
            panel: default_panel(&basis, 4, &[0, 1, 2]),
            stride,
            drift: DriftMode::Full,
            first_traj: 0,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PanelRow {
    pub entry: PanelEntry,
    pub label: String,
    /// Forward-path estimate.
    pub forward: f64,
    /// Same statistic on the negated, time-reversed path.
    pub reversed: f64,
    /// Standard error of `forward - reversed`.
    pub se: f64,
    pub z: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReversibilityReport {
    pub rows: Vec<PanelRow>,
    pub max_abs_z: f64,
    pub pass: bool,
}

/// The `count` coordinate triples with the largest `|B_{k,l,n}|` (one per
/// unordered triple), each at every lag in `taus`.
pub fn default_panel(basis: &RealBasis, count: usize, taus: &[usize]) -> Vec<PanelEntry> {
    let tensor = BTensor::new(basis);
    let mut entries: Vec<(u32, u32, u32, f64)> = tensor.entries().to_vec();
    entries.sort_by(|a, b| b.3.abs().total_cmp(&a.3.abs()).then((a.0, a.1, a.2).cmp(&(b.0, b.1, b.2))));
    let mut picked: Vec<[u32; 3]> = Vec::new();
    for &(k, l, n, _) in &entries {
        let mut key = [k, l, n];
        key.sort_unstable();
        if key[0] == key[1] || key[1] == key[2] || picked.contains(&key) {
            continue;
        }
        picked.push(key);
        if picked.len() == count {
            break;
        }
    }
    let mut panel = Vec::new();
    for key in &picked {
        for &tau in taus {
            panel.push(PanelEntry { k: key[0] as usize, l: key[1] as usize, n: key[2] as usize, tau });
        }
    }
    panel
}

struct Samples {
    stride: usize,
    states: Vec<Vec<f64>>,
}

impl Observer for Samples {
    fn state(&mut self, n: usize, _t: f64, x: &[f64]) {
        if n.is_multiple_of(self.stride) {
            self.states.push(x.to_vec());
        }
    }
}

/// Window averages of the forward statistic and of its reversed counterpart.
fn window_means(xs: &[Vec<f64>], e: &PanelEntry) -> (f64, f64) {
    let span = 2 * e.tau;
    let windows = xs.len() - span;
    let (mut f, mut r) = (0.0, 0.0);
    for t in 0..windows {
        let (a, b, c) = (&xs[t], &xs[t + e.tau], &xs[t + span]);
        f += a[e.k] * b[e.l] * c[e.n];
        // The negated reversal of X evaluated on the same window.
        r -= c[e.k] * b[e.l] * a[e.n];
    }
    (f / windows as f64, r / windows as f64)
}

/// Stationary ensembles of the truncated dynamics; each panel statistic is
/// compared between the path and its negated time reversal. Under `beta =
/// alpha/2`, `delta = 0` the two agree in law.
pub fn reversibility_test(cfg: &ReversibilityConfig, exec: &impl Executor) -> Result<ReversibilityReport> {
    let p = cfg.params;
    p.validate()?;
    if (p.beta - 0.5 * p.alpha).abs() > 1e-12 || p.delta != 0.0 {
        return Err(Error::param("beta", "reversibility holds only for beta = alpha/2 and delta = 0"));
    }
    if !(p.epsilon > 0.0) {
        return Err(Error::param("epsilon", "reversibility test needs epsilon > 0"));
    }
    if cfg.n_traj < 2 {
        return Err(Error::param("n_traj", "need at least two trajectories"));
    }
    if cfg.panel.is_empty() {
        return Err(Error::param("panel", "panel is empty"));
    }
    let stride = cfg.stride.max(1);
    let samples = p.n_steps() / stride + 1;
    let sys = GalerkinSystem::new(&p)?.with_drift(cfg.drift);
    for e in &cfg.panel {
        if e.k.max(e.l).max(e.n) >= sys.dim() {
            return Err(Error::param("panel", format!("coordinate out of range 0..{}", sys.dim())));
        }
        if 2 * e.tau >= samples {
            return Err(Error::param("panel", format!("lag {} too long for {samples} samples", e.tau)));
        }
    }

    let per_traj = collect(exec.map(cfg.n_traj, |i| {
        let traj = cfg.first_traj + i as u64;
        let x0 = sys.gaussian_initial(traj);
        let mut obs = Samples { stride, states: Vec::with_capacity(samples) };
        sys.run(&x0, None, traj, &mut obs)?;
        Ok(cfg.panel.iter().map(|e| window_means(&obs.states, e)).collect::<Vec<_>>())
    }))?;

    let basis = sys.basis();
    let mut rows = Vec::with_capacity(cfg.panel.len());
    let mut max_abs_z: f64 = 0.0;
    for (j, e) in cfg.panel.iter().enumerate() {
        let fwd: Vec<f64> = per_traj.iter().map(|r| r[j].0).collect();
        let rev: Vec<f64> = per_traj.iter().map(|r| r[j].1).collect();
        let diff: Vec<f64> = fwd.iter().zip(&rev).map(|(a, b)| a - b).collect();
        let se = std_error(&diff);
        let d = mean(&diff);
        let z = if se > 0.0 { d / se } else { 0.0 };
        max_abs_z = max_abs_z.max(z.abs());
        let label = format!(
            "X{}(0) X{}({}) X{}({})",
            basis.label(e.k),
            basis.label(e.l),
            e.tau * stride,
            basis.label(e.n),
            2 * e.tau * stride
        );
        rows.push(PanelRow {
            entry: *e,
            label,
            forward: mean(&fwd),
            reversed: mean(&rev),
            se,
            z,
            pass: z.abs() < Z_PASS,
        });
    }
    let pass = rows.iter().all(|r| r.pass);
    Ok(ReversibilityReport { rows, max_abs_z, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::Sequential;

    #[test]
    fn panel_triples_are_distinct() {
        let panel = default_panel(&RealBasis::new(2), 4, &[0, 1]);
        assert_eq!(panel.len(), 8);
        for e in &panel {
            assert!(e.k < e.l && e.l < e.n);
        }
    }

    #[test]
    fn requires_fluctuation_dissipation_pair() {
        let p = SqgParams { beta: 0.5, ..SqgParams::default() };
        let cfg = ReversibilityConfig::new(p, 10).unwrap();
        assert!(matches!(reversibility_test(&cfg, &Sequential), Err(Error::InvalidParameter { name: "beta", .. })));
    }

    #[test]
    fn single_time_statistics_are_antisymmetric() {
        let xs: Vec<Vec<f64>> = (0..5).map(|i| (0..4).map(|j| (i * 4 + j) as f64).collect()).collect();
        let (f, r) = window_means(&xs, &PanelEntry { k: 0, l: 1, n: 2, tau: 0 });
        assert_eq!(f, -r);
    }
}
