use alloc::vec;
use alloc::vec::Vec;

use super::ensemble::{collect, mc_estimate, EnsembleConfig, Executor, FunctionalTracker, InitialLaw};
use crate::error::{Error, Result};
use crate::galerkin::{trapezoid, ControlPath, Observer};
use crate::spectral::SpectralField;
use crate::stats::{mean, std_error};

/// Where the tilted dynamics are pushed: initial mean `theta0` and control `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct TiltTarget {
    pub theta0: SpectralField,
    pub control: ControlPath,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TiltResult {
    /// Importance-weighted mean of the functional under the untilted law.
    pub weighted_mean: f64,
    pub weighted_se: f64,
    /// Plain Monte Carlo of the same functional on fresh trajectories.
    pub direct_mean: f64,
    pub direct_se: f64,
    /// Weighted and direct estimates of `P(F > threshold)`.
    pub weighted_prob: f64,
    pub weighted_prob_se: f64,
    pub direct_prob: f64,
    pub direct_prob_se: f64,
    /// Sample mean of the weights; 1 in expectation.
    pub mean_weight: f64,
    pub mean_weight_se: f64,
    /// `(sum w)^2 / sum w^2`.
    pub ess: f64,
    /// `eps` times the sample mean of `log(d tilted / d untilted)`.
    pub entropy_estimate: f64,
    pub entropy_se: f64,
    /// `(1/2) int |P_m g|^2 dt + |P_m theta0|^2_{H^(alpha - 2 beta)}`.
    pub rate_bound: f64,
    /// Effective sample size below 10.
    pub degenerate: bool,
    pub n_traj: usize,
}

struct Weighted<'a> {
    tracker: FunctionalTracker,
    /// Shift of each increment, in units of the recorded `N(0, dt)` draws.
    h: &'a [Vec<f64>],
    dt: f64,
    log_w: f64,
}

impl Observer for Weighted<'_> {
    fn state(&mut self, n: usize, t: f64, x: &[f64]) {
        self.tracker.state(n, t, x);
    }

    fn increment(&mut self, n: usize, dw: &[f64]) {
        for (d, h) in dw.iter().zip(&self.h[n]) {
            self.log_w -= d * h / self.dt + h * h / (2.0 * self.dt);
        }
    }
}

/// Importance sampling under the tilted law: initial law `G(P_m theta0, eps P_m / 2)`
/// and control `g` added to the drift. Weights are the exact likelihood ratio
/// of the discrete scheme, so their mean is 1 up to sampling error.
///
/// The direct estimate uses trajectory indices after those of the tilted run.
pub fn tilt_simulate(target: &TiltTarget, cfg: &EnsembleConfig, exec: &impl Executor) -> Result<TiltResult> {
    let sys = cfg.system()?;
    let p = *sys.params();
    if !(p.epsilon > 0.0) {
        return Err(Error::param("epsilon", "tilting needs epsilon > 0"));
    }
    let dim = sys.dim();
    let g = sys.control_coordinates(&target.control)?;
    let mu = sys.basis().to_real(&target.theta0);

    let n_steps = p.n_steps();
    let mut h = vec![vec![0.0; dim]; n_steps];
    for (n, hn) in h.iter_mut().enumerate() {
        sys.control_increment(&g[n], &g[n + 1], hn);
        for (v, s) in hn.iter_mut().zip(sys.noise_scale()) {
            *v /= s;
        }
    }
    let sd: Vec<f64> = (0..dim).map(|i| sys.initial_sd(i)).collect();

    let runs = collect(exec.map(cfg.n_traj, |i| {
        let traj = cfg.first_traj + i as u64;
        let xi = sys.gaussian_initial(traj);
        let x0: Vec<f64> = xi.iter().zip(&mu).map(|(a, b)| a + b).collect();
        // log d(untilted)/d(tilted) of the initial Gaussian at x0.
        let mut log_w0 = 0.0;
        for k in 0..dim {
            let v = sd[k] * sd[k];
            log_w0 += (-x0[k] * mu[k] + 0.5 * mu[k] * mu[k]) / v;
        }
        let mut obs =
            Weighted { tracker: FunctionalTracker::new(&sys, cfg.functional), h: &h, dt: p.dt, log_w: log_w0 };
        sys.run(&x0, Some(&g), traj, &mut obs)?;
        Ok((obs.log_w, obs.tracker.value()))
    }))?;

    let n = runs.len();
    let log_w: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let w: Vec<f64> = log_w.iter().map(|l| libm::exp(*l)).collect();
    let wf: Vec<f64> = runs.iter().zip(&w).map(|(r, w)| w * r.1).collect();
    let wp: Vec<f64> = runs.iter().zip(&w).map(|(r, w)| if r.1 > cfg.threshold { *w } else { 0.0 }).collect();
    let sum_w: f64 = w.iter().sum();
    let sum_w2: f64 = w.iter().map(|v| v * v).sum();
    let ess = if sum_w2 > 0.0 { sum_w * sum_w / sum_w2 } else { 0.0 };
    let neg_log_w: Vec<f64> = log_w.iter().map(|l| -l).collect();

    let weights_energy = sys.basis().multiplier(2.0 * p.energy_index());
    let g_sq: Vec<f64> = g.iter().map(|v| v.iter().map(|x| x * x).sum()).collect();
    let rate_bound = 0.5 * trapezoid(&g_sq, p.dt) + weights_energy.iter().zip(&mu).map(|(w, x)| w * x * x).sum::<f64>();

    let direct_cfg =
        EnsembleConfig { initial: InitialLaw::Stationary, first_traj: cfg.first_traj + n as u64, ..cfg.clone() };
    let direct = mc_estimate(&direct_cfg, exec)?;
    let nd = direct.n as f64;

    Ok(TiltResult {
        weighted_mean: mean(&wf),
        weighted_se: std_error(&wf),
        direct_mean: direct.mean,
        direct_se: direct.se,
        weighted_prob: mean(&wp),
        weighted_prob_se: std_error(&wp),
        direct_prob: direct.probability,
        direct_prob_se: libm::sqrt(direct.probability * (1.0 - direct.probability) / (nd - 1.0)),
        mean_weight: mean(&w),
        mean_weight_se: std_error(&w),
        ess,
        entropy_estimate: p.epsilon * mean(&neg_log_w),
        entropy_se: p.epsilon * std_error(&neg_log_w),
        rate_bound,
        degenerate: ess < 10.0,
        n_traj: n,
    })
}
