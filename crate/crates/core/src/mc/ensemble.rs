use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::galerkin::{DriftMode, GalerkinSystem, Observer, SqgParams};
use crate::spectral::SpectralField;
use crate::stats::{log_sum_exp, mean, std_error, wilson_interval};

/// Runs independent jobs `0..n` and returns their results in index order.
pub trait Executor: Sync {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs jobs one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(f).collect()
    }
}

/// Path observables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Functional {
    /// `sup_t |theta(t)|_{H^(alpha - 2 beta)}`.
    SupNorm,
    /// `|theta(T)|_{H^(alpha - 2 beta)}`.
    TerminalNorm,
    /// `int_0^T |theta|^2_{H^(2 alpha - 2 beta)} dt`.
    IntegratedDissipation,
    /// Constant 1.
    Unit,
    /// Real-basis coordinate `i` of `theta(T)`.
    TerminalCoordinate(usize),
}

impl Functional {
    pub const NAMES: [&'static str; 5] =
        ["sup-norm", "terminal-norm", "integrated-dissipation", "unit", "terminal-coordinate:<i>"];

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "sup-norm" => Ok(Functional::SupNorm),
            "terminal-norm" => Ok(Functional::TerminalNorm),
            "integrated-dissipation" => Ok(Functional::IntegratedDissipation),
            "unit" => Ok(Functional::Unit),
            _ => {
                if let Some(i) = name.strip_prefix("terminal-coordinate:") {
                    let i = i.parse().map_err(|_| Error::param("functional", format!("bad coordinate in {name:?}")))?;
                    return Ok(Functional::TerminalCoordinate(i));
                }
                Err(Error::param(
                    "functional",
                    format!("unknown functional {name:?}; known: {}", Functional::NAMES.join(", ")),
                ))
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            Functional::SupNorm => "sup-norm".into(),
            Functional::TerminalNorm => "terminal-norm".into(),
            Functional::IntegratedDissipation => "integrated-dissipation".into(),
            Functional::Unit => "unit".into(),
            Functional::TerminalCoordinate(i) => format!("terminal-coordinate:{i}"),
        }
    }
}

/// Law of the initial condition.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialLaw {
    Zero,
    /// The invariant Gaussian of the truncated system.
    Stationary,
    Fixed(SpectralField),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    pub n_traj: usize,
    pub params: SqgParams,
    pub functional: Functional,
    /// The threshold event is `F > threshold`.
    pub threshold: f64,
    pub initial: InitialLaw,
    pub drift: DriftMode,
    /// First trajectory index; lets two ensembles share a seed without overlap.
    pub first_traj: u64,
}

impl EnsembleConfig {
    pub fn new(params: SqgParams, n_traj: usize, functional: Functional, threshold: f64) -> Self {
        EnsembleConfig {
            n_traj,
            params,
            functional,
            threshold,
            initial: InitialLaw::Stationary,
            drift: DriftMode::Full,
            first_traj: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.n_traj < 2 {
            return Err(Error::param("n_traj", "need at least two trajectories"));
        }
        if let Functional::TerminalCoordinate(i) = self.functional {
            let dim = crate::galerkin::RealBasis::new(self.params.m).dim();
            if i >= dim {
                return Err(Error::param("functional", format!("coordinate {i} out of range 0..{dim}")));
            }
        }
        Ok(())
    }

    pub fn system(&self) -> Result<GalerkinSystem> {
        self.validate()?;
        Ok(GalerkinSystem::new(&self.params)?.with_drift(self.drift))
    }

    pub(crate) fn initial_state(&self, sys: &GalerkinSystem, traj: u64) -> Vec<f64> {
        match &self.initial {
            InitialLaw::Zero => alloc::vec![0.0; sys.dim()],
            InitialLaw::Stationary => sys.gaussian_initial(traj),
            InitialLaw::Fixed(f) => sys.basis().to_real(f),
        }
    }
}

/// Streams a [`Functional`] along a path.
#[derive(Debug, Clone)]
pub(crate) struct FunctionalTracker {
    functional: Functional,
    w_energy: Vec<f64>,
    w_diss: Vec<f64>,
    dt: f64,
    sup: f64,
    integral: f64,
    prev_diss: Option<f64>,
    last: Vec<f64>,
}

fn weighted_sq(w: &[f64], x: &[f64]) -> f64 {
    w.iter().zip(x).map(|(w, x)| w * x * x).sum()
}

impl FunctionalTracker {
    pub fn new(sys: &GalerkinSystem, functional: Functional) -> Self {
        let p = sys.params();
        FunctionalTracker {
            functional,
            w_energy: sys.basis().multiplier(2.0 * p.energy_index()),
            w_diss: sys.basis().multiplier(2.0 * p.dissipation_index()),
            dt: p.dt,
            sup: 0.0,
            integral: 0.0,
            prev_diss: None,
            last: Vec::new(),
        }
    }

    pub fn value(&self) -> f64 {
        match self.functional {
            Functional::SupNorm => libm::sqrt(self.sup),
            Functional::TerminalNorm => libm::sqrt(weighted_sq(&self.w_energy, &self.last)),
            Functional::IntegratedDissipation => self.integral,
            Functional::Unit => 1.0,
            Functional::TerminalCoordinate(i) => self.last[i],
        }
    }
}

impl Observer for FunctionalTracker {
    fn state(&mut self, _n: usize, _t: f64, x: &[f64]) {
        match self.functional {
            Functional::SupNorm => self.sup = self.sup.max(weighted_sq(&self.w_energy, x)),
            Functional::IntegratedDissipation => {
                let d = weighted_sq(&self.w_diss, x);
                if let Some(p) = self.prev_diss {
                    self.integral += 0.5 * self.dt * (p + d);
                }
                self.prev_diss = Some(d);
            }
            _ => {}
        }
        self.last.clear();
        self.last.extend_from_slice(x);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
    pub hits: usize,
    /// Fraction of trajectories with `F > threshold`.
    pub probability: f64,
    /// 95% Wilson interval for the probability.
    pub wilson: (f64, f64),
    /// `eps log P`; `None` when there were no hits.
    pub eps_log_prob: Option<f64>,
    /// `eps log` of the upper Wilson bound, finite even with no hits.
    pub eps_log_upper: f64,
}

pub(crate) const Z95: f64 = 1.959_963_984_540_054;

pub(crate) fn collect<T>(results: Vec<Result<T>>) -> Result<Vec<T>> {
    results.into_iter().collect()
}

/// Plain Monte Carlo of `cfg.functional` and of the event `F > threshold`.
pub fn mc_estimate(cfg: &EnsembleConfig, exec: &impl Executor) -> Result<McEstimate> {
    let sys = cfg.system()?;
    let values = collect(exec.map(cfg.n_traj, |i| {
        let traj = cfg.first_traj + i as u64;
        let x0 = cfg.initial_state(&sys, traj);
        let mut tracker = FunctionalTracker::new(&sys, cfg.functional);
        sys.run(&x0, None, traj, &mut tracker)?;
        Ok(tracker.value())
    }))?;
    Ok(summarize(&values, cfg.threshold, cfg.params.epsilon))
}

pub(crate) fn summarize(values: &[f64], threshold: f64, epsilon: f64) -> McEstimate {
    let n = values.len();
    let hits = values.iter().filter(|&&v| v > threshold).count();
    let probability = hits as f64 / n as f64;
    let wilson = wilson_interval(hits, n, Z95);
    McEstimate {
        mean: mean(values),
        se: std_error(values),
        n,
        hits,
        probability,
        wilson,
        eps_log_prob: (hits > 0).then(|| epsilon * libm::log(probability)),
        eps_log_upper: epsilon * libm::log(wilson.1),
    }
}

/// Mean of `exp(l_i)` and its standard error, evaluated in log space.
/// Returns `(log mean, se / mean)`.
pub(crate) fn exp_mean(logs: &[f64]) -> (f64, f64) {
    let n = logs.len() as f64;
    let lm = log_sum_exp(logs) - libm::log(n);
    let scaled: Vec<f64> = logs.iter().map(|l| libm::exp(l - lm)).collect();
    (lm, std_error(&scaled))
}
