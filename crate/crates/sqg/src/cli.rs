//! Command-line front end. Every subcommand writes its outputs and a manifest
//! into `--out-dir` and echoes its main CSV on stdout.
//!
//! Exit status: 0 on success, 1 on usage errors, 2 on numerical failure
//! (blow-up or non-convergence), 3 when a statistical test fails.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use sqg_core::galerkin::*;
use sqg_core::ldp::{energy_residual, rate, reversed_control, reversed_cost_identity, time_reverse, EnergyMode};
use sqg_core::mc::*;
use sqg_core::quasipotential::{quasi_potential, reversed_relaxation};
use sqg_core::spectral::{sobolev_norm, SpectralField};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::exec::Parallel;
use crate::format::{control_bytes, fmt_f64, read_control, read_field, read_trajectory, trajectory_bytes, Csv};
use crate::manifest::RunManifest;

#[derive(Parser, Debug)]
#[command(
    name = "sqg",
    version,
    about = "Stochastic SQG Galerkin dynamics, rate functionals and Monte Carlo diagnostics"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Integrate the stochastic Galerkin system.
    Simulate(SimulateArgs),
    /// Integrate the controlled deterministic system.
    Skeleton(SkeletonArgs),
    /// Rate functional of a stored trajectory.
    Rate(RateArgs),
    /// Time-reverse a trajectory and, given its control, check the reversed cost.
    Reverse(ReverseArgs),
    /// Energy balances of a stored forced path, or the Ito balance of a fresh run.
    EnergyAudit(EnergyArgs),
    /// Cost of the reversed relaxation path ending at a field.
    Quasipotential(QuasiArgs),
    /// Long-run second moments against the invariant Gaussian.
    InvarianceTest(InvarianceArgs),
    /// Triple correlations against their time reversals.
    ReversibilityTest(ReversibilityArgs),
    /// Importance sampling under a shifted initial law and control.
    Tilt(TiltArgs),
    /// Exponential moment of the invariant Gaussian.
    ExpMoment(ExpMomentArgs),
    /// Noise scaling diagnostics and Hilbert-Schmidt norms.
    ScalingReport(ScalingArgs),
}

/// Model parameters. A config file sets defaults; flags override it.
#[derive(Args, Debug, Clone, Default)]
pub struct ParamArgs {
    /// Key-value configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Defaults to alpha/2.
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long = "s-reg")]
    pub s_reg: Option<f64>,
    /// Galerkin cutoff: modes with 0 < |k| <= m.
    #[arg(long)]
    pub m: Option<usize>,
    /// Horizon.
    #[arg(long = "T")]
    pub t_final: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl ParamArgs {
    fn config(&self) -> Result<Config> {
        let mut c = match &self.config {
            Some(path) => Config::load(path)?,
            None => Config::default(),
        };
        let floats = [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("epsilon", self.epsilon),
            ("delta", self.delta),
            ("s_reg", self.s_reg),
            ("T", self.t_final),
            ("dt", self.dt),
        ];
        for (k, v) in floats {
            if let Some(v) = v {
                c.set(k, fmt_f64(v));
            }
        }
        if let Some(m) = self.m {
            c.set("m", m);
        }
        if let Some(s) = self.seed {
            c.set("seed", s);
        }
        Ok(c)
    }

    fn is_empty(&self) -> bool {
        let floats = [self.alpha, self.beta, self.epsilon, self.delta, self.s_reg, self.t_final, self.dt];
        self.config.is_none() && floats.iter().all(Option::is_none) && self.m.is_none() && self.seed.is_none()
    }
}

#[derive(Args, Debug, Clone)]
pub struct OutArgs {
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Write the manifest as JSON instead of key-value text.
    #[arg(long)]
    pub json_manifest: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriftArg {
    Full,
    /// Dissipation only.
    Linear,
    /// Nonlinear drift with the sign flipped on sine coordinates.
    Mutated,
}

impl From<DriftArg> for DriftMode {
    fn from(d: DriftArg) -> Self {
        match d {
            DriftArg::Full => DriftMode::Full,
            DriftArg::Linear => DriftMode::Linear,
            DriftArg::Mutated => DriftMode::Mutated,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialArg {
    Zero,
    /// A draw from the invariant Gaussian of the truncated system.
    Stationary,
}

#[derive(Args, Debug, Clone)]
pub struct InitialArgs {
    /// Initial field (.sqgf), projected onto the Galerkin modes.
    #[arg(long, conflicts_with = "initial")]
    pub theta0: Option<PathBuf>,
    /// Initial law when no field is given; stationary unless epsilon = 0.
    #[arg(long, value_enum)]
    pub initial: Option<InitialArg>,
    /// Selects the noise stream under the seed.
    #[arg(long)]
    pub traj_index: Option<u64>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub start: InitialArgs,
    /// Control path (.sqgc) on the integration grid.
    #[arg(long)]
    pub control: Option<PathBuf>,
    /// Store every stride-th state.
    #[arg(long)]
    pub stride: Option<usize>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug)]
pub struct SkeletonArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Initial field (.sqgf); zero when omitted.
    #[arg(long)]
    pub theta0: Option<PathBuf>,
    /// Control path (.sqgc); zero when omitted.
    #[arg(long)]
    pub control: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug)]
pub struct RateArgs {
    /// Trajectory (.sqgt).
    #[arg(long)]
    pub traj: PathBuf,
    /// Also write the recovered control.
    #[arg(long)]
    pub control_out: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug)]
pub struct ReverseArgs {
    #[arg(long)]
    pub traj: PathBuf,
    /// Control that drives the trajectory (.sqgc).
    #[arg(long)]
    pub control: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug)]
pub struct EnergyArgs {
    /// Forced deterministic path (.sqgt). Without it a fresh stochastic run is audited.
    #[arg(long)]
    pub traj: Option<PathBuf>,
    /// Control of the stored path (.sqgc); zero when omitted.
    #[arg(long, requires = "traj")]
    pub control: Option<PathBuf>,
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub start: InitialArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug)]
pub struct QuasiArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Target field (.sqgf).
    #[arg(long)]
    pub phi: PathBuf,
    /// Relax until the energy norm falls to this fraction of its start.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Also write the reversed relaxation path.
    #[arg(long)]
    pub path_out: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug)]
pub struct InvarianceArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long)]
    pub chains: Option<usize>,
    /// Fraction of each chain discarded.
    #[arg(long)]
    pub burn_in: Option<f64>,
    /// Keep every stride-th step of the squared series.
    #[arg(long)]
    pub stride: Option<usize>,
    #[arg(long, value_enum, default_value = "full")]
    pub drift: DriftArg,
    /// Start the chains from the invariant Gaussian instead of rest.
    #[arg(long)]
    pub stationary_start: bool,
    /// Largest accepted |z|.
    #[arg(long)]
    pub z: Option<f64>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug)]
pub struct ReversibilityArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long)]
    pub n_traj: Option<usize>,
    #[arg(long, value_enum, default_value = "full")]
    pub drift: DriftArg,
    /// Number of distinct mode triples.
    #[arg(long)]
    pub panel_size: Option<usize>,
    /// Lags in units of the recording stride.
    #[arg(long, value_delimiter = ',')]
    pub lags: Vec<usize>,
    #[arg(long)]
    pub z: Option<f64>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug)]
pub struct TiltArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Mean of the tilted initial law (.sqgf); zero when omitted.
    #[arg(long)]
    pub theta0: Option<PathBuf>,
    /// Control of the tilted dynamics (.sqgc); zero when omitted.
    #[arg(long)]
    pub control: Option<PathBuf>,
    #[arg(long)]
    pub n_traj: Option<usize>,
    /// One of sup-norm, terminal-norm, integrated-dissipation, unit, terminal-coordinate:<i>.
    #[arg(long)]
    pub functional: Option<String>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug)]
pub struct ExpMomentArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug)]
pub struct ScalingArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, value_delimiter = ',')]
    pub epsilons: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub ms: Vec<usize>,
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Regulariser strengths for the Hilbert-Schmidt table.
    #[arg(long, value_delimiter = ',')]
    pub deltas: Vec<f64>,
    #[arg(long)]
    pub cutoff: Option<usize>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Done,
    Pass,
    Fail,
}

/// Parses `argv` (program name first), runs it and returns the exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    0
                }
                _ => {
                    eprintln!("{}", e.render());
                    eprintln!("{}", help_for(argv.get(1)));
                    1
                }
            };
        }
    };
    let recorded: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(cli.command, recorded) {
        Ok(Outcome::Fail) => 3,
        Ok(_) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn help_for(sub: Option<&OsString>) -> String {
    let mut cmd = Cli::command();
    let name = sub.map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    match cmd.find_subcommand_mut(&name) {
        Some(sc) => sc.render_help().to_string(),
        None => cmd.render_help().to_string(),
    }
}

pub fn execute(command: Command, argv: Vec<String>) -> Result<Outcome> {
    match command {
        Command::Simulate(a) => simulate(a, argv),
        Command::Skeleton(a) => skeleton(a, argv),
        Command::Rate(a) => rate_cmd(a, argv),
        Command::Reverse(a) => reverse(a, argv),
        Command::EnergyAudit(a) => energy_audit(a, argv),
        Command::Quasipotential(a) => quasipotential(a, argv),
        Command::InvarianceTest(a) => invariance(a, argv),
        Command::ReversibilityTest(a) => reversibility(a, argv),
        Command::Tilt(a) => tilt(a, argv),
        Command::ExpMoment(a) => exp_moment(a, argv),
        Command::ScalingReport(a) => scaling(a, argv),
    }
}

/// Output directory and manifest of one invocation.
struct Run {
    dir: PathBuf,
    json: bool,
    manifest: RunManifest,
}

impl Run {
    fn start(command: &str, out: &OutArgs, argv: Vec<String>, params: Option<&SqgParams>) -> Result<Self> {
        std::fs::create_dir_all(&out.out_dir).map_err(|e| Error::io(&out.out_dir, e))?;
        Ok(Run { dir: out.out_dir.clone(), json: out.json_manifest, manifest: RunManifest::new(command, argv, params) })
    }

    fn input(&mut self, path: &Path) -> Result<()> {
        self.manifest.add_input(path)
    }

    fn output(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        self.manifest.write_output(&self.dir, name, bytes).map(|_| ())
    }

    fn csv(&mut self, name: &str, csv: &Csv, echo: bool) -> Result<()> {
        if echo {
            print!("{}", csv.as_str());
        }
        self.output(name, csv.as_str().as_bytes())
    }

    fn finish(self) -> Result<()> {
        self.manifest.finish(&self.dir, self.json).map(|_| ())
    }
}

/// Flag, then config option, then default.
fn opt<T: std::str::FromStr>(flag: Option<T>, cfg: &Config, key: &str, default: T) -> Result<T> {
    match flag {
        Some(v) => Ok(v),
        None => Ok(cfg.option(key)?.unwrap_or(default)),
    }
}

fn list<T: std::str::FromStr>(flag: Vec<T>, cfg: &Config, key: &str, default: Vec<T>) -> Result<Vec<T>> {
    if !flag.is_empty() {
        return Ok(flag);
    }
    match cfg.get(key) {
        Some(v) => v
            .split(',')
            .map(|s| {
                s.trim().parse().map_err(|_| Error::Config { key: key.into(), reason: format!("bad list entry {s:?}") })
            })
            .collect(),
        None => Ok(default),
    }
}

fn f(x: f64) -> String {
    fmt_f64(x)
}

fn load_control(run: &mut Run, path: Option<&Path>, p: &SqgParams) -> Result<Option<ControlPath>> {
    let Some(path) = path else { return Ok(None) };
    run.input(path)?;
    let (_, g) = read_control(path)?;
    let n = p.n_steps() + 1;
    if g.len() != n || (g.len() > 1 && (g.dt() - p.dt).abs() > 1e-9 * p.dt) {
        return Err(Error::Usage(format!(
            "{}: control has {} samples at step {}, the run needs {n} at step {}",
            path.display(),
            g.len(),
            g.dt(),
            p.dt
        )));
    }
    Ok(Some(g))
}

fn load_field(run: &mut Run, path: &Path, m: usize) -> Result<SpectralField> {
    run.input(path)?;
    Ok(read_field(path)?.resized(m).project(m))
}

fn initial_state(run: &mut Run, a: &InitialArgs, sys: &GalerkinSystem, traj: u64) -> Result<SpectralField> {
    let p = sys.params();
    if let Some(path) = &a.theta0 {
        return load_field(run, path, p.m);
    }
    let law = a.initial.unwrap_or(if p.epsilon > 0.0 { InitialArg::Stationary } else { InitialArg::Zero });
    Ok(match law {
        InitialArg::Zero => SpectralField::zeros(p.m),
        InitialArg::Stationary => sys.basis().from_real(&sys.gaussian_initial(traj)),
    })
}

fn every(traj: &Trajectory, stride: usize) -> Result<Trajectory> {
    if stride <= 1 {
        return Ok(traj.clone());
    }
    let times: Vec<f64> = traj.times.iter().step_by(stride).copied().collect();
    let states: Vec<SpectralField> = traj.states.iter().step_by(stride).cloned().collect();
    let mut params = traj.params;
    params.dt *= stride as f64;
    params.t_final = params.dt * (states.len() - 1) as f64;
    Ok(Trajectory::new(params, times, states)?)
}

/// `t, l2, h_alpha_minus_2beta, h_2alpha_minus_2beta, residual`; the residual
/// is NaN where no energy identity applies.
fn diagnostics(traj: &Trajectory, residual: Option<&[f64]>, stride: usize) -> Csv {
    let p = &traj.params;
    let mut csv = Csv::new(&["t", "l2", "h_alpha_minus_2beta", "h_2alpha_minus_2beta", "residual"]);
    for i in (0..traj.len()).step_by(stride.max(1)) {
        let s = &traj.states[i];
        csv.row(&[
            f(traj.times[i]),
            f(sobolev_norm(s, 0.0)),
            f(sobolev_norm(s, p.energy_index())),
            f(sobolev_norm(s, p.dissipation_index())),
            f(residual.map_or(f64::NAN, |r| r[i])),
        ]);
    }
    csv
}

fn simulate(a: SimulateArgs, argv: Vec<String>) -> Result<Outcome> {
    let cfg = a.params.config()?;
    let p = cfg.params()?;
    let mut run = Run::start("simulate", &a.out, argv, Some(&p))?;
    let sys = GalerkinSystem::new(&p)?;
    let traj = opt(a.start.traj_index, &cfg, "traj_index", 0)?;
    let stride = opt(a.stride, &cfg, "stride", 1)?;
    let theta0 = initial_state(&mut run, &a.start, &sys, traj)?;
    let g = load_control(&mut run, a.control.as_deref(), &p)?;
    let rec = sys.trajectory(&theta0, g.as_ref(), traj, 1, g.is_none() && p.epsilon > 0.0)?;
    let residual = match g {
        None => Some(energy_identity_residual(&rec.trajectory, rec.increments.as_ref())?),
        Some(_) => None,
    };
    run.output("trajectory.sqgt", &trajectory_bytes(&every(&rec.trajectory, stride)?))?;
    run.csv("diagnostics.csv", &diagnostics(&rec.trajectory, residual.as_deref(), stride), false)?;
    run.finish()?;
    Ok(Outcome::Done)
}

fn skeleton(a: SkeletonArgs, argv: Vec<String>) -> Result<Outcome> {
    let p = a.params.config()?.params()?;
    let mut run = Run::start("skeleton", &a.out, argv, Some(&p))?;
    let theta0 = match &a.theta0 {
        Some(path) => load_field(&mut run, path, p.m)?,
        None => SpectralField::zeros(p.m),
    };
    let g = load_control(&mut run, a.control.as_deref(), &p)?;
    let traj = solve_skeleton(&theta0, g.as_ref().unwrap_or(&ControlPath::zeros(&p)), &p)?;
    let residual = match g {
        None => Some(energy_identity_residual(&traj, None)?),
        Some(_) => None,
    };
    run.output("skeleton.sqgt", &trajectory_bytes(&traj))?;
    run.csv("diagnostics.csv", &diagnostics(&traj, residual.as_deref(), 1), false)?;
    run.finish()?;
    Ok(Outcome::Done)
}

fn rate_cmd(a: RateArgs, argv: Vec<String>) -> Result<Outcome> {
    let mut run = Run::start("rate", &a.out, argv, None)?;
    run.input(&a.traj)?;
    let traj = read_trajectory(&a.traj)?;
    run.manifest.set_params(&traj.params);
    let r = rate(&traj)?;
    let mut csv = Csv::new(&["i0", "i_dyna", "total"]);
    csv.row(&[f(r.i0), f(r.i_dyna), f(r.total)]);
    run.csv("rate.csv", &csv, true)?;
    let mut steps = Csv::new(&["t", "residual_norm"]);
    for (t, v) in traj.times.iter().zip(&r.per_step_residual_norm) {
        steps.row(&[f(*t), f(*v)]);
    }
    run.csv("rate_steps.csv", &steps, false)?;
    if a.control_out {
        run.output("recovered_control.sqgc", &control_bytes(&traj.params, &r.recovered_control))?;
    }
    run.finish()?;
    Ok(Outcome::Done)
}

fn reverse(a: ReverseArgs, argv: Vec<String>) -> Result<Outcome> {
    let mut run = Run::start("reverse", &a.out, argv, None)?;
    run.input(&a.traj)?;
    let traj = read_trajectory(&a.traj)?;
    run.manifest.set_params(&traj.params);
    let back = time_reverse(&traj);
    run.output("reversed.sqgt", &trajectory_bytes(&back))?;
    if let Some(path) = &a.control {
        let g = load_control(&mut run, Some(path), &traj.params)?.expect("path given");
        let tilde = reversed_control(&traj, &g)?;
        run.output("reversed_control.sqgc", &control_bytes(&traj.params, &tilde))?;
        let reversed_rate = rate(&back)?.total;
        let identity = reversed_cost_identity(&traj, &g)?;
        let mut csv = Csv::new(&["reversed_rate", "identity", "difference"]);
        csv.row(&[f(reversed_rate), f(identity), f(reversed_rate - identity)]);
        run.csv("identity.csv", &csv, true)?;
    }
    run.finish()?;
    Ok(Outcome::Done)
}

fn energy_audit(a: EnergyArgs, argv: Vec<String>) -> Result<Outcome> {
    if let Some(path) = &a.traj {
        if !a.params.is_empty() || a.start.theta0.is_some() || a.start.initial.is_some() || a.start.traj_index.is_some()
        {
            return Err(Error::Usage("--traj takes its parameters from the file; drop the model flags".into()));
        }
        let mut run = Run::start("energy-audit", &a.out, argv, None)?;
        run.input(path)?;
        let traj = read_trajectory(path)?;
        run.manifest.set_params(&traj.params);
        let g = load_control(&mut run, a.control.as_deref(), &traj.params)?
            .unwrap_or_else(|| ControlPath::zeros(&traj.params));
        let mut csv = Csv::new(&["balance", "residual"]);
        if traj.params.is_kinetic() {
            csv.row(&["kinetic".into(), f(energy_residual(&traj, &g, EnergyMode::Kinetic)?)]);
        }
        csv.row(&["generalized".into(), f(energy_residual(&traj, &g, EnergyMode::Generalized)?)]);
        run.csv("energy.csv", &csv, true)?;
        run.finish()?;
        return Ok(Outcome::Done);
    }
    let cfg = a.params.config()?;
    let p = cfg.params()?;
    let mut run = Run::start("energy-audit", &a.out, argv, Some(&p))?;
    let sys = GalerkinSystem::new(&p)?;
    let traj = opt(a.start.traj_index, &cfg, "traj_index", 0)?;
    let theta0 = initial_state(&mut run, &a.start, &sys, traj)?;
    let rec = sys.trajectory(&theta0, None, traj, 1, p.epsilon > 0.0)?;
    let r = energy_identity_residual(&rec.trajectory, rec.increments.as_ref())?;
    let mut series = Csv::new(&["t", "residual"]);
    for (t, v) in rec.trajectory.times.iter().zip(&r) {
        series.row(&[f(*t), f(*v)]);
    }
    run.csv("energy_identity.csv", &series, false)?;
    let mut summary = Csv::new(&["final_residual", "max_abs_residual"]);
    summary.row(&[f(*r.last().unwrap_or(&0.0)), f(r.iter().fold(0.0_f64, |m, v| m.max(v.abs())))]);
    run.csv("energy_summary.csv", &summary, true)?;
    run.finish()?;
    Ok(Outcome::Done)
}

fn quasipotential(a: QuasiArgs, argv: Vec<String>) -> Result<Outcome> {
    let cfg = a.params.config()?;
    let p = cfg.params()?;
    let mut run = Run::start("quasipotential", &a.out, argv, Some(&p))?;
    let phi = load_field(&mut run, &a.phi, p.m)?;
    let tol = opt(a.tol, &cfg, "tol", 1e-3)?;
    let r = quasi_potential(&phi, &p, tol)?;
    let mut csv = Csv::new(&["estimate", "gaussian_rate", "tail", "t_star", "dt", "relative_gap"]);
    csv.row(&[f(r.estimate), f(r.gaussian_rate), f(r.tail), f(r.t_star), f(r.dt), f(r.relative_gap)]);
    run.csv("quasipotential.csv", &csv, true)?;
    if a.path_out && r.gaussian_rate > 0.0 {
        let (path, _) = reversed_relaxation(&phi, &p, tol)?;
        run.output("path.sqgt", &trajectory_bytes(&path))?;
    }
    run.finish()?;
    Ok(Outcome::Done)
}

fn verdict(pass: bool, what: &str) -> Outcome {
    eprintln!("{what}: {}", if pass { "PASS" } else { "FAIL" });
    if pass {
        Outcome::Pass
    } else {
        Outcome::Fail
    }
}

fn invariance(a: InvarianceArgs, argv: Vec<String>) -> Result<Outcome> {
    let cfg = a.params.config()?;
    let p = cfg.params()?;
    let mut run = Run::start("invariance-test", &a.out, argv, Some(&p))?;
    let mut sc = StationaryConfig::new(p);
    sc.n_chains = opt(a.chains, &cfg, "chains", 1)?;
    sc.burn_in = opt(a.burn_in, &cfg, "burn_in", sc.burn_in)?;
    sc.stride = opt(a.stride, &cfg, "stride", sc.stride)?;
    sc.drift = a.drift.into();
    sc.stationary_start = a.stationary_start;
    let z = opt(a.z, &cfg, "z", 3.0)?;
    let r = stationary_moments(&sc, &Parallel::from_env()?)?;
    let mut csv = Csv::new(&["k1", "k2", "expected", "estimate", "se", "tau_int", "z"]);
    for row in &r.rows {
        csv.row(&[
            row.mode.k1.to_string(),
            row.mode.k2.to_string(),
            f(row.expected),
            f(row.estimate),
            f(row.se),
            f(row.tau_int),
            f(row.z),
        ]);
    }
    run.csv("invariance.csv", &csv, true)?;
    run.finish()?;
    Ok(verdict(r.pass(z), "invariance"))
}

fn reversibility(a: ReversibilityArgs, argv: Vec<String>) -> Result<Outcome> {
    let cfg = a.params.config()?;
    let p = cfg.params()?;
    let mut run = Run::start("reversibility-test", &a.out, argv, Some(&p))?;
    let mut rc = ReversibilityConfig::new(p, opt(a.n_traj, &cfg, "n_traj", 10_000)?)?;
    rc.drift = a.drift.into();
    let size = opt(a.panel_size, &cfg, "panel_size", 4)?;
    let lags = list(a.lags, &cfg, "lags", vec![0, 1, 2])?;
    rc.panel = default_panel(&RealBasis::new(p.m), size, &lags);
    let z = opt(a.z, &cfg, "z", 4.0)?;
    let r = reversibility_test(&rc, &Parallel::from_env()?)?;
    let mut csv = Csv::new(&["label", "k", "l", "n", "tau", "forward", "reversed", "se", "z"]);
    for row in &r.rows {
        let e = row.entry;
        csv.row(&[
            row.label.clone(),
            e.k.to_string(),
            e.l.to_string(),
            e.n.to_string(),
            e.tau.to_string(),
            f(row.forward),
            f(row.reversed),
            f(row.se),
            f(row.z),
        ]);
    }
    run.csv("reversibility.csv", &csv, true)?;
    run.finish()?;
    Ok(verdict(r.rows.iter().all(|row| row.z.abs() < z), "reversibility"))
}

fn tilt(a: TiltArgs, argv: Vec<String>) -> Result<Outcome> {
    let cfg = a.params.config()?;
    let p = cfg.params()?;
    let mut run = Run::start("tilt", &a.out, argv, Some(&p))?;
    let theta0 = match &a.theta0 {
        Some(path) => load_field(&mut run, path, p.m)?,
        None => SpectralField::zeros(p.m),
    };
    let control = load_control(&mut run, a.control.as_deref(), &p)?.unwrap_or_else(|| ControlPath::zeros(&p));
    let functional = Functional::parse(&opt(a.functional, &cfg, "functional", "terminal-norm".to_string())?)?;
    let ec = EnsembleConfig::new(
        p,
        opt(a.n_traj, &cfg, "n_traj", 1000)?,
        functional,
        opt(a.threshold, &cfg, "threshold", 0.5)?,
    );
    let r = tilt_simulate(&TiltTarget { theta0, control }, &ec, &Parallel::from_env()?)?;
    let cols = [
        ("weighted_mean", r.weighted_mean),
        ("weighted_se", r.weighted_se),
        ("direct_mean", r.direct_mean),
        ("direct_se", r.direct_se),
        ("weighted_prob", r.weighted_prob),
        ("weighted_prob_se", r.weighted_prob_se),
        ("direct_prob", r.direct_prob),
        ("direct_prob_se", r.direct_prob_se),
        ("mean_weight", r.mean_weight),
        ("mean_weight_se", r.mean_weight_se),
        ("ess", r.ess),
        ("entropy_estimate", r.entropy_estimate),
        ("entropy_se", r.entropy_se),
        ("rate_bound", r.rate_bound),
    ];
    let mut header: Vec<&str> = cols.iter().map(|c| c.0).collect();
    header.extend(["degenerate", "n_traj"]);
    let mut csv = Csv::new(&header);
    let mut cells: Vec<String> = cols.iter().map(|c| f(c.1)).collect();
    cells.extend([r.degenerate.to_string(), r.n_traj.to_string()]);
    csv.row(&cells);
    run.csv("tilt.csv", &csv, true)?;
    run.finish()?;
    Ok(Outcome::Done)
}

fn exp_moment(a: ExpMomentArgs, argv: Vec<String>) -> Result<Outcome> {
    let cfg = a.params.config()?;
    let p = cfg.params()?;
    let mut run = Run::start("exp-moment", &a.out, argv, Some(&p))?;
    let eta = opt(a.eta, &cfg, "eta", 0.3)?;
    let n = opt(a.samples, &cfg, "samples", 100_000)?;
    let r = gaussian_exp_moment(eta, &p, n, &Parallel::from_env()?)?;
    let mut csv = Csv::new(&["eta", "analytic", "mc", "se", "z", "n_samples"]);
    csv.row(&[f(eta), f(r.analytic), f(r.mc), f(r.se), f(r.z), r.n_samples.to_string()]);
    run.csv("exp_moment.csv", &csv, true)?;
    run.finish()?;
    Ok(Outcome::Done)
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn scaling(a: ScalingArgs, argv: Vec<String>) -> Result<Outcome> {
    let cfg = a.params.config()?;
    let p = cfg.params()?;
    let mut run = Run::start("scaling-report", &a.out, argv, Some(&p))?;
    let epsilons = list(a.epsilons, &cfg, "epsilons", vec![1e-4, 1e-3, 1e-2])?;
    let ms = list(a.ms, &cfg, "ms", vec![2, 4, 8])?;
    let threshold = opt(a.threshold, &cfg, "threshold", 1e-2)?;
    let deltas = list(a.deltas, &cfg, "deltas", (0..9).map(|i| 10f64.powf(-6.0 + 0.5 * i as f64)).collect())?;
    let cutoff = opt(a.cutoff, &cfg, "cutoff", 256)?;

    let mut table = Csv::new(&["epsilon", "m", "delta", "value", "ok"]);
    for d in scaling_table(&p, &epsilons, &ms, threshold) {
        table.row(&[f(d.epsilon), d.m.to_string(), f(d.delta), f(d.value), d.ok.to_string()]);
    }
    run.csv("scaling.csv", &table, true)?;

    let hs: Vec<f64> = deltas.iter().map(|&d| hs_norm_sq_cutoff(p.alpha, d, p.s_reg, cutoff)).collect();
    let mut hs_csv = Csv::new(&["delta", "hs_norm_sq"]);
    for (d, h) in deltas.iter().zip(&hs) {
        hs_csv.row(&[f(*d), f(*h)]);
    }
    run.csv("hs.csv", &hs_csv, false)?;
    let positive: Vec<usize> = (0..deltas.len()).filter(|&i| deltas[i] > 0.0).collect();
    if positive.len() >= 2 {
        let x: Vec<f64> = positive.iter().map(|&i| deltas[i]).collect();
        let y: Vec<f64> = positive.iter().map(|&i| hs[i]).collect();
        let mut fit = Csv::new(&["alpha", "s_reg", "cutoff", "slope", "expected"]);
        fit.row(&[f(p.alpha), f(p.s_reg), cutoff.to_string(), f(log_log_slope(&x, &y)), f(-(p.alpha + 1.0) / p.s_reg)]);
        run.csv("hs_fit.csv", &fit, false)?;
    }
    run.finish()?;
    Ok(Outcome::Done)
}
