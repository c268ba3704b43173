use sqg_core::galerkin::*;
use sqg_core::mc::*;
use sqg_core::rng::CounterRng;
use sqg_core::spectral::*;
use sqg_core::stats::{normal_sf, MeanEstimate};
use sqg_core::{Complex64, Error};

fn mode(k1: i32, k2: i32) -> ModeIndex {
    ModeIndex::new(k1, k2)
}

fn params(m: usize, t_final: f64, dt: f64) -> SqgParams {
    SqgParams { m, t_final, dt, epsilon: 0.0, ..SqgParams::default() }
}

#[test]
fn single_mode_decays_exactly() {
    let p = params(3, 0.5, 1e-2);
    let theta0 = SpectralField::from_modes(3, &[(mode(1, 2), Complex64::new(0.4, -0.3))]).unwrap();
    let traj = solve_skeleton(&theta0, &ControlPath::zeros(&p), &p).unwrap();
    let rate = mode(1, 2).wavenumber_pow(2.0 * p.alpha);
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let exact = theta0.scaled((-rate * t).exp());
        assert!(s.sub(&exact).unwrap().max_abs() < 1e-10);
    }
}

#[test]
fn rest_stays_at_rest() {
    let p = params(2, 0.1, 1e-2);
    let traj = solve_skeleton(&SpectralField::zeros(2), &ControlPath::zeros(&p), &p).unwrap();
    assert!(traj.states.iter().all(|s| s.max_abs() == 0.0));
}

/// `theta*(t) = cos(t) A + exp(-t) B + t^2 C`.
fn manufactured(a: &SpectralField, b: &SpectralField, c: &SpectralField, t: f64) -> (SpectralField, SpectralField) {
    let mut v = a.scaled(t.cos());
    v.axpy((-t).exp(), b).unwrap();
    v.axpy(t * t, c).unwrap();
    let mut d = a.scaled(-t.sin());
    d.axpy(-(-t).exp(), b).unwrap();
    d.axpy(2.0 * t, c).unwrap();
    (v, d)
}

#[test]
fn manufactured_solution_converges_at_second_order() {
    let m = 4;
    let rng = CounterRng::new(11);
    let a = SpectralField::random(m, 0.5, 1.0, &rng, 0).project(m);
    let b = SpectralField::random(m, 0.5, 1.0, &rng, 1).project(m);
    let c = SpectralField::random(m, 0.5, 1.0, &rng, 2).project(m);
    for (alpha, beta) in [(0.3, 0.15), (0.75, 0.625)] {
        let mut errs = Vec::new();
        for dt in [4e-3, 2e-3, 1e-3] {
            let p = SqgParams { alpha, beta, ..params(m, 0.4, dt) };
            let g = ControlPath::from_fn(&p, |t| {
                let (v, d) = manufactured(&a, &b, &c, t);
                let mut rhs = d;
                rhs.axpy(1.0, &apply_lambda(&v, 2.0 * alpha).unwrap()).unwrap();
                rhs.axpy(1.0, &advection(&v, 2).unwrap().project(m)).unwrap();
                apply_lambda(&rhs, -2.0 * beta).unwrap()
            })
            .unwrap();
            let traj = solve_skeleton(&manufactured(&a, &b, &c, 0.0).0, &g, &p).unwrap();
            let err = traj
                .times
                .iter()
                .zip(&traj.states)
                .map(|(t, s)| s.sub(&manufactured(&a, &b, &c, *t).0).unwrap().l2_norm())
                .fold(0.0, f64::max);
            errs.push(err);
        }
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order > 1.8, "alpha={alpha}: errors {errs:?}");
        }
    }
}

#[test]
fn noiseless_sde_is_the_skeleton_bit_for_bit() {
    let p = params(3, 0.2, 1e-3);
    let theta0 = SpectralField::random(3, 0.5, 1.0, &CounterRng::new(1), 0).project(3);
    let g0 = SpectralField::random(3, 0.5, 1.0, &CounterRng::new(2), 0).project(3);
    let g = ControlPath::from_fn(&p, |t| g0.scaled(t)).unwrap();
    assert_eq!(simulate_sde(&theta0, &p, Some(&g)).unwrap(), solve_skeleton(&theta0, &g, &p).unwrap());
    assert_eq!(simulate_sde(&theta0, &p, None).unwrap(), solve_skeleton(&theta0, &ControlPath::zeros(&p), &p).unwrap());
}

#[test]
fn unforced_skeleton_dissipates() {
    let p = params(4, 0.5, 1e-3);
    let theta0 = SpectralField::random(4, 1.0, 0.0, &CounterRng::new(9), 0).project(4);
    let traj = solve_skeleton(&theta0, &ControlPath::zeros(&p), &p).unwrap();
    for w in traj.states.windows(2) {
        assert!(w[1].l2_norm() <= w[0].l2_norm() + p.dt * p.dt);
    }
}

#[test]
fn same_seed_reproduces_the_path() {
    let p = SqgParams { epsilon: 0.1, ..params(2, 0.1, 1e-3) };
    let theta0 = SpectralField::zeros(2);
    assert_eq!(simulate_sde(&theta0, &p, None).unwrap(), simulate_sde(&theta0, &p, None).unwrap());
    let q = SqgParams { seed: 1, ..p };
    assert_ne!(simulate_sde(&theta0, &p, None).unwrap(), simulate_sde(&theta0, &q, None).unwrap());
}

#[test]
fn blow_up_is_reported_with_its_time() {
    let p = params(2, 1.0, 1e-2);
    let sys = GalerkinSystem::new(&p).unwrap().with_blowup_guard(1.5, 1.0);
    let basis = sys.basis();
    let theta0 = basis.to_real(&SpectralField::from_modes(2, &[(mode(1, 0), Complex64::new(0.1, 0.0))]).unwrap());
    // A constant push of the slowest mode exceeds the guard well before t = 1.
    let g = vec![vec![50.0; sys.dim()]; p.n_steps() + 1];
    match sys.run(&theta0, Some(&g), 0, &mut ()) {
        Err(Error::BlowUp { time, norm }) => assert!(time > 0.0 && time < 1.0 && norm > 1.5),
        other => panic!("expected blow-up, got {other:?}"),
    }
}

#[test]
fn gaussian_initial_law_has_the_weighted_variances() {
    for (alpha, beta, delta) in [(0.5, 0.25, 0.0), (0.6, 0.55, 0.0), (0.5, 0.25, 1e-3)] {
        let p = SqgParams { alpha, beta, delta, epsilon: 0.2, m: 2, ..SqgParams::default() };
        let sys = GalerkinSystem::new(&p).unwrap();
        let n = 100_000;
        let w = sys.basis().multiplier(2.0 * p.energy_index());
        let mut sq = vec![Vec::with_capacity(n); sys.dim()];
        for t in 0..n as u64 {
            for (i, v) in sys.gaussian_initial(t).iter().enumerate() {
                sq[i].push(v * v * w[i]);
            }
        }
        for i in 0..sys.dim() {
            let expected = 0.5 * p.epsilon * sys.lambda()[i].powi(2);
            let est = MeanEstimate::of(&sq[i]);
            assert!(est.z(expected).abs() < 3.0, "({alpha},{beta},{delta}) coordinate {i}: {est:?} vs {expected}");
        }
    }
}

#[test]
fn gaussian_initial_shrinks_with_epsilon() {
    let big = SqgParams { epsilon: 1e-1, ..SqgParams::default() };
    let small = SqgParams { epsilon: 1e-5, ..big };
    let a = sample_gaussian_initial(&big).unwrap().max_abs();
    let b = sample_gaussian_initial(&small).unwrap().max_abs();
    assert!((b / a - 1e-2).abs() < 1e-12);
}

#[test]
fn deterministic_energy_residual_is_second_order() {
    let theta0 = SpectralField::from_modes(1, &[(mode(1, 0), Complex64::new(0.5, 0.2))]).unwrap();
    let mut last = Vec::new();
    for dt in [1e-2, 5e-3, 2.5e-3] {
        let p = params(1, 0.5, dt);
        let traj = simulate_sde(&theta0, &p, None).unwrap();
        let r = energy_identity_residual(&traj, None).unwrap();
        last.push(r.last().unwrap().abs());
    }
    for w in last.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.5..4.5).contains(&ratio), "{last:?}");
    }
    let p = params(2, 0.1, 1e-2);
    let zero = simulate_sde(&SpectralField::zeros(2), &p, None).unwrap();
    assert!(energy_identity_residual(&zero, None).unwrap().iter().all(|r| *r == 0.0));
}

#[test]
fn stochastic_energy_residual_needs_increments() {
    let p = SqgParams { epsilon: 0.1, ..params(1, 0.1, 1e-2) };
    let traj = simulate_sde(&SpectralField::zeros(1), &p, None).unwrap();
    assert!(matches!(energy_identity_residual(&traj, None), Err(Error::Usage(_))));
}

/// Terminal residuals over an ensemble: mean and root mean square.
fn stochastic_residuals(dt: f64, n: u64) -> (MeanEstimate, f64) {
    let p = SqgParams { epsilon: 0.1, ..params(2, 0.5, dt) };
    let mut r = Vec::new();
    for traj in 0..n {
        let rec = simulate_sde_recorded(&SpectralField::zeros(2), &p, None, traj).unwrap();
        let res = energy_identity_residual(&rec.trajectory, rec.increments.as_ref()).unwrap();
        r.push(*res.last().unwrap());
    }
    let rms = (r.iter().map(|v| v * v).sum::<f64>() / r.len() as f64).sqrt();
    (MeanEstimate::of(&r), rms)
}

#[test]
fn stochastic_energy_residual_is_centred_and_shrinks() {
    let (coarse, rms_coarse) = stochastic_residuals(4e-3, 400);
    let (fine, rms_fine) = stochastic_residuals(1e-3, 400);
    assert!(coarse.z(0.0).abs() < 3.0, "{coarse:?}");
    assert!(fine.z(0.0).abs() < 3.0, "{fine:?}");
    // The pathwise error is a martingale of size sqrt(dt): quartering dt halves it.
    let ratio = rms_coarse / rms_fine;
    assert!((1.6..2.5).contains(&ratio), "rms {rms_coarse} -> {rms_fine}");
}

#[test]
fn noise_spectrum_examples() {
    let p = SqgParams { delta: 1.0, s_reg: 2.0, m: 1, ..SqgParams::default() };
    let spec = noise_spec(&p);
    let i = RealBasis::new(1).index_of_label(mode(1, 0)).unwrap();
    let expected = (1.0 + std::f64::consts::TAU.powi(4)).powf(-0.5);
    assert!((spec.lambda[i] - expected).abs() < 1e-15);
    let flat = noise_spec(&SqgParams { m: 3, ..SqgParams::default() });
    assert!(flat.lambda.iter().all(|l| *l == 1.0));
    let hs = hs_norm_sq(&SqgParams { m: 1, alpha: 0.5, beta: 0.25, ..SqgParams::default() });
    assert!((hs - 4.0 * std::f64::consts::TAU).abs() < 1e-12);
}

#[test]
fn scaling_diagnostic_examples() {
    let d = scaling_ok(&SqgParams { epsilon: 1e-4, m: 4, ..SqgParams::default() }, 1e-2);
    assert!((d.value - 6.4e-3).abs() < 1e-15 && d.ok);
    let z = scaling_ok(&SqgParams { epsilon: 0.0, ..SqgParams::default() }, 1e-2);
    assert!(z.value == 0.0 && z.ok);
    let table = scaling_table(&SqgParams::default(), &[1e-4, 1e-3], &[2, 4, 8], 1e-2);
    assert_eq!(table.len(), 6);
}

#[test]
fn ou_terminal_tail_matches_closed_form() {
    // Linear dynamics from rest: X(T) ~ N(0, sigma^2 (1 - exp(-2aT)) / (2a)).
    let p = SqgParams { epsilon: 0.5, ..params(1, 0.2, 1e-3) };
    let sys = GalerkinSystem::new(&p).unwrap();
    let i = 0;
    let a = sys.decay()[i];
    let sd = sys.sigma()[i] * ((1.0 - (-2.0 * a * p.t_final).exp()) / (2.0 * a)).sqrt();
    let threshold = 1.2 * sd;
    let mut cfg = EnsembleConfig::new(p, 20_000, Functional::TerminalCoordinate(i), threshold);
    cfg.initial = InitialLaw::Zero;
    cfg.drift = DriftMode::Linear;
    let r = mc_estimate(&cfg, &Sequential).unwrap();
    let expected = normal_sf(1.2);
    let se = (expected * (1.0 - expected) / r.n as f64).sqrt();
    assert!(((r.probability - expected) / se).abs() < 3.0, "{} vs {expected}", r.probability);
    assert!((r.mean / r.se).abs() < 3.0);
}

#[test]
fn smaller_noise_makes_large_excursions_rarer() {
    // eps log P moves toward the (negative) rate as eps decreases.
    let base = SqgParams { m: 1, t_final: 0.5, dt: 5e-3, ..SqgParams::default() };
    let mut values = Vec::new();
    for eps in [0.4, 0.2, 0.1] {
        let p = SqgParams { epsilon: eps, ..base };
        let cfg = EnsembleConfig::new(p, 20_000, Functional::SupNorm, 0.7);
        let r = mc_estimate(&cfg, &Sequential).unwrap();
        values.push(r.eps_log_prob.expect("hits"));
    }
    assert!(values[0] > values[1] && values[1] > values[2], "{values:?}");
}
