use proptest::prelude::*;
use sqg_core::galerkin::*;
use sqg_core::ldp::*;
use sqg_core::rng::CounterRng;
use sqg_core::spectral::*;

fn field(kmax: usize, seed: u64, decay: f64) -> SpectralField {
    SpectralField::random(kmax, 1.0, decay, &CounterRng::new(seed), 0)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lambda_powers_compose(seed in any::<u64>(), k in 1usize..8, r1 in -2.0f64..2.0, r2 in -2.0f64..2.0) {
        let f = field(k, seed, 0.0);
        let lhs = apply_lambda(&apply_lambda(&f, r1).unwrap(), r2).unwrap();
        let rhs = apply_lambda(&f, r1 + r2).unwrap();
        for (a, b) in lhs.coeffs().iter().zip(rhs.coeffs()) {
            prop_assert!((a - b).norm() <= 1e-12 * b.norm().max(1e-300));
        }
    }

    #[test]
    fn velocity_is_solenoidal_and_isometric(seed in any::<u64>(), k in 1usize..10) {
        let theta = field(k, seed, 0.5);
        let (u1, u2) = riesz_velocity(&theta);
        let div = derivative(&u1, 1).add(&derivative(&u2, 2)).unwrap();
        prop_assert!(div.l2_norm() < 1e-12 * theta.l2_norm().max(1.0) * k as f64);
        let u_sq = u1.l2_norm_sq() + u2.l2_norm_sq();
        prop_assert!(close(u_sq, theta.l2_norm_sq(), 1e-12));
    }

    #[test]
    fn nonlinearity_is_orthogonal_to_theta_and_its_potential(seed in any::<u64>(), k in 1usize..8) {
        let theta = field(k, seed, 1.0);
        let n = advection(&theta, 2).unwrap();
        let scale = theta.l2_norm_sq() * n.l2_norm().max(1.0);
        prop_assert!(n.inner(&theta).unwrap().abs() < 1e-12 * scale);
        let pot = apply_lambda(&theta, -1.0).unwrap();
        prop_assert!(n.inner(&pot).unwrap().abs() < 1e-12 * scale);
    }

    #[test]
    fn sobolev_norms_increase_with_index(seed in any::<u64>(), k in 1usize..8, s1 in -2.0f64..2.0, ds in 0.0f64..2.0) {
        let f = field(k, seed, 0.0);
        prop_assert!(sobolev_norm(&f, s1) <= sobolev_norm(&f, s1 + ds) * (1.0 + 1e-14));
    }

    #[test]
    fn littlewood_paley_pieces_reassemble(seed in any::<u64>(), k in 1usize..12) {
        let f = field(k, seed, 0.0);
        let profile = LpProfile::for_kmax(k);
        for j in profile.admissible() {
            let back = lp_low(&f, j).add(&lp_high(&f, j)).unwrap();
            prop_assert!(back.sub(&f).unwrap().max_abs() < 1e-15 * f.max_abs().max(1.0) * 4.0);
        }
        let mut sum = lp_low(&f, profile.jmin);
        for j in profile.jmin..=profile.jmax + 1 {
            sum = sum.add(&lp_block(&f, j)).unwrap();
        }
        prop_assert!(sum.sub(&f).unwrap().max_abs() < 1e-12 * f.max_abs().max(1.0));
    }

    #[test]
    fn commutator_is_bilinear(seed in any::<u64>(), c in -3.0f64..3.0) {
        let phi = field(4, seed, 1.0);
        let g = field(4, seed.wrapping_add(1), 1.0);
        let lhs = commutator(&phi.scaled(c), &g);
        let rhs = commutator(&phi, &g).scaled(c);
        prop_assert!(lhs.sub(&rhs).unwrap().max_abs() <= 1e-12 * rhs.max_abs().max(1.0));
    }

    #[test]
    fn pairing_does_not_depend_on_the_dyadic_level(seed in any::<u64>(), k in 2usize..8) {
        let theta = field(k, seed, 1.0);
        let phi = field(k, seed.wrapping_add(7), 2.0);
        let direct = nonlinear_pairing(&theta, &phi);
        let scale = theta.l2_norm_sq() * sobolev_norm(&phi, 1.0).max(1.0);
        for j in LpProfile::for_kmax(k).admissible() {
            let split = nonlinear_pairing_commutator(&theta, &phi, j).unwrap();
            prop_assert!((split - direct).abs() < 1e-10 * scale);
        }
    }

    #[test]
    fn structure_coefficients_are_antisymmetric(m in 1usize..4, a in 0usize..1000, b in 0usize..1000, c in 0usize..1000) {
        let basis = RealBasis::new(m);
        let d = basis.dim();
        let (k, l, n) = (basis.label(a % d), basis.label(b % d), basis.label(c % d));
        prop_assert!((b_coefficient(k, l, n) + b_coefficient(l, k, n)).abs() < 1e-12);
    }

    #[test]
    fn cubic_energy_sum_vanishes(m in 1usize..5, seed in any::<u64>()) {
        let basis = RealBasis::new(m);
        let tensor = BTensor::new(&basis);
        let mut x = vec![0.0; basis.dim()];
        CounterRng::new(seed).fill_normals(0, &mut x);
        let mut out = vec![0.0; basis.dim()];
        tensor.contract(&x, &mut out);
        let cubic: f64 = out.iter().zip(&x).map(|(a, b)| a * b).sum();
        let scale: f64 = tensor.entries().iter().map(|e| (e.3 * x[e.0 as usize] * x[e.1 as usize] * x[e.2 as usize]).abs()).sum();
        prop_assert!(cubic.abs() <= 1e-10 * scale.max(1e-300));
    }

    #[test]
    fn real_coordinates_are_an_isometry(m in 1usize..6, seed in any::<u64>()) {
        let basis = RealBasis::new(m);
        let f = field(m, seed, 0.0).project(m);
        let x = basis.to_real(&f);
        let norm_sq: f64 = x.iter().map(|v| v * v).sum();
        prop_assert!(close(norm_sq, f.l2_norm_sq(), 1e-13));
        prop_assert!(basis.from_real(&x).sub(&f).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn counter_streams_ignore_draw_order(seed in any::<u64>(), traj in 0u64..1000, step in 0u64..10_000) {
        let rng = CounterRng::new(seed).stream(traj);
        let mut a = vec![0.0; 6];
        rng.fill_normals(step, &mut a);
        let _ = rng.normal_pair(step + 1, 0);
        let mut b = vec![0.0; 6];
        CounterRng::new(seed).stream(traj).fill_normals(step, &mut b);
        prop_assert_eq!(a, b);
    }
}

fn short_trajectory(seed: u64) -> (Trajectory, ControlPath) {
    let p = SqgParams { m: 3, epsilon: 0.0, t_final: 0.05, dt: 5e-3, ..SqgParams::default() };
    let g0 = field(3, seed, 1.0).project(3);
    let g = ControlPath::from_fn(&p, |t| g0.scaled(1.0 + t)).unwrap();
    let theta0 = field(3, seed.wrapping_add(1), 1.0).project(3).scaled(0.3);
    (solve_skeleton(&theta0, &g, &p).unwrap(), g)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn reversal_is_an_involution(seed in any::<u64>()) {
        let (traj, _) = short_trajectory(seed);
        let back = time_reverse(&time_reverse(&traj));
        prop_assert_eq!(&back, &traj);
        prop_assert_eq!(rate(&back).unwrap(), rate(&traj).unwrap());
        prop_assert_eq!(time_reverse(&traj).first().l2_norm(), traj.last().l2_norm());
    }

    #[test]
    fn variational_functional_is_concave(seed in any::<u64>(), lam in 0.0f64..1.0) {
        let (traj, _) = short_trajectory(seed);
        let p = traj.params;
        let a = field(4, seed.wrapping_add(2), 1.0);
        let b = field(4, seed.wrapping_add(3), 1.0);
        let phi1 = ControlPath::from_fn(&p, |t| a.scaled(1.0 - t)).unwrap();
        let phi2 = ControlPath::from_fn(&p, |t| b.scaled(t * t)).unwrap();
        let mix = ControlPath::from_fn(&p, |t| {
            let mut v = a.scaled(lam * (1.0 - t));
            v.axpy((1.0 - lam) * t * t, &b).unwrap();
            v
        })
        .unwrap();
        let f1 = variational_functional(&traj, &phi1, None).unwrap();
        let f2 = variational_functional(&traj, &phi2, None).unwrap();
        let fm = variational_functional(&traj, &mix, None).unwrap();
        prop_assert!(fm >= lam * f1 + (1.0 - lam) * f2 - 1e-10);
    }

    #[test]
    fn variational_functional_is_bounded_by_the_dynamic_cost(seed in any::<u64>()) {
        let (traj, _) = short_trajectory(seed);
        let p = traj.params;
        let i_dyna = rate(&traj).unwrap().i_dyna;
        let a = field(3, seed.wrapping_add(4), 1.0).project(3);
        let phi = ControlPath::from_fn(&p, |t| a.scaled((6.0 * t).cos())).unwrap();
        let v = variational_functional(&traj, &phi, None).unwrap();
        prop_assert!(v <= i_dyna + 10.0 * p.dt * p.dt);
    }
}
