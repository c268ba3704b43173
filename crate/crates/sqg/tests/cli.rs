use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sqg::format::{control_bytes, field_bytes, read_control, read_trajectory, trajectory_bytes};
use sqg::manifest::RunManifest;
use sqg_core::galerkin::{ControlPath, SqgParams, Trajectory};
use sqg_core::rng::CounterRng;
use sqg_core::spectral::{ModeIndex, SpectralField};
use sqg_core::Complex64;

fn sqg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sqg")).args(args).env("SQG_THREADS", "2").output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = sqg(args);
    assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// `(header, first data row)` of a CSV as a lookup.
fn cell(csv: &str, column: &str) -> f64 {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == column).unwrap_or_else(|| panic!("no column {column} in {header:?}"));
    row[i].parse().unwrap()
}

fn read(p: PathBuf) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn rate_of_a_zero_trajectory_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("t.sqgt");
    let p = SqgParams { m: 2, t_final: 0.1, dt: 0.01, ..SqgParams::default() };
    std::fs::write(&t, trajectory_bytes(&Trajectory::zeros(p))).unwrap();
    let out = ok(&["rate", "--traj", s(&t), "--out-dir", s(dir.path())]);
    assert_eq!(cell(&out, "total"), 0.0);
    assert_eq!(out, read(dir.path().join("rate.csv")));
    let m = RunManifest::load(&dir.path().join("rate.manifest.txt")).unwrap();
    assert_eq!(m.command, "rate");
    assert_eq!(m.inputs.len(), 1);
    assert!(m.verify(dir.path()).unwrap().is_empty());
}

fn smooth_control(p: &SqgParams) -> ControlPath {
    let rng = CounterRng::new(3);
    let g1 = SpectralField::random(p.m, 1.0, 3.0, &rng, 1).project(p.m);
    let g2 = SpectralField::random(p.m, 1.0, 3.0, &rng, 2).project(p.m);
    ControlPath::from_fn(p, |t| {
        let mut f = g1.scaled(t);
        f.axpy((std::f64::consts::TAU * t).sin(), &g2).unwrap();
        f
    })
    .unwrap()
}

#[test]
fn skeleton_then_rate_recovers_the_control_cost() {
    let dir = tempfile::tempdir().unwrap();
    let p = SqgParams { m: 4, t_final: 0.3, dt: 1e-3, epsilon: 0.0, ..SqgParams::default() };
    let g = smooth_control(&p);
    let theta0 = SpectralField::from_modes(4, &[(ModeIndex::new(1, 2), Complex64::new(0.2, -0.1))]).unwrap();
    let (f, c) = (dir.path().join("f.sqgf"), dir.path().join("g.sqgc"));
    std::fs::write(&f, field_bytes(&theta0)).unwrap();
    std::fs::write(&c, control_bytes(&p, &g)).unwrap();
    let d = s(dir.path());
    let common = ["--m", "4", "--T", "0.3", "--dt", "0.001", "--epsilon", "0", "--out-dir", d];
    let mut args = vec!["skeleton", "--theta0", s(&f), "--control", s(&c)];
    args.extend(common);
    ok(&args);
    let traj = dir.path().join("skeleton.sqgt");
    let out = ok(&["rate", "--traj", s(&traj), "--control-out", "--out-dir", d]);
    let half = 0.5 * g.l2_sq_integral();
    assert!((cell(&out, "i_dyna") - half).abs() < 1e-3 * half, "{out}");
    let (_, back) = read_control(&dir.path().join("recovered_control.sqgc")).unwrap();
    assert_eq!(back.len(), g.len());

    // The stored path also satisfies both energy balances and the reversed identity.
    let energy = ok(&["energy-audit", "--traj", s(&traj), "--control", s(&c), "--out-dir", d]);
    for line in energy.lines().skip(1) {
        let r: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(r.abs() < 1e-4, "{energy}");
    }
    let ident = ok(&["reverse", "--traj", s(&traj), "--control", s(&c), "--out-dir", d]);
    assert!(cell(&ident, "difference").abs() < 1e-3 * cell(&ident, "identity").abs(), "{ident}");
    let rev = read_trajectory(&dir.path().join("reversed.sqgt")).unwrap();
    assert_eq!(rev.len(), p.n_steps() + 1);
}

#[test]
fn simulate_is_reproducible_from_its_manifest() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    ok(&["simulate", "--epsilon", "0.1", "--m", "2", "--T", "50", "--seed", "7", "--out-dir", s(a.path())]);
    let m = RunManifest::load(&a.path().join("simulate.manifest.txt")).unwrap();
    assert_eq!(m.seed, 7);
    let mut argv: Vec<String> = m.argv.clone();
    let i = argv.iter().position(|x| x == "--out-dir").unwrap();
    argv[i + 1] = s(b.path()).to_string();
    let argv: Vec<&str> = argv.iter().map(String::as_str).collect();
    ok(&argv);
    let again = RunManifest::load(&b.path().join("simulate.manifest.txt")).unwrap();
    assert_eq!(again.outputs, m.outputs);
    for name in ["trajectory.sqgt", "diagnostics.csv"] {
        assert_eq!(std::fs::read(a.path().join(name)).unwrap(), std::fs::read(b.path().join(name)).unwrap());
    }
    let traj = read_trajectory(&a.path().join("trajectory.sqgt")).unwrap();
    assert_eq!(traj.len(), 50_001);
    assert!(
        read(a.path().join("diagnostics.csv")).starts_with("t,l2,h_alpha_minus_2beta,h_2alpha_minus_2beta,residual\n")
    );
}

#[test]
fn strided_output_and_json_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let d = s(dir.path());
    ok(&["simulate", "--T", "0.1", "--dt", "0.01", "--stride", "5", "--json-manifest", "--out-dir", d]);
    let traj = read_trajectory(&dir.path().join("trajectory.sqgt")).unwrap();
    assert_eq!(traj.len(), 3);
    assert!((traj.dt() - 0.05).abs() < 1e-15);
    let text = read(dir.path().join("simulate.manifest.json"));
    assert!(text.starts_with('{'));
    assert!(RunManifest::load(&dir.path().join("simulate.manifest.json"))
        .unwrap()
        .verify(dir.path())
        .unwrap()
        .is_empty());
}

#[test]
fn config_files_are_validated_with_flags_on_top() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "alpha = 0.3\nbeta = 0.4\n").unwrap();
    let out = sqg(&["exp-moment", "--config", s(&cfg), "--out-dir", s(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("beta") && err.contains("alpha/2"), "{err}");

    // A valid flag repairs it.
    let out =
        ok(&["exp-moment", "--config", s(&cfg), "--beta", "0.15", "--samples", "2000", "--out-dir", s(dir.path())]);
    assert!(cell(&out, "z").abs() < 4.0, "{out}");

    std::fs::write(&cfg, "alpha = 0.5\ns_reg = 1.2\n").unwrap();
    let out = sqg(&["exp-moment", "--config", s(&cfg), "--out-dir", s(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("s_reg"));
}

#[test]
fn usage_errors_exit_with_one_and_show_help() {
    let out = sqg(&["rate", "--bogus"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("--bogus") && err.contains("Usage"), "{err}");
    assert_eq!(sqg(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(sqg(&["--help"]).status.code(), Some(0));

    let dir = tempfile::tempdir().unwrap();
    let junk = dir.path().join("junk.sqgt");
    std::fs::write(&junk, b"nonsense").unwrap();
    let out = sqg(&["rate", "--traj", s(&junk), "--out-dir", s(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("magic"));
}

#[test]
fn quasipotential_reports_and_fails_numerically_on_a_short_horizon() {
    let dir = tempfile::tempdir().unwrap();
    let d = s(dir.path());
    let f = dir.path().join("phi.sqgf");
    std::fs::write(
        &f,
        field_bytes(&SpectralField::from_modes(2, &[(ModeIndex::new(1, 1), Complex64::new(0.3, 0.1))]).unwrap()),
    )
    .unwrap();
    let out =
        ok(&["quasipotential", "--phi", s(&f), "--m", "2", "--T", "10", "--dt", "0.001", "--path-out", "--out-dir", d]);
    let expected = 2.0 * (0.09 + 0.01) * (1.0 - 1e-6);
    assert!((cell(&out, "estimate") - expected).abs() < 1e-5, "{out}");
    assert!(dir.path().join("path.sqgt").exists());

    let out = sqg(&["quasipotential", "--phi", s(&f), "--m", "2", "--T", "0.05", "--dt", "0.01", "--out-dir", d]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn reversibility_test_flags_the_mutated_drift() {
    let dir = tempfile::tempdir().unwrap();
    let d = s(dir.path());
    let base = ["reversibility-test", "--m", "2", "--epsilon", "0.1", "--T", "1", "--dt", "0.001", "--n-traj", "4000"];
    let mut args = base.to_vec();
    args.extend(["--drift", "mutated", "--out-dir", d]);
    let out = sqg(&args);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAIL"));
    let mut args = base.to_vec();
    args.extend(["--out-dir", d]);
    let out = ok(&args);
    assert_eq!(out.lines().count(), 13);
}

#[test]
fn invariance_test_writes_one_row_per_coordinate() {
    let dir = tempfile::tempdir().unwrap();
    let out = sqg(&["invariance-test", "--m", "2", "--T", "200", "--dt", "0.005", "--out-dir", s(dir.path())]);
    assert!(matches!(out.status.code(), Some(0) | Some(3)));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("k1,k2,expected,estimate,se,tau_int,z\n"));
    assert_eq!(csv.lines().count(), 13);
}

#[test]
fn tilt_with_a_null_target_has_unit_weights() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&["tilt", "--m", "2", "--T", "0.2", "--dt", "0.01", "--n-traj", "50", "--out-dir", s(dir.path())]);
    assert_eq!(cell(&out, "mean_weight"), 1.0);
    assert_eq!(cell(&out, "rate_bound"), 0.0);
    assert_eq!(cell(&out, "n_traj"), 50.0);
}

#[test]
fn scaling_report_fits_the_hilbert_schmidt_slope() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&["scaling-report", "--alpha", "0.75", "--out-dir", s(dir.path())]);
    assert_eq!(out.lines().count(), 10);
    let fit = read(dir.path().join("hs_fit.csv"));
    let (slope, expected) = (cell(&fit, "slope"), cell(&fit, "expected"));
    assert!((slope / expected - 1.0).abs() < 0.1, "{fit}");
}

#[test]
fn stochastic_energy_audit_runs_headless() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&["energy-audit", "--m", "2", "--T", "0.5", "--dt", "0.001", "--out-dir", s(dir.path())]);
    assert!(cell(&out, "max_abs_residual").is_finite());
    let out = sqg(&["energy-audit", "--traj", "x.sqgt", "--m", "2"]);
    assert_eq!(out.status.code(), Some(1));
}
