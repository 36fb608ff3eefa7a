use nmflow_core::analysis::{
    detect_intervals, overlap_correlation, overlap_correlation_within, positive_population_window,
    sign_lock_violations, verify_relation, Classification, Model, Trajectory, DEFAULT_THRESHOLD,
};
use nmflow_core::dynamics::{integrate, TimeLocalGenerator};
use nmflow_core::sbm::{solve_sbm, DEFAULT_STEP};
use nmflow_core::{BlochState, IntegratorConfig, SbmParams, SbmSolution, SpectralDensity};

fn solve(s: f64, temperature: f64, t_max: f64, n: usize) -> (SbmParams, SbmSolution) {
    let sd = SpectralDensity::ohmic_family(0.02, s, 10.0).unwrap();
    let p = SbmParams::new(1.0, sd, temperature).unwrap();
    let sol = solve_sbm(&p, t_max, n, DEFAULT_STEP).unwrap();
    (p, sol)
}

#[test]
fn ohmic_low_temperature_has_no_energy_backflow() {
    let (_, sol) = solve(1.0, 0.01, 50.0, 5001);
    let traj = Trajectory::from_sbm(&sol).unwrap();
    let report = detect_intervals(&traj, DEFAULT_THRESHOLD).unwrap();
    assert_eq!(report.classification, Classification::NmWithoutEnergyBackflow);
    assert!(traj.i_e.iter().all(|&v| v <= 1e-12));
    assert!(traj.i_q[1..50].iter().all(|&v| v < 0.0));
    assert_eq!(overlap_correlation(&report), Some(0.0));
    // the QFI backflow starts where the population changes sign
    let flip = report.sigma_z_sign_change.unwrap();
    assert!((report.qfi_backflow_intervals[0].0 - flip).abs() < 1e-2);
    assert_eq!(sign_lock_violations(&traj, Model::Sbm), 0);
}

#[test]
fn super_ohmic_backflow_is_sign_locked_while_population_positive() {
    let (_, sol) = solve(3.0, 0.5, 50.0, 5001);
    let traj = Trajectory::from_sbm(&sol).unwrap();
    let report = detect_intervals(&traj, DEFAULT_THRESHOLD).unwrap();
    assert_eq!(report.classification, Classification::NmWithEnergyBackflow);
    assert!(report.sigma_z_sign_change.is_none());
    assert!(traj.bloch.iter().all(|b| b.z() > 0.0));
    for (i, (&q, &e)) in traj.i_q.iter().zip(&traj.i_e).enumerate() {
        assert_eq!(q > 0.0, e > 0.0, "sample {i}");
    }
    assert!(verify_relation(&traj, Model::Sbm).residual < 1e-10);
    let window = positive_population_window(&report);
    assert_eq!(overlap_correlation_within(&report, window), Some(1.0));
}

#[test]
fn ode_oracle_matches_closed_solution() {
    for (s, temp) in [(1.0, 0.01), (0.8, 0.5), (3.0, 0.5)] {
        let (p, sol) = solve(s, temp, 50.0, 2001);
        let traj = Trajectory::from_sbm(&sol).unwrap();
        let gen = TimeLocalGenerator::spin_boson(
            p.omega0,
            |t| sol.rates_at(t).gamma_plus,
            |t| sol.rates_at(t).gamma_minus,
        );
        let ode = integrate(
            &gen,
            BlochState::new(0.0, 0.0, 1.0),
            &traj.t,
            &IntegratorConfig::default(),
        )
        .unwrap();
        let dev = ode
            .states
            .iter()
            .zip(&traj.bloch)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max);
        assert!(dev < 1e-6, "s={s}: {dev}");
    }
}

#[test]
fn ode_trajectory_relation_is_discretisation_limited() {
    let (p, sol) = solve(1.0, 0.01, 50.0, 50_001);
    let traj = Trajectory::from_sbm(&sol).unwrap();
    let gen = TimeLocalGenerator::spin_boson(
        p.omega0,
        |t| sol.rates_at(t).gamma_plus,
        |t| sol.rates_at(t).gamma_minus,
    );
    let ode = integrate(
        &gen,
        BlochState::new(0.0, 0.0, 1.0),
        &traj.t,
        &IntegratorConfig::default(),
    )
    .unwrap();
    let oracle = Trajectory::from_ode(Model::Sbm, p.omega0, &ode, |b| b.norm_sq()).unwrap();
    let rel = verify_relation(&oracle, Model::Sbm);
    assert!(rel.residual < 1e-3, "{rel:?}");
    // Away from the <sigma_z> zero crossing, where the finite-difference
    // error of d(B3^2)/dt is divided by a vanishing B3, the bound is 1e-4.
    let flip = oracle
        .bloch
        .windows(2)
        .position(|w| w[0].z() > 0.0 && w[1].z() <= 0.0)
        .unwrap();
    let scale = oracle.i_e.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let worst = (0..oracle.len())
        .filter(|&i| i + 1 < flip || i > flip + 2)
        .map(|i| (oracle.i_e[i] - oracle.i_q[i] / (4.0 * oracle.bloch[i].z())).abs())
        .fold(0.0, f64::max);
    assert!(worst / scale < 1e-4, "{}", worst / scale);
}

#[test]
fn coherent_initial_state_stays_physical() {
    let (p, sol) = solve(0.8, 0.5, 30.0, 3001);
    for ints in sol.integrals() {
        for eta in [0.3, 1.2, 2.0, 3.0] {
            let b = nmflow_core::sbm::sbm_bloch(p.omega0, eta, &ints);
            assert!(b.is_physical(1e-9), "{b:?}");
        }
    }
}
