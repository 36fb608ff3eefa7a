//! Acceptance criteria 1-10. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use nalgebra::{Matrix3, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nmflow_core::analysis::{
    detect_intervals, overlap_correlation_within, positive_population_window, verify_relation, Classification, Model,
    DEFAULT_THRESHOLD,
};
use nmflow_core::dynamics::{integrate, TimeLocalGenerator};
use nmflow_core::jc::{g_closed_form, g_volterra, g_zeros, jc_rate};
use nmflow_core::qfi::{build_c_matrix, max_qfi, optimal_directions, qfi_for_direction};
use nmflow_core::sbm::{solve_sbm, DEFAULT_STEP};
use nmflow_core::{BlochState, IntegratorConfig, JcParams, SbmParams, SbmSolution, SpectralDensity, Trajectory};

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn uniform(t_max: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| t_max * i as f64 / (n - 1) as f64).collect()
}

fn jc(ratio: f64) -> JcParams {
    JcParams::new(1.0, ratio, 1.0).unwrap()
}

fn sbm(s: f64, temperature: f64) -> (SbmParams, SbmSolution) {
    let sd = SpectralDensity::ohmic_family(0.02, s, 10.0).unwrap();
    let p = SbmParams::new(1.0, sd, temperature).unwrap();
    let sol = solve_sbm(&p, 50.0, 5001, DEFAULT_STEP).unwrap();
    (p, sol)
}

fn c1_regime_boundary() -> Outcome {
    let lambda = 1.0;
    let grid = uniform(50.0 / lambda, 50_001);
    let mut notes = Vec::new();
    let mut pass = true;
    for ratio in [0.1, 0.2, 0.49] {
        let p = jc(ratio);
        let min = grid
            .iter()
            .map(|&t| jc_rate(&p, t).unwrap())
            .fold(f64::INFINITY, f64::min);
        pass &= min >= -1e-12;
        notes.push(format!("{ratio}: min {min:.3e}"));
    }
    for ratio in [0.6, 5.0] {
        let p = jc(ratio);
        // samples at zeros of G are singular and skipped
        let min = grid
            .iter()
            .filter_map(|&t| jc_rate(&p, t).ok())
            .fold(f64::INFINITY, f64::min);
        pass &= min < -0.1 * lambda;
        notes.push(format!("{ratio}: min {min:.3e}"));
    }
    check(pass, format!("gamma0/lambda -> min rate: {}", notes.join(", ")))
}

fn c2_jc_relation() -> Outcome {
    let grid = uniform(50.0, 5001);
    let mut worst = 0.0_f64;
    for ratio in [0.2, 5.0] {
        let traj = Trajectory::from_jc(&jc(ratio), &grid).unwrap();
        worst = worst.max(verify_relation(&traj, Model::Jc).residual);
    }
    check(
        worst < 1e-12,
        format!("max normalised residual {worst:.3e} (bound 1e-12)"),
    )
}

fn c3_volterra() -> Outcome {
    let lambda = 1.0;
    let dt = 1e-3 / lambda;
    let horizon = 20.0 / lambda;
    let mut pass = true;
    let mut notes = Vec::new();
    for ratio in [0.2, 5.0] {
        let p = jc(ratio);
        let sol = g_volterra(&p, horizon, dt).unwrap();
        let dev = sol
            .g
            .iter()
            .enumerate()
            .map(|(i, g)| (g - g_closed_form(&p, sol.time(i)).unwrap().g).abs())
            .fold(0.0, f64::max);
        pass &= dev < 1e-6;
        let numeric = sol.zero_crossings();
        let exact = g_zeros(&p, sol.time(sol.g.len() - 1));
        let shift = numeric
            .iter()
            .zip(&exact)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        pass &= numeric.len() == exact.len() && shift <= dt;
        notes.push(format!(
            "{ratio}: dev {dev:.3e}, {} zeros, max shift {shift:.1e}",
            exact.len()
        ));
    }
    check(pass, format!("t <= {horizon}, dt = {dt}: {}", notes.join("; ")))
}

fn c4_sbm_relation(fig2: &Trajectory) -> Outcome {
    let rel = verify_relation(fig2, Model::Sbm);
    check(
        rel.residual < 1e-8,
        format!(
            "normalised residual {:.3e} (bound 1e-8), {} samples checked, {} excluded",
            rel.residual, rel.checked, rel.excluded
        ),
    )
}

fn c5_ohmic(fig2: &Trajectory) -> Outcome {
    let report = detect_intervals(fig2, DEFAULT_THRESHOLD).unwrap();
    // initial decrease of the information
    let initial: Vec<f64> = fig2
        .t
        .iter()
        .zip(&fig2.i_q)
        .filter(|(t, _)| **t > 0.0 && **t <= 1.0)
        .map(|(_, q)| *q)
        .collect();
    let initial_negative = !initial.is_empty() && initial.iter().all(|&q| q < 0.0);
    let later_backflow = report.qfi_backflow_intervals.iter().any(|&(a, _)| a > 0.0);
    let max_ie = fig2.i_e.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let class = report.classification;
    check(
        initial_negative && later_backflow && max_ie <= 1e-12 && class == Classification::NmWithoutEnergyBackflow,
        format!(
            "I_Q < 0 on (0, 1]: {initial_negative}; first backflow at t = {:.4}; max I_E = {max_ie:.3e}; {class}",
            report.qfi_backflow_intervals.first().map_or(f64::NAN, |iv| iv.0)
        ),
    )
}

fn c6_sub_super_ohmic() -> Outcome {
    let (_, sub) = sbm(0.8, 0.5);
    let sub = Trajectory::from_sbm(&sub).unwrap();
    let sub_report = detect_intervals(&sub, DEFAULT_THRESHOLD).unwrap();
    let first_energy = sub_report.energy_backflow_intervals.first().map(|iv| iv.0);
    let max_ie = sub.i_e.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sub_ok = sub_report.classification == Classification::NmWithoutEnergyBackflow;

    let (_, sup) = sbm(3.0, 0.5);
    let sup = Trajectory::from_sbm(&sup).unwrap();
    let sup_report = detect_intervals(&sup, DEFAULT_THRESHOLD).unwrap();
    let overlap = overlap_correlation_within(&sup_report, positive_population_window(&sup_report));
    let sup_ok = sup_report.classification == Classification::NmWithEnergyBackflow && overlap == Some(1.0);
    check(
        sub_ok && sup_ok,
        format!(
            "s=0.8: {} (first I_E > 0 at t = {}, max I_E = {max_ie:.3e}); s=3: {}, overlap on B3 > 0 phase {:?}",
            sub_report.classification,
            first_energy.map_or("none".into(), |t| format!("{t:.3}")),
            sup_report.classification,
            overlap
        ),
    )
}

fn c7_oracle() -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for (s, temp) in [(1.0, 0.01), (0.8, 0.5), (3.0, 0.5)] {
        let (p, sol) = sbm(s, temp);
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
        pass &= dev < 1e-6;
        notes.push(format!("s={s}, T={temp}: {dev:.3e}"));
    }
    check(pass, format!("max-norm deviation on [0, 50]: {}", notes.join(", ")))
}

/// Unit vectors spread evenly over the sphere.
fn fibonacci_sphere(n: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5.0_f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

fn c8_qfi_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mesh = fibonacci_sphere(20_000);
    let (mut mesh_gap, mut dir_err, mut degeneracy) = (0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..1000 {
        let r = rng.random_range(1e-6_f64..1.0).cbrt();
        let z: f64 = rng.random_range(-1.0..1.0);
        let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let rho = (1.0 - z * z).sqrt();
        let b = BlochState::new(r * rho * phi.cos(), r * rho * phi.sin(), r * z);
        let target = max_qfi(&b);

        // (a) brute force over directions, |n x B|^2 = |B|^2 - (n.B)^2
        let best = mesh
            .iter()
            .map(|n| {
                let d = n[0] * b.x() + n[1] * b.y() + n[2] * b.z();
                target - d * d
            })
            .fold(f64::NEG_INFINITY, f64::max);
        mesh_gap = mesh_gap.max((target - best).abs());

        // (b) optimal directions
        let dirs = optimal_directions(&b);
        let (n1, n2) = (dirs.first, dirs.second);
        for err in [
            (n1.dot(&n1) - 1.0).abs(),
            (n2.dot(&n2) - 1.0).abs(),
            n1.dot(&n2).abs(),
            n1.as_bloch().dot(&b).abs(),
            n2.as_bloch().dot(&b).abs(),
            (qfi_for_direction(&b, &n1) - target).abs(),
            (qfi_for_direction(&b, &n2) - target).abs(),
        ] {
            dir_err = dir_err.max(err);
        }

        // (c) spectrum of C
        let c = build_c_matrix(&b).unwrap();
        let mut ev: Vec<f64> = SymmetricEigen::new(Matrix3::from_fn(|i, j| c[i][j]))
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(|x, y| y.total_cmp(x));
        degeneracy = degeneracy.max((ev[0] - ev[1]).abs());
    }
    check(
        mesh_gap < 1e-3 && dir_err < 1e-12 && degeneracy < 1e-9,
        format!("1000 states: mesh gap {mesh_gap:.2e}, direction error {dir_err:.2e}, top-eigenvalue split {degeneracy:.2e}"),
    )
}

fn c9_markov_monotone() -> Outcome {
    let grid = uniform(20.0, 2001);
    let cfg = IntegratorConfig::default();
    let b0 = BlochState::from_eta(std::f64::consts::FRAC_PI_3);
    let worst_increase = |states: &[BlochState], f: fn(&BlochState) -> f64| {
        states
            .windows(2)
            .map(|w| f(&w[1]) - f(&w[0]))
            .fold(f64::NEG_INFINITY, f64::max)
    };
    // amplitude damping with the transverse information used for the decay model
    let decay = TimeLocalGenerator::semigroup(1.0, 0.3, 0.0, 0.0);
    let sol = integrate(&decay, b0, &grid, &cfg).unwrap();
    let transverse = worst_increase(&sol.states, |b| b.x() * b.x() + b.y() * b.y());
    // unital channel (equal decay and pumping plus dephasing) with F_M = |B|^2
    let unital = TimeLocalGenerator::semigroup(1.0, 0.3, 0.3, 0.1);
    let sol = integrate(&unital, b0, &grid, &cfg).unwrap();
    let full = worst_increase(&sol.states, max_qfi);
    check(
        transverse <= 1e-12 && full <= 1e-12,
        format!("largest sample-to-sample increase: decay {transverse:.2e}, unital {full:.2e} (bound 1e-12)"),
    )
}

fn c10_determinism() -> Outcome {
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/fig2.cfg");
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let status = Command::new(env!("CARGO_BIN_EXE_nmflow"))
            .arg("run")
            .arg(&cfg)
            .arg("--out-dir")
            .arg(d.path())
            .output()
            .unwrap()
            .status;
        if !status.success() {
            return check(false, format!("nmflow run exited with {status}"));
        }
    }
    let mut same = true;
    let mut sizes = Vec::new();
    for file in ["fig2.csv", "fig2.report.json"] {
        let a = std::fs::read(dirs[0].path().join(file)).unwrap();
        let b = std::fs::read(dirs[1].path().join(file)).unwrap();
        same &= a == b;
        sizes.push(format!("{file} {} bytes", a.len()));
    }
    check(same, format!("byte-identical: {same} ({})", sizes.join(", ")))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let (_, fig2) = sbm(1.0, 0.01);
    let fig2 = Trajectory::from_sbm(&fig2).unwrap();
    let fig2_time = start.elapsed();

    type Criterion<'a> = (u8, &'a str, Duration, Box<dyn Fn() -> Outcome + 'a>);
    let criteria: Vec<Criterion> = vec![
        (
            1,
            "JC regime boundary",
            Duration::from_secs(1),
            Box::new(c1_regime_boundary),
        ),
        (
            2,
            "JC relation exactness",
            Duration::from_secs(1),
            Box::new(c2_jc_relation),
        ),
        (3, "JC Volterra oracle", Duration::from_secs(5), Box::new(c3_volterra)),
        (
            4,
            "SBM relation exactness",
            Duration::from_secs(30),
            Box::new(|| c4_sbm_relation(&fig2)),
        ),
        (
            5,
            "SBM Ohmic pattern",
            Duration::from_secs(30),
            Box::new(|| c5_ohmic(&fig2)),
        ),
        (
            6,
            "SBM sub/super-Ohmic",
            Duration::from_secs(60),
            Box::new(c6_sub_super_ohmic),
        ),
        (7, "SBM ODE oracle", Duration::from_secs(60), Box::new(c7_oracle)),
        (
            8,
            "QFI properties",
            Duration::from_secs(10),
            Box::new(c8_qfi_properties),
        ),
        (
            9,
            "Markovian monotonicity",
            Duration::from_secs(1),
            Box::new(c9_markov_monotone),
        ),
        (10, "Determinism", Duration::from_secs(60), Box::new(c10_determinism)),
    ];

    let mut failed = Vec::new();
    for (id, name, bound, run) in criteria {
        let t0 = Instant::now();
        let out = run();
        // the shared Ohmic trajectory counts toward criteria 4 and 5
        let elapsed = t0.elapsed() + if matches!(id, 4 | 5) { fig2_time } else { Duration::ZERO };
        let in_time = elapsed < bound;
        let pass = out.pass && in_time;
        println!(
            "criterion {id:>2} {} {name}: {} [{:.3} s, bound {} s{}]",
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            elapsed.as_secs_f64(),
            bound.as_secs(),
            if in_time { "" } else { ", too slow" }
        );
        if !pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing criteria {failed:?}");
        ExitCode::FAILURE
    }
}
