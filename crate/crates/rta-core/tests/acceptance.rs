//! End-to-end acceptance checks, one per shipped guarantee. Each test
//! prints a single pass/fail line; failures additionally panic with the
//! offending numbers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rta_core::mesh::{CellField, InitialCondition, Mesh1D};
use rta_core::metrics::{
    fit_convergence_rate, l1_abs_error, l1_rel_error, projection_error_l1, total_variation,
};
use rta_core::rta::{self, oracle};
use rta_core::shift_ops::{apply_shift, cyclic_shift, fractional_shift};
use rta_core::store::{load_trajectory, save_trajectory};
use rta_core::systems::{
    from_characteristics, rta_elasto_reconstruct, run_elasto_trajectory, to_characteristics,
    CharacteristicSpeed, ConservativeField, EigenBasis, ElastoModel, ElastoOffline,
};
use rta_core::upwind::{cfl_timestep, run_trajectory, SolveConfig, TransportModel, Trajectory};
use rta_core::Error;

// A plain `match` keeps the semantics honest for floats: a NaN comparison
// lands in the `false` arm and fails the criterion.
macro_rules! ensure {
    ($cond:expr, $($arg:tt)+) => {
        match $cond {
            true => {}
            false => return Err(format!($($arg)+)),
        }
    };
}

fn report(n: usize, name: &str, check: impl FnOnce() -> Result<(), String>) {
    match check() {
        Ok(()) => println!("acceptance {n:02} {name}: PASS"),
        Err(msg) => {
            println!("acceptance {n:02} {name}: FAIL ({msg})");
            panic!("acceptance {n:02} {name}: {msg}");
        }
    }
}

fn transport_model() -> TransportModel {
    TransportModel::new(5.0, 2.0, 0.0, 1.0).unwrap()
}

fn step_ic() -> InitialCondition {
    let third = 10.0 / 3.0;
    InitialCondition::piecewise_constant(vec![-third, third], vec![-1.0, 1.0]).unwrap()
}

/// Transport benchmark trajectory over [-10, 10] at CFL 0.8 anchored at
/// mu = 1, run until t ~ 0.8.
fn benchmark_trajectory(mu_i: f64, n_cells: usize) -> Trajectory {
    let model = transport_model();
    let mesh = Mesh1D::new(-10.0, 10.0, n_cells).unwrap();
    let dt = cfl_timestep(&model, &mesh, 0.8, 1.0).unwrap();
    let n_steps = (0.8 / dt).round() as usize;
    let cfg = SolveConfig::new(dt, n_steps).unwrap();
    run_trajectory(&model, mu_i, &step_ic(), &mesh, &cfg).unwrap()
}

fn random_field(rng: &mut ChaCha8Rng, mesh: Mesh1D) -> CellField {
    let values = (0..mesh.n_cells()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    CellField::new(mesh, values).unwrap()
}

fn max_abs_diff(a: &CellField, b: &CellField) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[test]
fn criterion_01_identity_reconstruction() {
    report(1, "identity reconstruction at mu = mu_i", || {
        let model = transport_model();
        let traj = benchmark_trajectory(0.4, 250);
        for k in 0..=traj.n_steps() {
            let phi = rta::reconstruct(&traj, &model, 0.4, k).unwrap();
            for (j, (a, b)) in phi.values().iter().zip(traj.fields()[k].values()).enumerate()
            {
                ensure!(
                    a.to_bits() == b.to_bits(),
                    "bit mismatch at k = {k}, cell {}: {a} vs {b}",
                    j + 1
                );
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_02_oracle_equivalence() {
    report(2, "fast recurrence agrees with geometric oracle", || {
        let mut rng = ChaCha8Rng::seed_from_u64(2);

        // (a) exhaustive shift grid at N = 7: s from -3N to 3N in steps of 0.1.
        let mesh7 = Mesh1D::new(0.0, 7.0, 7).unwrap();
        for _ in 0..5 {
            let u = random_field(&mut rng, mesh7);
            for i in -210..=210 {
                let s = i as f64 * 0.1;
                let fast = apply_shift(&u, s).unwrap();
                let geo = oracle::shift_cell_averages(&u, s).unwrap();
                let d = max_abs_diff(&fast, &geo);
                ensure!(d <= 1e-13, "grid case s = {s}: max deviation {d:.3e}");
            }
        }

        // (b) randomized sizes up to 2048 and shifts up to ten domains.
        for case in 0..1000 {
            let n = rng.gen_range(2..=2048usize);
            let mesh = Mesh1D::new(0.0, n as f64, n).unwrap();
            let u = random_field(&mut rng, mesh);
            let s = rng.gen_range(-10.0 * n as f64..10.0 * n as f64);
            let fast = apply_shift(&u, s).unwrap();
            let geo = oracle::shift_cell_averages(&u, s).unwrap();
            let d = max_abs_diff(&fast, &geo);
            ensure!(
                d <= 1e-13,
                "random case {case} (n = {n}, s = {s}): max deviation {d:.3e}"
            );
        }
        Ok(())
    });
}

#[test]
fn criterion_03_total_variation_bounded() {
    report(3, "reconstruction is TVB and the solver is TVD", || {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let model = transport_model();
        let mesh = Mesh1D::new(-10.0, 10.0, 100).unwrap();
        let dt = cfl_timestep(&model, &mesh, 0.8, 1.0).unwrap();
        let cfg = SolveConfig::new(dt, 60).unwrap();

        for case in 0..100 {
            let m = rng.gen_range(1..=8usize);
            let mut breakpoints: Vec<f64> =
                (0..m).map(|_| rng.gen_range(-10.0..10.0)).collect();
            breakpoints.sort_by(f64::total_cmp);
            breakpoints.dedup();
            let values: Vec<f64> = (0..breakpoints.len())
                .map(|_| rng.gen_range(-2.0..2.0))
                .collect();
            let ic = InitialCondition::piecewise_constant(breakpoints, values).unwrap();
            let mu_i = rng.gen_range(0.0..1.0);
            let traj = run_trajectory(&model, mu_i, &ic, &mesh, &cfg).unwrap();

            let tv0 = total_variation(&traj.fields()[0]);
            let mut prev = tv0;
            for (k, f) in traj.fields().iter().enumerate().skip(1) {
                let tv = total_variation(f);
                ensure!(
                    tv <= prev * (1.0 + 1e-12),
                    "case {case}: TV grew at step {k}: {tv} > {prev}"
                );
                prev = tv;
            }

            for _ in 0..3 {
                let mu = rng.gen_range(0.0..1.0);
                let k = rng.gen_range(0..=60usize);
                let phi = rta::reconstruct(&traj, &model, mu, k).unwrap();
                let tv = total_variation(&phi);
                ensure!(
                    tv <= tv0 * (1.0 + 1e-12),
                    "case {case}: TV({mu}, {k}) = {tv} exceeds TV0 = {tv0}"
                );
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_04_conservation() {
    report(4, "cell totals are conserved by every operator", || {
        let mut rng = ChaCha8Rng::seed_from_u64(4);

        for case in 0..200 {
            let n = rng.gen_range(3..=300usize);
            let mesh = Mesh1D::new(-10.0, 10.0, n).unwrap();
            let u = random_field(&mut rng, mesh);
            let scale = mesh.dx() * u.values().iter().map(|v| v.abs()).sum::<f64>() + 1e-30;
            let mass = |f: &CellField| mesh.dx() * f.sum();
            let m0 = mass(&u);

            let nu = rng.gen_range(-1.0..1.0);
            let stepped = rta_core::upwind::upwind_step(&u, nu).unwrap();
            ensure!(
                (mass(&stepped) - m0).abs() <= 1e-12 * scale,
                "case {case}: upwind_step lost mass"
            );

            let s = rng.gen_range(-3.0 * n as f64..3.0 * n as f64);
            let shifted = apply_shift(&u, s).unwrap();
            ensure!(
                (mass(&shifted) - m0).abs() <= 1e-12 * scale,
                "case {case}: apply_shift lost mass"
            );
        }

        // Reconstruction on a solved trajectory.
        let traj = benchmark_trajectory(0.65, 250);
        let m0 = traj.mesh().dx() * traj.fields()[0].sum();
        let scale = traj.mesh().dx()
            * traj.fields()[0].values().iter().map(|v| v.abs()).sum::<f64>();
        for _ in 0..50 {
            let mu = rng.gen_range(0.0..1.0);
            let k = rng.gen_range(0..=traj.n_steps());
            let phi = rta::reconstruct(&traj, &transport_model(), mu, k).unwrap();
            let m = traj.mesh().dx() * phi.sum();
            ensure!(
                (m - m0).abs() <= 1e-12 * scale,
                "reconstruction at ({mu}, {k}) lost mass: {m} vs {m0}"
            );
        }
        Ok(())
    });
}

#[test]
fn criterion_05_projection_error_equality() {
    report(5, "projection error matches its closed form", || {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let model = transport_model();
        let traj = benchmark_trajectory(0.4, 250);
        let dx = traj.mesh().dx();
        let tv0 = total_variation(&traj.fields()[0]);
        let bound = 0.5 * dx * tv0;

        for &k in &[1usize, 7, 22, 45, traj.n_steps()] {
            for _ in 0..6 {
                let mu = rng.gen_range(0.0..1.0);
                let s = rta::relative_shift(&traj, &model, mu, k).unwrap();
                let theta = s - s.floor();
                let snapshot = &traj.fields()[k];
                let measured = oracle::shifted_projection_gap_l1(snapshot, s).unwrap();
                let closed = projection_error_l1(snapshot, theta);
                ensure!(
                    (measured - closed).abs() <= 1e-12 * closed.max(1e-14),
                    "k = {k}, mu = {mu}: measured {measured} vs closed form {closed}"
                );
                ensure!(
                    measured <= bound * (1.0 + 1e-12),
                    "k = {k}, mu = {mu}: {measured} exceeds the a priori bound {bound}"
                );
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_06_convergence_rates() {
    report(6, "L1 errors shrink at a rate near one half", || {
        let model = transport_model();
        let ic = step_ic();
        let targets = [0.2, 0.5, 0.8];
        let mut points: Vec<Vec<(f64, f64)>> = vec![Vec::new(); targets.len()];

        for &n in &[125usize, 250, 500, 1000, 2000] {
            let mesh = Mesh1D::new(-10.0, 10.0, n).unwrap();
            let dt = cfl_timestep(&model, &mesh, 0.8, 1.0).unwrap();
            let n_steps = (2.0 / dt).round() as usize;
            let cfg = SolveConfig::new(dt, n_steps).unwrap();
            let snapshot = run_trajectory(&model, 0.65, &ic, &mesh, &cfg).unwrap();
            for (t, &mu) in targets.iter().enumerate() {
                let direct = run_trajectory(&model, mu, &ic, &mesh, &cfg).unwrap();
                let phi = rta::reconstruct(&snapshot, &model, mu, n_steps).unwrap();
                let e = l1_abs_error(&phi, &direct.fields()[n_steps]).unwrap();
                points[t].push((mesh.dx(), e));
            }
        }

        for (t, &mu) in targets.iter().enumerate() {
            let (rate, constant) = fit_convergence_rate(&points[t]).map_err(|e| e.to_string())?;
            println!(
                "  target mu = {mu}: rate {rate:.3}, constant {constant:.3}, errors {:?}",
                points[t].iter().map(|p| p.1).collect::<Vec<_>>()
            );
            ensure!(
                (0.35..=0.65).contains(&rate),
                "target mu = {mu}: fitted rate {rate:.3} outside [0.35, 0.65]"
            );
        }
        Ok(())
    });
}

#[test]
fn criterion_07_no_error_blowup_in_time() {
    report(7, "relative error stays flat over the horizon", || {
        let model = transport_model();
        let snapshot = benchmark_trajectory(0.65, 250);
        let mesh = snapshot.mesh();
        let cfg = SolveConfig::new(snapshot.dt(), snapshot.n_steps()).unwrap();

        for mu in [0.2, 0.5, 0.8] {
            let direct = run_trajectory(&model, mu, &step_ic(), &mesh, &cfg).unwrap();
            let mut history: Vec<f64> = Vec::with_capacity(snapshot.n_steps() + 1);
            for k in 0..=snapshot.n_steps() {
                let phi = rta::reconstruct(&snapshot, &model, mu, k).unwrap();
                history.push(l1_rel_error(&phi, &direct.fields()[k]).unwrap());
            }
            let max = history.iter().cloned().fold(0.0, f64::max);
            let mut sorted = history.clone();
            sorted.sort_by(f64::total_cmp);
            let median = sorted[sorted.len() / 2];
            println!("  target mu = {mu}: max e_rel {max:.4}, median {median:.4}");
            ensure!(
                max <= 5.0 * median,
                "target mu = {mu}: max e_rel {max} exceeds 5 x median {median}"
            );
        }
        Ok(())
    });
}

fn restrict_to_coarse(fine: &CellField, coarse_mesh: Mesh1D) -> CellField {
    let n = coarse_mesh.n_cells();
    assert_eq!(fine.len(), 2 * n);
    let u = fine.values();
    let values = (0..n).map(|j| 0.5 * (u[2 * j] + u[2 * j + 1])).collect();
    CellField::new(coarse_mesh, values).unwrap()
}

fn elasto_setup(n_cells: usize, n_steps: usize, mu_i: f64) -> (ElastoModel, ElastoOffline) {
    let model = ElastoModel::new(19e10, 1e11, 7800.0, 0.0, 1.0).unwrap();
    let mesh = Mesh1D::new(-10.0, 10.0, n_cells).unwrap();
    let dt = cfl_timestep(&CharacteristicSpeed::forward(model), &mesh, 0.8, 1.0).unwrap();
    let sigma = CellField::constant(mesh, 0.0).unwrap();
    let velocity = InitialCondition::piecewise_constant(vec![-10.0, 0.0], vec![1.0, 0.0])
        .unwrap()
        .project(&mesh)
        .unwrap();
    let ic = ConservativeField::new(sigma, velocity).unwrap();
    let cfg = SolveConfig::new(dt, n_steps).unwrap();
    let off = run_elasto_trajectory(&model, mu_i, &ic, &cfg).unwrap();
    (model, off)
}

#[test]
fn criterion_08_elastodynamics_pipeline() {
    report(8, "elastic reconstruction at discretization accuracy", || {
        let k_max = 1229;
        let (model, off_i) = elasto_setup(250, k_max, 0.05);
        let (_, direct) = elasto_setup(250, k_max, 0.8);
        let (_, direct_fine) = elasto_setup(500, 2 * k_max, 0.8);
        ensure!(
            direct_fine.dt().to_bits() == (0.5 * direct.dt()).to_bits(),
            "halving the mesh must halve the time step exactly"
        );

        // (a) characteristic split followed by recombination is an identity.
        for mu in [0.05, 0.8] {
            let basis = EigenBasis::new(&model, mu).unwrap();
            let u = direct.conservative_at(615).unwrap();
            let back = from_characteristics(&to_characteristics(&u, &basis), &basis);
            let sig_scale = u
                .sigma()
                .values()
                .iter()
                .map(|v| v.abs())
                .fold(0.0, f64::max);
            ensure!(
                max_abs_diff(back.sigma(), u.sigma()) <= 1e-12 * sig_scale,
                "stress not recovered by the split at mu = {mu}"
            );
            ensure!(
                max_abs_diff(back.velocity(), u.velocity()) <= 1e-12,
                "velocity not recovered by the split at mu = {mu}"
            );
        }

        // (b) reconstruction error vs directly solving, measured against the
        // solver's own refinement gap.
        let coarse_mesh = off_i.mesh();
        for k in [123usize, 492, 1229] {
            let rebuilt = rta_elasto_reconstruct(&off_i, &model, 0.8, k).unwrap();
            let d250 = direct.conservative_at(k).unwrap();
            let d500 = direct_fine.conservative_at(2 * k).unwrap();
            let restricted_sigma = restrict_to_coarse(d500.sigma(), coarse_mesh);
            let restricted_velocity = restrict_to_coarse(d500.velocity(), coarse_mesh);

            let e_rta_s = l1_rel_error(rebuilt.sigma(), d250.sigma()).unwrap();
            let e_self_s = l1_rel_error(&restricted_sigma, d250.sigma()).unwrap();
            let e_rta_v = l1_rel_error(rebuilt.velocity(), d250.velocity()).unwrap();
            let e_self_v = l1_rel_error(&restricted_velocity, d250.velocity()).unwrap();
            println!(
                "  k = {k}: stress {e_rta_s:.4} vs self {e_self_s:.4}, velocity {e_rta_v:.4} vs self {e_self_v:.4}"
            );
            ensure!(
                e_rta_s <= 3.0 * e_self_s,
                "k = {k}: stress error {e_rta_s} exceeds 3 x refinement gap {e_self_s}"
            );
            ensure!(
                e_rta_v <= 3.0 * e_self_v,
                "k = {k}: velocity error {e_rta_v} exceeds 3 x refinement gap {e_self_v}"
            );
        }
        Ok(())
    });
}

#[test]
fn criterion_09_shift_operator_algebra() {
    report(9, "shift operator algebra identities", || {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for &n in &[4usize, 7, 32, 101] {
            let mesh = Mesh1D::new(0.0, n as f64, n).unwrap();
            let u = random_field(&mut rng, mesh);

            let k0 = fractional_shift(&u, 0.0).unwrap();
            ensure!(k0.values() == u.values(), "K(0) is not the identity at n = {n}");
            let k1 = fractional_shift(&u, 1.0).unwrap();
            ensure!(
                k1.values() == cyclic_shift(&u, 1).values(),
                "K(1) is not the unit permutation at n = {n}"
            );

            for _ in 0..20 {
                let m = rng.gen_range(-3 * n as i64..3 * n as i64);
                let omega = rng.gen_range(0.0..1.0);
                let a = fractional_shift(&cyclic_shift(&u, m), omega).unwrap();
                let b = cyclic_shift(&fractional_shift(&u, omega).unwrap(), m);
                ensure!(
                    max_abs_diff(&a, &b) <= 1e-15,
                    "K and L do not commute at n = {n}, m = {m}, omega = {omega}"
                );
            }

            for _ in 0..20 {
                let a = rng.gen_range(-3 * n as i64..3 * n as i64);
                let b = rng.gen_range(-3 * n as i64..3 * n as i64);
                let two = apply_shift(&apply_shift(&u, a as f64).unwrap(), b as f64).unwrap();
                let one = apply_shift(&u, (a + b) as f64).unwrap();
                for (x, y) in two.values().iter().zip(one.values()) {
                    ensure!(
                        x.to_bits() == y.to_bits(),
                        "integer shifts failed to compose exactly at n = {n}"
                    );
                }
            }
        }

        // Fractional shifts do not compose: two half shifts smear a pulse,
        // one whole shift permutes it.
        let mesh = Mesh1D::new(0.0, 4.0, 4).unwrap();
        let pulse = CellField::new(mesh, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let twice = fractional_shift(&fractional_shift(&pulse, 0.5).unwrap(), 0.5).unwrap();
        let once = apply_shift(&pulse, 1.0).unwrap();
        ensure!(
            twice.values() == [0.25, 0.5, 0.25, 0.0] && once.values() == [0.0, 1.0, 0.0, 0.0],
            "fractional non-composition counterexample failed"
        );
        Ok(())
    });
}

#[test]
fn criterion_10_persistence_round_trip_and_fault_injection() {
    report(10, "persistence is bit-exact and corruption is loud", || {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let path = dir.path().join("snapshot.traj");
        let traj = benchmark_trajectory(0.4, 40);
        save_trajectory(&traj, &path).map_err(|e| e.to_string())?;
        let back = load_trajectory(&path).map_err(|e| e.to_string())?;

        ensure!(back.mu_i().to_bits() == traj.mu_i().to_bits(), "mu_i changed");
        ensure!(back.nu_i().to_bits() == traj.nu_i().to_bits(), "nu_i changed");
        ensure!(back.dt().to_bits() == traj.dt().to_bits(), "dt changed");
        ensure!(back.mesh() == traj.mesh(), "mesh changed");
        for (k, (a, b)) in back.fields().iter().zip(traj.fields()).enumerate() {
            for (x, y) in a.values().iter().zip(b.values()) {
                ensure!(x.to_bits() == y.to_bits(), "value changed at step {k}");
            }
        }
        let path2 = dir.path().join("resaved.traj");
        save_trajectory(&back, &path2).map_err(|e| e.to_string())?;
        ensure!(
            std::fs::read(&path).unwrap() == std::fs::read(&path2).unwrap(),
            "resaving a loaded trajectory altered the bytes"
        );

        let pristine = std::fs::read(&path).unwrap();
        let header_end = pristine.windows(2).position(|w| w == b"\n\n").unwrap();
        let corrupt = dir.path().join("corrupt.traj");
        let mut faults: Vec<(&str, Vec<u8>)> = vec![
            ("payload truncated", pristine[..pristine.len() - 8].to_vec()),
            ("payload extended", {
                let mut b = pristine.clone();
                b.extend_from_slice(&[0u8; 4]);
                b
            }),
            ("header truncated", pristine[..header_end - 5].to_vec()),
            ("nan injected", {
                let mut b = pristine.clone();
                let at = header_end + 2 + 8 * 17;
                b[at..at + 8].copy_from_slice(&f64::NAN.to_le_bytes());
                b
            }),
        ];
        let header = String::from_utf8(pristine[..header_end].to_vec()).unwrap();
        for (from, to) in [
            ("n_cells=40", "n_cells=41"),
            ("n_steps=", "n_stepz="),
            ("format_version=1", "format_version=9"),
        ] {
            let mut bytes = header.replace(from, to).into_bytes();
            bytes.extend_from_slice(&pristine[header_end..]);
            faults.push(("header tampered", bytes));
        }

        for (label, bytes) in faults {
            std::fs::write(&corrupt, &bytes).unwrap();
            match load_trajectory(&corrupt) {
                Err(Error::Parse { .. }) | Err(Error::Integrity { .. }) => {}
                Err(other) => {
                    return Err(format!(
                        "{label}: expected a parse or integrity error, got {other}"
                    ))
                }
                Ok(_) => return Err(format!("{label}: corruption loaded silently")),
            }
        }
        Ok(())
    });
}
