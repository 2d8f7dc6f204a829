//! Command implementations. Each returns only after every requested
//! artifact is in place, so the process exit code reflects completeness.
//! Independent work items (one per parameter or mesh) run on the rayon
//! pool; results are collected in input order to keep output
//! deterministic.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use rta_core::metrics::{fit_convergence_rate, l1_abs_error, l1_rel_error};
use rta_core::rta;
use rta_core::store::{load_trajectory, save_trajectory, SnapshotStore};
use rta_core::systems::{
    from_characteristics, rta_elasto_reconstruct_characteristics, run_elasto_trajectory,
    CharacteristicField, ConservativeField, EigenBasis, ElastoOffline,
};
use rta_core::upwind::{run_trajectory, SolveConfig, Trajectory};
use rta_core::Error;

use crate::config::{Config, Experiment, Problem};
use crate::output::{field_csv, sibling_tmp, trajectory_csv, write_atomic, Csv};

pub fn solve(exp: &Experiment, out: &Path, dump_csv: bool) -> Result<()> {
    let cfg = &exp.config;
    if cfg.snapshots.mu.is_empty() {
        eprintln!("warning: [snapshots].mu is empty, nothing to solve");
        return Ok(());
    }
    let mesh = cfg.mesh()?;
    let dt = cfg.timestep(&mesh)?;
    let run_cfg = SolveConfig::new(dt, cfg.horizon(dt))?;

    let written: Vec<Vec<PathBuf>> = match cfg.problem {
        Problem::Transport => {
            let model = cfg.transport_model()?;
            let ic = cfg.initial_condition()?;
            cfg.snapshots
                .mu
                .par_iter()
                .map(|&mu_i| {
                    let traj = run_trajectory(&model, mu_i, &ic, &mesh, &run_cfg)
                        .with_context(|| format!("solve failed for mu_i = {mu_i}"))?;
                    let mut paths =
                        vec![persist(&traj, &out.join(format!("transport_mui{mu_i}.traj")))?];
                    if dump_csv {
                        let p = out.join(format!("transport_mui{mu_i}.csv"));
                        write_atomic(&p, &trajectory_csv(&exp.digest, &traj))?;
                        paths.push(p);
                    }
                    Ok(paths)
                })
                .collect::<Result<_>>()?
        }
        Problem::Elasto => {
            let model = cfg.elasto_model()?;
            let ic = cfg.elasto_initial(&mesh)?;
            cfg.snapshots
                .mu
                .par_iter()
                .map(|&mu_i| {
                    let off = run_elasto_trajectory(&model, mu_i, &ic, &run_cfg)
                        .with_context(|| format!("solve failed for mu_i = {mu_i}"))?;
                    let mut paths = Vec::new();
                    for (tag, traj) in [("w1", off.w1()), ("w2", off.w2())] {
                        paths.push(persist(
                            traj,
                            &out.join(format!("elasto_mui{mu_i}_{tag}.traj")),
                        )?);
                        if dump_csv {
                            let p = out.join(format!("elasto_mui{mu_i}_{tag}.csv"));
                            write_atomic(&p, &trajectory_csv(&exp.digest, traj))?;
                            paths.push(p);
                        }
                    }
                    Ok(paths)
                })
                .collect::<Result<_>>()?
        }
    };
    for p in written.iter().flatten() {
        println!("{}", p.display());
    }
    Ok(())
}

/// Saves a trajectory through a temporary sibling and a rename.
fn persist(traj: &Trajectory, path: &Path) -> Result<PathBuf> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .with_context(|| format!("cannot create {}", parent.display()))?;
        }
    }
    let tmp = sibling_tmp(path);
    save_trajectory(traj, &tmp)?;
    fs::rename(&tmp, path)
        .with_context(|| format!("cannot move {} into place", tmp.display()))?;
    Ok(path.to_path_buf())
}

pub fn reconstruct(
    exp: &Experiment,
    out: &Path,
    snapshot: &Path,
    mu: f64,
    step: Option<usize>,
    time: Option<f64>,
) -> Result<()> {
    let cfg = &exp.config;
    if cfg.problem != Problem::Transport {
        bail!("reconstruct works on problem = \"transport\"; use the elasto command for systems");
    }
    let model = cfg.transport_model()?;
    if !model.contains(mu) {
        bail!("mu = {mu} lies outside the parameter range");
    }
    let traj = load_trajectory(snapshot)?;
    let mesh = cfg.mesh()?;
    if traj.mesh() != mesh {
        return Err(Error::IncompatibleDiscretization(format!(
            "snapshot holds {} cells on [{}, {}] but the config asks for {} cells on [{}, {}]",
            traj.mesh().n_cells(),
            traj.mesh().x_min(),
            traj.mesh().x_max(),
            mesh.n_cells(),
            mesh.x_min(),
            mesh.x_max(),
        ))
        .into());
    }

    let k = match (step, time) {
        (Some(k), None) => k,
        (None, Some(t)) => {
            let kf = (t / traj.dt()).round();
            if !(kf.is_finite() && kf >= 0.0) {
                bail!("time {t} does not map to a stored step");
            }
            let k = kf as usize;
            println!("time {t} rounded to step {k} (t^k = {})", k as f64 * traj.dt());
            k
        }
        _ => unreachable!("the argument group enforces exactly one of --step/--time"),
    };

    let index = rta::shift_index(&traj, &model, mu, k)?;
    let phi = rta::reconstruct(&traj, &model, mu, k)?;
    let comments = vec![
        format!("mu={mu}"),
        format!("mu_i={}", traj.mu_i()),
        format!("k={k}"),
        format!("t={}", k as f64 * traj.dt()),
        format!("p={}", index.p),
        format!("theta={}", index.theta),
    ];
    let path = out.join(format!("reconstruct_mu{mu}_k{k}.csv"));
    write_atomic(&path, &field_csv(&exp.digest, &comments, &phi))?;
    println!("{}", path.display());
    Ok(())
}

struct ConvergeRow {
    mu: f64,
    mu_i: f64,
    n: usize,
    dx: f64,
    e_abs: f64,
    e_rel: f64,
}

pub fn converge(exp: &Experiment, out: &Path, history: bool) -> Result<()> {
    let cfg = &exp.config;
    if cfg.problem != Problem::Transport {
        bail!("converge works on problem = \"transport\"");
    }
    let model = cfg.transport_model()?;
    let ic = cfg.initial_condition()?;
    let study = cfg
        .converge
        .as_ref()
        .context("converge needs a [converge] section listing n_cells")?;
    if study.n_cells.len() < 2 {
        bail!("[converge].n_cells needs at least two meshes for a fit");
    }
    let final_time = cfg
        .time
        .final_time
        .context("converge compares meshes at a fixed physical time; set [time].final_time")?;
    if cfg.snapshots.mu.is_empty() || cfg.targets.mu.is_empty() {
        bail!("converge needs [snapshots].mu and [targets].mu entries");
    }

    let per_mesh: Vec<Vec<ConvergeRow>> = study
        .n_cells
        .par_iter()
        .map(|&n| {
            let mesh = cfg.mesh_with(n)?;
            let dt = cfg.timestep(&mesh)?;
            let k = cfg.horizon(dt);
            let run_cfg = SolveConfig::new(dt, k)?;
            let directs: Vec<Trajectory> = cfg
                .targets
                .mu
                .iter()
                .map(|&mu| run_trajectory(&model, mu, &ic, &mesh, &run_cfg))
                .collect::<rta_core::Result<_>>()?;
            let mut rows = Vec::new();
            for &mu_i in &cfg.snapshots.mu {
                let snap = run_trajectory(&model, mu_i, &ic, &mesh, &run_cfg)?;
                for (t, &mu) in cfg.targets.mu.iter().enumerate() {
                    let phi = rta::reconstruct(&snap, &model, mu, k)?;
                    let reference = directs[t].field(k)?;
                    rows.push(ConvergeRow {
                        mu,
                        mu_i,
                        n,
                        dx: mesh.dx(),
                        e_abs: l1_abs_error(&phi, reference)?,
                        e_rel: l1_rel_error(&phi, reference)?,
                    });
                }
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;

    let mut csv = Csv::new(&exp.digest);
    csv.comment(&format!("final_time={final_time}"));
    csv.header("mu,mu_i,n_cells,dx,e_abs,e_rel,rate,constant");
    for row in per_mesh.iter().flatten() {
        csv.row(format_args!(
            "{},{},{},{},{},{},,",
            row.mu, row.mu_i, row.n, row.dx, row.e_abs, row.e_rel
        ));
    }
    for &mu_i in &cfg.snapshots.mu {
        for &mu in &cfg.targets.mu {
            let points: Vec<(f64, f64)> = per_mesh
                .iter()
                .flatten()
                .filter(|r| r.mu_i == mu_i && r.mu == mu)
                .map(|r| (r.dx, r.e_abs))
                .collect();
            let (rate, constant) = fit_convergence_rate(&points).with_context(|| {
                format!("cannot fit a rate for mu = {mu}, mu_i = {mu_i}")
            })?;
            csv.row(format_args!("{mu},{mu_i},,,,,{rate},{constant}"));
        }
    }
    let path = out.join("converge.csv");
    write_atomic(&path, &csv.into_bytes())?;
    println!("{}", path.display());

    if history {
        let mesh = cfg.mesh()?;
        let dt = cfg.timestep(&mesh)?;
        let k_max = cfg.horizon(dt);
        let run_cfg = SolveConfig::new(dt, k_max)?;
        let pairs: Vec<(f64, f64)> = cfg
            .snapshots
            .mu
            .iter()
            .flat_map(|&mu_i| cfg.targets.mu.iter().map(move |&mu| (mu_i, mu)))
            .collect();
        let files: Vec<(PathBuf, Vec<u8>)> = pairs
            .par_iter()
            .map(|&(mu_i, mu)| {
                let snap = run_trajectory(&model, mu_i, &ic, &mesh, &run_cfg)?;
                let direct = run_trajectory(&model, mu, &ic, &mesh, &run_cfg)?;
                let mut csv = Csv::new(&exp.digest);
                csv.comment(&format!("mu={mu}"));
                csv.comment(&format!("mu_i={mu_i}"));
                csv.comment(&format!("dt={dt}"));
                csv.header("k,t,e_abs,e_rel");
                for k in 0..=k_max {
                    let phi = rta::reconstruct(&snap, &model, mu, k)?;
                    let reference = direct.field(k)?;
                    csv.row(format_args!(
                        "{k},{},{},{}",
                        k as f64 * dt,
                        l1_abs_error(&phi, reference)?,
                        l1_rel_error(&phi, reference)?
                    ));
                }
                Ok((out.join(format!("history_mui{mu_i}_mu{mu}.csv")), csv.into_bytes()))
            })
            .collect::<Result<_>>()?;
        for (path, bytes) in files {
            write_atomic(&path, &bytes)?;
            println!("{}", path.display());
        }
    }
    Ok(())
}

/// Reconstruction steps requested in the config: explicit indices plus
/// rounded physical times, or the final step when neither is given.
fn target_steps(cfg: &Config, dt: f64, k_max: usize) -> Result<Vec<usize>> {
    let mut ks = Vec::new();
    if let Some(steps) = &cfg.targets.steps {
        ks.extend(steps.iter().copied());
    }
    if let Some(times) = &cfg.targets.times {
        for &t in times {
            let kf = (t / dt).round();
            if !(kf.is_finite() && kf >= 0.0) {
                bail!("time {t} does not map to a stored step");
            }
            let k = kf as usize;
            println!("time {t} rounded to step {k} (t^k = {})", k as f64 * dt);
            ks.push(k);
        }
    }
    if ks.is_empty() {
        ks.push(k_max);
    }
    for &k in &ks {
        if k > k_max {
            return Err(Error::TimeIndexOutOfRange { k, n_steps: k_max }.into());
        }
    }
    ks.sort_unstable();
    ks.dedup();
    Ok(ks)
}

fn elasto_csv(
    digest: &str,
    comments: &[String],
    u: &ConservativeField,
    w: &CharacteristicField,
) -> Vec<u8> {
    let mut csv = Csv::new(digest);
    for c in comments {
        csv.comment(c);
    }
    csv.header("j,x_center,sigma,velocity,w1,w2");
    let mesh = u.mesh();
    for j in 0..mesh.n_cells() {
        csv.row(format_args!(
            "{},{},{},{},{},{}",
            j + 1,
            mesh.cell_center(j),
            u.sigma().values()[j],
            u.velocity().values()[j],
            w.w1().values()[j],
            w.w2().values()[j]
        ));
    }
    csv.into_bytes()
}

pub fn elasto(exp: &Experiment, out: &Path) -> Result<()> {
    let cfg = &exp.config;
    if cfg.problem != Problem::Elasto {
        bail!("elasto works on problem = \"elasto\"");
    }
    let model = cfg.elasto_model()?;
    let mesh = cfg.mesh()?;
    let ic = cfg.elasto_initial(&mesh)?;
    let dt = cfg.timestep(&mesh)?;
    let k_max = cfg.horizon(dt);
    let run_cfg = SolveConfig::new(dt, k_max)?;
    if cfg.snapshots.mu.is_empty() || cfg.targets.mu.is_empty() {
        eprintln!("warning: elasto needs [snapshots].mu and [targets].mu entries, nothing to do");
        return Ok(());
    }
    let ks = target_steps(cfg, dt, k_max)?;

    let offlines: Vec<ElastoOffline> = cfg
        .snapshots
        .mu
        .par_iter()
        .map(|&mu_i| run_elasto_trajectory(&model, mu_i, &ic, &run_cfg))
        .collect::<rta_core::Result<_>>()?;
    let directs: Vec<ElastoOffline> = cfg
        .targets
        .mu
        .par_iter()
        .map(|&mu| run_elasto_trajectory(&model, mu, &ic, &run_cfg))
        .collect::<rta_core::Result<_>>()?;

    let mut written = Vec::new();
    for (off, &mu_i) in offlines.iter().zip(&cfg.snapshots.mu) {
        for &mu in &cfg.targets.mu {
            let basis = EigenBasis::new(&model, mu)?;
            for &k in &ks {
                let w = rta_elasto_reconstruct_characteristics(off, &model, mu, k)?;
                let u = from_characteristics(&w, &basis);
                let comments = vec![
                    format!("mu={mu}"),
                    format!("mu_i={mu_i}"),
                    format!("k={k}"),
                    format!("t={}", k as f64 * dt),
                ];
                let path = out.join(format!("elasto_rta_mui{mu_i}_mu{mu}_k{k}.csv"));
                write_atomic(&path, &elasto_csv(&exp.digest, &comments, &u, &w))?;
                written.push(path);
            }
        }
    }
    for (direct, &mu) in directs.iter().zip(&cfg.targets.mu) {
        for &k in &ks {
            let w = direct.characteristic_at(k)?;
            let u = direct.conservative_at(k)?;
            let comments = vec![
                format!("mu={mu}"),
                format!("k={k}"),
                format!("t={}", k as f64 * dt),
            ];
            let path = out.join(format!("elasto_fv_mu{mu}_k{k}.csv"));
            write_atomic(&path, &elasto_csv(&exp.digest, &comments, &u, &w))?;
            written.push(path);
        }
    }
    for p in written {
        println!("{}", p.display());
    }
    Ok(())
}

pub fn dict(
    exp: &Experiment,
    out: &Path,
    mu: f64,
    step: Option<usize>,
    reference: bool,
) -> Result<()> {
    let cfg = &exp.config;
    if cfg.problem != Problem::Transport {
        bail!("dict works on problem = \"transport\"");
    }
    let model = cfg.transport_model()?;
    if !model.contains(mu) {
        bail!("mu = {mu} lies outside the parameter range");
    }
    let mesh = cfg.mesh()?;
    let dt = cfg.timestep(&mesh)?;
    let run_cfg = SolveConfig::new(dt, cfg.horizon(dt))?;
    let ic = cfg.initial_condition()?;

    let trajectories: Vec<Trajectory> = cfg
        .snapshots
        .mu
        .par_iter()
        .map(|&mu_i| run_trajectory(&model, mu_i, &ic, &mesh, &run_cfg))
        .collect::<rta_core::Result<_>>()?;
    let mut store = SnapshotStore::new();
    for t in trajectories {
        store.insert(t)?;
    }

    let mut csv = Csv::new(&exp.digest);
    csv.header("mu,mode,k,mu_i,e_abs");
    if reference {
        let k = step.expect("--reference requires --step");
        let direct = run_trajectory(&model, mu, &ic, &mesh, &run_cfg)?;
        let (winner, e_abs) = store.select_best_measured(&model, mu, k, direct.field(k)?)?;
        println!(
            "selected mu_i = {} with measured e_abs = {e_abs} at step {k}",
            winner.mu_i()
        );
        csv.row(format_args!("{mu},measured,{k},{},{e_abs}", winner.mu_i()));
    } else {
        let winner = store.select_nearest(&model, mu)?;
        println!("selected mu_i = {} (nearest wavespeed)", winner.mu_i());
        csv.row(format_args!("{mu},nearest,,{},", winner.mu_i()));
    }
    let path = out.join(format!("dict_mu{mu}.csv"));
    write_atomic(&path, &csv.into_bytes())?;
    println!("{}", path.display());
    Ok(())
}
