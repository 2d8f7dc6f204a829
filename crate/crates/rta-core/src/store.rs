//! Trajectory persistence and the snapshot dictionary.
//!
//! File layout: a UTF-8 header of `key=value` lines
//! (`format_version`, `mu_i`, `nu_i`, `dt`, `n_cells`, `x_min`, `x_max`,
//! `n_steps`), one blank line, then `(n_steps + 1) * n_cells` doubles in
//! little-endian byte order, time-major. Floats in the header use the
//! shortest decimal form that round-trips, so save followed by load is
//! bit-exact.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::mesh::{CellField, Mesh1D};
use crate::metrics::l1_abs_error;
use crate::rta;
use crate::upwind::{Trajectory, WaveSpeed};

pub const FORMAT_VERSION: u32 = 1;

const HEADER_KEYS: [&str; 8] = [
    "format_version",
    "mu_i",
    "nu_i",
    "dt",
    "n_cells",
    "x_min",
    "x_max",
    "n_steps",
];

pub fn save_trajectory(traj: &Trajectory, path: &Path) -> Result<()> {
    let io_err = |source| Error::Io { path: path.to_path_buf(), source };
    let file = fs::File::create(path).map_err(io_err)?;
    let mut w = BufWriter::new(file);
    let mesh = traj.mesh();
    let header = format!(
        "format_version={}\nmu_i={}\nnu_i={}\ndt={}\nn_cells={}\nx_min={}\nx_max={}\nn_steps={}\n\n",
        FORMAT_VERSION,
        traj.mu_i(),
        traj.nu_i(),
        traj.dt(),
        mesh.n_cells(),
        mesh.x_min(),
        mesh.x_max(),
        traj.n_steps(),
    );
    w.write_all(header.as_bytes()).map_err(io_err)?;
    for f in traj.fields() {
        for v in f.values() {
            w.write_all(&v.to_le_bytes()).map_err(io_err)?;
        }
    }
    w.flush().map_err(io_err)
}

pub fn load_trajectory(path: &Path) -> Result<Trajectory> {
    let bytes = fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let parse = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let integrity = |message: String| Error::Integrity {
        path: path.to_path_buf(),
        message,
    };

    let split = bytes
        .windows(2)
        .position(|w| w == b"\n\n")
        .ok_or_else(|| parse(1, "missing blank line terminating the header".into()))?;
    let header = std::str::from_utf8(&bytes[..split])
        .map_err(|_| parse(1, "header is not valid UTF-8".into()))?;
    let payload = &bytes[split + 2..];

    let mut seen: Vec<(&str, &str, usize)> = Vec::new();
    for (i, line) in header.lines().enumerate() {
        let lineno = i + 1;
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse(lineno, format!("expected key=value, got {line:?}")))?;
        if !HEADER_KEYS.contains(&key) {
            return Err(parse(lineno, format!("unknown header key {key:?}")));
        }
        if seen.iter().any(|(k, _, _)| *k == key) {
            return Err(parse(lineno, format!("duplicate header key {key:?}")));
        }
        seen.push((key, value, lineno));
    }
    let lookup = |key: &str| -> Result<(&str, usize)> {
        seen.iter()
            .find(|(k, _, _)| *k == key)
            .map(|(_, v, l)| (*v, *l))
            .ok_or_else(|| parse(seen.len() + 1, format!("missing header key {key:?}")))
    };
    fn parsed<T: std::str::FromStr>(
        (value, lineno): (&str, usize),
        key: &str,
        parse: &impl Fn(usize, String) -> Error,
    ) -> Result<T> {
        value
            .parse()
            .map_err(|_| parse(lineno, format!("cannot parse {key}={value:?}")))
    }

    let version: u32 = parsed(lookup("format_version")?, "format_version", &parse)?;
    if version != FORMAT_VERSION {
        let (_, lineno) = lookup("format_version")?;
        return Err(parse(lineno, format!("unsupported format_version {version}")));
    }
    let mu_i: f64 = parsed(lookup("mu_i")?, "mu_i", &parse)?;
    let nu_i: f64 = parsed(lookup("nu_i")?, "nu_i", &parse)?;
    let dt: f64 = parsed(lookup("dt")?, "dt", &parse)?;
    let n_cells: usize = parsed(lookup("n_cells")?, "n_cells", &parse)?;
    let x_min: f64 = parsed(lookup("x_min")?, "x_min", &parse)?;
    let x_max: f64 = parsed(lookup("x_max")?, "x_max", &parse)?;
    let n_steps: usize = parsed(lookup("n_steps")?, "n_steps", &parse)?;

    let mesh = Mesh1D::new(x_min, x_max, n_cells)
        .map_err(|e| integrity(format!("header describes an invalid mesh: {e}")))?;

    let expected = (n_steps + 1)
        .checked_mul(n_cells)
        .and_then(|n| n.checked_mul(8))
        .ok_or_else(|| integrity("value count overflows".into()))?;
    if payload.len() != expected {
        return Err(integrity(format!(
            "payload holds {} bytes, header promises {} ({} steps of {} cells)",
            payload.len(),
            expected,
            n_steps,
            n_cells
        )));
    }

    let mut fields = Vec::with_capacity(n_steps + 1);
    for k in 0..=n_steps {
        let mut values = Vec::with_capacity(n_cells);
        for j in 0..n_cells {
            let at = (k * n_cells + j) * 8;
            let v = f64::from_le_bytes(payload[at..at + 8].try_into().unwrap());
            if !v.is_finite() {
                return Err(integrity(format!(
                    "non-finite value {v} at step {k}, cell {}",
                    j + 1
                )));
            }
            values.push(v);
        }
        fields.push(CellField::new_unchecked(mesh, values));
    }
    Trajectory::from_parts(mu_i, nu_i, dt, mesh, fields)
        .map_err(|e| integrity(format!("header metadata rejected: {e}")))
}

/// In-memory dictionary of snapshot trajectories sharing one mesh and time
/// step, keyed by exact `mu_i` and kept sorted by it.
#[derive(Default)]
pub struct SnapshotStore {
    entries: Vec<Trajectory>,
}

impl SnapshotStore {
    pub fn new() -> Self {
        SnapshotStore::default()
    }

    pub fn insert(&mut self, traj: Trajectory) -> Result<()> {
        if let Some(first) = self.entries.first() {
            if first.mesh() != traj.mesh() {
                return Err(Error::IncompatibleDiscretization(format!(
                    "store mesh has {} cells on [{}, {}], new trajectory differs",
                    first.mesh().n_cells(),
                    first.mesh().x_min(),
                    first.mesh().x_max()
                )));
            }
            if first.dt() != traj.dt() {
                return Err(Error::IncompatibleDiscretization(format!(
                    "store time step is {}, new trajectory has {}",
                    first.dt(),
                    traj.dt()
                )));
            }
        }
        if self.entries.iter().any(|e| e.mu_i() == traj.mu_i()) {
            return Err(Error::DuplicateKey(traj.mu_i()));
        }
        let at = self
            .entries
            .partition_point(|e| e.mu_i() < traj.mu_i());
        self.entries.insert(at, traj);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Trajectory] {
        &self.entries
    }

    pub fn mu_values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.mu_i()).collect()
    }

    pub fn get(&self, mu_i: f64) -> Option<&Trajectory> {
        self.entries.iter().find(|e| e.mu_i() == mu_i)
    }

    /// Entry whose wavespeed is closest to the target's, `|a(mu) - a(mu_i)|`.
    /// Ties resolve to the smallest `mu_i`.
    pub fn select_nearest(&self, model: &impl WaveSpeed, mu: f64) -> Result<&Trajectory> {
        let a = model.wavespeed(mu);
        let mut best: Option<(&Trajectory, f64)> = None;
        for e in &self.entries {
            let d = (a - model.wavespeed(e.mu_i())).abs();
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((e, d));
            }
        }
        best.map(|(e, _)| e).ok_or(Error::EmptyStore)
    }

    /// Entry whose reconstruction at `(mu, k)` has the smallest measured L1
    /// error against `reference`. Returns the winner and its error. The
    /// winner can differ from [`Self::select_nearest`] and can change with
    /// `k`, since mesh alignment of the relative shift enters the error.
    pub fn select_best_measured(
        &self,
        model: &impl WaveSpeed,
        mu: f64,
        k: usize,
        reference: &CellField,
    ) -> Result<(&Trajectory, f64)> {
        if self.entries.is_empty() {
            return Err(Error::EmptyStore);
        }
        if reference.mesh() != self.entries[0].mesh() {
            return Err(Error::IncompatibleDiscretization(
                "reference field does not live on the store mesh".into(),
            ));
        }
        let mut best: Option<(&Trajectory, f64)> = None;
        for e in &self.entries {
            let phi = rta::reconstruct(e, model, mu, k)?;
            let err = l1_abs_error(&phi, reference)?;
            if best.is_none_or(|(_, be)| err < be) {
                best = Some((e, err));
            }
        }
        Ok(best.unwrap())
    }
}
