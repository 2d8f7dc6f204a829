//! CSV assembly and atomic file placement. Every CSV starts with a
//! comment line carrying the config digest so an artifact can always be
//! traced back to the exact configuration that produced it.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use rta_core::mesh::CellField;
use rta_core::upwind::Trajectory;

pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(digest: &str) -> Self {
        Csv { buf: format!("# config_digest={digest}\n") }
    }

    pub fn comment(&mut self, line: &str) {
        let _ = writeln!(self.buf, "# {line}");
    }

    /// Header row, then data rows via [`Self::row`].
    pub fn header(&mut self, columns: &str) {
        let _ = writeln!(self.buf, "{columns}");
    }

    pub fn row(&mut self, cells: std::fmt::Arguments) {
        let _ = writeln!(self.buf, "{cells}");
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buf.into_bytes()
    }
}

/// Writes `bytes` to `path` through a sibling temporary file and a rename,
/// so a crash never leaves a half-written artifact behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .with_context(|| format!("cannot create {}", parent.display()))?;
        }
    }
    let tmp = sibling_tmp(path);
    fs::write(&tmp, bytes).with_context(|| format!("cannot write {}", tmp.display()))?;
    fs::rename(&tmp, path)
        .with_context(|| format!("cannot move {} into place", tmp.display()))?;
    Ok(())
}

pub fn sibling_tmp(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".tmp");
    path.with_file_name(name)
}

/// Single-field CSV: one row per cell with its center coordinate.
pub fn field_csv(digest: &str, comments: &[String], field: &CellField) -> Vec<u8> {
    let mut csv = Csv::new(digest);
    for c in comments {
        csv.comment(c);
    }
    csv.header("j,x_center,value");
    let mesh = field.mesh();
    for (j, v) in field.values().iter().enumerate() {
        csv.row(format_args!("{},{},{}", j + 1, mesh.cell_center(j), v));
    }
    csv.into_bytes()
}

/// Whole-trajectory CSV: one row per (step, cell) pair.
pub fn trajectory_csv(digest: &str, traj: &Trajectory) -> Vec<u8> {
    let mut csv = Csv::new(digest);
    csv.comment(&format!("mu_i={}", traj.mu_i()));
    csv.comment(&format!("nu_i={}", traj.nu_i()));
    csv.comment(&format!("dt={}", traj.dt()));
    csv.header("k,j,x_center,value");
    let mesh = traj.mesh();
    for (k, field) in traj.fields().iter().enumerate() {
        for (j, v) in field.values().iter().enumerate() {
            csv.row(format_args!("{},{},{},{}", k, j + 1, mesh.cell_center(j), v));
        }
    }
    csv.into_bytes()
}
