//! Diagnostics: total variation, discrete L1 errors, the closed-form
//! projection error of a misaligned shift, and convergence-rate fitting.

use crate::error::{Error, Result};
use crate::mesh::CellField;
use crate::shift_ops::ShiftIndex;

/// Periodic total variation `sum_j |u[j+1] - u[j]|`, including the wrap
/// term between the last and first cell.
pub fn total_variation(field: &CellField) -> f64 {
    let u = field.values();
    let n = u.len();
    let mut tv = 0.0;
    for j in 0..n {
        tv += (u[(j + 1) % n] - u[j]).abs();
    }
    tv
}

fn check_same_mesh(a: &CellField, b: &CellField) -> Result<()> {
    if a.mesh() != b.mesh() {
        return Err(Error::IncompatibleDiscretization(
            "fields live on different meshes".into(),
        ));
    }
    Ok(())
}

/// Discrete L1 error `dx * sum_j |a[j] - b[j]|`.
pub fn l1_abs_error(a: &CellField, b: &CellField) -> Result<f64> {
    check_same_mesh(a, b)?;
    let sum: f64 = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).abs())
        .sum();
    Ok(a.mesh().dx() * sum)
}

/// Relative L1 error `sum |a - b| / sum |b|`, with `b` the reference.
pub fn l1_rel_error(a: &CellField, b: &CellField) -> Result<f64> {
    check_same_mesh(a, b)?;
    let denom: f64 = b.values().iter().map(|y| y.abs()).sum();
    if denom == 0.0 {
        return Err(Error::ZeroReferenceNorm);
    }
    let num: f64 = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).abs())
        .sum();
    Ok(num / denom)
}

/// L1 distance between the exactly shifted snapshot and its cell-average
/// projection, in closed form: `2 dx (1 - theta) theta TV(snapshot)`. It
/// vanishes at mesh-aligned shifts and peaks at theta = 1/2.
pub fn projection_error_l1(snapshot: &CellField, theta: f64) -> f64 {
    2.0 * snapshot.mesh().dx() * (1.0 - theta) * theta * total_variation(snapshot)
}

/// Least-squares power-law fit `error ~ constant * dx^rate` through
/// `(dx, error)` points in log-log coordinates. Returns `(rate, constant)`.
pub fn fit_convergence_rate(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "rate fit needs at least two points, got {}",
            points.len()
        )));
    }
    if points
        .iter()
        .any(|&(dx, e)| !(dx.is_finite() && dx > 0.0 && e.is_finite() && e > 0.0))
    {
        return Err(Error::InvalidArgument(
            "rate fit needs positive finite mesh widths and errors".into(),
        ));
    }
    let n = points.len() as f64;
    let logs: Vec<(f64, f64)> = points.iter().map(|&(dx, e)| (dx.ln(), e.ln())).collect();
    let mean_x = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument(
            "rate fit needs at least two distinct mesh widths".into(),
        ));
    }
    let sxy: f64 = logs
        .iter()
        .map(|p| (p.0 - mean_x) * (p.1 - mean_y))
        .sum();
    let rate = sxy / sxx;
    let constant = (mean_y - rate * mean_x).exp();
    Ok((rate, constant))
}

/// Error summary of one reconstruction against a reference solution.
#[derive(Clone, Copy, Debug)]
pub struct ErrorReport {
    pub e_abs: f64,
    pub e_rel: f64,
    pub tv: f64,
    pub k: usize,
    pub mu: f64,
    pub mu_i: f64,
    pub p: usize,
    pub theta: f64,
}

impl ErrorReport {
    pub fn measure(
        reconstruction: &CellField,
        reference: &CellField,
        k: usize,
        mu: f64,
        mu_i: f64,
        index: ShiftIndex,
    ) -> Result<Self> {
        Ok(ErrorReport {
            e_abs: l1_abs_error(reconstruction, reference)?,
            e_rel: l1_rel_error(reconstruction, reference)?,
            tv: total_variation(reconstruction),
            k,
            mu,
            mu_i,
            p: index.p,
            theta: index.theta,
        })
    }
}
