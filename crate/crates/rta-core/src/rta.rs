//! Reconstruction of a solution at a new parameter value from one stored
//! snapshot trajectory, without time stepping: the stored field at step `k`
//! is shifted by the relative displacement `k (nu - nu_i)` accumulated by
//! that step. The fast path applies the two-term recurrence from
//! [`crate::shift_ops`]; the [`oracle`] submodule recomputes the same field
//! by explicit geometric integration and exists to cross-check it.

use crate::error::Result;
use crate::mesh::CellField;
use crate::shift_ops::{decompose_shift, ShiftIndex};
use crate::upwind::{Trajectory, WaveSpeed};

/// Shifts within this distance of a whole cell are treated as exactly
/// aligned, so reconstructions that are mathematically pure permutations
/// stay bit-exact in the face of roundoff in `k (nu - nu_i)`.
pub const ALIGNMENT_SNAP_TOL: f64 = 1e-12;

/// Relative displacement in cells, `s = k (nu(mu) - nu_i)`, of the target
/// solution against the stored trajectory at step `k`. Computed from the
/// trajectory's own `dt` and mesh so both Courant numbers share one
/// discretization.
pub fn relative_shift(
    traj: &Trajectory,
    model: &impl WaveSpeed,
    mu: f64,
    k: usize,
) -> Result<f64> {
    traj.field(k)?;
    let nu = model.wavespeed(mu) * traj.dt() / traj.mesh().dx();
    Ok(k as f64 * (nu - traj.nu_i()))
}

fn snap_alignment(idx: ShiftIndex, n: usize) -> ShiftIndex {
    if idx.theta <= ALIGNMENT_SNAP_TOL {
        ShiftIndex { p: idx.p, theta: 0.0 }
    } else if idx.theta >= 1.0 - ALIGNMENT_SNAP_TOL {
        ShiftIndex { p: (idx.p + 1) % n, theta: 0.0 }
    } else {
        idx
    }
}

/// The snapped shift decomposition actually used at `(mu, k)`.
pub fn shift_index(
    traj: &Trajectory,
    model: &impl WaveSpeed,
    mu: f64,
    k: usize,
) -> Result<ShiftIndex> {
    let s = relative_shift(traj, model, mu, k)?;
    let n = traj.mesh().n_cells();
    Ok(snap_alignment(decompose_shift(s, n)?, n))
}

/// Reconstructs the cell averages at parameter `mu` and time index `k` from
/// the stored snapshot at the same index. Touches only the stored field at
/// step `k`; no time stepping is performed.
pub fn reconstruct(
    traj: &Trajectory,
    model: &impl WaveSpeed,
    mu: f64,
    k: usize,
) -> Result<CellField> {
    let idx = shift_index(traj, model, mu, k)?;
    Ok(idx.apply(traj.field(k)?))
}

pub mod oracle {
    //! Geometric reconstruction path: rebuild the snapshot as a
    //! piecewise-constant function, translate it around the periodic domain,
    //! and integrate it cell by cell by interval intersection. Positions are
    //! kept as exact (cell, offset) pairs so the comparison against the fast
    //! recurrence is meaningful to near machine precision even for shifts of
    //! many domain lengths.

    use super::relative_shift;
    use crate::error::{Error, Result};
    use crate::mesh::{CellField, Mesh1D};
    use crate::upwind::{Trajectory, WaveSpeed};

    /// Point on the periodic cell circle [0, N): `cell + frac` with
    /// `frac` in [0, 1). Ordering is lexicographic.
    #[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
    struct CirclePoint {
        cell: usize,
        frac: f64,
    }

    /// Piecewise-constant function on the cell circle: arc `i` runs from
    /// `points[i]` to the next point (cyclically) and carries `values[i]`.
    struct CirclePartition {
        mesh: Mesh1D,
        points: Vec<CirclePoint>,
        values: Vec<f64>,
    }

    /// Splits a shift into whole cells mod N and an offset in [0, 1). Both
    /// parts are exact: floor and the fractional subtraction introduce no
    /// roundoff for finite doubles.
    fn split_shift(s: f64, n: usize) -> Result<(usize, f64)> {
        if !s.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "shift must be finite, got {s}"
            )));
        }
        let mut floor = s.floor();
        let mut frac = s - floor;
        if frac >= 1.0 {
            floor += 1.0;
            frac = 0.0;
        }
        let whole = (floor as i64).rem_euclid(n as i64) as usize;
        Ok((whole, frac))
    }

    impl CirclePartition {
        fn from_field(field: &CellField) -> Self {
            let n = field.len();
            CirclePartition {
                mesh: field.mesh(),
                points: (0..n).map(|cell| CirclePoint { cell, frac: 0.0 }).collect(),
                values: field.values().to_vec(),
            }
        }

        fn n(&self) -> usize {
            self.mesh.n_cells()
        }

        fn translate(&self, s: f64) -> Result<CirclePartition> {
            let n = self.n();
            let (whole, frac) = split_shift(s, n)?;
            let mut moved: Vec<(CirclePoint, f64)> = self
                .points
                .iter()
                .zip(&self.values)
                .map(|(pt, &v)| {
                    let mut f = pt.frac + frac;
                    let mut cell = pt.cell + whole;
                    if f >= 1.0 {
                        f -= 1.0;
                        cell += 1;
                    }
                    (CirclePoint { cell: cell % n, frac: f }, v)
                })
                .collect();
            // Translation preserves cyclic order; sorting restores the
            // canonical start.
            moved.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            Ok(CirclePartition {
                mesh: self.mesh,
                points: moved.iter().map(|m| m.0).collect(),
                values: moved.iter().map(|m| m.1).collect(),
            })
        }

        /// Integrates the function over every mesh cell by walking each arc
        /// and splitting it at cell boundaries. Cell widths are 1 in circle
        /// coordinates, so deposited lengths are already averages.
        fn cell_averages(&self) -> CellField {
            let n = self.n();
            let mut acc = vec![0.0; n];
            let m = self.points.len();
            for i in 0..m {
                let a = self.points[i];
                let b = self.points[(i + 1) % m];
                let v = self.values[i];
                let whole = (b.cell + n - a.cell) % n;
                if whole == 0 && b.frac >= a.frac && m > 1 {
                    acc[a.cell] += v * (b.frac - a.frac);
                } else {
                    acc[a.cell] += v * (1.0 - a.frac);
                    let full = if whole == 0 { n - 1 } else { whole - 1 };
                    let mut c = (a.cell + 1) % n;
                    for _ in 0..full {
                        acc[c] += v;
                        c = (c + 1) % n;
                    }
                    acc[c] += v * b.frac;
                }
            }
            CellField::new_unchecked(self.mesh, acc)
        }

        fn value_at(&self, p: CirclePoint) -> f64 {
            let k = self
                .points
                .partition_point(|q| q.partial_cmp(&p).unwrap().is_le());
            if k == 0 {
                *self.values.last().unwrap()
            } else {
                self.values[k - 1]
            }
        }

        /// L1 distance to another partition on the same circle, in physical
        /// units, by sweeping the merged breakpoints.
        fn l1_distance(&self, other: &CirclePartition) -> f64 {
            let n = self.n();
            debug_assert_eq!(n, other.n());
            let mut events: Vec<CirclePoint> = self
                .points
                .iter()
                .chain(other.points.iter())
                .copied()
                .collect();
            events.sort_by(|a, b| a.partial_cmp(b).unwrap());
            events.dedup();
            let m = events.len();
            let mut total = 0.0;
            for i in 0..m {
                let a = events[i];
                let b = events[(i + 1) % m];
                let whole = (b.cell + n - a.cell) % n;
                let mut len = whole as f64 + (b.frac - a.frac);
                if len <= 0.0 {
                    len += n as f64;
                }
                total += (self.value_at(a) - other.value_at(a)).abs() * len;
            }
            total * self.mesh.dx()
        }
    }

    /// Cell averages of the field translated by `s` cells around the
    /// periodic domain, computed by interval intersection.
    pub fn shift_cell_averages(field: &CellField, s: f64) -> Result<CellField> {
        Ok(CirclePartition::from_field(field).translate(s)?.cell_averages())
    }

    /// Measured L1 distance between the exactly translated field and its
    /// cell-average projection. The closed form
    /// [`crate::metrics::projection_error_l1`] must reproduce this.
    pub fn shifted_projection_gap_l1(field: &CellField, s: f64) -> Result<f64> {
        let translated = CirclePartition::from_field(field).translate(s)?;
        let projected = translated.cell_averages();
        Ok(translated.l1_distance(&CirclePartition::from_field(&projected)))
    }

    /// Geometric counterpart of [`super::reconstruct`].
    pub fn reconstruct(
        traj: &Trajectory,
        model: &impl WaveSpeed,
        mu: f64,
        k: usize,
    ) -> Result<CellField> {
        let s = relative_shift(traj, model, mu, k)?;
        shift_cell_averages(traj.field(k)?, s)
    }
}
