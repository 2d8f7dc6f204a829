//! Uniform periodic 1-D mesh, cell-averaged fields, and initial-data
//! projection.

use std::fmt;
use std::io::{self, Write};
use std::sync::Arc;

use crate::error::{Error, Result};

/// Uniform mesh of `n_cells` cells covering `[x_min, x_max]` with periodic
/// topology. Storage index `j` (0-based) holds cell `j + 1` of the 1-based
/// convention used in documentation; its center is `x_min + (j + 1/2) dx`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mesh1D {
    x_min: f64,
    x_max: f64,
    n_cells: usize,
    dx: f64,
}

impl Mesh1D {
    pub fn new(x_min: f64, x_max: f64, n_cells: usize) -> Result<Self> {
        if !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "mesh bounds must be finite, got [{x_min}, {x_max}]"
            )));
        }
        if x_max <= x_min {
            return Err(Error::InvalidArgument(format!(
                "mesh needs x_max > x_min, got [{x_min}, {x_max}]"
            )));
        }
        if n_cells < 2 {
            return Err(Error::InvalidArgument(format!(
                "mesh needs at least 2 cells, got {n_cells}"
            )));
        }
        let dx = (x_max - x_min) / n_cells as f64;
        Ok(Mesh1D { x_min, x_max, n_cells, dx })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    /// Face `j` for `j in 0..=n_cells`; face 0 is `x_min` and face
    /// `n_cells` is exactly `x_max`, so the cells tile the domain with no
    /// roundoff gap at the right boundary.
    pub fn face(&self, j: usize) -> f64 {
        debug_assert!(j <= self.n_cells);
        if j == self.n_cells {
            self.x_max
        } else {
            self.x_min + j as f64 * self.dx
        }
    }

    pub fn cell_center(&self, j: usize) -> f64 {
        debug_assert!(j < self.n_cells);
        self.x_min + (j as f64 + 0.5) * self.dx
    }
}

/// Vector of cell averages bound to its mesh. Immutable after construction;
/// every entry is finite.
#[derive(Clone, Debug, PartialEq)]
pub struct CellField {
    mesh: Mesh1D,
    values: Vec<f64>,
}

impl CellField {
    pub fn new(mesh: Mesh1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.n_cells() {
            return Err(Error::InvalidArgument(format!(
                "field length {} does not match mesh with {} cells",
                values.len(),
                mesh.n_cells()
            )));
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite value {} in cell {}",
                values[j],
                j + 1
            )));
        }
        Ok(CellField { mesh, values })
    }

    /// For operator outputs whose entries are convex combinations of an
    /// already-validated field, hence finite by construction.
    pub(crate) fn new_unchecked(mesh: Mesh1D, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), mesh.n_cells());
        debug_assert!(values.iter().all(|v| v.is_finite()));
        CellField { mesh, values }
    }

    pub fn constant(mesh: Mesh1D, value: f64) -> Result<Self> {
        let n = mesh.n_cells();
        CellField::new(mesh, vec![value; n])
    }

    pub fn mesh(&self) -> Mesh1D {
        self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Writes `j,x_center,value` rows with a header line, `j` 1-based.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "j,x_center,value")?;
        for (j, v) in self.values.iter().enumerate() {
            writeln!(w, "{},{},{}", j + 1, self.mesh.cell_center(j), v)?;
        }
        Ok(())
    }
}

pub const DEFAULT_SAMPLES_PER_CELL: usize = 16;

/// Initial data projected onto cell averages by [`InitialCondition::project`].
#[derive(Clone)]
pub enum InitialCondition {
    /// Periodic step function: `values[i]` holds on
    /// `[breakpoints[i], breakpoints[i+1])`, and the last value wraps around
    /// the domain from the last breakpoint back to the first.
    PiecewiseConstant {
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    },
    /// Pointwise profile averaged per cell with a composite midpoint rule
    /// over `samples_per_cell` sub-intervals.
    Sampled {
        profile: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        samples_per_cell: usize,
    },
}

impl fmt::Debug for InitialCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialCondition::PiecewiseConstant { breakpoints, values } => f
                .debug_struct("PiecewiseConstant")
                .field("breakpoints", breakpoints)
                .field("values", values)
                .finish(),
            InitialCondition::Sampled { samples_per_cell, .. } => f
                .debug_struct("Sampled")
                .field("samples_per_cell", samples_per_cell)
                .finish_non_exhaustive(),
        }
    }
}

impl InitialCondition {
    pub fn piecewise_constant(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.is_empty() || breakpoints.len() != values.len() {
            return Err(Error::InvalidArgument(format!(
                "piecewise-constant data needs matching non-empty lists, got {} breakpoints and {} values",
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints.iter().any(|b| !b.is_finite()) || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "piecewise-constant data must be finite".into(),
            ));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        Ok(InitialCondition::PiecewiseConstant { breakpoints, values })
    }

    pub fn sampled<F>(profile: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        InitialCondition::Sampled {
            profile: Arc::new(profile),
            samples_per_cell: DEFAULT_SAMPLES_PER_CELL,
        }
    }

    pub fn sampled_with<F>(profile: F, samples_per_cell: usize) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if samples_per_cell == 0 {
            return Err(Error::InvalidArgument(
                "samples_per_cell must be at least 1".into(),
            ));
        }
        Ok(InitialCondition::Sampled {
            profile: Arc::new(profile),
            samples_per_cell,
        })
    }

    /// Projects onto cell averages. Piecewise-constant data is integrated
    /// exactly by interval intersection, so cell totals preserve the integral
    /// of the profile up to roundoff.
    pub fn project(&self, mesh: &Mesh1D) -> Result<CellField> {
        match self {
            InitialCondition::PiecewiseConstant { breakpoints, values } => {
                project_piecewise(breakpoints, values, mesh)
            }
            InitialCondition::Sampled { profile, samples_per_cell } => {
                let n = mesh.n_cells();
                let m = *samples_per_cell;
                let sub = mesh.dx() / m as f64;
                let mut out = Vec::with_capacity(n);
                for j in 0..n {
                    let left = mesh.face(j);
                    let mut acc = 0.0;
                    for i in 0..m {
                        let x = left + (i as f64 + 0.5) * sub;
                        let v = profile(x);
                        if !v.is_finite() {
                            return Err(Error::InvalidArgument(format!(
                                "sampled profile returned non-finite value {v} at x = {x}"
                            )));
                        }
                        acc += v;
                    }
                    out.push(acc / m as f64);
                }
                Ok(CellField::new_unchecked(*mesh, out))
            }
        }
    }
}

fn project_piecewise(breakpoints: &[f64], values: &[f64], mesh: &Mesh1D) -> Result<CellField> {
    let (x_min, x_max) = (mesh.x_min(), mesh.x_max());
    if breakpoints[0] < x_min || *breakpoints.last().unwrap() > x_max {
        return Err(Error::InvalidArgument(format!(
            "breakpoints must lie inside [{x_min}, {x_max}]"
        )));
    }
    // Unroll the periodic step function into segments covering [x_min, x_max];
    // the wrap arc past the last breakpoint re-enters from the left boundary.
    let mut segments: Vec<(f64, f64, f64)> = Vec::with_capacity(breakpoints.len() + 1);
    let wrap_value = *values.last().unwrap();
    if breakpoints[0] > x_min {
        segments.push((x_min, breakpoints[0], wrap_value));
    }
    for (i, &lo) in breakpoints.iter().enumerate() {
        let hi = if i + 1 < breakpoints.len() {
            breakpoints[i + 1]
        } else {
            x_max
        };
        if hi > lo {
            segments.push((lo, hi, values[i]));
        }
    }

    let n = mesh.n_cells();
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let (cl, cr) = (mesh.face(j), mesh.face(j + 1));
        let mut acc = 0.0;
        for &(lo, hi, v) in &segments {
            let overlap = hi.min(cr) - lo.max(cl);
            if overlap > 0.0 {
                acc += v * overlap;
            }
        }
        // Normalizing by the computed width (not dx) keeps cells that lie
        // fully inside one segment exactly at that segment's value.
        out.push(acc / (cr - cl));
    }
    CellField::new(*mesh, out)
}
