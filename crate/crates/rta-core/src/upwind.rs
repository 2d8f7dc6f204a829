//! First-order upwind finite-volume solver for scalar transport with a
//! parameter-dependent constant wavespeed, written in shift-operator form.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::mesh::{CellField, InitialCondition, Mesh1D};
use crate::shift_ops::fractional_shift;

/// Transport speed as a function of the problem parameter.
pub trait WaveSpeed {
    fn wavespeed(&self, mu: f64) -> f64;
}

/// Affine wavespeed law `a(mu) = alpha * mu + beta` over the parameter
/// interval `[mu_min, mu_max]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransportModel {
    pub alpha: f64,
    pub beta: f64,
    pub mu_min: f64,
    pub mu_max: f64,
}

impl TransportModel {
    pub fn new(alpha: f64, beta: f64, mu_min: f64, mu_max: f64) -> Result<Self> {
        if ![alpha, beta, mu_min, mu_max].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument(
                "transport model coefficients must be finite".into(),
            ));
        }
        if mu_min > mu_max {
            return Err(Error::InvalidArgument(format!(
                "empty parameter interval [{mu_min}, {mu_max}]"
            )));
        }
        Ok(TransportModel { alpha, beta, mu_min, mu_max })
    }

    pub fn contains(&self, mu: f64) -> bool {
        (self.mu_min..=self.mu_max).contains(&mu)
    }
}

impl WaveSpeed for TransportModel {
    fn wavespeed(&self, mu: f64) -> f64 {
        self.alpha * mu + self.beta
    }
}

/// Time-step count and size for one solve. `dt` is shared by every
/// trajectory that should be comparable under reconstruction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveConfig {
    pub dt: f64,
    pub n_steps: usize,
}

impl SolveConfig {
    pub fn new(dt: f64, n_steps: usize) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "time step must be positive and finite, got {dt}"
            )));
        }
        Ok(SolveConfig { dt, n_steps })
    }
}

/// Largest stable time step `cfl * dx / |a(mu_ref)|` for a CFL number in
/// `(0, 1]`, anchored at the reference parameter.
pub fn cfl_timestep(
    model: &impl WaveSpeed,
    mesh: &Mesh1D,
    cfl: f64,
    mu_ref: f64,
) -> Result<f64> {
    if !(cfl.is_finite() && cfl > 0.0 && cfl <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "CFL number must lie in (0, 1], got {cfl}"
        )));
    }
    let a = model.wavespeed(mu_ref);
    if !a.is_finite() || a == 0.0 {
        return Err(Error::InvalidArgument(format!(
            "reference wavespeed a({mu_ref}) = {a} cannot anchor a time step"
        )));
    }
    Ok(cfl * mesh.dx() / a.abs())
}

/// Courant number `a(mu) * dt / dx`.
pub fn courant_number(model: &impl WaveSpeed, mesh: &Mesh1D, dt: f64, mu: f64) -> f64 {
    model.wavespeed(mu) * dt / mesh.dx()
}

/// One upwind step at Courant number `nu`, biased toward the side the wave
/// comes from. For `nu >= 0` this is exactly the fractional shift
/// `(1-nu) u[j] + nu u[j-1]`; negative `nu` mirrors the stencil.
pub fn upwind_step(field: &CellField, nu: f64) -> Result<CellField> {
    if !(nu.is_finite() && nu.abs() <= 1.0) {
        return Err(Error::CflViolation { nu });
    }
    if nu >= 0.0 {
        return fractional_shift(field, nu);
    }
    let n = field.len();
    let u = field.values();
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        out.push((1.0 + nu) * u[j] - nu * u[(j + 1) % n]);
    }
    Ok(CellField::new_unchecked(field.mesh(), out))
}

/// A solved snapshot trajectory: the full time history of one parameter
/// value, together with the discretization it was produced on. Fields are
/// immutable once solved.
#[derive(Clone, Debug)]
pub struct Trajectory {
    mu_i: f64,
    nu_i: f64,
    dt: f64,
    mesh: Mesh1D,
    fields: Vec<CellField>,
}

impl Trajectory {
    pub(crate) fn from_parts(
        mu_i: f64,
        nu_i: f64,
        dt: f64,
        mesh: Mesh1D,
        fields: Vec<CellField>,
    ) -> Result<Self> {
        if fields.is_empty() {
            return Err(Error::InvalidArgument(
                "trajectory needs at least the initial field".into(),
            ));
        }
        if fields.iter().any(|f| f.mesh() != mesh) {
            return Err(Error::IncompatibleDiscretization(
                "trajectory fields must share one mesh".into(),
            ));
        }
        if !(mu_i.is_finite() && nu_i.is_finite() && dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidArgument(
                "trajectory metadata must be finite with dt > 0".into(),
            ));
        }
        Ok(Trajectory { mu_i, nu_i, dt, mesh, fields })
    }

    pub fn mu_i(&self) -> f64 {
        self.mu_i
    }

    /// Courant number the trajectory was solved at.
    pub fn nu_i(&self) -> f64 {
        self.nu_i
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn mesh(&self) -> Mesh1D {
        self.mesh
    }

    /// Number of time steps; `fields()` holds `n_steps() + 1` entries.
    pub fn n_steps(&self) -> usize {
        self.fields.len() - 1
    }

    pub fn fields(&self) -> &[CellField] {
        &self.fields
    }

    pub fn field(&self, k: usize) -> Result<&CellField> {
        self.fields.get(k).ok_or(Error::TimeIndexOutOfRange {
            k,
            n_steps: self.n_steps(),
        })
    }

    /// Dumps the whole history as `k,j,value` rows behind a `#`-commented
    /// metadata block mirroring the binary header keys.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "# mu_i={}", self.mu_i)?;
        writeln!(w, "# nu_i={}", self.nu_i)?;
        writeln!(w, "# dt={}", self.dt)?;
        writeln!(w, "# n_cells={}", self.mesh.n_cells())?;
        writeln!(w, "# x_min={}", self.mesh.x_min())?;
        writeln!(w, "# x_max={}", self.mesh.x_max())?;
        writeln!(w, "# n_steps={}", self.n_steps())?;
        writeln!(w, "k,j,value")?;
        for (k, f) in self.fields.iter().enumerate() {
            for (j, v) in f.values().iter().enumerate() {
                writeln!(w, "{},{},{}", k, j + 1, v)?;
            }
        }
        Ok(())
    }
}

/// Solves `n_steps` upwind steps from an already-projected initial field.
pub fn run_trajectory_from_field(
    model: &impl WaveSpeed,
    mu: f64,
    initial: CellField,
    cfg: &SolveConfig,
) -> Result<Trajectory> {
    let mesh = initial.mesh();
    let nu = courant_number(model, &mesh, cfg.dt, mu);
    if !(nu.is_finite() && nu.abs() <= 1.0) {
        return Err(Error::CflViolation { nu });
    }
    let mut fields = Vec::with_capacity(cfg.n_steps + 1);
    fields.push(initial);
    for k in 0..cfg.n_steps {
        let next = upwind_step(&fields[k], nu)?;
        fields.push(next);
    }
    Trajectory::from_parts(mu, nu, cfg.dt, mesh, fields)
}

/// Projects the initial condition and solves the full trajectory at `mu`.
pub fn run_trajectory(
    model: &impl WaveSpeed,
    mu: f64,
    ic: &InitialCondition,
    mesh: &Mesh1D,
    cfg: &SolveConfig,
) -> Result<Trajectory> {
    run_trajectory_from_field(model, mu, ic.project(mesh)?, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shift_ops::cyclic_shift;

    fn field(values: &[f64]) -> CellField {
        let mesh = Mesh1D::new(0.0, values.len() as f64, values.len()).unwrap();
        CellField::new(mesh, values.to_vec()).unwrap()
    }

    fn benchmark_setup() -> (TransportModel, Mesh1D) {
        let model = TransportModel::new(5.0, 2.0, 0.0, 1.0).unwrap();
        let mesh = Mesh1D::new(-10.0, 10.0, 250).unwrap();
        (model, mesh)
    }

    #[test]
    fn timestep_from_reference_parameter() {
        let (model, mesh) = benchmark_setup();
        let dt = cfl_timestep(&model, &mesh, 0.8, 1.0).unwrap();
        assert!((dt - 9.142857142857143e-3).abs() < 1e-17);
        let nu = courant_number(&model, &mesh, dt, 0.8);
        assert!((nu - 0.6857142857142857).abs() < 1e-15);
        // The anchor parameter has the largest speed, so it saturates at 0.8.
        assert!((courant_number(&model, &mesh, dt, 1.0) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn timestep_rejects_bad_anchors() {
        let (model, mesh) = benchmark_setup();
        assert!(cfl_timestep(&model, &mesh, 0.0, 1.0).is_err());
        assert!(cfl_timestep(&model, &mesh, 1.2, 1.0).is_err());
        let still = TransportModel::new(0.0, 0.0, 0.0, 1.0).unwrap();
        assert!(cfl_timestep(&still, &mesh, 0.8, 1.0).is_err());
    }

    #[test]
    fn step_examples() {
        let u = field(&[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(upwind_step(&u, 1.0).unwrap().values(), &[0.0, 1.0, 0.0, 0.0]);
        assert_eq!(upwind_step(&u, 0.5).unwrap().values(), &[0.5, 0.5, 0.0, 0.0]);
        assert_eq!(upwind_step(&u, -0.5).unwrap().values(), &[0.5, 0.0, 0.0, 0.5]);
        assert_eq!(upwind_step(&u, 0.0).unwrap().values(), u.values());
        assert!(matches!(
            upwind_step(&u, 1.0001),
            Err(Error::CflViolation { .. })
        ));
        assert!(upwind_step(&u, f64::NAN).is_err());
    }

    #[test]
    fn unit_courant_number_is_exact_transport() {
        let u0 = field(&[2.0, -1.0, 0.5, 0.0, 3.0]);
        let cfg = SolveConfig::new(1.0, 7).unwrap();
        let model = TransportModel::new(1.0, 0.0, 0.0, 2.0).unwrap();
        let traj = run_trajectory_from_field(&model, 1.0, u0.clone(), &cfg).unwrap();
        assert_eq!(traj.nu_i(), 1.0);
        for k in 0..=7 {
            let expect = cyclic_shift(&u0, k as i64);
            for (a, b) in traj.fields()[k].values().iter().zip(expect.values()) {
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn mass_conserved_and_tv_diminishes_along_trajectory() {
        let (model, mesh) = benchmark_setup();
        let dt = cfl_timestep(&model, &mesh, 0.8, 1.0).unwrap();
        let third = 10.0 / 3.0;
        let ic = InitialCondition::piecewise_constant(vec![-third, third], vec![-1.0, 1.0])
            .unwrap();
        let cfg = SolveConfig::new(dt, 80).unwrap();
        let traj = run_trajectory(&model, 0.8, &ic, &mesh, &cfg).unwrap();
        assert_eq!(traj.n_steps(), 80);
        let mass0 = traj.fields()[0].sum();
        let mut prev_tv = crate::metrics::total_variation(&traj.fields()[0]);
        for f in &traj.fields()[1..] {
            assert!((f.sum() - mass0).abs() <= 1e-12 * (mass0.abs() + 250.0));
            let tv = crate::metrics::total_variation(f);
            assert!(tv <= prev_tv * (1.0 + 1e-12));
            prev_tv = tv;
        }
    }

    #[test]
    fn cfl_violation_refused_at_solve_time() {
        let (model, mesh) = benchmark_setup();
        let ic = InitialCondition::piecewise_constant(vec![-10.0], vec![1.0]).unwrap();
        let cfg = SolveConfig::new(0.02, 3).unwrap(); // nu(1.0) = 1.75
        assert!(matches!(
            run_trajectory(&model, 1.0, &ic, &mesh, &cfg),
            Err(Error::CflViolation { .. })
        ));
    }

    #[test]
    fn field_lookup_bounds() {
        let u0 = field(&[1.0, 0.0, 0.0]);
        let model = TransportModel::new(1.0, 0.0, 0.0, 1.0).unwrap();
        let cfg = SolveConfig::new(0.5, 2).unwrap();
        let traj = run_trajectory_from_field(&model, 1.0, u0, &cfg).unwrap();
        assert!(traj.field(2).is_ok());
        assert!(matches!(
            traj.field(3),
            Err(Error::TimeIndexOutOfRange { k: 3, n_steps: 2 })
        ));
    }
}
