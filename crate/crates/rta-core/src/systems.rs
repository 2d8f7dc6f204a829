//! Linear elastodynamics as two decoupled transport equations. The
//! conservative pair (stress, velocity) is mapped to characteristic
//! variables, each characteristic is solved and reconstructed with the
//! scalar machinery, and the pair is recombined at the target parameter.

use crate::error::{Error, Result};
use crate::mesh::{CellField, Mesh1D};
use crate::rta;
use crate::upwind::{run_trajectory_from_field, SolveConfig, Trajectory, WaveSpeed};

/// Elastic medium with parameter-dependent Young's modulus
/// `E(mu) = c0 * mu + c1` and constant density `rho`; the sound speed is
/// `c(mu) = sqrt(E(mu) / rho)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElastoModel {
    pub c0: f64,
    pub c1: f64,
    pub rho: f64,
    pub mu_min: f64,
    pub mu_max: f64,
}

impl ElastoModel {
    pub fn new(c0: f64, c1: f64, rho: f64, mu_min: f64, mu_max: f64) -> Result<Self> {
        if ![c0, c1, rho, mu_min, mu_max].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument(
                "elastic model coefficients must be finite".into(),
            ));
        }
        if rho <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "density must be positive, got {rho}"
            )));
        }
        if mu_min > mu_max {
            return Err(Error::InvalidArgument(format!(
                "empty parameter interval [{mu_min}, {mu_max}]"
            )));
        }
        let model = ElastoModel { c0, c1, rho, mu_min, mu_max };
        // E is affine in mu, so positivity at both endpoints covers the
        // whole interval.
        if model.young_modulus(mu_min) <= 0.0 || model.young_modulus(mu_max) <= 0.0 {
            return Err(Error::InvalidArgument(
                "Young's modulus must stay positive over the parameter interval".into(),
            ));
        }
        Ok(model)
    }

    pub fn young_modulus(&self, mu: f64) -> f64 {
        self.c0 * mu + self.c1
    }

    pub fn celerity(&self, mu: f64) -> Result<f64> {
        let e = self.young_modulus(mu);
        if !(e.is_finite() && e > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "Young's modulus E({mu}) = {e} admits no wavespeed"
            )));
        }
        Ok((e / self.rho).sqrt())
    }

    pub fn contains(&self, mu: f64) -> bool {
        (self.mu_min..=self.mu_max).contains(&mu)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WaveFamily {
    /// Travels at `+c(mu)`.
    Forward,
    /// Travels at `-c(mu)`.
    Backward,
}

/// Adapter exposing one characteristic family of the elastic system as a
/// scalar wavespeed law.
#[derive(Clone, Copy, Debug)]
pub struct CharacteristicSpeed {
    pub model: ElastoModel,
    pub family: WaveFamily,
}

impl CharacteristicSpeed {
    pub fn forward(model: ElastoModel) -> Self {
        CharacteristicSpeed { model, family: WaveFamily::Forward }
    }

    pub fn backward(model: ElastoModel) -> Self {
        CharacteristicSpeed { model, family: WaveFamily::Backward }
    }
}

impl WaveSpeed for CharacteristicSpeed {
    fn wavespeed(&self, mu: f64) -> f64 {
        let c = (self.model.young_modulus(mu) / self.model.rho).sqrt();
        match self.family {
            WaveFamily::Forward => c,
            WaveFamily::Backward => -c,
        }
    }
}

/// Eigenvector matrix of the flux at a fixed parameter,
/// `r = [[rho c, -rho c], [1, 1]]`, its inverse, and the impedance
/// `rho c` they are built from.
#[derive(Clone, Copy, Debug)]
pub struct EigenBasis {
    r: [[f64; 2]; 2],
    r_inv: [[f64; 2]; 2],
    rho_c: f64,
}

impl EigenBasis {
    pub fn new(model: &ElastoModel, mu: f64) -> Result<Self> {
        let c = model.celerity(mu)?;
        let rho_c = model.rho * c;
        Ok(EigenBasis {
            r: [[rho_c, -rho_c], [1.0, 1.0]],
            r_inv: [[0.5 / rho_c, 0.5], [-0.5 / rho_c, 0.5]],
            rho_c,
        })
    }

    pub fn r(&self) -> [[f64; 2]; 2] {
        self.r
    }

    pub fn r_inv(&self) -> [[f64; 2]; 2] {
        self.r_inv
    }

    pub fn rho_c(&self) -> f64 {
        self.rho_c
    }
}

/// Conservative variables (stress, velocity) on one mesh.
#[derive(Clone, Debug)]
pub struct ConservativeField {
    sigma: CellField,
    velocity: CellField,
}

impl ConservativeField {
    pub fn new(sigma: CellField, velocity: CellField) -> Result<Self> {
        if sigma.mesh() != velocity.mesh() {
            return Err(Error::IncompatibleDiscretization(
                "stress and velocity live on different meshes".into(),
            ));
        }
        Ok(ConservativeField { sigma, velocity })
    }

    pub fn sigma(&self) -> &CellField {
        &self.sigma
    }

    pub fn velocity(&self) -> &CellField {
        &self.velocity
    }

    pub fn mesh(&self) -> Mesh1D {
        self.sigma.mesh()
    }

    pub fn into_parts(self) -> (CellField, CellField) {
        (self.sigma, self.velocity)
    }
}

/// Characteristic variables: `w1` rides `+c`, `w2` rides `-c`.
#[derive(Clone, Debug)]
pub struct CharacteristicField {
    w1: CellField,
    w2: CellField,
}

impl CharacteristicField {
    pub fn new(w1: CellField, w2: CellField) -> Result<Self> {
        if w1.mesh() != w2.mesh() {
            return Err(Error::IncompatibleDiscretization(
                "characteristic components live on different meshes".into(),
            ));
        }
        Ok(CharacteristicField { w1, w2 })
    }

    pub fn w1(&self) -> &CellField {
        &self.w1
    }

    pub fn w2(&self) -> &CellField {
        &self.w2
    }

    pub fn into_parts(self) -> (CellField, CellField) {
        (self.w1, self.w2)
    }
}

// The characteristics are ordered by their transport speeds (w1 at +c,
// w2 at -c) while the columns of `r` list the eigenvectors in ascending
// eigenvalue order, so the recombination pairs w2 with the first column
// and w1 with the second.

/// `w1 = (v - sigma / (rho c)) / 2`, `w2 = (v + sigma / (rho c)) / 2`.
pub fn to_characteristics(u: &ConservativeField, basis: &EigenBasis) -> CharacteristicField {
    let rc = basis.rho_c();
    let mesh = u.mesh();
    let n = mesh.n_cells();
    let (sig, vel) = (u.sigma().values(), u.velocity().values());
    let mut w1 = Vec::with_capacity(n);
    let mut w2 = Vec::with_capacity(n);
    for j in 0..n {
        w1.push(0.5 * (vel[j] - sig[j] / rc));
        w2.push(0.5 * (vel[j] + sig[j] / rc));
    }
    CharacteristicField {
        w1: CellField::new_unchecked(mesh, w1),
        w2: CellField::new_unchecked(mesh, w2),
    }
}

/// `sigma = rho c (w2 - w1)`, `v = w1 + w2`.
pub fn from_characteristics(w: &CharacteristicField, basis: &EigenBasis) -> ConservativeField {
    let rc = basis.rho_c();
    let mesh = w.w1().mesh();
    let n = mesh.n_cells();
    let (w1, w2) = (w.w1().values(), w.w2().values());
    let mut sigma = Vec::with_capacity(n);
    let mut velocity = Vec::with_capacity(n);
    for j in 0..n {
        sigma.push(rc * (w2[j] - w1[j]));
        velocity.push(w1[j] + w2[j]);
    }
    ConservativeField {
        sigma: CellField::new_unchecked(mesh, sigma),
        velocity: CellField::new_unchecked(mesh, velocity),
    }
}

/// Offline stage of the elastic problem at one snapshot parameter: both
/// characteristic trajectories plus the basis they were split with.
#[derive(Clone, Debug)]
pub struct ElastoOffline {
    w1: Trajectory,
    w2: Trajectory,
    basis: EigenBasis,
}

impl ElastoOffline {
    pub fn w1(&self) -> &Trajectory {
        &self.w1
    }

    pub fn w2(&self) -> &Trajectory {
        &self.w2
    }

    pub fn basis(&self) -> &EigenBasis {
        &self.basis
    }

    pub fn mu_i(&self) -> f64 {
        self.w1.mu_i()
    }

    pub fn mesh(&self) -> Mesh1D {
        self.w1.mesh()
    }

    pub fn n_steps(&self) -> usize {
        self.w1.n_steps()
    }

    pub fn dt(&self) -> f64 {
        self.w1.dt()
    }

    pub fn characteristic_at(&self, k: usize) -> Result<CharacteristicField> {
        CharacteristicField::new(self.w1.field(k)?.clone(), self.w2.field(k)?.clone())
    }

    /// Direct solution in conservative variables at step `k`, recombined
    /// with the snapshot basis.
    pub fn conservative_at(&self, k: usize) -> Result<ConservativeField> {
        Ok(from_characteristics(&self.characteristic_at(k)?, &self.basis))
    }
}

/// Splits the initial data at `mu_i`, then advances both characteristics
/// with the scalar upwind solver under a shared CFL check.
pub fn run_elasto_trajectory(
    model: &ElastoModel,
    mu_i: f64,
    ic: &ConservativeField,
    cfg: &SolveConfig,
) -> Result<ElastoOffline> {
    let basis = EigenBasis::new(model, mu_i)?;
    let (w1_0, w2_0) = to_characteristics(ic, &basis).into_parts();
    let w1 = run_trajectory_from_field(&CharacteristicSpeed::forward(*model), mu_i, w1_0, cfg)?;
    let w2 = run_trajectory_from_field(&CharacteristicSpeed::backward(*model), mu_i, w2_0, cfg)?;
    Ok(ElastoOffline { w1, w2, basis })
}

/// Reconstructed characteristic pair at a new parameter, each component
/// shifted within its own family.
pub fn rta_elasto_reconstruct_characteristics(
    offline: &ElastoOffline,
    model: &ElastoModel,
    mu: f64,
    k: usize,
) -> Result<CharacteristicField> {
    let w1 = rta::reconstruct(&offline.w1, &CharacteristicSpeed::forward(*model), mu, k)?;
    let w2 = rta::reconstruct(&offline.w2, &CharacteristicSpeed::backward(*model), mu, k)?;
    CharacteristicField::new(w1, w2)
}

/// Full reconstruction at a new parameter: shift both characteristics, then
/// recombine with the eigenbasis evaluated at the target parameter.
pub fn rta_elasto_reconstruct(
    offline: &ElastoOffline,
    model: &ElastoModel,
    mu: f64,
    k: usize,
) -> Result<ConservativeField> {
    let w = rta_elasto_reconstruct_characteristics(offline, model, mu, k)?;
    let basis = EigenBasis::new(model, mu)?;
    Ok(from_characteristics(&w, &basis))
}
