//! Experiment configuration. One TOML file describes the whole run:
//! domain, time stepping, model constants, initial data, snapshot and
//! target parameters. Unknown keys are hard errors so a typo cannot
//! silently reshape an experiment.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use rta_core::mesh::{InitialCondition, Mesh1D};
use rta_core::systems::{CharacteristicSpeed, ConservativeField, ElastoModel};
use rta_core::upwind::{cfl_timestep, TransportModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    Transport,
    Elasto,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub problem: Problem,
    pub domain: Domain,
    pub time: Time,
    pub transport: Option<TransportSection>,
    pub elasto: Option<ElastoSection>,
    pub initial: Option<Piecewise>,
    pub initial_sigma: Option<Piecewise>,
    pub initial_velocity: Option<Piecewise>,
    pub snapshots: Snapshots,
    pub targets: Targets,
    pub output: Output,
    pub converge: Option<Converge>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Domain {
    pub x_min: f64,
    pub x_max: f64,
    pub n_cells: usize,
}

/// Time stepping: the step is derived from the CFL number anchored at
/// `mu_ref`, and the horizon is given either as a physical time or as a
/// step count, never both.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Time {
    pub cfl: f64,
    pub mu_ref: f64,
    pub final_time: Option<f64>,
    pub n_steps: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransportSection {
    pub alpha: f64,
    pub beta: f64,
    pub mu_min: f64,
    pub mu_max: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElastoSection {
    pub c0: f64,
    pub c1: f64,
    pub rho: f64,
    pub mu_min: f64,
    pub mu_max: f64,
}

/// Piecewise-constant profile on the periodic domain: `values[i]` holds
/// from `breakpoints[i]` to the next breakpoint, wrapping around.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Piecewise {
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Snapshots {
    pub mu: Vec<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Targets {
    #[serde(default)]
    pub mu: Vec<f64>,
    pub steps: Option<Vec<usize>>,
    pub times: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    pub dir: PathBuf,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Converge {
    pub n_cells: Vec<usize>,
}

/// A parsed and validated configuration together with the hex digest of
/// the raw file, recorded in every emitted CSV.
pub struct Experiment {
    pub config: Config,
    pub digest: String,
}

impl Experiment {
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let digest = hex_digest(&bytes);
        let text = String::from_utf8(bytes)
            .with_context(|| format!("config {} is not UTF-8", path.display()))?;
        let config: Config = toml::from_str(&text)
            .with_context(|| format!("cannot parse config {}", path.display()))?;
        config
            .validate()
            .with_context(|| format!("invalid config {}", path.display()))?;
        Ok(Experiment { config, digest })
    }
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let out = hasher.finalize();
    let mut s = String::with_capacity(64);
    for b in out {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

impl Config {
    fn validate(&self) -> Result<()> {
        let t = &self.time;
        if !(t.cfl.is_finite() && t.cfl > 0.0 && t.cfl <= 1.0) {
            bail!("[time].cfl must lie in (0, 1], got {}", t.cfl);
        }
        match (t.final_time, t.n_steps) {
            (Some(ft), None) => {
                if !(ft.is_finite() && ft > 0.0) {
                    bail!("[time].final_time must be positive, got {ft}");
                }
            }
            (None, Some(0)) => bail!("[time].n_steps must be at least 1"),
            (None, Some(_)) => {}
            (None, None) => bail!("[time] needs final_time or n_steps"),
            (Some(_), Some(_)) => bail!("[time] takes final_time or n_steps, not both"),
        }
        self.mesh()?;

        match self.problem {
            Problem::Transport => {
                if self.elasto.is_some()
                    || self.initial_sigma.is_some()
                    || self.initial_velocity.is_some()
                {
                    bail!("problem = \"transport\" does not use the elasto sections");
                }
                let model = self.transport_model()?;
                if self.initial.is_none() {
                    bail!("problem = \"transport\" needs an [initial] section");
                }
                self.initial_condition()?;
                self.check_parameters(|mu| model.contains(mu))?;
            }
            Problem::Elasto => {
                if self.transport.is_some() || self.initial.is_some() {
                    bail!("problem = \"elasto\" does not use the transport sections");
                }
                let model = self.elasto_model()?;
                if self.initial_sigma.is_none() || self.initial_velocity.is_none() {
                    bail!(
                        "problem = \"elasto\" needs [initial_sigma] and [initial_velocity] sections"
                    );
                }
                self.check_parameters(|mu| model.contains(mu))?;
            }
        }
        Ok(())
    }

    fn check_parameters(&self, contains: impl Fn(f64) -> bool) -> Result<()> {
        let named: [(&str, &[f64]); 3] = [
            ("[time].mu_ref", std::slice::from_ref(&self.time.mu_ref)),
            ("[snapshots].mu", &self.snapshots.mu),
            ("[targets].mu", &self.targets.mu),
        ];
        for (name, values) in named {
            for &mu in values {
                if !mu.is_finite() || !contains(mu) {
                    bail!("{name} value {mu} lies outside the parameter range");
                }
            }
        }
        Ok(())
    }

    pub fn mesh(&self) -> Result<Mesh1D> {
        Mesh1D::new(self.domain.x_min, self.domain.x_max, self.domain.n_cells)
            .context("invalid [domain]")
    }

    pub fn mesh_with(&self, n_cells: usize) -> Result<Mesh1D> {
        Mesh1D::new(self.domain.x_min, self.domain.x_max, n_cells).context("invalid [domain]")
    }

    pub fn transport_model(&self) -> Result<TransportModel> {
        let s = self
            .transport
            .as_ref()
            .context("this command needs a [transport] section")?;
        TransportModel::new(s.alpha, s.beta, s.mu_min, s.mu_max).context("invalid [transport]")
    }

    pub fn elasto_model(&self) -> Result<ElastoModel> {
        let s = self
            .elasto
            .as_ref()
            .context("this command needs an [elasto] section")?;
        ElastoModel::new(s.c0, s.c1, s.rho, s.mu_min, s.mu_max).context("invalid [elasto]")
    }

    pub fn initial_condition(&self) -> Result<InitialCondition> {
        let ic = self.initial.as_ref().context("missing [initial] section")?;
        InitialCondition::piecewise_constant(ic.breakpoints.clone(), ic.values.clone())
            .context("invalid [initial]")
    }

    pub fn elasto_initial(&self, mesh: &Mesh1D) -> Result<ConservativeField> {
        let project = |section: &Option<Piecewise>, name: &str| -> Result<_> {
            let ic = section.as_ref().with_context(|| format!("missing [{name}] section"))?;
            InitialCondition::piecewise_constant(ic.breakpoints.clone(), ic.values.clone())
                .and_then(|ic| ic.project(mesh))
                .with_context(|| format!("invalid [{name}]"))
        };
        let sigma = project(&self.initial_sigma, "initial_sigma")?;
        let velocity = project(&self.initial_velocity, "initial_velocity")?;
        ConservativeField::new(sigma, velocity).map_err(Into::into)
    }

    /// Time step on `mesh` from the configured CFL number, anchored at the
    /// reference parameter.
    pub fn timestep(&self, mesh: &Mesh1D) -> Result<f64> {
        let dt = match self.problem {
            Problem::Transport => {
                cfl_timestep(&self.transport_model()?, mesh, self.time.cfl, self.time.mu_ref)
            }
            Problem::Elasto => cfl_timestep(
                &CharacteristicSpeed::forward(self.elasto_model()?),
                mesh,
                self.time.cfl,
                self.time.mu_ref,
            ),
        }?;
        Ok(dt)
    }

    /// Step count for a given time step: explicit, or the nearest whole
    /// number of steps covering the configured final time.
    pub fn horizon(&self, dt: f64) -> usize {
        match (self.time.n_steps, self.time.final_time) {
            (Some(k), _) => k,
            (None, Some(ft)) => (ft / dt).round().max(1.0) as usize,
            (None, None) => unreachable!("validated at load"),
        }
    }
}
