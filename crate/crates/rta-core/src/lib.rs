//! Reconstruct-translate-average (RTA) reconstruction of finite-volume
//! solutions for parameter-dependent linear transport on a periodic 1-D
//! domain.
//!
//! The workflow: solve one snapshot trajectory with the upwind scheme
//! ([`upwind`]), persist it ([`store`]), then recover the solution at any
//! other parameter value and any stored time index by shifting the snapshot
//! with the generalized cyclic shift operators ([`shift_ops`], [`rta`]) at
//! O(N) cost and with no further time stepping. Hyperbolic systems ride the
//! same machinery through characteristic decomposition ([`systems`]);
//! [`metrics`] quantifies the reconstruction quality.

pub mod error;
pub mod mesh;
pub mod metrics;
pub mod rta;
pub mod shift_ops;
pub mod store;
pub mod systems;
pub mod upwind;

pub use error::{Error, Result};
pub use mesh::{CellField, InitialCondition, Mesh1D};
pub use upwind::{SolveConfig, Trajectory, TransportModel, WaveSpeed};
