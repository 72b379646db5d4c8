//! Unsteady flow of a shear-thinning, concentration-thickening fluid in the
//! gap between two coaxial cylinders.
//!
//! The outer cylinder oscillates about the common axis, an optional axial
//! pressure gradient drives flow along it, and a reactant diffuses in from
//! the outer wall. The apparent viscosity depends on both the local shear
//! rate and the reactant concentration, which couples the three radial
//! fields `v` (swirl), `w` (axial) and `c` (concentration).

pub mod banded;
pub mod config;
pub mod constitutive;
pub mod error;
pub mod forcing;
pub mod grid;
pub mod integrator;
pub mod oracle;
pub mod output;
pub mod params;
pub mod pressure;
pub mod residual;
pub mod study;
pub mod verify;

pub use constitutive::{ConstitutiveModel, ModelKind, ShearState};
pub use error::{Error, Result};
pub use forcing::BcMode;
pub use grid::RadialGrid;
pub use integrator::{IntegratorConfig, SemiDiscrete, StepReport};
pub use params::{NondimParams, PhysicalInputs};
pub use residual::{AnnulusProblem, Drive, StateVector};
pub use study::{run, RunOutput, Snapshot, StudyConfig};
