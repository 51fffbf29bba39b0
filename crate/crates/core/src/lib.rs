//! Loosely coupled Robin-Robin splitting for a Stokes fluid interacting with
//! a linearly elastic solid, with a monolithic reference solver and energy
//! diagnostics.

pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod fem;
pub mod initial_data;
pub mod mesh;
pub mod monolithic;
pub mod operators;
pub mod splitting;

pub use diagnostics::{
    consistency_terms, error_norms, fit_rate, stability_residual, ConvergenceLevel, ConvergenceReport,
    EnergyLedger, ErrorReport, LedgerEntry,
};
pub use error::{FsiError, Result};
pub use initial_data::{pressure_pulse, random_state, smooth_coupled_mode, InitialState, InitialTraction};
pub use mesh::{build_two_layer_mesh, ChannelGeometry, FacetTag, Mesh, Subdomain};
pub use monolithic::{assemble_coupled, run_reference, DirichletNeumann, MonolithicState, ReferenceTrajectory};
pub use operators::{FsiOperators, MaterialParams};
pub use splitting::{InterfaceData, PhysicalParams, SplitRun, SplitSolver, SplitState, TimeGrid};
