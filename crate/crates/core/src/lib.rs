//! Finite-volume engine for a two-lane system of nonlocal balance laws with
//! lane changing, and for its local limit.
//!
//! The crate is `no_std` (it needs `alloc`). File formats and the command
//! line live in the `laneflow` crate.

#![no_std]
// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod kernel;
pub mod harness;
pub mod model;
pub mod scenario;
pub mod scheme;
pub mod sim;
pub mod velocity;

pub use error::{Error, Result};
pub use grid::{Grid, LaneState};
pub use kernel::{Anchoring, KernelWeights, NonlocalField};
pub use model::{BoundaryPolicy, HBounds, LaneChange, ModelSpec, SourceSpec, Violation};
pub use scenario::{scenario, Profile, Scenario, ScenarioName, Segment};
pub use sim::{run, run_observed, Simulation, SimulationConfig, Snapshot};
pub use velocity::{greenshields, VelocityLaw};
pub use harness::{eta_sweep, refinement_study, Reference, SweepResult};
pub use diagnostics::DiagnosticsRecord;
