//! Christoffel operator, evolution equations, time integration, flow-map
//! reconstruction and conservation diagnostics.

pub mod diagnostics;
pub mod flow;
pub mod operators;
pub mod simulate;

pub use diagnostics::{relative_drift, DiagnosticsRow};
pub use flow::{reconstruct_flow, FlowMap};
pub use operators::{christoffel, covariant_derivative, euler_rhs, lie_bracket, mub_rhs, Form, Rhs};
pub use simulate::{
    advected, burgers_characteristics, simulate, step_rk4, InitialCondition, Preset, RunStatus,
    SimulationConfig, SimulationOutput, SimulationState, Snapshot,
};
