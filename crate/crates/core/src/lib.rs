//! Fail-closed execution-authority gate.
//!
//! Authority to execute is rebuilt at every step from a coverage envelope
//! (what is proven, what is assumed, what is acknowledged unknown) and is
//! never carried forward. The crate also ships the pieces needed to compare
//! that gate against admission-time attestation:
//!
//! * [`state`]: real and provable state, the gap, the coverage envelope.
//! * [`gate`]: the reconstruction gate and the four-condition constructor.
//! * [`baseline`]: attestation and oracle-extended decision functions.
//! * [`drift`]: seeded drift injection and provable channels.
//! * [`sim`]: paired simulation, metrics and coverage sweeps.
//! * [`case_study`]: the scripted transfer scenario.
//! * [`lab`]: exhaustive witness search over finite instances.

pub mod baseline;
pub mod case_study;
pub mod drift;
pub mod exec;
pub mod gate;
pub mod lab;
pub mod sim;
pub mod state;

pub use exec::Schedule;
pub use gate::{evaluate_gate, gate_step, ActionClass, GateOutcome, Privilege, Verdict};
pub use state::{build_envelope, gap, project, ComponentId, CoverageEnvelope, ProvableState, RealState, Status, Universe};
