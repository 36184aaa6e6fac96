//! Recurrence entanglement purification on Bell-diagonal two-qubit states.
//!
//! The one-map protocols (IBM, Oxford, XH) and the two-map schedules TM1
//! (XH, XH, then QPA) and TM2 (QPA, XH, then QPA) are iterated as closed-form
//! maps on the four Bell weights. An exact density-matrix simulation of the
//! bilateral-CNOT round serves as ground truth for those maps and runs
//! arbitrary `U(θ, φ)` schedules.

pub mod bellstate;
pub mod cli;
pub mod engine;
pub mod error;
pub mod maps;
pub mod oracle;
pub mod protocols;
pub mod report;
pub mod sampler;

pub use bellstate::{domain_of, entropy_bits, relabel_to_target, twirl_to_werner, BellDiagonalState, DomainLabel, PauliRelabel};
pub use engine::{classify_attractor, improved_yield, run, AttractorClass, TrajectoryRecord};
pub use error::{Error, Result};
pub use maps::{apply_map, qpa_step, xh_step, MapKind, StepResult};
pub use protocols::{ProtocolSchedule, UnitaryParams};
