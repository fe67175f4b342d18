//! Online bipartite matching of unit jobs to time slots, with recourse
//! limited to future slots.
//!
//! Jobs arrive over time with an interval (or an arbitrary set) of feasible
//! slots. Online algorithms may move already assigned jobs, but never into or
//! out of slots that are already in the past.

pub mod algorithms;
pub mod engine;
pub mod error;
pub mod generators;
pub mod graph;
pub mod model;
pub mod oracle;

pub use algorithms::AlgorithmSpec;
pub use engine::{run, run_batched, run_rule, ArrivalRule, Session};
pub use error::{Error, Result, Violation, ViolationKind};
pub use graph::{AugPath, PathPolicy, ResidualGraph};
pub use model::{
    apply_outcome, validate_instance, ArrivalOutcome, Assignment, Instance, InstanceKind, Job, JobId, PathStep,
    Reassignment, RunLog, Slot, Time, Window,
};
