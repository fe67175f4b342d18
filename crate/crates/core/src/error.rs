use std::fmt;

use crate::model::JobId;

/// A single violated instance invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    /// Index of the offending job, when the violation is tied to one.
    pub job: Option<JobId>,
    pub kind: ViolationKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    EmptyWindow,
    PreparationTooShort { preparation: i64, required: i64 },
    ArrivalDecreases { previous: i64, current: i64 },
    KindMismatch,
    EmptySlotSet,
    SlotSetNotIncreasing,
    SlotNotAfterArrival { slot: i64 },
    OutOfRange { value: i64, bound: i64 },
    IdOutOfOrder { expected: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(job) = self.job {
            write!(f, "job {job}: ")?;
        }
        match &self.kind {
            ViolationKind::EmptyWindow => write!(f, "earliest slot is after latest slot"),
            ViolationKind::PreparationTooShort { preparation, required } => {
                write!(f, "preparation time {preparation} is below the required {required}")
            }
            ViolationKind::ArrivalDecreases { previous, current } => {
                write!(f, "arrival {current} is earlier than the preceding arrival {previous}")
            }
            ViolationKind::KindMismatch => write!(f, "window kind differs from the instance kind"),
            ViolationKind::EmptySlotSet => write!(f, "feasible slot set is empty"),
            ViolationKind::SlotSetNotIncreasing => {
                write!(f, "feasible slots are not strictly increasing")
            }
            ViolationKind::SlotNotAfterArrival { slot } => {
                write!(f, "feasible slot {slot} is not after the arrival time")
            }
            ViolationKind::OutOfRange { value, bound } => {
                write!(f, "value {value} exceeds the magnitude bound {bound}")
            }
            ViolationKind::IdOutOfOrder { expected } => {
                write!(f, "job id does not match its position {expected}")
            }
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid instance: {}", format_violations(.0))]
    InvalidInstance(Vec<Violation>),
    #[error("integrity error: {0}")]
    Integrity(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("unsupported input: {0}")]
    Unsupported(String),
    #[error("ratio is undefined for an instance without jobs")]
    EmptyInstance,
    #[error("graph has {vertices} vertices, enumeration is limited to {limit}")]
    TooLarge { vertices: usize, limit: usize },
    #[error("cannot parse algorithm spec `{0}`")]
    UnknownAlgorithm(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn format_violations(violations: &[Violation]) -> String {
    violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
