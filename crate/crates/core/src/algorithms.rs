//! Online arrival rules: FirstFit, k-FirstFit, EDF, κ-EDF and the greedy
//! baseline without reassignments.
//!
//! Every rule is a pure function from the current assignment and the jobs
//! seen so far to an [`ArrivalOutcome`]; the engine applies it.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{build_residual, shortest_aug_path, PathPolicy};
use crate::model::{fixed_boundary, ArrivalOutcome, Assignment, Job, JobId, Reassignment, Slot, Window};

/// Which online algorithm to run.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum AlgorithmSpec {
    FirstFit(PathPolicy),
    KFirstFit { k: usize, policy: PathPolicy },
    Edf,
    KappaEdf(usize),
    Greedy,
    /// Processes jobs in batches of equal arrival time.
    Batched(Box<AlgorithmSpec>),
}

impl AlgorithmSpec {
    pub fn ff() -> Self {
        AlgorithmSpec::FirstFit(PathPolicy::EarliestTargetLexMin)
    }

    pub fn ff_lexmax() -> Self {
        AlgorithmSpec::FirstFit(PathPolicy::EarliestTargetLexMax)
    }

    pub fn kff(k: usize) -> Self {
        AlgorithmSpec::KFirstFit { k, policy: PathPolicy::EarliestTargetLexMin }
    }

    pub fn batched(inner: AlgorithmSpec) -> Result<Self> {
        if matches!(inner, AlgorithmSpec::Batched(_)) {
            return Err(Error::Parameter("batched algorithms cannot be nested".into()));
        }
        Ok(AlgorithmSpec::Batched(Box::new(inner)))
    }

    /// The single-job rule; for batching wrappers, the inner rule.
    pub fn arrival_rule(&self) -> &AlgorithmSpec {
        match self {
            AlgorithmSpec::Batched(inner) => inner.arrival_rule(),
            other => other,
        }
    }

    /// Decides the arrival of `jobs[arriving]`. `jobs` holds the jobs seen so
    /// far, indexed by id.
    pub fn decide(&self, assignment: &Assignment, jobs: &[Job], arriving: JobId) -> ArrivalOutcome {
        match self {
            AlgorithmSpec::FirstFit(policy) => ff_arrival(assignment, jobs, arriving, *policy),
            AlgorithmSpec::KFirstFit { k, policy } => kff_arrival(assignment, jobs, arriving, *k, *policy),
            AlgorithmSpec::Edf => edf_arrival(assignment, jobs, arriving),
            AlgorithmSpec::KappaEdf(kappa) => kappa_edf_arrival(assignment, jobs, arriving, *kappa),
            AlgorithmSpec::Greedy => greedy_arrival(assignment, jobs, arriving),
            AlgorithmSpec::Batched(inner) => inner.decide(assignment, jobs, arriving),
        }
    }
}

impl fmt::Display for AlgorithmSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgorithmSpec::FirstFit(PathPolicy::EarliestTargetLexMin) => write!(f, "ff"),
            AlgorithmSpec::FirstFit(p) => write!(f, "ff:{}", p.as_str()),
            AlgorithmSpec::KFirstFit { k, policy: PathPolicy::EarliestTargetLexMin } => write!(f, "kff:{k}"),
            AlgorithmSpec::KFirstFit { k, policy } => write!(f, "kff:{k}:{}", policy.as_str()),
            AlgorithmSpec::Edf => write!(f, "edf"),
            AlgorithmSpec::KappaEdf(kappa) => write!(f, "kedf:{kappa}"),
            AlgorithmSpec::Greedy => write!(f, "greedy"),
            AlgorithmSpec::Batched(inner) => write!(f, "batched:{inner}"),
        }
    }
}

fn parse_policy(text: &str) -> Option<PathPolicy> {
    match text {
        "lexmin" => Some(PathPolicy::EarliestTargetLexMin),
        "lexmax" => Some(PathPolicy::EarliestTargetLexMax),
        _ => None,
    }
}

impl FromStr for AlgorithmSpec {
    type Err = Error;

    /// Grammar: `ff[:lexmin|lexmax] | kff:K[:policy] | edf | kedf:K | greedy | batched:<inner>`.
    fn from_str(text: &str) -> Result<Self> {
        let unknown = || Error::UnknownAlgorithm(text.to_string());
        if let Some(inner) = text.strip_prefix("batched:") {
            return AlgorithmSpec::batched(inner.parse()?).map_err(|_| unknown());
        }
        let parts: Vec<&str> = text.split(':').collect();
        let spec = match parts.as_slice() {
            ["ff"] => AlgorithmSpec::ff(),
            ["ff", p] => AlgorithmSpec::FirstFit(parse_policy(p).ok_or_else(unknown)?),
            ["kff", k] | ["kff", k, _] => {
                let k: usize = k.parse().map_err(|_| unknown())?;
                if k == 0 {
                    return Err(unknown());
                }
                let policy = match parts.get(2) {
                    Some(p) => parse_policy(p).ok_or_else(unknown)?,
                    None => PathPolicy::default(),
                };
                AlgorithmSpec::KFirstFit { k, policy }
            }
            ["edf"] => AlgorithmSpec::Edf,
            ["kedf", kappa] => AlgorithmSpec::KappaEdf(kappa.parse().map_err(|_| unknown())?),
            ["greedy"] => AlgorithmSpec::Greedy,
            _ => return Err(unknown()),
        };
        Ok(spec)
    }
}

impl serde::Serialize for AlgorithmSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for AlgorithmSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// FirstFit: flip the shortest augmenting path with the earliest free
/// endpoint, or reject when none exists.
pub fn ff_arrival(assignment: &Assignment, jobs: &[Job], arriving: JobId, policy: PathPolicy) -> ArrivalOutcome {
    let job = &jobs[arriving.0];
    let graph = build_residual(assignment, job, jobs);
    match shortest_aug_path(&graph, policy, None, None) {
        Some(path) => ArrivalOutcome::from_path(arriving, path.into_steps(), |j| assignment.slot_of(j)),
        None => ArrivalOutcome::rejected(arriving),
    }
}

/// FirstFit with path limit `k`.
///
/// Interval jobs target the earliest free slot at or after their window
/// start and are rejected when the shortest path to it reassigns more than
/// `k` jobs. Slot-set jobs use the capped search over all free endpoints.
pub fn kff_arrival(assignment: &Assignment, jobs: &[Job], arriving: JobId, k: usize, policy: PathPolicy) -> ArrivalOutcome {
    let job = &jobs[arriving.0];
    let graph = build_residual(assignment, job, jobs);
    let target = match job.window {
        Window::Interval { earliest, .. } => {
            Some(assignment.first_free_from(earliest.max(fixed_boundary(job.arrival) + 1)))
        }
        Window::SlotSet(_) => None,
    };
    match shortest_aug_path(&graph, policy, Some(k), target) {
        Some(path) => ArrivalOutcome::from_path(arriving, path.into_steps(), |j| assignment.slot_of(j)),
        None => ArrivalOutcome::rejected(arriving),
    }
}

/// Smallest free slot `>= from` tracked as a path-compressed forwarding map.
struct FreeSlots {
    taken: HashSet<Slot>,
    forward: HashMap<Slot, Slot>,
}

impl FreeSlots {
    fn new(taken: HashSet<Slot>) -> Self {
        FreeSlots { taken, forward: HashMap::new() }
    }

    fn first_free(&mut self, from: Slot) -> Slot {
        let mut cur = from;
        let mut trail = Vec::new();
        while self.taken.contains(&cur) {
            trail.push(cur);
            cur = self.forward.get(&cur).copied().unwrap_or(cur + 1);
        }
        for t in trail {
            self.forward.insert(t, cur);
        }
        cur
    }

    fn take(&mut self, slot: Slot) {
        self.taken.insert(slot);
    }

    fn is_free(&self, slot: Slot) -> bool {
        !self.taken.contains(&slot)
    }
}

/// Tentative EDF pass; `Err(())` when some job of the re-sorted set finds no
/// free slot.
fn edf_placement(assignment: &Assignment, jobs: &[Job], arriving: JobId) -> std::result::Result<Vec<(JobId, Slot)>, ()> {
    let job = &jobs[arriving.0];
    let boundary = fixed_boundary(job.arrival);
    let deadline = job.deadline();
    let mut resorted = vec![arriving];
    let mut taken = HashSet::new();
    for (slot, other) in assignment.occupied() {
        if slot > boundary && jobs[other.0].deadline() > deadline {
            resorted.push(other);
        } else {
            taken.insert(slot);
        }
    }
    // stable: equal deadlines keep arrival order
    resorted.sort_by_key(|j| (jobs[j.0].deadline(), *j));
    let mut free = FreeSlots::new(taken);
    let mut placed = Vec::with_capacity(resorted.len());
    for id in resorted {
        let slot = match &jobs[id.0].window {
            Window::Interval { earliest, latest } => {
                let t = free.first_free((*earliest).max(boundary + 1));
                (t <= *latest).then_some(t)
            }
            Window::SlotSet(slots) => slots.iter().copied().find(|&t| t > boundary && free.is_free(t)),
        };
        let slot = slot.ok_or(())?;
        free.take(slot);
        placed.push((id, slot));
    }
    Ok(placed)
}

/// EDF: re-place the arriving job together with every mutable job with a
/// later deadline, in deadline order, each in its earliest free slot. The
/// pass is transactional; on failure the arriving job is rejected and
/// nothing moves.
pub fn edf_arrival(assignment: &Assignment, jobs: &[Job], arriving: JobId) -> ArrivalOutcome {
    let Ok(placed) = edf_placement(assignment, jobs, arriving) else {
        return ArrivalOutcome::rejected(arriving);
    };
    let mut reassigned = Vec::new();
    let mut assigned_slot = None;
    let mut new_slots = HashSet::new();
    let mut old_slots = HashSet::new();
    for &(id, slot) in &placed {
        new_slots.insert(slot);
        if id == arriving {
            assigned_slot = Some(slot);
            continue;
        }
        let from = assignment.slot_of(id).expect("re-sorted jobs are assigned");
        old_slots.insert(from);
        if from != slot {
            reassigned.push(Reassignment { job: id, from, to: slot });
        }
    }
    reassigned.sort_by_key(|m| m.job);
    let target_slot = new_slots.difference(&old_slots).copied().min();
    ArrivalOutcome { job_id: arriving, accepted: true, target_slot, assigned_slot, path: Vec::new(), reassigned }
}

/// EDF that rejects whenever the arrival would cause more than `kappa`
/// reassignments.
pub fn kappa_edf_arrival(assignment: &Assignment, jobs: &[Job], arriving: JobId, kappa: usize) -> ArrivalOutcome {
    let outcome = edf_arrival(assignment, jobs, arriving);
    if outcome.reassigned.len() > kappa {
        ArrivalOutcome::rejected(arriving)
    } else {
        outcome
    }
}

/// Earliest free feasible slot, never reassigning.
pub fn greedy_arrival(assignment: &Assignment, jobs: &[Job], arriving: JobId) -> ArrivalOutcome {
    let job = &jobs[arriving.0];
    let boundary = fixed_boundary(job.arrival);
    let slot = match &job.window {
        Window::Interval { earliest, latest } => {
            let t = assignment.first_free_from((*earliest).max(boundary + 1));
            (t <= *latest).then_some(t)
        }
        Window::SlotSet(slots) => slots
            .iter()
            .copied()
            .find(|&t| t > boundary && assignment.occupant(t).is_none()),
    };
    match slot {
        Some(t) => ArrivalOutcome::direct(arriving, t),
        None => ArrivalOutcome::rejected(arriving),
    }
}
