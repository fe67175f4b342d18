//! Jobs, instances, assignments and the per-arrival event log.
//!
//! Time is a single integer axis shared by arrivals and slots. A job
//! arriving at time `r` freezes every slot `t <= r`: jobs sitting in those
//! slots can no longer move, and the arriving job itself can only be placed
//! in a slot `t > r`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation, ViolationKind};

/// An integer point in time. Arrivals may be negative.
pub type Time = i64;
/// A unit-capacity slot, identified with the time unit it belongs to.
pub type Slot = i64;

/// Dense job index, `0..n` in arrival order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JobId(pub usize);

impl JobId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for JobId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "j{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InstanceKind {
    Interval,
    #[serde(rename = "set")]
    SlotSet,
}

/// The feasible slots of a job.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Window {
    Interval { earliest: Slot, latest: Slot },
    /// Sorted, distinct slots.
    SlotSet(Vec<Slot>),
}

impl Window {
    pub fn kind(&self) -> InstanceKind {
        match self {
            Window::Interval { .. } => InstanceKind::Interval,
            Window::SlotSet(_) => InstanceKind::SlotSet,
        }
    }

    pub fn contains(&self, slot: Slot) -> bool {
        match self {
            Window::Interval { earliest, latest } => (*earliest..=*latest).contains(&slot),
            Window::SlotSet(slots) => slots.binary_search(&slot).is_ok(),
        }
    }

    /// Latest feasible slot; the deadline used by EDF.
    pub fn deadline(&self) -> Slot {
        match self {
            Window::Interval { latest, .. } => *latest,
            Window::SlotSet(slots) => slots.last().copied().unwrap_or(Slot::MIN),
        }
    }

    pub fn earliest(&self) -> Slot {
        match self {
            Window::Interval { earliest, .. } => *earliest,
            Window::SlotSet(slots) => slots.first().copied().unwrap_or(Slot::MAX),
        }
    }

    /// Feasible slots strictly after `after`, ascending. Intervals are
    /// enumerated lazily.
    pub fn slots_after(&self, after: Time) -> Box<dyn DoubleEndedIterator<Item = Slot> + '_> {
        match self {
            Window::Interval { earliest, latest } => {
                Box::new((*earliest).max(after.saturating_add(1))..=*latest)
            }
            Window::SlotSet(slots) => {
                let start = slots.partition_point(|&s| s <= after);
                Box::new(slots[start..].iter().copied())
            }
        }
    }
}

/// One online request.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Job {
    pub id: JobId,
    pub arrival: Time,
    pub window: Window,
}

impl Job {
    pub fn interval(id: usize, arrival: Time, earliest: Slot, latest: Slot) -> Self {
        Job { id: JobId(id), arrival, window: Window::Interval { earliest, latest } }
    }

    /// Builds a set-constrained job. The slots are sorted; duplicates are
    /// kept so that validation can report them.
    pub fn slot_set(id: usize, arrival: Time, mut slots: Vec<Slot>) -> Self {
        slots.sort_unstable();
        Job { id: JobId(id), arrival, window: Window::SlotSet(slots) }
    }

    pub fn deadline(&self) -> Slot {
        self.window.deadline()
    }

    /// Whether the job may ever occupy `slot`: the slot lies in its window and
    /// after its own arrival.
    pub fn can_use(&self, slot: Slot) -> bool {
        slot > self.arrival && self.window.contains(slot)
    }
}

/// Slots up to and including the returned time are frozen while the job
/// arriving at `arrival` is processed.
pub fn fixed_boundary(arrival: Time) -> Time {
    arrival
}

/// Plain window membership (interval bounds or set membership).
pub fn is_feasible(job: &Job, slot: Slot) -> bool {
    job.window.contains(slot)
}

/// An ordered job sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub kind: InstanceKind,
    pub jobs: Vec<Job>,
}

impl Instance {
    /// Wraps `jobs`, renumbering ids to their positions.
    pub fn new(kind: InstanceKind, mut jobs: Vec<Job>) -> Self {
        for (i, job) in jobs.iter_mut().enumerate() {
            job.id = JobId(i);
        }
        Instance { kind, jobs }
    }

    /// Interval instance from `(r, a, d)` triples.
    pub fn from_intervals(triples: &[(Time, Slot, Slot)]) -> Self {
        let jobs = triples.iter().enumerate().map(|(i, &(r, a, d))| Job::interval(i, r, a, d)).collect();
        Instance { kind: InstanceKind::Interval, jobs }
    }

    /// Set-constrained instance from `(r, slots)` pairs.
    pub fn from_slot_sets(pairs: Vec<(Time, Vec<Slot>)>) -> Self {
        let jobs = pairs.into_iter().enumerate().map(|(i, (r, s))| Job::slot_set(i, r, s)).collect();
        Instance { kind: InstanceKind::SlotSet, jobs }
    }

    pub fn len(&self) -> usize {
        self.jobs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jobs.is_empty()
    }

    pub fn job(&self, id: JobId) -> &Job {
        &self.jobs[id.0]
    }

    pub fn has_distinct_arrivals(&self) -> bool {
        self.jobs.windows(2).all(|w| w[0].arrival != w[1].arrival)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Bounds applied by [`validate_with`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ValidateOptions {
    /// Minimum preparation time `a - r` of interval jobs (0 or 1).
    pub prep_min: i64,
    /// Largest admissible magnitude of any time or slot value.
    pub time_bound: i64,
}

/// Default magnitude bound; keeps slot arithmetic far away from overflow.
pub const DEFAULT_TIME_BOUND: i64 = 1 << 40;

impl Default for ValidateOptions {
    fn default() -> Self {
        ValidateOptions { prep_min: 0, time_bound: DEFAULT_TIME_BOUND }
    }
}

pub fn validate_instance(inst: &Instance, prep_min: i64) -> std::result::Result<(), Vec<Violation>> {
    validate_with(inst, &ValidateOptions { prep_min, ..ValidateOptions::default() })
}

/// Checks every job and sequence invariant, collecting all violations.
pub fn validate_with(inst: &Instance, opts: &ValidateOptions) -> std::result::Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    let bound = opts.time_bound;
    let mut previous: Option<Time> = None;
    for (i, job) in inst.jobs.iter().enumerate() {
        let mut found = Vec::new();
        let range = |value: i64| {
            value
                .checked_abs()
                .is_none_or(|v| v > bound)
                .then_some(ViolationKind::OutOfRange { value, bound })
        };
        if job.id != JobId(i) {
            found.push(ViolationKind::IdOutOfOrder { expected: i });
        }
        if let Some(prev) = previous {
            if job.arrival < prev {
                found.push(ViolationKind::ArrivalDecreases { previous: prev, current: job.arrival });
            }
        }
        previous = Some(job.arrival);
        if job.window.kind() != inst.kind {
            found.push(ViolationKind::KindMismatch);
        }
        found.extend(range(job.arrival));
        match &job.window {
            Window::Interval { earliest, latest } => {
                found.extend(range(*earliest));
                found.extend(range(*latest));
                if earliest > latest {
                    found.push(ViolationKind::EmptyWindow);
                }
                let prep = earliest.saturating_sub(job.arrival);
                if prep < opts.prep_min {
                    found.push(ViolationKind::PreparationTooShort { preparation: prep, required: opts.prep_min });
                }
            }
            Window::SlotSet(slots) => {
                if slots.is_empty() {
                    found.push(ViolationKind::EmptySlotSet);
                }
                if slots.windows(2).any(|w| w[0] >= w[1]) {
                    found.push(ViolationKind::SlotSetNotIncreasing);
                }
                for &slot in slots {
                    found.extend(range(slot));
                    if slot <= job.arrival {
                        found.push(ViolationKind::SlotNotAfterArrival { slot });
                    }
                }
            }
        }
        out.extend(found.into_iter().map(|kind| Violation { job: Some(JobId(i)), kind }));
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

/// One job moved from one slot to another within a single arrival.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reassignment {
    pub job: JobId,
    pub from: Slot,
    pub to: Slot,
}

/// A vertex of an alternating job/slot path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathStep {
    Job(JobId),
    Slot(Slot),
}

/// Record of what happened when one job arrived.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArrivalOutcome {
    pub job_id: JobId,
    pub accepted: bool,
    /// The slot that became occupied (the free endpoint `t*` of the chain).
    pub target_slot: Option<Slot>,
    /// The slot the arriving job itself received.
    pub assigned_slot: Option<Slot>,
    /// Alternating path from the arriving job to `target_slot`; empty for
    /// direct placements, rejections and non-path rules.
    pub path: Vec<PathStep>,
    pub reassigned: Vec<Reassignment>,
}

impl ArrivalOutcome {
    pub fn rejected(job_id: JobId) -> Self {
        ArrivalOutcome {
            job_id,
            accepted: false,
            target_slot: None,
            assigned_slot: None,
            path: Vec::new(),
            reassigned: Vec::new(),
        }
    }

    pub fn direct(job_id: JobId, slot: Slot) -> Self {
        ArrivalOutcome {
            job_id,
            accepted: true,
            target_slot: Some(slot),
            assigned_slot: Some(slot),
            path: Vec::new(),
            reassigned: Vec::new(),
        }
    }

    /// Outcome of flipping an augmenting path that starts at the arriving job.
    pub fn from_path(job_id: JobId, path: Vec<PathStep>, current: impl Fn(JobId) -> Option<Slot>) -> Self {
        let moves: Vec<(JobId, Slot)> = path
            .chunks(2)
            .filter_map(|pair| match pair {
                [PathStep::Job(j), PathStep::Slot(t)] => Some((*j, *t)),
                _ => None,
            })
            .collect();
        if moves.len() == 1 {
            return ArrivalOutcome::direct(job_id, moves[0].1);
        }
        let reassigned = moves[1..]
            .iter()
            .map(|&(job, to)| Reassignment { job, from: current(job).unwrap_or(Slot::MIN), to })
            .collect();
        ArrivalOutcome {
            job_id,
            accepted: true,
            target_slot: moves.last().map(|m| m.1),
            assigned_slot: moves.first().map(|m| m.1),
            path,
            reassigned,
        }
    }
}

/// The single mutable state of a run: an injective partial map from jobs to
/// slots plus the set of rejected jobs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment {
    slot_of: BTreeMap<JobId, Slot>,
    occupied: BTreeMap<Slot, JobId>,
    rejected: BTreeSet<JobId>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn slot_of(&self, job: JobId) -> Option<Slot> {
        self.slot_of.get(&job).copied()
    }

    pub fn occupant(&self, slot: Slot) -> Option<JobId> {
        self.occupied.get(&slot).copied()
    }

    pub fn is_rejected(&self, job: JobId) -> bool {
        self.rejected.contains(&job)
    }

    pub fn assigned_count(&self) -> usize {
        self.slot_of.len()
    }

    pub fn rejected_count(&self) -> usize {
        self.rejected.len()
    }

    /// `(job, slot)` pairs ordered by job.
    pub fn iter(&self) -> impl Iterator<Item = (JobId, Slot)> + '_ {
        self.slot_of.iter().map(|(&j, &t)| (j, t))
    }

    /// `(slot, job)` pairs ordered by slot.
    pub fn occupied(&self) -> impl DoubleEndedIterator<Item = (Slot, JobId)> + '_ {
        self.occupied.iter().map(|(&t, &j)| (t, j))
    }

    /// Occupied slots in `range`, ascending.
    pub fn occupied_in(&self, range: std::ops::RangeInclusive<Slot>) -> impl DoubleEndedIterator<Item = (Slot, JobId)> + '_ {
        self.occupied.range(range).map(|(&t, &j)| (t, j))
    }

    pub fn rejected(&self) -> impl Iterator<Item = JobId> + '_ {
        self.rejected.iter().copied()
    }

    /// Smallest unoccupied slot `>= from`.
    pub fn first_free_from(&self, from: Slot) -> Slot {
        let mut candidate = from;
        for &slot in self.occupied.range(from..).map(|(t, _)| t) {
            if slot != candidate {
                break;
            }
            candidate += 1;
        }
        candidate
    }

    /// Places `job` in `slot` without any checks; used by the oracle and by
    /// tests that need arbitrary states.
    pub fn insert(&mut self, job: JobId, slot: Slot) {
        if let Some(old) = self.slot_of.insert(job, slot) {
            self.occupied.remove(&old);
        }
        if let Some(prev) = self.occupied.insert(slot, job) {
            if prev != job {
                self.slot_of.remove(&prev);
            }
        }
        self.rejected.remove(&job);
    }

    pub fn reject(&mut self, job: JobId) {
        if let Some(old) = self.slot_of.remove(&job) {
            self.occupied.remove(&old);
        }
        self.rejected.insert(job);
    }

    /// Verifies injectivity, feasibility (window and arrival) and that no
    /// rejected job holds a slot.
    pub fn check(&self, jobs: &[Job]) -> Result<()> {
        if self.slot_of.len() != self.occupied.len() {
            return Err(Error::Integrity("slot map is not injective".into()));
        }
        for (&job, &slot) in &self.slot_of {
            if self.occupied.get(&slot) != Some(&job) {
                return Err(Error::Integrity(format!("{job} and slot {slot} disagree")));
            }
            let spec = jobs
                .get(job.0)
                .ok_or_else(|| Error::Integrity(format!("{job} is not part of the instance")))?;
            if !spec.can_use(slot) {
                return Err(Error::Integrity(format!("{job} is not feasible in slot {slot}")));
            }
            if self.rejected.contains(&job) {
                return Err(Error::Integrity(format!("{job} is both assigned and rejected")));
            }
        }
        Ok(())
    }
}

/// Applies `outcome` to `assignment`, returning the updated assignment.
///
/// Fails with [`Error::Integrity`] when the outcome's old slots disagree with
/// the assignment, touches a frozen slot, or breaks injectivity or
/// feasibility. On error the input assignment is left untouched.
pub fn apply_outcome(assignment: &Assignment, outcome: &ArrivalOutcome, jobs: &[Job]) -> Result<Assignment> {
    let arriving = jobs
        .get(outcome.job_id.0)
        .ok_or_else(|| Error::Integrity(format!("{} is unknown", outcome.job_id)))?;
    let mut next = assignment.clone();
    if assignment.slot_of(outcome.job_id).is_some() || assignment.is_rejected(outcome.job_id) {
        return Err(Error::Integrity(format!("{} was already processed", outcome.job_id)));
    }
    if !outcome.accepted {
        if outcome.assigned_slot.is_some() || !outcome.reassigned.is_empty() {
            return Err(Error::Integrity("rejection must not move jobs".into()));
        }
        next.reject(outcome.job_id);
        return Ok(next);
    }
    let boundary = fixed_boundary(arriving.arrival);
    let placed = outcome
        .assigned_slot
        .ok_or_else(|| Error::Integrity("accepted outcome without a slot".into()))?;
    if !outcome.path.is_empty() {
        check_path(assignment, outcome)?;
    }
    for mv in &outcome.reassigned {
        if mv.job == outcome.job_id {
            return Err(Error::Integrity("arriving job listed as reassigned".into()));
        }
        if assignment.slot_of(mv.job) != Some(mv.from) {
            return Err(Error::Integrity(format!("{} is not in slot {}", mv.job, mv.from)));
        }
        if mv.from == mv.to {
            return Err(Error::Integrity(format!("{} listed without moving", mv.job)));
        }
        if mv.from <= boundary || mv.to <= boundary {
            return Err(Error::Integrity(format!("{} moves across frozen slots", mv.job)));
        }
    }
    if placed <= boundary {
        return Err(Error::Integrity(format!("slot {placed} is frozen")));
    }
    for mv in &outcome.reassigned {
        next.slot_of.remove(&mv.job);
        next.occupied.remove(&mv.from);
    }
    let mut placements: Vec<(JobId, Slot)> = outcome.reassigned.iter().map(|mv| (mv.job, mv.to)).collect();
    placements.push((outcome.job_id, placed));
    for (job, slot) in placements {
        if next.occupied.contains_key(&slot) {
            return Err(Error::Integrity(format!("slot {slot} would hold two jobs")));
        }
        let spec = jobs
            .get(job.0)
            .ok_or_else(|| Error::Integrity(format!("{job} is unknown")))?;
        if !spec.can_use(slot) {
            return Err(Error::Integrity(format!("{job} is not feasible in slot {slot}")));
        }
        next.slot_of.insert(job, slot);
        next.occupied.insert(slot, job);
    }
    if let Some(target) = outcome.target_slot {
        if assignment.occupant(target).is_some() {
            return Err(Error::Integrity(format!("target slot {target} was not free")));
        }
    }
    Ok(next)
}

fn check_path(assignment: &Assignment, outcome: &ArrivalOutcome) -> Result<()> {
    let path = &outcome.path;
    let bad = |msg: &str| Err(Error::Integrity(format!("path: {msg}")));
    if path.len() < 2 || !path.len().is_multiple_of(2) {
        return bad("wrong length");
    }
    if path[0] != PathStep::Job(outcome.job_id) {
        return bad("does not start at the arriving job");
    }
    if path.last() != outcome.target_slot.map(PathStep::Slot).as_ref() {
        return bad("does not end at the target slot");
    }
    let mut moves = Vec::new();
    for pair in path.chunks(2) {
        match (pair[0], pair[1]) {
            (PathStep::Job(job), PathStep::Slot(slot)) => moves.push((job, slot)),
            _ => return bad("does not alternate"),
        }
    }
    for window in moves.windows(2) {
        let (_, slot) = window[0];
        let (next_job, _) = window[1];
        if assignment.occupant(slot) != Some(next_job) {
            return bad("backward edge does not match the assignment");
        }
    }
    let listed: Vec<(JobId, Slot)> = outcome.reassigned.iter().map(|m| (m.job, m.to)).collect();
    if listed != moves[1..] {
        return bad("reassignments disagree with the path");
    }
    if Some(moves[0].1) != outcome.assigned_slot {
        return bad("first slot is not the arriving job's slot");
    }
    Ok(())
}

/// Everything a run produced.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunLog {
    pub algorithm: String,
    pub outcomes: Vec<ArrivalOutcome>,
    pub assignment: Assignment,
    pub assigned_count: usize,
    pub rejected_count: usize,
    pub total_reassignments: usize,
}

impl RunLog {
    pub fn new(algorithm: String, outcomes: Vec<ArrivalOutcome>, assignment: Assignment) -> Self {
        let total_reassignments = outcomes.iter().map(|o| o.reassigned.len()).sum();
        RunLog {
            algorithm,
            assigned_count: assignment.assigned_count(),
            rejected_count: assignment.rejected_count(),
            outcomes,
            assignment,
            total_reassignments,
        }
    }

    /// Recomputes the totals from the per-arrival records.
    pub fn totals_consistent(&self) -> bool {
        let recomputed: usize = self.outcomes.iter().map(|o| o.reassigned.len()).sum();
        let accepted = self.outcomes.iter().filter(|o| o.accepted).count();
        recomputed == self.total_reassignments
            && accepted == self.assigned_count
            && self.assigned_count + self.rejected_count == self.outcomes.len()
    }

    /// Accept/reject pattern in arrival order.
    pub fn acceptance(&self) -> Vec<bool> {
        self.outcomes.iter().map(|o| o.accepted).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

// ---------------------------------------------------------------------------
// Wire formats

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum JobRecord {
    Interval { r: Time, a: Slot, d: Slot },
    Set { r: Time, slots: Vec<Slot> },
}

#[derive(Serialize, Deserialize)]
struct InstanceRecord {
    kind: InstanceKind,
    jobs: Vec<JobRecord>,
}

impl Serialize for Instance {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let jobs = self
            .jobs
            .iter()
            .map(|job| match &job.window {
                Window::Interval { earliest, latest } => JobRecord::Interval { r: job.arrival, a: *earliest, d: *latest },
                Window::SlotSet(slots) => JobRecord::Set { r: job.arrival, slots: slots.clone() },
            })
            .collect();
        InstanceRecord { kind: self.kind, jobs }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Instance {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let record = InstanceRecord::deserialize(deserializer)?;
        let jobs = record
            .jobs
            .into_iter()
            .enumerate()
            .map(|(i, job)| match job {
                JobRecord::Interval { r, a, d } => Job::interval(i, r, a, d),
                JobRecord::Set { r, slots } => Job::slot_set(i, r, slots),
            })
            .collect();
        Ok(Instance { kind: record.kind, jobs })
    }
}

#[derive(Serialize, Deserialize)]
struct Placement {
    job: JobId,
    slot: Slot,
}

#[derive(Serialize, Deserialize)]
struct AssignmentRecord {
    assigned: Vec<Placement>,
    rejected: Vec<JobId>,
}

impl Serialize for Assignment {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        AssignmentRecord {
            assigned: self.iter().map(|(job, slot)| Placement { job, slot }).collect(),
            rejected: self.rejected().collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Assignment {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let record = AssignmentRecord::deserialize(deserializer)?;
        let mut out = Assignment::new();
        for p in record.assigned {
            if out.occupied.contains_key(&p.slot) || out.slot_of.contains_key(&p.job) {
                return Err(serde::de::Error::custom("assignment is not injective"));
            }
            out.insert(p.job, p.slot);
        }
        for job in record.rejected {
            if out.slot_of.contains_key(&job) {
                return Err(serde::de::Error::custom("job is both assigned and rejected"));
            }
            out.rejected.insert(job);
        }
        Ok(out)
    }
}
