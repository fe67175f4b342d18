//! Residual graph of an arrival and shortest augmenting path search.
//!
//! The graph for a job arriving at time `r` contains the arriving job, every
//! job currently assigned to a slot `> r`, and every slot `> r` that is
//! feasible for one of those jobs. Jobs point to their feasible slots other
//! than their own; occupied slots point back to their occupant. Edges are
//! kept implicit in the job windows so that long intervals cost nothing
//! until they are searched.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{fixed_boundary, Assignment, Job, JobId, PathStep, Slot, Time, Window};

/// Tie-breaking among shortest augmenting paths that end in the same slot.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PathPolicy {
    /// Lexicographically smallest sequence of visited slots.
    #[default]
    #[serde(rename = "lexmin")]
    EarliestTargetLexMin,
    /// Lexicographically largest sequence of visited slots.
    #[serde(rename = "lexmax")]
    EarliestTargetLexMax,
}

impl PathPolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            PathPolicy::EarliestTargetLexMin => "lexmin",
            PathPolicy::EarliestTargetLexMax => "lexmax",
        }
    }
}

/// An alternating path `job, slot, job, slot, ...` from the arriving job to
/// a free slot.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AugPath {
    steps: Vec<PathStep>,
}

impl AugPath {
    pub fn new(steps: Vec<PathStep>) -> Self {
        AugPath { steps }
    }

    pub fn steps(&self) -> &[PathStep] {
        &self.steps
    }

    pub fn into_steps(self) -> Vec<PathStep> {
        self.steps
    }

    /// Number of vertices.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn slots(&self) -> Vec<Slot> {
        self.steps
            .iter()
            .filter_map(|s| match s {
                PathStep::Slot(t) => Some(*t),
                PathStep::Job(_) => None,
            })
            .collect()
    }

    pub fn target(&self) -> Option<Slot> {
        match self.steps.last() {
            Some(PathStep::Slot(t)) => Some(*t),
            _ => None,
        }
    }

    /// Previously assigned jobs on the path.
    pub fn reassignments(&self) -> usize {
        self.steps.len().saturating_sub(2) / 2
    }
}

#[derive(Clone, Debug)]
struct GraphJob {
    id: JobId,
    window: Window,
    current: Option<Slot>,
}

/// The residual digraph of one arrival.
#[derive(Clone, Debug)]
pub struct ResidualGraph {
    boundary: Time,
    /// Index 0 is the arriving job, the rest ordered by id.
    jobs: Vec<GraphJob>,
    /// Occupied mutable slots and the index of their occupant in `jobs`.
    occupant: BTreeMap<Slot, usize>,
}

/// Builds the residual graph for `arriving` given the current assignment.
/// `jobs` must contain every job referenced by `assignment`.
pub fn build_residual(assignment: &Assignment, arriving: &Job, jobs: &[Job]) -> ResidualGraph {
    let boundary = fixed_boundary(arriving.arrival);
    let mut graph_jobs = vec![GraphJob { id: arriving.id, window: arriving.window.clone(), current: None }];
    let mut occupant = BTreeMap::new();
    let mut movable: Vec<(JobId, Slot)> = assignment
        .occupied_in(boundary.saturating_add(1)..=Slot::MAX)
        .map(|(slot, job)| (job, slot))
        .collect();
    movable.sort_unstable();
    for (job, slot) in movable {
        occupant.insert(slot, graph_jobs.len());
        graph_jobs.push(GraphJob { id: job, window: jobs[job.0].window.clone(), current: Some(slot) });
    }
    ResidualGraph { boundary, jobs: graph_jobs, occupant }
}

impl ResidualGraph {
    pub fn boundary(&self) -> Time {
        self.boundary
    }

    pub fn arriving(&self) -> JobId {
        self.jobs[0].id
    }

    /// `V^J`: the arriving job followed by the reassignable jobs.
    pub fn job_vertices(&self) -> Vec<JobId> {
        self.jobs.iter().map(|j| j.id).collect()
    }

    fn usable(&self, job: usize, slot: Slot) -> bool {
        slot > self.boundary && self.jobs[job].window.contains(slot)
    }

    /// `V^T`, materialized. Intended for small graphs.
    pub fn slot_vertices(&self) -> BTreeSet<Slot> {
        self.jobs.iter().flat_map(|j| j.window.slots_after(self.boundary)).collect()
    }

    pub fn free_slots(&self) -> BTreeSet<Slot> {
        let mut slots = self.slot_vertices();
        slots.retain(|t| !self.occupant.contains_key(t));
        slots
    }

    /// Number of slot vertices, computed without materializing long intervals.
    pub fn slot_count(&self) -> usize {
        let mut points: BTreeSet<Slot> = BTreeSet::new();
        let mut ranges: Vec<(Slot, Slot)> = Vec::new();
        for job in &self.jobs {
            match &job.window {
                Window::Interval { earliest, latest } => {
                    let lo = (*earliest).max(self.boundary + 1);
                    if lo <= *latest {
                        ranges.push((lo, *latest));
                    }
                }
                Window::SlotSet(slots) => points.extend(slots.iter().filter(|&&t| t > self.boundary)),
            }
        }
        ranges.sort_unstable();
        let mut merged: Vec<(Slot, Slot)> = Vec::new();
        for (lo, hi) in ranges {
            match merged.last_mut() {
                Some(last) if lo <= last.1.saturating_add(1) => last.1 = last.1.max(hi),
                _ => merged.push((lo, hi)),
            }
        }
        let covered: i64 = merged.iter().map(|(lo, hi)| hi - lo + 1).sum();
        let extra = points.iter().filter(|&&t| !merged.iter().any(|&(lo, hi)| (lo..=hi).contains(&t))).count();
        covered as usize + extra
    }

    pub fn vertex_count(&self) -> usize {
        self.jobs.len() + self.slot_count()
    }

    /// Slots a job may move to: feasible, mutable, and not its own.
    pub fn forward_edges(&self, job: JobId) -> Vec<Slot> {
        let Some(idx) = self.index_of(job) else { return Vec::new() };
        let own = self.jobs[idx].current;
        self.jobs[idx].window.slots_after(self.boundary).filter(|&t| Some(t) != own).collect()
    }

    /// The job occupying `slot`, if the slot is a mutable occupied slot.
    pub fn backward_edge(&self, slot: Slot) -> Option<JobId> {
        self.occupant.get(&slot).map(|&i| self.jobs[i].id)
    }

    pub fn is_free(&self, slot: Slot) -> bool {
        slot > self.boundary && !self.occupant.contains_key(&slot) && (0..self.jobs.len()).any(|j| self.usable(j, slot))
    }

    fn index_of(&self, job: JobId) -> Option<usize> {
        self.jobs.iter().position(|j| j.id == job)
    }
}

/// Compressed view of the occupied slots used by the search.
struct OccupiedSlots {
    slots: Vec<Slot>,
    occupant: Vec<usize>,
    /// Smallest free slot after each maximal run of occupied slots.
    next_free: Vec<Slot>,
}

impl OccupiedSlots {
    fn new(graph: &ResidualGraph) -> Self {
        let slots: Vec<Slot> = graph.occupant.keys().copied().collect();
        let occupant = graph.occupant.values().copied().collect();
        let mut next_free = vec![0; slots.len()];
        for i in (0..slots.len()).rev() {
            next_free[i] = if i + 1 < slots.len() && slots[i + 1] == slots[i] + 1 { next_free[i + 1] } else { slots[i] + 1 };
        }
        OccupiedSlots { slots, occupant, next_free }
    }

    fn position(&self, slot: Slot) -> Option<usize> {
        self.slots.binary_search(&slot).ok()
    }

    /// Smallest unoccupied slot `>= from`.
    fn free_from(&self, from: Slot) -> Slot {
        match self.position(from) {
            Some(i) => self.next_free[i],
            None => from,
        }
    }
}

/// Union-find style skip lists over compressed indices, used to visit every
/// occupied slot at most once during a search.
struct Unvisited {
    next: Vec<usize>,
    prev: Vec<usize>,
    visited: Vec<bool>,
}

impl Unvisited {
    fn new(n: usize) -> Self {
        Unvisited { next: (0..=n).collect(), prev: (0..=n).collect(), visited: vec![false; n] }
    }

    /// Smallest unvisited index `>= i`, or `len` if none.
    fn next_from(&mut self, i: usize) -> usize {
        let mut root = i;
        while self.next[root] != root {
            root = self.next[root];
        }
        let mut cur = i;
        while self.next[cur] != root {
            let step = self.next[cur];
            self.next[cur] = root;
            cur = step;
        }
        root
    }

    /// Largest unvisited index `< i` shifted by one (`0` means none).
    fn prev_before(&mut self, i: usize) -> usize {
        let mut root = i;
        while self.prev[root] != root {
            root = self.prev[root];
        }
        let mut cur = i;
        while self.prev[cur] != root {
            let step = self.prev[cur];
            self.prev[cur] = root;
            cur = step;
        }
        root
    }

    fn visit(&mut self, i: usize) {
        self.visited[i] = true;
        self.next[i] = i + 1;
        self.prev[i + 1] = i;
    }
}

/// Finds the augmenting path chosen by FirstFit.
///
/// Among all augmenting paths from the arriving job, the result has the
/// fewest vertices; among those, the earliest free endpoint (or exactly
/// `fixed_target`); among those, the lexicographically smallest (LexMin) or
/// largest (LexMax) slot sequence. With `max_reassignments = Some(k)` paths
/// through more than `k` assigned jobs are not considered.
pub fn shortest_aug_path(
    graph: &ResidualGraph,
    policy: PathPolicy,
    max_reassignments: Option<usize>,
    fixed_target: Option<Slot>,
) -> Option<AugPath> {
    if let Some(t) = fixed_target {
        if !graph.is_free(t) {
            return None;
        }
    }
    let occupied = OccupiedSlots::new(graph);
    let mut unvisited = Unvisited::new(occupied.slots.len());
    let mut discovered_by: Vec<usize> = vec![usize::MAX; occupied.slots.len()];
    let mut level = vec![0usize];
    let mut depth = 0usize;
    loop {
        // Endpoint at this depth: earliest candidate, first job in level order.
        let mut best: Option<(Slot, usize)> = None;
        for &job in &level {
            let candidate = match fixed_target {
                Some(t) => graph.usable(job, t).then_some(t),
                None => first_free_in_window(graph, &occupied, job),
            };
            if let Some(t) = candidate {
                if best.is_none_or(|(b, _)| t < b) {
                    best = Some((t, job));
                }
            }
        }
        if let Some((target, job)) = best {
            return Some(reconstruct(graph, &occupied, &discovered_by, job, target));
        }
        if max_reassignments.is_some_and(|k| depth >= k) {
            return None;
        }
        let mut next_level = Vec::new();
        for &job in &level {
            let mut discover = |idx: usize, unvisited: &mut Unvisited| {
                unvisited.visit(idx);
                discovered_by[idx] = job;
                next_level.push(occupied.occupant[idx]);
            };
            match &graph.jobs[job].window {
                Window::Interval { earliest, latest } => {
                    let lo_slot = (*earliest).max(graph.boundary + 1);
                    let lo = occupied.slots.partition_point(|&s| s < lo_slot);
                    let hi = occupied.slots.partition_point(|&s| s <= *latest);
                    if lo >= hi {
                        continue;
                    }
                    match policy {
                        PathPolicy::EarliestTargetLexMin => loop {
                            let i = unvisited.next_from(lo);
                            if i >= hi {
                                break;
                            }
                            discover(i, &mut unvisited);
                        },
                        PathPolicy::EarliestTargetLexMax => loop {
                            let shifted = unvisited.prev_before(hi);
                            if shifted <= lo {
                                break;
                            }
                            discover(shifted - 1, &mut unvisited);
                        },
                    }
                }
                Window::SlotSet(slots) => {
                    let start = slots.partition_point(|&s| s <= graph.boundary);
                    let mutable = &slots[start..];
                    let mut visit_slot = |slot: Slot, unvisited: &mut Unvisited| {
                        if let Some(i) = occupied.position(slot) {
                            if !unvisited.visited[i] {
                                discover(i, unvisited);
                            }
                        }
                    };
                    match policy {
                        PathPolicy::EarliestTargetLexMin => mutable.iter().for_each(|&t| visit_slot(t, &mut unvisited)),
                        PathPolicy::EarliestTargetLexMax => {
                            mutable.iter().rev().for_each(|&t| visit_slot(t, &mut unvisited))
                        }
                    }
                }
            }
        }
        if next_level.is_empty() {
            return None;
        }
        level = next_level;
        depth += 1;
    }
}

fn first_free_in_window(graph: &ResidualGraph, occupied: &OccupiedSlots, job: usize) -> Option<Slot> {
    match &graph.jobs[job].window {
        Window::Interval { earliest, latest } => {
            let t = occupied.free_from((*earliest).max(graph.boundary + 1));
            (t <= *latest).then_some(t)
        }
        Window::SlotSet(slots) => slots
            .iter()
            .copied()
            .find(|&t| t > graph.boundary && occupied.position(t).is_none()),
    }
}

fn reconstruct(graph: &ResidualGraph, occupied: &OccupiedSlots, discovered_by: &[usize], last_job: usize, target: Slot) -> AugPath {
    let mut rev = vec![PathStep::Slot(target)];
    let mut job = last_job;
    loop {
        rev.push(PathStep::Job(graph.jobs[job].id));
        let Some(slot) = graph.jobs[job].current else { break };
        rev.push(PathStep::Slot(slot));
        let idx = occupied.position(slot).expect("current slot is occupied");
        job = discovered_by[idx];
    }
    rev.reverse();
    AugPath::new(rev)
}

/// Largest graph (jobs plus slots) accepted by [`enumerate_shortest_paths`].
pub const MAX_ENUMERATION_VERTICES: usize = 24;

/// Every minimum-length augmenting path from the arriving job, by
/// exhaustive search. Refuses graphs above [`MAX_ENUMERATION_VERTICES`].
pub fn enumerate_shortest_paths(graph: &ResidualGraph) -> Result<Vec<AugPath>> {
    let vertices = graph.vertex_count();
    if vertices > MAX_ENUMERATION_VERTICES {
        return Err(Error::TooLarge { vertices, limit: MAX_ENUMERATION_VERTICES });
    }
    let mut found = Vec::new();
    let mut stack = vec![PathStep::Job(graph.arriving())];
    let mut seen_slots = BTreeSet::new();
    explore(graph, 0, &mut stack, &mut seen_slots, &mut found);
    let Some(shortest) = found.iter().map(Vec::len).min() else { return Ok(Vec::new()) };
    Ok(found.into_iter().filter(|p| p.len() == shortest).map(AugPath::new).collect())
}

fn explore(
    graph: &ResidualGraph,
    job: usize,
    stack: &mut Vec<PathStep>,
    seen_slots: &mut BTreeSet<Slot>,
    found: &mut Vec<Vec<PathStep>>,
) {
    let own = graph.jobs[job].current;
    let slots: Vec<Slot> = graph.jobs[job].window.slots_after(graph.boundary).collect();
    for slot in slots {
        if Some(slot) == own || seen_slots.contains(&slot) {
            continue;
        }
        stack.push(PathStep::Slot(slot));
        match graph.occupant.get(&slot) {
            None => found.push(stack.clone()),
            Some(&next) => {
                seen_slots.insert(slot);
                stack.push(PathStep::Job(graph.jobs[next].id));
                explore(graph, next, stack, seen_slots, found);
                stack.pop();
                seen_slots.remove(&slot);
            }
        }
        stack.pop();
    }
}
