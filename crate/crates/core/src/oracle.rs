//! Offline ground truth: maximum matchings, offline augmenting paths,
//! closed-interval certificates and exact competitive ratios.

use std::collections::{BTreeMap, HashMap, VecDeque};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Assignment, Instance, InstanceKind, Job, JobId, RunLog, Slot, Window};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OfflineMatching {
    pub matched: BTreeMap<JobId, Slot>,
    pub size: usize,
}

/// First `cap` usable slots of a job. A job never needs more than that many
/// candidates: among any `cap` slots at most `cap - 1` are held by others.
fn candidate_slots(job: &Job, cap: usize) -> Vec<Slot> {
    job.window.slots_after(job.arrival).take(cap).collect()
}

/// Maximum-cardinality matching of the underlying graph (Hopcroft-Karp).
pub fn max_matching(inst: &Instance) -> OfflineMatching {
    let n = inst.len();
    let mut index: HashMap<Slot, usize> = HashMap::new();
    let mut slot_at: Vec<Slot> = Vec::new();
    let adj: Vec<Vec<usize>> = inst
        .jobs
        .iter()
        .map(|job| {
            candidate_slots(job, n)
                .into_iter()
                .map(|t| {
                    *index.entry(t).or_insert_with(|| {
                        slot_at.push(t);
                        slot_at.len() - 1
                    })
                })
                .collect()
        })
        .collect();
    let mate = hopcroft_karp(&adj, slot_at.len());
    let matched: BTreeMap<JobId, Slot> = mate
        .iter()
        .enumerate()
        .filter_map(|(j, s)| s.map(|s| (JobId(j), slot_at[s])))
        .collect();
    OfflineMatching { size: matched.len(), matched }
}

const UNREACHED: usize = usize::MAX;

fn hopcroft_karp(adj: &[Vec<usize>], right: usize) -> Vec<Option<usize>> {
    let left = adj.len();
    let mut mate_left: Vec<Option<usize>> = vec![None; left];
    let mut mate_right: Vec<Option<usize>> = vec![None; right];
    let mut dist = vec![UNREACHED; left];
    loop {
        // layer the graph from all free left vertices
        let mut queue = VecDeque::new();
        for u in 0..left {
            if mate_left[u].is_none() {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = UNREACHED;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                match mate_right[v] {
                    None => found = true,
                    Some(w) if dist[w] == UNREACHED => {
                        dist[w] = dist[u] + 1;
                        queue.push_back(w);
                    }
                    _ => {}
                }
            }
        }
        if !found {
            return mate_left;
        }
        let mut next_edge = vec![0usize; left];
        for u in 0..left {
            if mate_left[u].is_none() {
                augment(u, adj, &mut dist, &mut next_edge, &mut mate_left, &mut mate_right);
            }
        }
    }
}

/// Iterative layered DFS from free vertex `root`.
fn augment(
    root: usize,
    adj: &[Vec<usize>],
    dist: &mut [usize],
    next_edge: &mut [usize],
    mate_left: &mut [Option<usize>],
    mate_right: &mut [Option<usize>],
) -> bool {
    let mut stack = vec![root];
    while let Some(&u) = stack.last() {
        if next_edge[u] == adj[u].len() {
            dist[u] = UNREACHED;
            stack.pop();
            continue;
        }
        let v = adj[u][next_edge[u]];
        next_edge[u] += 1;
        match mate_right[v] {
            None => {
                // flip the stack path, deepest vertex first
                let mut slot = v;
                while let Some(w) = stack.pop() {
                    let previous = mate_left[w];
                    mate_left[w] = Some(slot);
                    mate_right[slot] = Some(w);
                    if let Some(p) = previous {
                        slot = p;
                    }
                }
                return true;
            }
            Some(w) if dist[w] == dist[u] + 1 => stack.push(w),
            _ => {}
        }
    }
    false
}

/// True iff some job without a slot reaches a free slot along an
/// alternating path of the underlying graph, frozen slots included.
pub fn has_offline_aug_path(inst: &Instance, assignment: &Assignment) -> bool {
    let starts: Vec<JobId> = inst.jobs.iter().map(|j| j.id).filter(|&j| assignment.slot_of(j).is_none()).collect();
    search_from(inst, assignment, &starts)
}

/// Like [`has_offline_aug_path`], but only paths starting at `start`.
pub fn has_offline_aug_path_from(inst: &Instance, assignment: &Assignment, start: JobId) -> bool {
    assignment.slot_of(start).is_none() && search_from(inst, assignment, &[start])
}

fn search_from(inst: &Instance, assignment: &Assignment, starts: &[JobId]) -> bool {
    let cap = assignment.assigned_count() + 1;
    let mut seen_jobs = vec![false; inst.len()];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for &j in starts {
        seen_jobs[j.0] = true;
        queue.push_back(j.0);
    }
    while let Some(j) = queue.pop_front() {
        for t in candidate_slots(&inst.jobs[j], cap) {
            match assignment.occupant(t) {
                None => return true,
                Some(other) if other.0 < seen_jobs.len() && !seen_jobs[other.0] => {
                    seen_jobs[other.0] = true;
                    queue.push_back(other.0);
                }
                _ => {}
            }
        }
    }
    false
}

/// A fully occupied slot interval whose jobs all have their windows inside.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosedIntervalCert {
    pub lo: Slot,
    pub hi: Slot,
    pub witnesses: Vec<JobId>,
}

impl ClosedIntervalCert {
    /// Checks the certificate invariants against an assignment.
    pub fn verify(&self, assignment: &Assignment, inst: &Instance) -> bool {
        let width = self.hi - self.lo + 1;
        let inside: Vec<JobId> = assignment.occupied_in(self.lo..=self.hi).map(|(_, j)| j).collect();
        let mut witnesses = self.witnesses.clone();
        witnesses.sort();
        let mut sorted_inside = inside.clone();
        sorted_inside.sort();
        width >= 1
            && inside.len() as i64 == width
            && witnesses == sorted_inside
            && witnesses.iter().all(|j| {
                let (lo, hi) = usable_window(&inst.jobs[j.0]);
                self.lo <= lo && hi <= self.hi
            })
    }
}

/// The part of an interval window a job can actually use.
fn usable_window(job: &Job) -> (Slot, Slot) {
    match job.window {
        Window::Interval { earliest, latest } => (earliest.max(job.arrival + 1), latest),
        Window::SlotSet(_) => unreachable!("certificates are interval-only"),
    }
}

/// Smallest closed interval containing `around`, grown by repeatedly
/// absorbing the windows of the jobs assigned inside it. `None` as soon as
/// the interval contains a free slot.
///
/// Windows are taken as the slots a job can use, i.e. clipped to after its
/// arrival.
pub fn find_closed_interval(
    assignment: &Assignment,
    inst: &Instance,
    around: (Slot, Slot),
) -> Result<Option<ClosedIntervalCert>> {
    if inst.kind != InstanceKind::Interval {
        return Err(Error::Unsupported("closed intervals need interval windows".into()));
    }
    let (mut lo, mut hi) = around;
    if lo > hi {
        return Err(Error::Parameter(format!("empty interval [{lo}, {hi}]")));
    }
    loop {
        let inside: Vec<JobId> = assignment.occupied_in(lo..=hi).map(|(_, j)| j).collect();
        if (inside.len() as i64) < hi - lo + 1 {
            return Ok(None);
        }
        let (mut new_lo, mut new_hi) = (lo, hi);
        for j in &inside {
            let (a, d) = usable_window(&inst.jobs[j.0]);
            new_lo = new_lo.min(a);
            new_hi = new_hi.max(d);
        }
        if (new_lo, new_hi) == (lo, hi) {
            let cert = ClosedIntervalCert { lo, hi, witnesses: inside };
            if !cert.verify(assignment, inst) {
                return Err(Error::Integrity(format!("certificate [{lo}, {hi}] fails its own check")));
            }
            return Ok(Some(cert));
        }
        lo = new_lo;
        hi = new_hi;
    }
}

/// `assigned / OPT` as an exact fraction.
pub fn ratio(log: &RunLog, inst: &Instance) -> Result<Ratio<u64>> {
    if inst.is_empty() {
        return Err(Error::EmptyInstance);
    }
    let opt = max_matching(inst).size;
    Ok(Ratio::new(log.assigned_count as u64, opt as u64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{run, AlgorithmSpec};

    fn triangle(n: i64) -> Instance {
        Instance::from_intervals(&(1..=n).map(|i| (0, 1, n + 1 - i)).collect::<Vec<_>>())
    }

    #[test]
    fn triangle_is_perfect() {
        let m = max_matching(&triangle(4));
        assert_eq!(m.size, 4);
        let inst = triangle(4);
        for (j, t) in &m.matched {
            assert!(inst.jobs[j.0].can_use(*t));
        }
    }

    #[test]
    fn matching_respects_arrival() {
        // slot 1 is not usable by a job arriving at 1
        let inst = Instance::from_intervals(&[(0, 1, 1), (1, 1, 2)]);
        assert_eq!(max_matching(&inst).size, 2);
        let inst = Instance::from_intervals(&[(0, 2, 2), (1, 1, 2)]);
        assert_eq!(max_matching(&inst).size, 1);
    }

    #[test]
    fn greedy_leaves_offline_path() {
        let inst = Instance::from_intervals(&[(0, 1, 2), (0, 1, 1)]);
        let greedy = run(&AlgorithmSpec::Greedy, &inst).unwrap();
        assert!(has_offline_aug_path(&inst, &greedy.assignment));
        let ff = run(&AlgorithmSpec::ff(), &inst).unwrap();
        assert!(!has_offline_aug_path(&inst, &ff.assignment));
        assert_eq!(ratio(&greedy, &inst).unwrap(), Ratio::new(1, 2));
    }

    #[test]
    fn closed_interval_examples() {
        let inst = Instance::from_intervals(&[(0, 1, 2), (0, 1, 2), (0, 1, 3)]);
        let mut a = Assignment::new();
        a.insert(JobId(0), 1);
        a.insert(JobId(1), 2);
        let cert = find_closed_interval(&a, &inst, (1, 2)).unwrap().unwrap();
        assert_eq!((cert.lo, cert.hi), (1, 2));
        assert_eq!(cert.witnesses, vec![JobId(0), JobId(1)]);
        assert!(find_closed_interval(&a, &inst, (1, 3)).unwrap().is_none());
        let mut b = Assignment::new();
        b.insert(JobId(2), 1);
        assert!(find_closed_interval(&b, &inst, (1, 1)).unwrap().is_none());
    }

    #[test]
    fn set_kind_has_no_certificates() {
        let inst = Instance::from_slot_sets(vec![(0, vec![1])]);
        assert!(find_closed_interval(&Assignment::new(), &inst, (1, 1)).is_err());
    }

    #[test]
    fn empty_instance_ratio() {
        let inst = Instance::new(InstanceKind::Interval, Vec::new());
        let log = run(&AlgorithmSpec::ff(), &inst).unwrap();
        assert!(matches!(ratio(&log, &inst), Err(Error::EmptyInstance)));
    }
}
