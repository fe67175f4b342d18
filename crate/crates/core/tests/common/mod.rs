//! Brute-force reference implementations shared by the integration tests.
//! They only use the plain data model, never the library's search code.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use otmatch::generators::{gen_random, RandomParams};
use otmatch::model::fixed_boundary;
use otmatch::{Assignment, Instance, InstanceKind, Job, JobId, PathPolicy, PathStep, Slot};

/// Usable slots of a job, read straight from its window.
pub fn usable(job: &Job) -> Vec<Slot> {
    let slots: Vec<Slot> = match &job.window {
        otmatch::Window::Interval { earliest, latest } => (*earliest..=*latest).collect(),
        otmatch::Window::SlotSet(s) => s.clone(),
    };
    slots.into_iter().filter(|&t| t > job.arrival).collect()
}

/// Maximum number of jobs matchable to distinct usable slots, by memoised
/// exhaustive search over (job prefix, used slot set).
pub fn brute_max_matching(inst: &Instance) -> usize {
    let slots: BTreeSet<Slot> = inst.jobs.iter().flat_map(usable).collect();
    let index: HashMap<Slot, usize> = slots.iter().enumerate().map(|(i, &t)| (t, i)).collect();
    assert!(slots.len() <= 64, "brute force needs at most 64 distinct slots");
    let options: Vec<Vec<usize>> = inst.jobs.iter().map(|j| usable(j).iter().map(|t| index[t]).collect()).collect();
    fn best(i: usize, used: u64, options: &[Vec<usize>], memo: &mut HashMap<(usize, u64), usize>) -> usize {
        if i == options.len() {
            return 0;
        }
        if let Some(&v) = memo.get(&(i, used)) {
            return v;
        }
        let mut v = best(i + 1, used, options, memo);
        for &s in &options[i] {
            if used & (1 << s) == 0 {
                v = v.max(1 + best(i + 1, used | (1 << s), options, memo));
            }
        }
        memo.insert((i, used), v);
        v
    }
    best(0, 0, &options, &mut HashMap::new())
}

/// Every simple augmenting path for `arriving` over slots after its arrival,
/// as (job, slot) moves. Jobs on frozen slots are never touched.
pub fn all_aug_paths(assignment: &Assignment, jobs: &[Job], arriving: JobId) -> Vec<Vec<(JobId, Slot)>> {
    let boundary = fixed_boundary(jobs[arriving.0].arrival);
    let mut out = Vec::new();
    let mut moves = Vec::new();
    let mut seen = BTreeSet::new();
    fn go(
        job: JobId,
        a: &Assignment,
        jobs: &[Job],
        boundary: i64,
        moves: &mut Vec<(JobId, Slot)>,
        seen: &mut BTreeSet<Slot>,
        out: &mut Vec<Vec<(JobId, Slot)>>,
    ) {
        for t in usable(&jobs[job.0]) {
            if t <= boundary || Some(t) == a.slot_of(job) || seen.contains(&t) {
                continue;
            }
            moves.push((job, t));
            match a.occupant(t) {
                None => out.push(moves.clone()),
                Some(next) => {
                    seen.insert(t);
                    go(next, a, jobs, boundary, moves, seen, out);
                    seen.remove(&t);
                }
            }
            moves.pop();
        }
    }
    go(arriving, assignment, jobs, boundary, &mut moves, &mut seen, &mut out);
    out
}

/// The path FirstFit should pick, chosen from an explicit list: fewest
/// moves, then earliest endpoint, then lexicographic slot order.
pub fn select(paths: &[Vec<(JobId, Slot)>], policy: PathPolicy, cap: Option<usize>, target: Option<Slot>) -> Option<Vec<(JobId, Slot)>> {
    let candidates: Vec<&Vec<(JobId, Slot)>> = paths
        .iter()
        .filter(|p| target.is_none_or(|t| p.last().unwrap().1 == t))
        .collect();
    let shortest = candidates.iter().map(|p| p.len()).min()?;
    if cap.is_some_and(|k| shortest - 1 > k) {
        return None;
    }
    let short: Vec<&&Vec<(JobId, Slot)>> = candidates.iter().filter(|p| p.len() == shortest).collect();
    let end = short.iter().map(|p| p.last().unwrap().1).min()?;
    let mut best: Vec<Vec<(JobId, Slot)>> = short.into_iter().filter(|p| p.last().unwrap().1 == end).map(|p| (**p).clone()).collect();
    let key = |p: &Vec<(JobId, Slot)>| p.iter().map(|m| m.1).collect::<Vec<_>>();
    best.sort_by_key(key);
    match policy {
        PathPolicy::EarliestTargetLexMin => best.into_iter().next(),
        PathPolicy::EarliestTargetLexMax => best.into_iter().next_back(),
    }
}

pub fn moves_of(steps: &[PathStep]) -> Vec<(JobId, Slot)> {
    steps
        .chunks(2)
        .map(|c| match (c[0], c[1]) {
            (PathStep::Job(j), PathStep::Slot(t)) => (j, t),
            _ => panic!("path does not alternate"),
        })
        .collect()
}

pub fn ceil_two_thirds(opt: usize) -> usize {
    (2 * opt).div_ceil(3)
}

/// The seeded random instances shared by several criteria: `count` small
/// instances alternating between interval and set kind.
pub fn small_random(count: u64, kind: Option<InstanceKind>, uniform: bool) -> Vec<Instance> {
    (0..count)
        .map(|seed| {
            let kind = kind.unwrap_or(if seed % 2 == 0 { InstanceKind::Interval } else { InstanceKind::SlotSet });
            let n = 1 + (seed as usize * 7) % 12;
            let params = RandomParams {
                seed,
                n,
                kind,
                max_slot: 16,
                max_len: 1 + (seed as i64 % 6),
                uniform_len: uniform.then_some(1 + (seed as i64 % 5)),
                set_size: 1 + (seed as usize % 3),
                prep_min: 1,
            };
            gen_random(&params).expect("valid parameters")
        })
        .collect()
}
