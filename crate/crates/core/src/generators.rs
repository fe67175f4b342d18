//! Instance families with closed-form predictions, random instances, the
//! de-batching transformation and two adaptive adversaries.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algorithms::AlgorithmSpec;
use crate::engine::{run, run_rule, ArrivalRule, Session};
use crate::error::{Error, Result};
use crate::model::{Instance, InstanceKind, Job, RunLog, Slot, Time, Window};
use crate::oracle::max_matching;

/// A quantity a prediction is about.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Jobs assigned at the end of the run.
    AlgAssigned,
    /// Jobs rejected during the run.
    AlgRejected,
    /// Maximum matching size; independent of the algorithm.
    OptSize,
    TotalReassignments,
    /// Reassignments caused by the last arriving job.
    LastArrivalReassignments,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::AlgAssigned => "alg_assigned",
            Metric::AlgRejected => "alg_rejected",
            Metric::OptSize => "opt_size",
            Metric::TotalReassignments => "total_reassignments",
            Metric::LastArrivalReassignments => "last_arrival_reassignments",
        }
    }

    /// Reads the metric off a run log. `None` for [`Metric::OptSize`].
    pub fn of_log(self, log: &RunLog) -> Option<u64> {
        let value = match self {
            Metric::AlgAssigned => log.assigned_count,
            Metric::AlgRejected => log.rejected_count,
            Metric::OptSize => return None,
            Metric::TotalReassignments => log.total_reassignments,
            Metric::LastArrivalReassignments => log.outcomes.last().map_or(0, |o| o.reassigned.len()),
        };
        Some(value as u64)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    /// Algorithm the value refers to; `None` for algorithm-free metrics.
    pub algorithm: Option<AlgorithmSpec>,
    pub metric: Metric,
    pub value: u64,
}

/// Outcome of checking one prediction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionCheck {
    pub prediction: Prediction,
    pub actual: u64,
}

impl PredictionCheck {
    pub fn holds(&self) -> bool {
        self.prediction.value == self.actual
    }
}

/// A generated instance together with the values it should produce.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyPrediction {
    pub family: String,
    pub params: String,
    pub instance: Instance,
    pub predictions: Vec<Prediction>,
}

impl FamilyPrediction {
    fn new(family: &str, params: String, instance: Instance) -> Self {
        FamilyPrediction { family: family.to_string(), params, instance, predictions: Vec::new() }
    }

    fn predict(mut self, algorithm: AlgorithmSpec, metric: Metric, value: u64) -> Self {
        self.predictions.push(Prediction { algorithm: Some(algorithm), metric, value });
        self
    }

    fn predict_opt(mut self, value: u64) -> Self {
        self.predictions.push(Prediction { algorithm: None, metric: Metric::OptSize, value });
        self
    }

    /// The predicted value for `(algorithm, metric)`, if any.
    pub fn predicted(&self, algorithm: Option<&AlgorithmSpec>, metric: Metric) -> Option<u64> {
        self.predictions
            .iter()
            .find(|p| p.metric == metric && p.algorithm.as_ref() == algorithm)
            .map(|p| p.value)
    }

    /// Runs every targeted algorithm once and compares.
    pub fn check(&self) -> Result<Vec<PredictionCheck>> {
        let mut logs: BTreeMap<String, RunLog> = BTreeMap::new();
        let mut opt = None;
        let mut out = Vec::with_capacity(self.predictions.len());
        for p in &self.predictions {
            let actual = match &p.algorithm {
                None => *opt.get_or_insert_with(|| max_matching(&self.instance).size as u64),
                Some(spec) => {
                    let key = spec.to_string();
                    if !logs.contains_key(&key) {
                        logs.insert(key.clone(), run(spec, &self.instance)?);
                    }
                    match p.metric.of_log(&logs[&key]) {
                        Some(v) => v,
                        None => *opt.get_or_insert_with(|| max_matching(&self.instance).size as u64),
                    }
                }
            };
            out.push(PredictionCheck { prediction: p.clone(), actual });
        }
        Ok(out)
    }
}

fn require(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Parameter(msg()))
    }
}

/// Largest family parameter accepted; keeps instances at desk scale.
const MAX_FAMILY_JOBS: i64 = 1 << 20;

fn to_i64(value: u64, name: &str) -> Result<i64> {
    i64::try_from(value)
        .ok()
        .filter(|&v| v <= MAX_FAMILY_JOBS)
        .ok_or_else(|| Error::Parameter(format!("{name} = {value} is too large")))
}

/// Long jobs with a wide window, then urgent jobs that FirstFit places at
/// the end of their windows, then short jobs that find everything taken.
pub fn gen_two_type(delta: u64) -> Result<FamilyPrediction> {
    require(delta >= 2, || format!("delta must be at least 2, got {delta}"))?;
    let d = to_i64(delta, "delta")?;
    let l = d - 1;
    let mut jobs = Vec::new();
    jobs.extend((0..l).map(|_| (-1, 1, 3 * d - 2)));
    jobs.extend((1..=d).map(|i| (i - 1, i, i + l)));
    jobs.extend((0..l).map(|_| (l, d, d + l)));
    Ok(FamilyPrediction::new("two-type", format!("delta={delta}"), Instance::from_intervals(&jobs))
        .predict(AlgorithmSpec::ff(), Metric::AlgAssigned, 2 * delta - 1)
        .predict(AlgorithmSpec::Edf, Metric::AlgAssigned, 3 * delta - 2)
        .predict_opt(3 * delta - 2))
}

/// Two-type family with the long jobs arriving at distinct times `-i`, so
/// that only same-time urgent jobs form batches.
pub fn gen_batching_two_type(delta: u64) -> Result<FamilyPrediction> {
    require(delta >= 2, || format!("delta must be at least 2, got {delta}"))?;
    let d = to_i64(delta, "delta")?;
    let mut jobs = Vec::new();
    jobs.extend((1..d).rev().map(|i| (-i, 1, 3 * d - 2)));
    jobs.extend((1..=d).map(|i| (i - 1, i, i + d - 1)));
    jobs.extend((1..d).map(|_| (d - 1, d, 2 * d - 1)));
    let batched = AlgorithmSpec::batched(AlgorithmSpec::ff())?;
    Ok(
        FamilyPrediction::new("batching-two-type", format!("delta={delta}"), Instance::from_intervals(&jobs))
            .predict(batched.clone(), Metric::AlgRejected, delta - 1)
            .predict(batched, Metric::AlgAssigned, 2 * delta - 1)
            .predict_opt(3 * delta - 2),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Alignment {
    Left,
    Right,
}

/// FirstFit lex-min total on the left-aligned triangle with `N = 2^n`.
pub fn triangle_lexmin_total(n: u32) -> u64 {
    let big = 1u64 << n;
    (1..=n).map(|k| (big >> k) * ((1u64 << (k - 1)) - 1)).sum::<u64>() + big - 1
}

/// `N = 2^n` jobs arriving together with nested windows `[1, N+1-i]`. The
/// right variant gives the second half windows `[i - N/2, N/2]` instead.
pub fn gen_triangle(n: u32, alignment: Alignment) -> Result<FamilyPrediction> {
    require((1..=20).contains(&n), || format!("n must be in 1..=20, got {n}"))?;
    let big = 1i64 << n;
    let half = big / 2;
    let jobs: Vec<(Time, Slot, Slot)> = (1..=big)
        .map(|i| match alignment {
            Alignment::Right if i > half => (0, i - half, half),
            _ => (0, 1, big + 1 - i),
        })
        .collect();
    let name = match alignment {
        Alignment::Left => "triangle",
        Alignment::Right => "triangle-right",
    };
    let (lexmin, lexmax) = match alignment {
        Alignment::Left => (triangle_lexmin_total(n), half as u64),
        Alignment::Right => (half as u64, triangle_lexmin_total(n)),
    };
    let mut fam = FamilyPrediction::new(name, format!("n={n}"), Instance::from_intervals(&jobs))
        .predict(AlgorithmSpec::ff(), Metric::TotalReassignments, lexmin)
        .predict(AlgorithmSpec::ff_lexmax(), Metric::TotalReassignments, lexmax);
    if alignment == Alignment::Left {
        let b = big as u64;
        fam = fam.predict(AlgorithmSpec::Edf, Metric::TotalReassignments, b * (b - 1) / 2);
    }
    Ok(fam.predict_opt(big as u64))
}

/// Equal-length windows: `δ-1` jobs on `[1, δ]`, a staircase of `m` shifted
/// windows, and a final `[1, δ]` job that pushes the whole staircase.
pub fn gen_uniform_staircase(delta: u64, m: u64) -> Result<FamilyPrediction> {
    require(delta >= 2, || format!("delta must be at least 2, got {delta}"))?;
    require(m >= 1, || "m must be at least 1".into())?;
    let d = to_i64(delta, "delta")?;
    let mi = to_i64(m, "m")?;
    let mut jobs = Vec::new();
    jobs.extend((1..d).map(|_| (0, 1, d)));
    jobs.extend((1..=mi).map(|i| (0, i + 1, i + d)));
    jobs.push((0, 1, d));
    let n = m + delta;
    Ok(
        FamilyPrediction::new("uniform-staircase", format!("delta={delta},m={m}"), Instance::from_intervals(&jobs))
            .predict(AlgorithmSpec::ff(), Metric::LastArrivalReassignments, m)
            .predict(AlgorithmSpec::ff(), Metric::TotalReassignments, m)
            .predict(AlgorithmSpec::ff(), Metric::AlgAssigned, n)
            .predict_opt(n),
    )
}

/// Equal-length windows on which every one of the last `δ-1` arrivals makes
/// EDF shift all `m` staircase jobs by one slot.
pub fn gen_edf_uniform(delta: u64, m: u64) -> Result<FamilyPrediction> {
    require(delta >= 2, || format!("delta must be at least 2, got {delta}"))?;
    require(m >= 1, || "m must be at least 1".into())?;
    let d = to_i64(delta, "delta")?;
    let mi = to_i64(m, "m")?;
    let mut jobs = Vec::new();
    jobs.extend((1..=mi).map(|i| (0, mi + 2 - i, mi + 1 - i + d)));
    jobs.push((0, 1, d));
    jobs.extend((1..d).map(|_| (0, 1, d)));
    let n = m + delta;
    Ok(FamilyPrediction::new("edf-uniform", format!("delta={delta},m={m}"), Instance::from_intervals(&jobs))
        .predict(AlgorithmSpec::Edf, Metric::TotalReassignments, (delta - 1) * m)
        .predict(AlgorithmSpec::Edf, Metric::AlgAssigned, n)
        .predict_opt(n))
}

/// `k+1` jobs on `[i, i+1]` and a last job on `[1, 1]`: freeing slot 1
/// takes `k+1` reassignments.
pub fn gen_kff_separation(k: u64) -> Result<FamilyPrediction> {
    require(k >= 1, || "k must be at least 1".into())?;
    let ki = to_i64(k, "k")?;
    let mut jobs: Vec<(Time, Slot, Slot)> = (1..=ki + 1).map(|i| (0, i, i + 1)).collect();
    jobs.push((0, 1, 1));
    let (ku, kn) = (k as usize, k as usize + 1);
    Ok(FamilyPrediction::new("kff-sep", format!("k={k}"), Instance::from_intervals(&jobs))
        .predict(AlgorithmSpec::kff(ku), Metric::AlgAssigned, k + 1)
        .predict(AlgorithmSpec::kff(kn), Metric::AlgAssigned, k + 2)
        .predict(AlgorithmSpec::ff(), Metric::AlgAssigned, k + 2)
        .predict_opt(k + 2))
}

/// Adds slot `n+1` to every set of `core` (slots `1..=n`) and a leading job
/// that only fits `n+1`. All deadlines coincide, so EDF never reassigns.
pub fn gen_edf_bmt_half(core: &[Vec<Slot>]) -> Result<Instance> {
    let n = core.iter().flatten().copied().max().unwrap_or(0);
    for (i, set) in core.iter().enumerate() {
        require(!set.is_empty(), || format!("core job {i} has no slots"))?;
        require(set.iter().all(|&t| t >= 1), || format!("core job {i} uses a slot below 1"))?;
        require(n < MAX_FAMILY_JOBS, || "core slots are too large".into())?;
    }
    let extra = n + 1;
    let mut pairs = vec![(0, vec![extra])];
    for set in core {
        let mut slots = set.clone();
        slots.sort_unstable();
        slots.dedup();
        slots.push(extra);
        pairs.push((0, slots));
    }
    Ok(Instance::from_slot_sets(pairs))
}

/// Core on which taking the smallest free slot loses half: `m` jobs
/// `{i, m+i}` followed by `m` jobs `{i}`.
pub fn obm_greedy_trap(m: usize) -> Vec<Vec<Slot>> {
    let m = m as Slot;
    (1..=m).map(|i| vec![i, m + i]).chain((1..=m).map(|i| vec![i])).collect()
}

/// [`gen_edf_bmt_half`] over [`obm_greedy_trap`]: EDF assigns `m+1` of
/// `2m+1`.
pub fn gen_edf_bmt_half_trap(m: u64) -> Result<FamilyPrediction> {
    require(m <= MAX_FAMILY_JOBS as u64, || format!("m = {m} is too large"))?;
    let inst = gen_edf_bmt_half(&obm_greedy_trap(m as usize))?;
    Ok(FamilyPrediction::new("edf-bmt-half", format!("m={m}"), inst)
        .predict(AlgorithmSpec::Edf, Metric::AlgAssigned, m + 1)
        .predict(AlgorithmSpec::Edf, Metric::TotalReassignments, 0)
        .predict_opt(2 * m + 1))
}

/// Splits every time unit that sees `k > 1` arrivals into `k` consecutive
/// slots and gives the `i`-th of those jobs the `i`-th sub-slot as arrival
/// time. `k-1` dummy jobs, arriving before everything, fill sub-slots
/// `2..=k` so that each sub-slot still behaves like the original slot.
///
/// The result has pairwise distinct arrivals among the original jobs,
/// which keep their order and come after the dummies.
pub fn debatch_transform(inst: &Instance) -> Result<Instance> {
    if inst.kind != InstanceKind::Interval {
        return Err(Error::Unsupported("de-batching needs interval windows".into()));
    }
    if inst.is_empty() {
        return Ok(inst.clone());
    }
    // arrivals per time, and the slot shift accumulated before each time
    let mut counts: BTreeMap<Time, i64> = BTreeMap::new();
    for job in &inst.jobs {
        *counts.entry(job.arrival).or_default() += 1;
    }
    let mut shift_before: Vec<(Time, i64)> = Vec::with_capacity(counts.len());
    let mut acc = 0;
    for (&t, &k) in &counts {
        shift_before.push((t, acc));
        acc += k - 1;
    }
    // first sub-slot of time t
    let first = |t: Time| -> Time {
        let idx = shift_before.partition_point(|&(s, _)| s < t);
        let shift = if idx == 0 { 0 } else { shift_before[idx - 1].1 + counts[&shift_before[idx - 1].0] - 1 };
        t + shift
    };
    let min_arrival = *counts.keys().next().expect("non-empty");
    let dummy_arrival = (-1).min(first(min_arrival) - 1);
    let mut dummies = Vec::new();
    for (&t, &k) in &counts {
        if k > 1 {
            let start = first(t);
            dummies.extend((1..k).map(|_| (dummy_arrival, start + 1, start + k - 1)));
        }
    }
    let mut seen: BTreeMap<Time, i64> = BTreeMap::new();
    let mut jobs = dummies;
    for job in &inst.jobs {
        let i = seen.entry(job.arrival).or_default();
        let arrival = first(job.arrival) + *i;
        *i += 1;
        let Window::Interval { earliest, latest } = job.window else {
            unreachable!("kind checked above")
        };
        let lo = earliest.max(job.arrival + 1);
        let window = if lo > latest { (arrival, arrival) } else { (first(lo), first(latest)) };
        jobs.push((arrival, window.0, window.1));
    }
    Ok(Instance::from_intervals(&jobs))
}

/// Parameters of [`gen_random`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomParams {
    pub seed: u64,
    pub n: usize,
    pub kind: InstanceKind,
    /// Slots are drawn from `1..=max_slot`.
    pub max_slot: Slot,
    /// Longest interval window (interval kind).
    pub max_len: i64,
    /// Every interval window gets exactly this length.
    pub uniform_len: Option<i64>,
    /// Size of every slot set (set kind).
    pub set_size: usize,
    /// Minimum gap between arrival and window start.
    pub prep_min: i64,
}

impl Default for RandomParams {
    fn default() -> Self {
        RandomParams {
            seed: 0,
            n: 8,
            kind: InstanceKind::Interval,
            max_slot: 12,
            max_len: 4,
            uniform_len: None,
            set_size: 2,
            prep_min: 1,
        }
    }
}

const MAX_RANDOM_JOBS: usize = 1 << 20;
const MAX_RANDOM_SLOT: Slot = 1 << 30;

/// Seeded random valid instance; arrivals are non-decreasing.
pub fn gen_random(p: &RandomParams) -> Result<Instance> {
    require(p.n <= MAX_RANDOM_JOBS, || format!("n = {} is too large", p.n))?;
    require((1..=MAX_RANDOM_SLOT).contains(&p.max_slot), || format!("max_slot = {} out of range", p.max_slot))?;
    require((0..=1).contains(&p.prep_min), || "prep_min must be 0 or 1".into())?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    match p.kind {
        InstanceKind::Interval => {
            if let Some(len) = p.uniform_len {
                require((1..=p.max_slot).contains(&len), || format!("uniform length {len} out of range"))?;
            } else {
                require((1..=p.max_slot).contains(&p.max_len), || format!("max_len {} out of range", p.max_len))?;
            }
            let span = p.max_slot - p.uniform_len.unwrap_or(1) + 1;
            let last_arrival = span - p.prep_min.max(1);
            require(last_arrival >= 0, || "no room for windows after arrival".into())?;
            let mut arrivals: Vec<Time> = (0..p.n).map(|_| rng.gen_range(0..=last_arrival)).collect();
            arrivals.sort_unstable();
            let jobs: Vec<(Time, Slot, Slot)> = arrivals
                .into_iter()
                .map(|r| {
                    let lo = (r + p.prep_min).max(1);
                    let a = rng.gen_range(lo..=span);
                    let d = match p.uniform_len {
                        Some(len) => a + len - 1,
                        None => rng.gen_range(a..=(a + p.max_len - 1).min(p.max_slot)),
                    };
                    (r, a, d)
                })
                .collect();
            Ok(Instance::from_intervals(&jobs))
        }
        InstanceKind::SlotSet => {
            let c = p.set_size as Slot;
            require(c >= 1 && c <= p.max_slot, || format!("set size {} out of range", p.set_size))?;
            let mut arrivals: Vec<Time> = (0..p.n).map(|_| rng.gen_range(0..=p.max_slot - c)).collect();
            arrivals.sort_unstable();
            let pairs = arrivals
                .into_iter()
                .map(|r| {
                    let room = (p.max_slot - r) as usize;
                    let mut slots: Vec<Slot> =
                        sample(&mut rng, room, p.set_size).into_iter().map(|i| r + 1 + i as Slot).collect();
                    slots.sort_unstable();
                    (r, slots)
                })
                .collect();
            Ok(Instance::from_slot_sets(pairs))
        }
    }
}

/// What an adversary built and how the algorithm fared.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub family: String,
    pub algorithm: String,
    pub instance: Instance,
    pub log: RunLog,
    pub alg_assigned: usize,
    pub opt_size: usize,
}

fn close_transcript<R: ArrivalRule + ?Sized>(family: &str, rule: &R, session: Session<'_, R>) -> Result<Transcript> {
    let (instance, log) = session.into_parts();
    let replay = run_rule(rule, &instance)?;
    if replay != log {
        return Err(Error::Integrity(format!("{} answered differently on replay", rule.label())));
    }
    Ok(Transcript {
        family: family.to_string(),
        algorithm: rule.label(),
        opt_size: max_matching(&instance).size,
        alg_assigned: log.assigned_count,
        instance,
        log,
    })
}

/// Blocks of three set jobs on three fresh slots. After the first two are
/// placed and frozen, the third asks for exactly the slot the algorithm can
/// no longer free.
pub fn adversary_bmt_triplets<R: ArrivalRule + ?Sized>(rule: &R, blocks: usize) -> Result<Transcript> {
    require(blocks >= 1, || "blocks must be at least 1".into())?;
    require(blocks <= MAX_FAMILY_JOBS as usize, || format!("blocks = {blocks} is too large"))?;
    let mut session = Session::new(rule, InstanceKind::SlotSet);
    for b in 0..blocks as Slot {
        let o = 3 * b;
        session.push(Job::slot_set(0, o, vec![o + 1, o + 3]))?;
        session.push(Job::slot_set(0, o, vec![o + 1, o + 2]))?;
        let last = if session.assignment().occupant(o + 2).is_some() { o + 2 } else { o + 3 };
        session.push(Job::slot_set(0, o + 1, vec![last]))?;
    }
    close_transcript("triplets", rule, session)
}

/// Four two-slot jobs, then (unless two were already rejected) two copies
/// of a job whose slots include one that is occupied for good.
pub fn adversary_bmt_uniform<R: ArrivalRule + ?Sized>(rule: &R) -> Result<Transcript> {
    let mut session = Session::new(rule, InstanceKind::SlotSet);
    for slots in [vec![1, 3], vec![1, 4], vec![2, 5], vec![2, 6]] {
        session.push(Job::slot_set(0, 0, slots))?;
    }
    let rejected = session.assignment().rejected_count();
    if rejected < 2 {
        let taken: Vec<Slot> = session.assignment().occupied_in(3..=6).map(|(t, _)| t).collect();
        let s = taken[0];
        let s2 = if rejected == 0 {
            taken[1]
        } else {
            // partner slot from the other pair keeps a perfect matching
            if s <= 4 {
                5
            } else {
                3
            }
        };
        for _ in 0..2 {
            session.push(Job::slot_set(0, 2, vec![s, s2]))?;
        }
    }
    close_transcript("uniform", rule, session)
}
