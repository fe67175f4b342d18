//! Acceptance criteria. Run with `cargo test -p otmatch --test acceptance`.
//! Prints one PASS/FAIL line per criterion and exits non-zero on failure.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use num_rational::Ratio;
use otmatch::generators::*;
use otmatch::graph::{build_residual, enumerate_shortest_paths, shortest_aug_path, MAX_ENUMERATION_VERTICES};
use otmatch::oracle::{find_closed_interval, has_offline_aug_path, max_matching, ratio};
use otmatch::{run, run_batched, AlgorithmSpec, Instance, InstanceKind, PathPolicy, RunLog, Session, Window};

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn spec(text: &str) -> AlgorithmSpec {
    text.parse().expect("valid spec")
}

fn go(spec: &AlgorithmSpec, inst: &Instance) -> Result<RunLog, String> {
    run(spec, inst).map_err(|e| e.to_string())
}

/// Offline optimum, cross-checked against exhaustive search.
fn checked_opt(inst: &Instance) -> Result<usize, String> {
    let fast = max_matching(inst).size;
    let slow = brute_max_matching(inst);
    ensure(fast == slow, || format!("matching oracle {fast} disagrees with exhaustive {slow}"))?;
    Ok(fast)
}

fn criterion_1() -> Check {
    for delta in [2u64, 4, 10, 50, 200] {
        let fam = gen_two_type(delta).map_err(|e| e.to_string())?;
        let ff = go(&AlgorithmSpec::ff(), &fam.instance)?;
        let opt = max_matching(&fam.instance).size as u64;
        ensure(ff.assigned_count as u64 == 2 * delta - 1, || format!("delta={delta}: FF assigned {}", ff.assigned_count))?;
        ensure(opt == 3 * delta - 2, || format!("delta={delta}: OPT {opt}"))?;
        if delta == 200 {
            let r = ratio(&ff, &fam.instance).map_err(|e| e.to_string())?;
            ensure(r == Ratio::new(399, 598), || format!("ratio at 200 is {r}"))?;
        }
    }
    let mut previous = Ratio::new(1u64, 1);
    for delta in 2..=200u64 {
        let fam = gen_two_type(delta).map_err(|e| e.to_string())?;
        let r = ratio(&go(&AlgorithmSpec::ff(), &fam.instance)?, &fam.instance).map_err(|e| e.to_string())?;
        ensure(r < previous && r > Ratio::new(2, 3), || format!("sweep not monotone toward 2/3 at delta={delta}: {r}"))?;
        previous = r;
    }
    Ok("delta in {2,4,10,50,200}; 399/598 at 200; sweep 2..=200 decreasing above 2/3".into())
}

fn criterion_2() -> Check {
    let instances = small_random(1000, None, false);
    let mut checked = 0;
    for (seed, inst) in instances.iter().enumerate() {
        ensure(inst.len() <= 12, || "instance too large".into())?;
        let opt = checked_opt(inst)?;
        for s in ["ff", "kff:1", "kff:2", "kff:3"] {
            let log = go(&spec(s), inst)?;
            ensure(log.assigned_count >= ceil_two_thirds(opt), || {
                format!("seed {seed}: {s} assigned {} of OPT {opt}", log.assigned_count)
            })?;
            checked += 1;
        }
    }
    Ok(format!("{checked} runs over 1000 instances at or above ceil(2/3 OPT)"))
}

fn criterion_3() -> Check {
    let instances = small_random(1000, Some(InstanceKind::Interval), true);
    for (seed, inst) in instances.iter().enumerate() {
        let opt = checked_opt(inst)?;
        let log = go(&AlgorithmSpec::ff(), inst)?;
        ensure(log.assigned_count == opt, || format!("seed {seed}: FF {} vs OPT {opt}", log.assigned_count))?;
    }
    Ok("FF = OPT on 1000 uniform-length instances".into())
}

fn criterion_4() -> Check {
    let mut failures = Vec::new();
    let mut slowest = Duration::ZERO;
    for n in 1..=10u32 {
        let big = 1u64 << n;
        let formula = triangle_lexmin_total(n);
        for (alignment, lexmin, lexmax) in [(Alignment::Left, formula, big / 2), (Alignment::Right, big / 2, formula)] {
            let fam = gen_triangle(n, alignment).map_err(|e| e.to_string())?;
            let start = Instant::now();
            let min = go(&AlgorithmSpec::ff(), &fam.instance)?.total_reassignments as u64;
            let max = go(&AlgorithmSpec::ff_lexmax(), &fam.instance)?.total_reassignments as u64;
            slowest = slowest.max(start.elapsed());
            if min != lexmin || max != lexmax {
                failures.push(format!(
                    "{alignment:?} N={big}: lexmin {min} (want {lexmin}), lexmax {max} (want {lexmax})"
                ));
            }
        }
    }
    ensure(slowest < Duration::from_secs(30), || format!("slowest triangle run took {slowest:?}"))?;
    if failures.is_empty() {
        Ok(format!("n = 1..=10 both alignments; slowest pair {slowest:?}"))
    } else {
        Err(failures.join("; "))
    }
}

fn criterion_5() -> Check {
    let instances = small_random(1000, Some(InstanceKind::Interval), false);
    let edf = AlgorithmSpec::Edf;
    let mut rejections = 0;
    for (seed, inst) in instances.iter().enumerate() {
        let opt = checked_opt(inst)?;
        let mut session = Session::new(&edf, inst.kind);
        for job in &inst.jobs {
            let before = session.assignment().clone();
            let accepted = session.push(job.clone()).map_err(|e| e.to_string())?.accepted;
            if accepted {
                continue;
            }
            rejections += 1;
            let Window::Interval { earliest, latest } = job.window else { unreachable!() };
            let lo = earliest.max(job.arrival + 1);
            let prefix = Instance::new(inst.kind, session.jobs().to_vec());
            let cert = find_closed_interval(&before, &prefix, (lo, latest)).map_err(|e| e.to_string())?;
            ensure(cert.as_ref().is_some_and(|c| c.lo <= lo && latest <= c.hi), || {
                format!("seed {seed}: rejection of {} has no certificate", job.id)
            })?;
        }
        let log = session.finish();
        ensure(log.assigned_count == opt, || format!("seed {seed}: EDF {} vs OPT {opt}", log.assigned_count))?;
        ensure(!has_offline_aug_path(inst, &log.assignment), || format!("seed {seed}: offline augmenting path left"))?;
    }
    Ok(format!("EDF = OPT on 1000 instances; {rejections} rejections all certified"))
}

fn criterion_6() -> Check {
    for n in 1..=10u32 {
        let big = 1u64 << n;
        let fam = gen_triangle(n, Alignment::Left).map_err(|e| e.to_string())?;
        let total = go(&AlgorithmSpec::Edf, &fam.instance)?.total_reassignments as u64;
        ensure(total == big * (big - 1) / 2, || format!("EDF on triangle N={big}: {total}"))?;
    }
    for delta in 2..=10u64 {
        for m in 1..=12u64 {
            let fam = gen_edf_uniform(delta, m).map_err(|e| e.to_string())?;
            let total = go(&AlgorithmSpec::Edf, &fam.instance)?.total_reassignments as u64;
            ensure(total == (delta - 1) * m, || format!("edf-uniform({delta},{m}): {total}"))?;
            let fam = gen_uniform_staircase(delta, m).map_err(|e| e.to_string())?;
            let log = go(&AlgorithmSpec::ff(), &fam.instance)?;
            let last = log.outcomes.last().map_or(0, |o| o.reassigned.len()) as u64;
            ensure(last == m, || format!("staircase({delta},{m}): last arrival moved {last}"))?;
        }
    }
    Ok("triangle N(N-1)/2 for N<=1024; edf-uniform and staircase on delta 2..=10, m 1..=12".into())
}

fn criterion_7() -> Check {
    for k in 1..=6u64 {
        let fam = gen_kff_separation(k).map_err(|e| e.to_string())?;
        let a = go(&AlgorithmSpec::kff(k as usize), &fam.instance)?.assigned_count as u64;
        let b = go(&AlgorithmSpec::kff(k as usize + 1), &fam.instance)?.assigned_count as u64;
        ensure(a == k + 1 && b == k + 2, || format!("k={k}: {k}-FF {a}, {}-FF {b}", k + 1))?;
    }
    for (seed, inst) in small_random(1000, None, false).iter().enumerate() {
        for k in 1..=3usize {
            let log = go(&AlgorithmSpec::kff(k), inst)?;
            ensure(log.total_reassignments <= k * inst.len(), || {
                format!("seed {seed}: {k}-FF made {} reassignments", log.total_reassignments)
            })?;
        }
    }
    Ok("separation k = 1..=6; budget k*n on 1000 instances".into())
}

fn criterion_8() -> Check {
    let fam = gen_triangle(4, Alignment::Left).map_err(|e| e.to_string())?;
    let accepted = go(&AlgorithmSpec::KappaEdf(3), &fam.instance)?.assigned_count;
    ensure(accepted == 4, || format!("3-EDF accepted {accepted}"))?;
    Ok("triangle N=16, kappa=3: 4 accepted".into())
}

fn criterion_9() -> Check {
    for s in ["ff", "kff:1", "edf", "greedy"] {
        let rule = spec(s);
        let t = adversary_bmt_triplets(&rule, 10).map_err(|e| e.to_string())?;
        ensure(t.alg_assigned <= 20 && t.opt_size == 30, || format!("triplets vs {s}: {}/{}", t.alg_assigned, t.opt_size))?;
        let u = adversary_bmt_uniform(&rule).map_err(|e| e.to_string())?;
        ensure(u.alg_assigned <= 4 && u.opt_size == 6, || format!("uniform vs {s}: {}/{}", u.alg_assigned, u.opt_size))?;
    }
    for m in 0..=20u64 {
        let fam = gen_edf_bmt_half_trap(m).map_err(|e| e.to_string())?;
        let log = go(&AlgorithmSpec::Edf, &fam.instance)?;
        let opt = max_matching(&fam.instance).size as u64;
        let r = ratio(&log, &fam.instance).map_err(|e| e.to_string())?;
        let bound = Ratio::new(1, 2) + Ratio::new(1, 2 * opt);
        ensure(r <= bound, || format!("edf-bmt-half m={m}: {r} above {bound}"))?;
    }
    Ok("triplets 20/30 and uniform 4/6 for ff, kff:1, edf, greedy; EDF half bound m = 0..=20".into())
}

fn same_run(a: &RunLog, b: &RunLog) -> bool {
    a.outcomes == b.outcomes
        && a.assignment == b.assignment
        && a.assigned_count == b.assigned_count
        && a.rejected_count == b.rejected_count
        && a.total_reassignments == b.total_reassignments
}

fn criterion_10() -> Check {
    for (seed, inst) in small_random(200, Some(InstanceKind::Interval), false).iter().enumerate() {
        let out = debatch_transform(inst).map_err(|e| e.to_string())?;
        ensure(out.len() < 2 * inst.len(), || format!("seed {seed}: {} jobs from {}", out.len(), inst.len()))?;
        let dummies = out.len() - inst.len();
        for s in ["ff", "edf", "greedy"] {
            let plain = go(&spec(s), inst)?;
            let batched = run_batched(&spec(s), &out).map_err(|e| e.to_string())?;
            ensure(batched.acceptance()[dummies..] == plain.acceptance()[..], || {
                format!("seed {seed}: batched {s} on transformed instance differs")
            })?;
        }
    }
    for delta in [2u64, 4, 10] {
        let fam = gen_batching_two_type(delta).map_err(|e| e.to_string())?;
        let log = go(&spec("batched:ff"), &fam.instance)?;
        ensure(log.rejected_count as u64 == delta - 1, || format!("delta={delta}: batched FF rejected {}", log.rejected_count))?;
    }
    let mut compared = 0;
    for inst in small_random(1000, None, false) {
        if !inst.has_distinct_arrivals() {
            continue;
        }
        for s in ["ff", "ff:lexmax", "kff:2", "edf", "kedf:1", "greedy"] {
            let plain = go(&spec(s), &inst)?;
            let batched = run_batched(&spec(s), &inst).map_err(|e| e.to_string())?;
            ensure(same_run(&plain, &batched), || format!("batched {s} differs on distinct arrivals"))?;
            compared += 1;
        }
    }
    ensure(compared > 0, || "no distinct-arrival instances".into())?;
    Ok(format!("debatch < 2n on 200 instances; batched FF rejects delta-1; {compared} distinct-arrival runs identical"))
}

fn criterion_11() -> Check {
    let mut graphs = 0;
    let mut seed = 0u64;
    while graphs < 500 {
        let kind = if seed % 2 == 0 { InstanceKind::Interval } else { InstanceKind::SlotSet };
        let inst = gen_random(&RandomParams {
            seed: 10_000 + seed,
            n: 10,
            kind,
            max_slot: 12,
            max_len: 1 + (seed as i64 % 5),
            uniform_len: None,
            set_size: 1 + (seed as usize % 3),
            prep_min: 1,
        })
        .map_err(|e| e.to_string())?;
        seed += 1;
        let log = go(&AlgorithmSpec::ff(), &inst)?;
        let mut state = otmatch::Assignment::new();
        for o in &log.outcomes {
            let graph = build_residual(&state, &inst.jobs[o.job_id.0], &inst.jobs);
            if graph.vertex_count() <= MAX_ENUMERATION_VERTICES && graphs < 500 {
                graphs += 1;
                let listed: Vec<_> = enumerate_shortest_paths(&graph)
                    .map_err(|e| e.to_string())?
                    .iter()
                    .map(|p| moves_of(p.steps()))
                    .collect();
                for policy in [PathPolicy::EarliestTargetLexMin, PathPolicy::EarliestTargetLexMax] {
                    let got = shortest_aug_path(&graph, policy, None, None).map(|p| moves_of(p.steps()));
                    let want = select(&listed, policy, None, None);
                    ensure(got == want, || format!("graph {graphs}: {policy:?} chose {got:?}, exhaustive {want:?}"))?;
                }
            }
            state = otmatch::apply_outcome(&state, o, &inst.jobs).map_err(|e| e.to_string())?;
        }
    }
    Ok(format!("{graphs} residual graphs, both policies"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 11] = [
        ("two-type family", criterion_1),
        ("FF 2/3 lower bound", criterion_2),
        ("FF optimal on uniform lengths", criterion_3),
        ("triangle reassignments", criterion_4),
        ("EDF optimality", criterion_5),
        ("EDF reassignment counts", criterion_6),
        ("k-FF", criterion_7),
        ("kappa-EDF", criterion_8),
        ("BMT adversaries", criterion_9),
        ("batching", criterion_10),
        ("tie-break oracle equivalence", criterion_11),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        match result {
            Ok(detail) => println!("criterion {:>2} PASS {name} ({elapsed:.2?}): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name} ({elapsed:.2?}): {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
