use clap::{Args, ValueEnum};
use otmatch::generators::*;
use otmatch::oracle::{find_closed_interval, has_offline_aug_path, max_matching};
use otmatch::{run, run_batched, AlgorithmSpec, Instance, InstanceKind, Session, Window};
use rayon::prelude::*;

use crate::{parse_spec, thread_pool, CliResult, Failure};

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Suite {
    Paper,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Suite::Paper)]
    pub suite: Suite,
    /// Smaller parameter grids and fewer random instances.
    #[arg(long)]
    pub fast: bool,
    /// Only run checks whose group name contains one of these strings.
    #[arg(long = "only")]
    pub only: Vec<String>,
}

/// One line of the verification table.
#[derive(Debug)]
pub struct Row {
    pub group: String,
    pub params: String,
    pub target: String,
    pub expected: String,
    pub actual: String,
    pub pass: bool,
}

type Task = Box<dyn Fn() -> CliResult<Vec<Row>> + Send + Sync>;

fn family_rows(fam: FamilyPrediction) -> CliResult<Vec<Row>> {
    Ok(fam
        .check()?
        .into_iter()
        .map(|c| Row {
            group: fam.family.clone(),
            params: fam.params.clone(),
            target: format!(
                "{} {}",
                c.prediction.algorithm.as_ref().map_or("offline".to_string(), ToString::to_string),
                c.prediction.metric
            ),
            expected: c.prediction.value.to_string(),
            actual: c.actual.to_string(),
            pass: c.holds(),
        })
        .collect())
}

fn count_row(group: &str, params: String, target: &str, violations: usize, first: Option<String>) -> Row {
    Row {
        group: group.into(),
        params,
        target: target.into(),
        expected: "0 violations".into(),
        actual: match first {
            Some(example) => format!("{violations} violations, first: {example}"),
            None => format!("{violations} violations"),
        },
        pass: violations == 0,
    }
}

fn random_instances(count: u64, kind: Option<InstanceKind>, uniform: bool) -> CliResult<Vec<Instance>> {
    (0..count)
        .map(|seed| {
            let kind = kind.unwrap_or(if seed % 2 == 0 { InstanceKind::Interval } else { InstanceKind::SlotSet });
            gen_random(&RandomParams {
                seed,
                n: 1 + (seed as usize * 7) % 12,
                kind,
                max_slot: 16,
                max_len: 1 + (seed as i64 % 6),
                uniform_len: uniform.then_some(1 + (seed as i64 % 5)),
                set_size: 1 + (seed as usize % 3),
                prep_min: 1,
            })
            .map_err(Failure::from)
        })
        .collect()
}

/// Counts instances failing `check`, remembering the first one.
fn scan(
    instances: &[Instance],
    mut check: impl FnMut(&Instance) -> CliResult<Option<String>>,
) -> CliResult<(usize, Option<String>)> {
    let mut violations = 0;
    let mut first = None;
    for (seed, inst) in instances.iter().enumerate() {
        if let Some(msg) = check(inst)? {
            violations += 1;
            first.get_or_insert(format!("seed {seed}: {msg}"));
        }
    }
    Ok((violations, first))
}

fn tasks(fast: bool) -> Vec<(&'static str, Task)> {
    let mut out: Vec<(&'static str, Task)> = Vec::new();
    let deltas: Vec<u64> = if fast { vec![2, 4, 10] } else { vec![2, 4, 10, 50, 200] };
    for d in deltas {
        out.push(("two-type", Box::new(move || family_rows(gen_two_type(d)?))));
    }
    for d in [2u64, 4, 10] {
        out.push(("batching-two-type", Box::new(move || family_rows(gen_batching_two_type(d)?))));
    }
    let max_n = if fast { 6 } else { 10 };
    for n in 1..=max_n {
        out.push(("triangle", Box::new(move || family_rows(gen_triangle(n, Alignment::Left)?))));
        out.push(("triangle-right", Box::new(move || family_rows(gen_triangle(n, Alignment::Right)?))));
    }
    let grid: Vec<u64> = if fast { vec![2, 3, 4] } else { (2..=8).collect() };
    for &d in &grid {
        for &m in &grid {
            out.push(("uniform-staircase", Box::new(move || family_rows(gen_uniform_staircase(d, m - 1)?))));
            out.push(("edf-uniform", Box::new(move || family_rows(gen_edf_uniform(d, m - 1)?))));
        }
    }
    for k in 1..=6u64 {
        out.push(("kff-sep", Box::new(move || family_rows(gen_kff_separation(k)?))));
    }
    for m in 0..=10u64 {
        out.push(("edf-bmt-half", Box::new(move || family_rows(gen_edf_bmt_half_trap(m)?))));
    }
    out.push((
        "kappa-edf",
        Box::new(|| {
            let fam = gen_triangle(4, Alignment::Left)?;
            let accepted = run(&AlgorithmSpec::KappaEdf(3), &fam.instance)?.assigned_count;
            Ok(vec![Row {
                group: "kappa-edf".into(),
                params: "triangle n=4".into(),
                target: "kedf:3 alg_assigned".into(),
                expected: "4".into(),
                actual: accepted.to_string(),
                pass: accepted == 4,
            }])
        }),
    ));
    for alg in ["ff", "kff:1", "edf", "greedy"] {
        out.push((
            "adversary",
            Box::new(move || {
                let spec = parse_spec(alg)?;
                let t = adversary_bmt_triplets(&spec, 10)?;
                let u = adversary_bmt_uniform(&spec)?;
                Ok(vec![
                    Row {
                        group: "adversary-triplets".into(),
                        params: "blocks=10".into(),
                        target: alg.into(),
                        expected: "<= 20 of 30".into(),
                        actual: format!("{} of {}", t.alg_assigned, t.opt_size),
                        pass: t.alg_assigned <= 20 && t.opt_size == 30,
                    },
                    Row {
                        group: "adversary-uniform".into(),
                        params: String::new(),
                        target: alg.into(),
                        expected: "<= 4 of 6".into(),
                        actual: format!("{} of {}", u.alg_assigned, u.opt_size),
                        pass: u.alg_assigned <= 4 && u.opt_size == 6,
                    },
                ])
            }),
        ));
    }
    let count = if fast { 100 } else { 1000 };
    let label = format!("{count} random");
    let l = label.clone();
    out.push((
        "two-thirds",
        Box::new(move || {
            let insts = random_instances(count, None, false)?;
            let mut rows = Vec::new();
            for alg in ["ff", "kff:1", "kff:2", "kff:3"] {
                let spec = parse_spec(alg)?;
                let (v, first) = scan(&insts, |inst| {
                    let opt = max_matching(inst).size;
                    let got = run(&spec, inst)?.assigned_count;
                    Ok((3 * got < 2 * opt).then(|| format!("{got} of {opt}")))
                })?;
                rows.push(count_row("two-thirds", l.clone(), alg, v, first));
            }
            Ok(rows)
        }),
    ));
    let l = label.clone();
    out.push((
        "kff-budget",
        Box::new(move || {
            let insts = random_instances(count, None, false)?;
            let mut rows = Vec::new();
            for k in 1..=3usize {
                let (v, first) = scan(&insts, |inst| {
                    let total = run(&AlgorithmSpec::kff(k), inst)?.total_reassignments;
                    Ok((total > k * inst.len()).then(|| format!("{total} reassignments")))
                })?;
                rows.push(count_row("kff-budget", l.clone(), &format!("kff:{k}"), v, first));
            }
            Ok(rows)
        }),
    ));
    let l = label.clone();
    out.push((
        "ff-uniform-optimal",
        Box::new(move || {
            let insts = random_instances(count, Some(InstanceKind::Interval), true)?;
            let (v, first) = scan(&insts, |inst| {
                let opt = max_matching(inst).size;
                let got = run(&AlgorithmSpec::ff(), inst)?.assigned_count;
                Ok((got != opt).then(|| format!("{got} of {opt}")))
            })?;
            Ok(vec![count_row("ff-uniform-optimal", l.clone(), "ff", v, first)])
        }),
    ));
    let l = label.clone();
    out.push((
        "edf-optimal",
        Box::new(move || {
            let insts = random_instances(count, Some(InstanceKind::Interval), false)?;
            let edf = AlgorithmSpec::Edf;
            let (v, first) = scan(&insts, |inst| {
                let mut session = Session::new(&edf, inst.kind);
                for job in &inst.jobs {
                    let before = session.assignment().clone();
                    if session.push(job.clone())?.accepted {
                        continue;
                    }
                    let Window::Interval { earliest, latest } = job.window else { unreachable!() };
                    let lo = earliest.max(job.arrival + 1);
                    if lo > latest {
                        continue;
                    }
                    let prefix = Instance::new(inst.kind, session.jobs().to_vec());
                    let cert = find_closed_interval(&before, &prefix, (lo, latest))?;
                    if !cert.is_some_and(|c| c.lo <= lo && latest <= c.hi) {
                        return Ok(Some(format!("rejection of {} not certified", job.id)));
                    }
                }
                let log = session.finish();
                let opt = max_matching(inst).size;
                if log.assigned_count != opt {
                    return Ok(Some(format!("{} of {opt}", log.assigned_count)));
                }
                Ok(has_offline_aug_path(inst, &log.assignment).then(|| "offline augmenting path left".into()))
            })?;
            Ok(vec![count_row("edf-optimal", l.clone(), "edf", v, first)])
        }),
    ));
    out.push((
        "batching",
        Box::new(move || {
            let insts = random_instances(count, Some(InstanceKind::Interval), false)?;
            let mut rows = Vec::new();
            for alg in ["ff", "edf", "greedy"] {
                let spec = parse_spec(alg)?;
                let (v, first) = scan(&insts, |inst| {
                    let out = debatch_transform(inst)?;
                    if out.len() >= 2 * inst.len().max(1) {
                        return Ok(Some(format!("{} jobs from {}", out.len(), inst.len())));
                    }
                    let dummies = out.len() - inst.len();
                    let plain = run(&spec, inst)?;
                    let batched = run_batched(&spec, &out)?;
                    Ok((batched.acceptance()[dummies..] != plain.acceptance()[..]).then(|| "acceptance differs".into()))
                })?;
                rows.push(count_row("batching", label.clone(), &format!("batched:{alg} after de-batching"), v, first));
            }
            Ok(rows)
        }),
    ));
    out
}

pub fn verify_rows(args: &VerifyArgs) -> CliResult<Vec<Row>> {
    let selected: Vec<(&str, Task)> = tasks(args.fast)
        .into_iter()
        .filter(|(group, _)| args.only.is_empty() || args.only.iter().any(|o| group.contains(o.as_str())))
        .collect();
    if selected.is_empty() {
        return Err(Failure::Usage("no checks match the --only filter".into()));
    }
    let pool = thread_pool()?;
    let results: Vec<CliResult<Vec<Row>>> = pool.install(|| selected.par_iter().map(|(_, task)| task()).collect());
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    Ok(rows)
}

pub fn cmd_verify(args: &VerifyArgs) -> CliResult<()> {
    let rows = verify_rows(args)?;
    let failed: Vec<&Row> = rows.iter().filter(|r| !r.pass).collect();
    for r in &rows {
        println!(
            "{}  {:<20} {:<16} {:<40} expected {:<14} actual {}",
            if r.pass { "PASS" } else { "FAIL" },
            r.group,
            r.params,
            r.target,
            r.expected,
            r.actual
        );
    }
    println!("{} of {} checks passed", rows.len() - failed.len(), rows.len());
    if failed.is_empty() {
        Ok(())
    } else {
        for r in &failed {
            eprintln!("mismatch: {} {} {}: expected {}, got {}", r.group, r.params, r.target, r.expected, r.actual);
        }
        Err(Failure::Mismatch(format!("{} checks failed", failed.len())))
    }
}
