use std::path::PathBuf;

use clap::Args;
use otmatch::oracle::max_matching;
use otmatch::{run, AlgorithmSpec};
use rayon::prelude::*;
use serde::Serialize;

use crate::family::{generate, Family, FamilyParams};
use crate::report::reduced;
use crate::{parse_spec, thread_pool, CliResult, Failure};

const MAX_SWEEP_VALUES: usize = 100_000;

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    /// Values of the varied parameter: `2..50` (inclusive), `2..=50` or
    /// `1,2,8`, optionally prefixed by a name as in `m=1..6`. Without a
    /// name the family's main parameter is varied.
    #[arg(long)]
    pub param_range: String,
    /// Comma-separated algorithm specs.
    #[arg(long, default_value = "ff")]
    pub algs: String,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Values of the parameters that stay fixed.
    #[command(flatten)]
    pub params: FamilyParams,
}

/// Fixed CSV schema.
#[derive(Debug, Serialize)]
pub struct SweepRow {
    pub family: String,
    pub params: String,
    pub alg: String,
    pub assigned: usize,
    pub opt: usize,
    pub ratio_num: u64,
    pub ratio_den: u64,
    pub reassignments: usize,
}

pub fn parse_range(text: &str) -> CliResult<Vec<u64>> {
    let bad = || Failure::Usage(format!("cannot parse range `{text}`"));
    let values: Vec<u64> = if let Some((lo, hi)) = text.split_once("..") {
        let hi = hi.strip_prefix('=').unwrap_or(hi);
        let lo: u64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: u64 = hi.trim().parse().map_err(|_| bad())?;
        if lo > hi || hi - lo >= MAX_SWEEP_VALUES as u64 {
            return Err(bad());
        }
        (lo..=hi).collect()
    } else {
        text.split(',').map(|v| v.trim().parse().map_err(|_| bad())).collect::<CliResult<_>>()?
    };
    if values.is_empty() || values.len() > MAX_SWEEP_VALUES {
        return Err(bad());
    }
    Ok(values)
}

pub fn sweep_rows(args: &SweepArgs) -> CliResult<Vec<SweepRow>> {
    let (name, range) = match args.param_range.split_once('=') {
        Some((name, range)) if !name.is_empty() && !name.contains('.') => (name.to_string(), range),
        _ => (args.family.main_param().to_string(), args.param_range.as_str()),
    };
    let values = parse_range(range)?;
    let specs: Vec<AlgorithmSpec> = args.algs.split(',').map(|s| parse_spec(s.trim())).collect::<CliResult<_>>()?;
    let pool = thread_pool()?;
    let per_value: Vec<CliResult<Vec<SweepRow>>> = pool.install(|| {
        values
            .par_iter()
            .map(|&value| {
                let mut params = args.params.clone();
                params.set(&name, value)?;
                let fam = generate(args.family, &params)?;
                let opt = max_matching(&fam.instance).size;
                specs
                    .iter()
                    .map(|spec| {
                        let log = run(spec, &fam.instance)?;
                        let (num, den) = reduced(log.assigned_count, opt).map_or((0, 0), |r| (*r.numer(), *r.denom()));
                        Ok(SweepRow {
                            family: fam.family.clone(),
                            params: fam.params.clone(),
                            alg: spec.to_string(),
                            assigned: log.assigned_count,
                            opt,
                            ratio_num: num,
                            ratio_den: den,
                            reassignments: log.total_reassignments,
                        })
                    })
                    .collect()
            })
            .collect()
    });
    let mut rows = Vec::new();
    for chunk in per_value {
        rows.extend(chunk?);
    }
    Ok(rows)
}

pub fn cmd_sweep(args: &SweepArgs) -> CliResult<()> {
    let rows = sweep_rows(args)?;
    let io = |e: csv::Error| Failure::Input(format!("cannot write CSV: {e}"));
    match &args.csv {
        Some(path) => {
            let mut w = csv::Writer::from_path(path).map_err(io)?;
            for row in &rows {
                w.serialize(row).map_err(io)?;
            }
            w.flush().map_err(|e| Failure::Input(format!("cannot write CSV: {e}")))?;
        }
        None => {
            let mut w = csv::Writer::from_writer(std::io::stdout());
            for row in &rows {
                w.serialize(row).map_err(io)?;
            }
            w.flush().map_err(|e| Failure::Input(format!("cannot write CSV: {e}")))?;
        }
    }
    Ok(())
}
