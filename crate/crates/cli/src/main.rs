use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use otmatch::generators::{
    adversary_bmt_triplets, adversary_bmt_uniform, debatch_transform, FamilyPrediction, Transcript,
};
use otmatch::oracle::max_matching;
use otmatch::{run, AlgorithmSpec, Instance};
use serde::Serialize;

mod family;
mod report;
mod sweep;
mod verify;

use family::{Family, FamilyParams};
use report::{ratio_fields, Report};

/// Exit status for the different failure classes.
#[derive(Debug)]
pub enum Failure {
    Mismatch(String),
    Usage(String),
    Input(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Mismatch(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Input(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Mismatch(m) | Failure::Usage(m) | Failure::Input(m) => m,
        }
    }
}

impl From<otmatch::Error> for Failure {
    fn from(e: otmatch::Error) -> Self {
        use otmatch::Error as E;
        match e {
            E::Parameter(_) | E::UnknownAlgorithm(_) | E::Unsupported(_) => Failure::Usage(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, Failure>;

#[derive(Parser)]
#[command(name = "otmatch", version, about = "Online matching of jobs to time slots with limited recourse")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance of a family and print its predicted metrics.
    Gen {
        family: Family,
        #[command(flatten)]
        params: FamilyParams,
        /// Write the instance here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an algorithm on an instance file and print a report row.
    Run {
        /// ff[:lexmin|lexmax] | kff:K[:policy] | edf | kedf:K | greedy | batched:<inner>
        #[arg(long)]
        alg: String,
        #[arg(long = "in")]
        input: PathBuf,
        /// Write the full run log here.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Print a maximum offline matching of an instance file.
    Opt {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Split same-time arrivals of an interval instance into distinct times.
    Debatch {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Let an adaptive adversary build an instance against an algorithm.
    Adversary {
        #[arg(long)]
        alg: String,
        #[arg(long, value_enum)]
        family: AdversaryFamily,
        #[arg(long, default_value_t = 1)]
        blocks: usize,
        /// Write the whole transcript (instance and run log) here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check every family prediction and property group.
    Verify(verify::VerifyArgs),
    /// Run algorithms over a parameter range and write CSV rows.
    Sweep(sweep::SweepArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum AdversaryFamily {
    Triplets,
    Uniform,
}

pub fn parse_spec(text: &str) -> CliResult<AlgorithmSpec> {
    text.parse().map_err(|e: otmatch::Error| Failure::Usage(e.to_string()))
}

fn read_instance(path: &Path) -> CliResult<Instance> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let inst = Instance::from_json(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    otmatch::validate_instance(&inst, 0).map_err(|v| Failure::Input(otmatch::Error::InvalidInstance(v).to_string()))?;
    Ok(inst)
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("plain data serializes")
}

#[derive(Serialize)]
struct GenSummary<'a> {
    family: &'a str,
    params: &'a str,
    jobs: usize,
    predictions: Vec<PredictionLine>,
}

#[derive(Serialize)]
struct PredictionLine {
    algorithm: Option<String>,
    metric: String,
    value: u64,
}

fn summarize(fam: &FamilyPrediction) -> GenSummary<'_> {
    GenSummary {
        family: &fam.family,
        params: &fam.params,
        jobs: fam.instance.len(),
        predictions: fam
            .predictions
            .iter()
            .map(|p| PredictionLine {
                algorithm: p.algorithm.as_ref().map(ToString::to_string),
                metric: p.metric.to_string(),
                value: p.value,
            })
            .collect(),
    }
}

#[derive(Serialize)]
struct AdversarySummary<'a> {
    family: &'a str,
    algorithm: &'a str,
    jobs: usize,
    alg_assigned: usize,
    opt_size: usize,
    ratio: String,
    ratio_decimal: String,
    instance: &'a Instance,
}

fn cmd_gen(family: Family, params: &FamilyParams, out: Option<&Path>) -> CliResult<()> {
    let fam = family::generate(family, params)?;
    let json = fam.instance.to_json()?;
    match out {
        Some(path) => {
            write_text(path, &json)?;
            println!("{}", to_json(&summarize(&fam)));
        }
        None => {
            println!("{json}");
            eprintln!("{}", to_json(&summarize(&fam)));
        }
    }
    Ok(())
}

fn cmd_run(alg: &str, input: &Path, log_path: Option<&Path>) -> CliResult<()> {
    let spec = parse_spec(alg)?;
    let inst = read_instance(input)?;
    let log = run(&spec, &inst)?;
    let opt = max_matching(&inst).size;
    let row = Report::from_log(&input.display().to_string(), &log, opt);
    if let Some(path) = log_path {
        write_text(path, &log.to_json()?)?;
    }
    println!("{}", serde_json::to_string(&row).expect("plain data serializes"));
    Ok(())
}

fn cmd_adversary(alg: &str, family: AdversaryFamily, blocks: usize, out: Option<&Path>) -> CliResult<()> {
    let spec = parse_spec(alg)?;
    let transcript: Transcript = match family {
        AdversaryFamily::Triplets => adversary_bmt_triplets(&spec, blocks)?,
        AdversaryFamily::Uniform => adversary_bmt_uniform(&spec)?,
    };
    let (ratio, ratio_decimal) = ratio_fields(transcript.alg_assigned, transcript.opt_size);
    let summary = AdversarySummary {
        family: &transcript.family,
        algorithm: &transcript.algorithm,
        jobs: transcript.instance.len(),
        alg_assigned: transcript.alg_assigned,
        opt_size: transcript.opt_size,
        ratio,
        ratio_decimal,
        instance: &transcript.instance,
    };
    if let Some(path) = out {
        write_text(path, &to_json(&transcript))?;
    }
    println!("{}", to_json(&summary));
    Ok(())
}

fn execute(command: Command) -> CliResult<()> {
    match command {
        Command::Gen { family, params, out } => cmd_gen(family, &params, out.as_deref()),
        Command::Run { alg, input, log } => cmd_run(&alg, &input, log.as_deref()),
        Command::Opt { input } => {
            let inst = read_instance(&input)?;
            println!("{}", to_json(&max_matching(&inst)));
            Ok(())
        }
        Command::Debatch { input, out } => {
            let inst = read_instance(&input)?;
            let json = debatch_transform(&inst)?.to_json()?;
            match out {
                Some(path) => write_text(&path, &json),
                None => {
                    println!("{json}");
                    Ok(())
                }
            }
        }
        Command::Adversary { alg, family, blocks, out } => cmd_adversary(&alg, family, blocks, out.as_deref()),
        Command::Verify(args) => verify::cmd_verify(&args),
        Command::Sweep(args) => sweep::cmd_sweep(&args),
    }
}

/// Thread pool for sweeps and verification, capped by `OTMATCH_THREADS`.
pub fn thread_pool() -> CliResult<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(value) = std::env::var("OTMATCH_THREADS") {
        let n: usize = value
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Failure::Usage(format!("OTMATCH_THREADS must be a positive integer, got `{value}`")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| Failure::Usage(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}
