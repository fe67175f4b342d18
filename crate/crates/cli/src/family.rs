use std::path::PathBuf;

use clap::{Args, ValueEnum};
use otmatch::generators::{
    gen_batching_two_type, gen_edf_bmt_half, gen_edf_bmt_half_trap, gen_edf_uniform, gen_kff_separation, gen_random,
    gen_triangle, gen_two_type, gen_uniform_staircase, Alignment, FamilyPrediction, RandomParams,
};
use otmatch::{InstanceKind, Slot};

use crate::{CliResult, Failure};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    TwoType,
    BatchingTwoType,
    Triangle,
    UniformStaircase,
    EdfUniform,
    KffSep,
    EdfBmtHalf,
    Random,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::TwoType => "two-type",
            Family::BatchingTwoType => "batching-two-type",
            Family::Triangle => "triangle",
            Family::UniformStaircase => "uniform-staircase",
            Family::EdfUniform => "edf-uniform",
            Family::KffSep => "kff-sep",
            Family::EdfBmtHalf => "edf-bmt-half",
            Family::Random => "random",
        }
    }

    /// The parameter a sweep varies by default.
    pub fn main_param(self) -> &'static str {
        match self {
            Family::TwoType | Family::BatchingTwoType | Family::UniformStaircase | Family::EdfUniform => "delta",
            Family::Triangle => "n",
            Family::KffSep => "k",
            Family::EdfBmtHalf => "m",
            Family::Random => "seed",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Align {
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Interval,
    Set,
}

#[derive(Args, Clone, Debug)]
pub struct FamilyParams {
    /// triangle: log2 of the job count; random: number of jobs.
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub delta: Option<u64>,
    /// Staircase length (uniform-staircase, edf-uniform) or trap size (edf-bmt-half).
    #[arg(long)]
    pub m: Option<u64>,
    #[arg(long)]
    pub k: Option<u64>,
    #[arg(long, value_enum, default_value_t = Align::Left)]
    pub align: Align,
    /// edf-bmt-half: JSON file with a list of slot lists instead of the built-in trap.
    #[arg(long)]
    pub core: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Kind::Interval)]
    pub kind: Kind,
    #[arg(long, default_value_t = 12)]
    pub max_slot: i64,
    #[arg(long, default_value_t = 4)]
    pub max_len: i64,
    #[arg(long)]
    pub uniform_len: Option<i64>,
    #[arg(long, default_value_t = 2)]
    pub set_size: usize,
    #[arg(long, default_value_t = 1)]
    pub prep_min: i64,
}

impl Default for FamilyParams {
    fn default() -> Self {
        FamilyParams {
            n: None,
            delta: None,
            m: None,
            k: None,
            align: Align::Left,
            core: None,
            seed: None,
            kind: Kind::Interval,
            max_slot: 12,
            max_len: 4,
            uniform_len: None,
            set_size: 2,
            prep_min: 1,
        }
    }
}

impl FamilyParams {
    /// Sets a parameter by name, as used by sweeps.
    pub fn set(&mut self, name: &str, value: u64) -> CliResult<()> {
        match name {
            "n" => self.n = Some(value),
            "delta" => self.delta = Some(value),
            "m" => self.m = Some(value),
            "k" => self.k = Some(value),
            "seed" => self.seed = Some(value),
            _ => return Err(Failure::Usage(format!("unknown parameter `{name}`"))),
        }
        Ok(())
    }
}

fn need(value: Option<u64>, name: &str, family: Family) -> CliResult<u64> {
    value.ok_or_else(|| Failure::Usage(format!("{} needs --{name}", family.name())))
}

pub fn generate(family: Family, p: &FamilyParams) -> CliResult<FamilyPrediction> {
    let fam = match family {
        Family::TwoType => gen_two_type(need(p.delta, "delta", family)?)?,
        Family::BatchingTwoType => gen_batching_two_type(need(p.delta, "delta", family)?)?,
        Family::Triangle => {
            let n = need(p.n, "n", family)?;
            let n = u32::try_from(n).map_err(|_| Failure::Usage(format!("n = {n} is too large")))?;
            let alignment = match p.align {
                Align::Left => Alignment::Left,
                Align::Right => Alignment::Right,
            };
            gen_triangle(n, alignment)?
        }
        Family::UniformStaircase => gen_uniform_staircase(need(p.delta, "delta", family)?, need(p.m, "m", family)?)?,
        Family::EdfUniform => gen_edf_uniform(need(p.delta, "delta", family)?, need(p.m, "m", family)?)?,
        Family::KffSep => gen_kff_separation(need(p.k, "k", family)?)?,
        Family::EdfBmtHalf => match &p.core {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
                let core: Vec<Vec<Slot>> = serde_json::from_str(&text)
                    .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
                FamilyPrediction {
                    family: family.name().into(),
                    params: format!("core={}", path.display()),
                    instance: gen_edf_bmt_half(&core)?,
                    predictions: Vec::new(),
                }
            }
            None => gen_edf_bmt_half_trap(need(p.m, "m", family)?)?,
        },
        Family::Random => {
            let n = need(p.n, "n", family)?;
            let params = RandomParams {
                seed: p.seed.unwrap_or(0),
                n: usize::try_from(n).map_err(|_| Failure::Usage("n is too large".into()))?,
                kind: match p.kind {
                    Kind::Interval => InstanceKind::Interval,
                    Kind::Set => InstanceKind::SlotSet,
                },
                max_slot: p.max_slot,
                max_len: p.max_len,
                uniform_len: p.uniform_len,
                set_size: p.set_size,
                prep_min: p.prep_min,
            };
            FamilyPrediction {
                family: family.name().into(),
                params: format!("seed={},n={n}", params.seed),
                instance: gen_random(&params)?,
                predictions: Vec::new(),
            }
        }
    };
    Ok(fam)
}
