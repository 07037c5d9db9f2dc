//! Command-line front end: generate words, draw samples, print pigeonhole
//! bounds and run bias audits.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage error, 3 infeasible
//! size.

mod commands;
mod source;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use prng_audit::integers::IntegerMethod;
use prng_audit::sampling::Algorithm;

use source::SourceArgs;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Infeasible(String),
    Failure(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Failure(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Infeasible(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Infeasible(m) | CliError::Failure(m) => m,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "prng-audit", version, about = "Pseudo-random generators, samplers, pigeonhole bounds and bias audits")]
struct Cli {
    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Floor,
    Round,
    #[value(alias = "mask-reject", alias = "mask_reject")]
    Mask,
}

impl From<MethodArg> for IntegerMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Floor => IntegerMethod::Floor,
            MethodArg::Round => IntegerMethod::Round,
            MethodArg::Mask => IntegerMethod::MaskReject,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputKind {
    Words,
    Ints,
    Fractions,
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e| format!("{e}"))
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Emit generator output
    Gen(GenArgs),
    /// Draw a sample or permutation
    Sample(SampleArgs),
    /// Pigeonhole attainability tables
    Bounds(BoundsArgs),
    /// Run a bias experiment
    Audit(AuditArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long, default_value_t = 10)]
    count: u64,
    /// What to print for each draw
    #[arg(long = "as", value_enum, default_value_t = OutputKind::Words)]
    output: OutputKind,
    /// Integer range {1..range} for --as ints
    #[arg(long)]
    range: Option<u64>,
    #[arg(long, value_enum, default_value_t = MethodArg::Mask)]
    method: MethodArg,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Population size
    #[arg(long, required_unless_present = "file", conflicts_with = "file")]
    n: Option<u64>,
    /// Newline-delimited items to sample from (`-` for standard input)
    #[arg(long)]
    file: Option<PathBuf>,
    /// Sample size
    #[arg(long)]
    k: u64,
    /// pikk, fisher-yates, random-indices, cormen, reservoir-r or vitter-z
    #[arg(long, value_parser = parse_algorithm, default_value = "random-indices")]
    algo: Algorithm,
    #[arg(long)]
    replacement: bool,
    #[arg(long, value_enum, default_value_t = MethodArg::Mask)]
    method: MethodArg,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("table").required(true).args(["table1", "row"]))]
pub struct BoundsArgs {
    /// Reproduce the state-space table
    #[arg(long)]
    table1: bool,
    /// Custom row `STATE_BITS,N` (permutations of N) or `STATE_BITS,N,K`
    /// (samples of K out of N); repeatable
    #[arg(long)]
    row: Vec<String>,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    /// Also write the JSON report to this file
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    experiment: AuditCommand,
}

#[derive(Debug, Args)]
pub struct StatArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long, value_enum, default_value_t = MethodArg::Mask)]
    method: MethodArg,
    #[arg(long, default_value_t = 100_000)]
    reps: u64,
    /// Parallel shards; shard i of hash seed S is seeded S/i
    #[arg(long, default_value_t = 1)]
    shards: u32,
    /// Family-wise significance level
    #[arg(long, default_value_t = prng_audit::audit::DEFAULT_ALPHA)]
    alpha: f64,
}

#[derive(Debug, Subcommand)]
enum AuditCommand {
    /// Parity of draws on {1..1717986918}
    Murdoch {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, value_enum, default_value_t = MethodArg::Mask)]
        method: MethodArg,
        #[arg(long, default_value_t = 1_000_000)]
        reps: u64,
        #[arg(long, default_value_t = prng_audit::audit::DEFAULT_ALPHA)]
        alpha: f64,
    },
    /// Distinct Fisher-Yates permutations over every seed of a small LCG
    Coverage {
        #[arg(long, default_value_t = 5)]
        a: u64,
        #[arg(long, default_value_t = 1)]
        c: u64,
        #[arg(long, default_value_t = 256)]
        m: u64,
        #[arg(long, default_value_t = 6)]
        n: u64,
    },
    /// Derangement frequency and fixed-point counts
    Derangement {
        #[command(flatten)]
        stat: StatArgs,
        #[arg(long, default_value_t = 7)]
        n: u64,
    },
    /// Mean Spearman correlation of independent permutations
    Spearman {
        #[command(flatten)]
        stat: StatArgs,
        #[arg(long, default_value_t = 10)]
        n: u64,
    },
    /// Chi-square over all k-subsets
    Frequency {
        #[command(flatten)]
        stat: StatArgs,
        #[arg(long, default_value_t = 5)]
        n: u64,
        #[arg(long, default_value_t = 2)]
        k: u64,
        #[arg(long, value_parser = parse_algorithm, default_value = "random-indices")]
        algo: Algorithm,
    },
    /// Repeat the statistical battery under the hash generator
    Calibrate {
        /// Base seed; repetition r of experiment e uses `seed/r/e`
        #[arg(long)]
        seed: Option<String>,
        #[arg(long, default_value_t = 100)]
        repetitions: u32,
        #[arg(long, default_value_t = 10_000)]
        reps: u64,
        #[arg(long, default_value_t = prng_audit::audit::DEFAULT_ALPHA)]
        alpha: f64,
    },
    /// Rerun a saved report and check the statistics match
    Replay {
        #[arg(long)]
        report: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let result = match cli.command {
        Command::Gen(args) => commands::gen(args, cli.format),
        Command::Sample(args) => commands::sample(args, cli.format),
        Command::Bounds(args) => commands::bounds(args, cli.format),
        Command::Audit(args) => commands::audit(args, cli.format),
    };
    match result {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
