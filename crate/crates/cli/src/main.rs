//! `qsdc`: run sessions, capacity reports, swap verification and
//! consistency tables from the command line.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "qsdc",
    version,
    about = "GHZ entanglement-swapping secure direct communication"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate protocol sessions with random messages and decode them.
    Run(RunArgs),
    /// Exhaustive capacity report for one encoding scheme.
    Analyze(AnalyzeArgs),
    /// Check the Bell-product expansion of encoded GHZ pairs.
    VerifySwap(VerifyArgs),
    /// Dump which operator tuples are consistent with each announcement.
    Consistency(ConsistencyArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Eve {
    Public,
    Secret,
}

#[derive(Args, Debug, Clone)]
pub struct SchemeArgs {
    /// Number of senders M. Taken from the scheme file when omitted.
    #[arg(long)]
    parties: Option<usize>,
    /// `standard` or the path of a scheme file.
    #[arg(long, default_value = "standard")]
    scheme: String,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write here instead of stdout; the file appears only on success.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    /// Eavesdropper model for the guessing probability.
    #[arg(long, value_enum, default_value_t = Eve::Public)]
    eve: Eve,
    /// Monte Carlo trials for the secret-scheme guess when M > 3.
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 3)]
    parties: usize,
    /// Verify every admissible operator tuple.
    #[arg(long, conflicts_with = "ops")]
    all: bool,
    /// A single operator tuple such as `(iY,X,I)`; identity by default.
    #[arg(long)]
    ops: Option<String>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct ConsistencyArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    #[command(flatten)]
    output: OutputArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (result, output) = match &cli.command {
        Command::Run(args) => (commands::run(args), &args.output),
        Command::Analyze(args) => (commands::analyze(args), &args.output),
        Command::VerifySwap(args) => (commands::verify_swap(args), &args.output),
        Command::Consistency(args) => (commands::consistency(args), &args.output),
    };
    let outcome = result.and_then(|doc| {
        output::emit(&doc.body, output.out.as_deref())?;
        Ok(doc.success)
    });
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("qsdc: verification failed");
            ExitCode::FAILURE
        }
        Err(err) => {
            eprintln!("qsdc: {err:#}");
            ExitCode::FAILURE
        }
    }
}
