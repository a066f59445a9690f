//! `dsieve` — end-to-end runs, statistical verification, and scaling
//! benchmarks for the dihedral hidden-subgroup sieve simulators.
//!
//! Exit codes: 0 success, 1 recovery or suite failure, 2 usage error.
//! Output on stdout and in `--out` files is byte-deterministic for a fixed
//! spec and seed; wall-clock fields stay null unless `--timings` is passed.

mod bench;
mod output;
mod run;
mod verify_cmd;

use clap::{Args, Parser, Subcommand};
use dsieve_core::rng::DEFAULT_SEED;
use dsieve_core::Variant;

pub const SEED_ENV_VAR: &str = "DSIEVE_SEED";

#[derive(Parser)]
#[command(
    name = "dsieve",
    about = "Dihedral hidden-subgroup sieve simulator",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Recover the hidden shift end to end and check it against the truth.
    Run(RunArgs),
    /// Run the statistical verification suites.
    Verify(VerifyArgs),
    /// Benchmark both pipelines over a grid of moduli.
    Bench(BenchArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Master seed; falls back to $DSIEVE_SEED, then a fixed default.
    #[arg(long)]
    seed: Option<u64>,
    /// Write machine-readable results here instead of only printing.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
    /// Output format for --out.
    #[arg(long, value_parser = ["csv", "json"], default_value = "csv")]
    format: String,
    /// Fill wall-clock fields with real timings (breaks byte-determinism).
    #[arg(long)]
    timings: bool,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_parser = clap::value_parser!(Variant))]
    variant: Variant,
    /// Modulus exponent: N = 2^n.
    #[arg(long)]
    n: u32,
    /// Pipeline stage count.
    #[arg(long)]
    k: u32,
    /// Block length (block variant only).
    #[arg(long)]
    l: Option<u32>,
    /// Hidden shift: an integer or `random`.
    #[arg(long, default_value = "random")]
    d: SecretArg,
    #[arg(long, default_value_t = 1)]
    trials: u64,
    /// Fresh-object budget override per pipeline attempt.
    #[arg(long)]
    budget: Option<u64>,
    /// Budget-doubling retries per recursion level.
    #[arg(long, default_value_t = 8)]
    max_retries: u32,
    /// Print per-level pipeline reports.
    #[arg(long)]
    verbose: bool,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated moduli exponents, e.g. 5,10,17.
    #[arg(long, value_delimiter = ',', required = true)]
    n_grid: Vec<u32>,
    /// Restrict to one variant (default: both).
    #[arg(long, value_parser = clap::value_parser!(Variant))]
    variant: Option<Variant>,
    /// Stage count override (default: derived per point).
    #[arg(long)]
    k: Option<u32>,
    /// Block length override for the block variant.
    #[arg(long)]
    l: Option<u32>,
    #[arg(long, default_value_t = 20)]
    trials: u64,
    /// Fresh-object budget override per run.
    #[arg(long)]
    budget: Option<u64>,
    #[command(flatten)]
    common: CommonArgs,
}

/// A `--d` value: explicit shift or uniformly random.
#[derive(Clone, Copy, Debug)]
enum SecretArg {
    Random,
    Fixed(u64),
}

impl std::str::FromStr for SecretArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("random") {
            return Ok(SecretArg::Random);
        }
        s.parse::<u64>()
            .map(SecretArg::Fixed)
            .map_err(|_| format!("expected an integer or `random`, got `{s}`"))
    }
}

fn resolve_seed(flag: Option<u64>) -> Result<u64, String> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV_VAR) {
        Ok(raw) => raw
            .parse::<u64>()
            .map_err(|_| format!("{SEED_ENV_VAR} must be a 64-bit integer, got `{raw}`")),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn usage_error(message: &str) -> ! {
    eprintln!("error: {message}");
    std::process::exit(2);
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run(args) => run::cmd_run(args),
        Command::Verify(args) => verify_cmd::cmd_verify(args),
        Command::Bench(args) => bench::cmd_bench(args),
    };
    std::process::exit(code);
}
