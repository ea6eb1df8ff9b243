use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use coded_caching::commands::{cmd_analyze, cmd_simulate, cmd_verify};
use coded_caching::config::{Plan, RunConfig, VerifySection};
use coded_caching::exec::with_threads;
use coded_caching::verify::{Fault, VerifyOptions};
use coded_caching::CliError;

/// Coded caching with random demands: analytic bounds, simulation and
/// verification.
#[derive(Debug, Parser)]
#[command(name = "coded-caching", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rate bounds per sweep point.
    Analyze(RunArgs),
    /// Monte-Carlo delivery rates with decode verification.
    Simulate(RunArgs),
    /// Cross-check the implementation against reference oracles.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Overrides `[system].seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `[simulation].max_vertices`.
    #[arg(long, env = "CODED_CACHING_MAX_VERTICES")]
    max_vertices: Option<usize>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Optional configuration; only `[verify]` and `[system].seed` are read.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Random instances per suite.
    #[arg(long)]
    seeds: Option<u64>,
    #[arg(long, value_enum, hide = true)]
    inject_fault: Option<FaultArg>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FaultArg {
    EdgeFlip,
}

fn load_plan(args: &RunArgs) -> Result<Plan, CliError> {
    let mut plan = RunConfig::load(&args.config)?.plan()?;
    if let Some(seed) = args.seed {
        plan.template.params.seed = seed;
    }
    if let Some(cap) = args.max_vertices {
        plan.template.max_vertices = cap;
    }
    Ok(plan)
}

fn verify_options(args: &VerifyArgs) -> Result<VerifyOptions, CliError> {
    let (section, seed) = match &args.config {
        Some(path) => {
            let config = RunConfig::load(path)?;
            (config.verify, config.system.seed)
        }
        None => (VerifySection::default(), 0),
    };
    Ok(VerifyOptions {
        seeds: args.seeds.unwrap_or(section.seeds),
        base_seed: args.seed.unwrap_or(seed),
        rho_samples: section.rho_samples,
        fault: match args.inject_fault {
            Some(FaultArg::EdgeFlip) => Fault::EdgeFlip,
            None => Fault::None,
        },
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze(args) => {
            let plan = load_plan(&args)?;
            for path in with_threads(cli.threads, || cmd_analyze(&plan, &args.out))?? {
                println!("{}", path.display());
            }
        }
        Command::Simulate(args) => {
            let plan = load_plan(&args)?;
            for path in with_threads(cli.threads, || cmd_simulate(&plan, &args.out))?? {
                println!("{}", path.display());
            }
        }
        Command::Verify(args) => {
            let opts = verify_options(&args)?;
            with_threads(cli.threads, || cmd_verify(&opts))??;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
