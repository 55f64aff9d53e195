//! Command-line front end: simulate paths, estimate regressions, compute
//! domains, and run Monte Carlo rate and order experiments from a JSON
//! config. Exit codes: 0 success, 2 configuration error, 3 runtime numeric
//! error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cointreg::Error;
use commands::CommandContext;

#[derive(Parser)]
#[command(name = "cointreg", version, about = "Nonstationary kernel regression simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a sample path and write it as CSV with metadata.
    Simulate(CommonArgs),
    /// Simulate, estimate, and write the estimate sheet with signal/domains.
    Estimate(CommonArgs),
    /// Simulate and write the signal process and domains with coverage.
    Domains(CommonArgs),
    /// Run the covariance/zero-energy order experiment across sample sizes.
    Orderest(CommonArgs),
    /// Run the rate experiment and fit the log-log slope.
    Rates(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if absent).
    #[arg(long)]
    out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Caps the worker thread count; output is invariant to it.
    #[arg(long)]
    threads: Option<usize>,
}

fn run(command: &Command) -> cointreg::Result<()> {
    let (name, args): (&str, &CommonArgs) = match command {
        Command::Simulate(a) => ("simulate", a),
        Command::Estimate(a) => ("estimate", a),
        Command::Domains(a) => ("domains", a),
        Command::Orderest(a) => ("orderest", a),
        Command::Rates(a) => ("rates", a),
    };
    let ctx = CommandContext::load(&args.config, &args.out, args.seed)?;
    let threads = args.threads.or(ctx.config.threads);
    let body = move || -> cointreg::Result<()> {
        match name {
            "simulate" => commands::cmd_simulate(&ctx),
            "estimate" => commands::cmd_estimate(&ctx),
            "domains" => commands::cmd_domains(&ctx),
            "orderest" => commands::cmd_orderest(&ctx),
            _ => commands::cmd_rates(&ctx),
        }
    };
    match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::numeric(format!("cannot build thread pool: {e}")))?
            .install(body),
        None => body(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) => ExitCode::from(2),
                _ => ExitCode::from(3),
            }
        }
    }
}
