use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qmak::calibrate::calibrate_matching_constants;
use qmak::commands::{cmd_lemmas, cmd_reduce, cmd_simulate, cmd_sweep};
use qmak::config::{LemmasArgs, ReduceArgs, SimulateArgs, SweepArgs};
use qmak::formats::certificate::read_certificate;
use qmak::Result;

#[derive(Parser)]
#[command(
    name = "qmak",
    version,
    about = "Simulator for unentangled-witness 3SAT verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reduce a 3SAT instance to balanced 2-out-of-4-SAT and measure the gap.
    Reduce(ReduceArgs),
    /// Run the verification protocol against a prover strategy.
    Simulate(SimulateArgs),
    /// Run the property checks; exits 4 if any fails.
    Lemmas(LemmasArgs),
    /// Uniformity-test rejection over a grid of N, beta and strategies.
    Sweep(SweepArgs),
    /// Search for unbalanced-edge constants and print them as JSON.
    Calibrate(CalibrateArgs),
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    seeds: Vec<u64>,
    #[arg(long, value_delimiter = ',', default_value = "64,256")]
    ns: Vec<usize>,
    #[arg(long, default_value_t = 10_000)]
    matchings: u64,
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Reduce(a) => {
            let report = cmd_reduce(&a.resolve()?)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::Simulate(a) => {
            let cfg = a.resolve(|p| Ok(read_certificate(p)?.target.num_vars()))?;
            let s = cmd_simulate(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&s.overall)?);
        }
        Command::Lemmas(a) => {
            let cfg = a.resolve()?;
            let out = cfg.out_dir.join("lemmas.json");
            let r = cmd_lemmas(&cfg);
            if let Ok(r) = &r {
                println!("{} passed, {} skipped", r.passed, r.skipped);
            }
            eprintln!("report: {}", out.display());
            r?;
        }
        Command::Sweep(a) => {
            let rows = cmd_sweep(&a.resolve()?)?;
            println!("{} cells", rows.len());
        }
        Command::Calibrate(a) => {
            let c = calibrate_matching_constants(&a.ns, a.matchings, &a.seeds)?;
            println!("{}", serde_json::to_string_pretty(&c)?);
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
