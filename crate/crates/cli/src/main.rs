use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use spraylift_cli::config::parse_seed;
use spraylift_cli::{load_config, run, Manifold, PartialConfig, Scenario};

#[derive(Parser)]
#[command(
    name = "spraylift",
    version,
    about = "Run a spray verification scenario"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write report.json plus CSV files.
    Run(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// Flat `key = value` file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    scenario: Option<Scenario>,
    #[arg(long, value_enum)]
    manifold: Option<Manifold>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long = "t-max")]
    t_max: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    beta: Option<f64>,
    /// Decimal or 0x-prefixed hex; defaults to 0x5EED.
    #[arg(long, value_parser = parse_seed)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let Command::Run(args) = Cli::parse().command;
    let flags = PartialConfig {
        scenario: args.scenario,
        manifold: args.manifold,
        dim: args.dim,
        h: args.h,
        t_max: args.t_max,
        alpha: args.alpha,
        beta: args.beta,
        seed: args.seed,
        out: args.out,
        ..Default::default()
    };
    let result = load_config(args.config.as_deref(), flags).and_then(|cfg| run(&cfg));
    match result {
        Ok(report) => {
            for c in &report.checks {
                let mark = if c.pass { "pass" } else { "FAIL" };
                println!(
                    "{mark} {} [{}] max residual {:.2e}",
                    c.check,
                    c.spray,
                    c.max_residual()
                );
            }
            ExitCode::from(report.exit_code())
        }
        Err(e) => {
            eprintln!("spraylift: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
