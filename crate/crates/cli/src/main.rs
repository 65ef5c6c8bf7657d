use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use squeeze_cli::{execute, resolve, Format, Overrides, RunConfig, Verb};

#[derive(Parser)]
#[command(name = "spinsqueeze", version, about = "Spin-squeezing simulations and fits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pipeline selected by the config's `mode`.
    Run(Common),
    /// Run the dtwa pipeline over the `[sweep]` grid and aggregate.
    Sweep(Common),
    /// Extract squeezing optima and scaling fits from series files.
    Fit(Common),
    /// Parse and check a config, then print it fully resolved.
    ValidateConfig(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (verb, args) = match cli.command {
        Command::Run(a) => (Some(Verb::Run), a),
        Command::Sweep(a) => (Some(Verb::Sweep), a),
        Command::Fit(a) => (Some(Verb::Fit), a),
        Command::ValidateConfig(a) => (None, a),
    };
    let overrides = Overrides { seed: args.seed, workers: args.workers, out: args.out, format: args.format };
    let result = RunConfig::load(&args.config).map(|c| resolve(c, &overrides)).and_then(|cfg| match verb {
        None => {
            let sweeping = cfg.sweep.is_some();
            cfg.validate(sweeping)?;
            print!("{}", cfg.to_toml()?);
            Ok(())
        }
        Some(v) => {
            let m = execute(&cfg, v)?;
            eprintln!("wrote {} files to {} in {:.2} s", m.files.len() + 1, cfg.output_dir.display(), m.elapsed_s);
            Ok(())
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
