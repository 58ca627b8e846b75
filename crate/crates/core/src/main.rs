use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gauss_engine::runner::{
    parse_config, run_bound_surface, run_sweep, run_timeseries, run_validate, RunConfig, RunMode,
};

#[derive(Parser)]
#[command(
    name = "gauss-engine",
    about = "Gaussian-state simulator for a driven two-oscillator engine with finite baths"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate n_cycles and emit one CSV row of boundary quantities per cycle.
    Run(CommonArgs),
    /// Grid sweep over T_h and lambda_b with cycle-1 quantities per point.
    Sweep(CommonArgs),
    /// Oracle and invariant suite at reduced scale; exit 0 iff all pass.
    Validate(CommonArgs),
    /// Device-independent bound surface over (gamma, eta_th) grids.
    BoundSurface(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Path to a key = value configuration file; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path (report path for validate; optional there).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Concurrent sweep workers; overrides the config value.
    #[arg(long)]
    workers: Option<usize>,
}

fn load(args: &CommonArgs, mode: RunMode) -> Result<RunConfig, gauss_engine::Error> {
    let text = match &args.config {
        Some(path) => std::fs::read_to_string(path)?,
        None => String::new(),
    };
    let mut cfg = parse_config(&text)?;
    cfg.mode = mode;
    if let Some(w) = args.workers {
        if w == 0 {
            return Err(gauss_engine::Error::InvariantViolation(
                "workers must be at least 1".into(),
            ));
        }
        cfg.workers = w;
    }
    Ok(cfg)
}

fn write_out(args: &CommonArgs, what: &str, content: &str) -> Result<(), gauss_engine::Error> {
    let path = args.out.as_ref().ok_or_else(|| {
        gauss_engine::Error::InvariantViolation(format!("{what} requires --out <path>"))
    })?;
    std::fs::write(path, content)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run(args) => load(args, RunMode::Run)
            .and_then(|cfg| run_timeseries(&cfg))
            .and_then(|csv| write_out(args, "run", &csv)),
        Command::Sweep(args) => load(args, RunMode::Sweep)
            .and_then(|cfg| run_sweep(&cfg))
            .and_then(|csv| write_out(args, "sweep", &csv)),
        Command::BoundSurface(args) => load(args, RunMode::BoundSurface)
            .and_then(|cfg| run_bound_surface(&cfg))
            .and_then(|csv| write_out(args, "bound-surface", &csv)),
        Command::Validate(args) => match load(args, RunMode::Validate) {
            Err(e) => Err(e),
            Ok(cfg) => {
                let report = run_validate(&cfg);
                let text = report.render();
                print!("{text}");
                if let Some(path) = &args.out {
                    if let Err(e) = std::fs::write(path, &text) {
                        eprintln!("error: {e}");
                        return ExitCode::FAILURE;
                    }
                }
                if report.all_passed() {
                    Ok(())
                } else {
                    return ExitCode::FAILURE;
                }
            }
        },
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
