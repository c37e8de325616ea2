use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use hdfa_cli::{parse_config, run_command, Command};
use hdfa_core::Parallelism;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Simulate,
    SweepPumpPower,
    SweepPumpWavelength,
    SweepPairing,
    InvertPairing,
    OptimizeLength,
    ShowReferenceTable,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Simulate => Command::Simulate,
            Cmd::SweepPumpPower => Command::SweepPumpPower,
            Cmd::SweepPumpWavelength => Command::SweepPumpWavelength,
            Cmd::SweepPairing => Command::SweepPairing,
            Cmd::InvertPairing => Command::InvertPairing,
            Cmd::OptimizeLength => Command::OptimizeLength,
            Cmd::ShowReferenceTable => Command::ShowReferenceTable,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

/// Steady-state simulator for in-band pumped Ho-doped fiber amplifiers.
#[derive(Debug, Parser)]
#[command(name = "hdfa", version)]
struct Cli {
    #[arg(value_enum)]
    command: Cmd,
    /// Run configuration (`key = value` with unit suffixes).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Backward/forward ASE modelling; overrides `ase.enabled`.
    #[arg(long, value_enum)]
    ase: Option<Switch>,
    /// Maximum RK4 step in mm; overrides `numerics.step`.
    #[arg(long, value_name = "MM")]
    steps: Option<f64>,
    /// Worker threads for sweeps (default: all cores). Output does not
    /// depend on this.
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = Command::from(cli.command);
    let par = cli
        .threads
        .map_or(Parallelism::Auto, |n| Parallelism::Threads(n as usize));

    if command.needs_config() && cli.config.is_none() {
        eprintln!("error: `{}` requires --config <path>", command.name());
        return ExitCode::from(2);
    }
    let cfg = match cli.config.as_deref().map(parse_config).transpose() {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let mut cfg = cfg;
    if let Some(cfg) = cfg.as_mut() {
        if let Err(e) = cfg.apply_overrides(cli.ase.map(|s| matches!(s, Switch::On)), cli.steps) {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let out_dir = cli
        .out
        .or_else(|| cfg.as_ref().map(|c| c.output_dir.clone()))
        .unwrap_or_else(|| PathBuf::from("out"));

    match run_command(command, cfg.as_ref(), &out_dir, par) {
        Ok(outcome) => {
            if let Some(cfg) = &cfg {
                println!("{} [config {}]", command.name(), &cfg.digest[..16]);
            }
            print!("{}", outcome.report);
            for path in &outcome.artifacts {
                println!("wrote {}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(1)
        }
    }
}
