//! Batch front end over the junction toolkit.
//!
//! Every subcommand resolves a configuration (CLI flags over config file
//! over defaults), runs one experiment, and writes its results into the
//! output directory. `summary.json` is always written; `result.csv` and
//! `plot.gp` depend on the chosen format.

mod config;
mod output;
mod runner;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use config::{parse_config, Config, Format, Kind};

#[derive(Parser)]
#[command(name = "josephson", version, about = "Finite-lattice junction simulations")]
struct Cli {
    /// Experiment configuration (flat `section.key = value` file).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Directory the result files go to (default: current directory).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Which result files to write besides summary.json.
    #[arg(long, global = true, value_enum, value_name = "FMT")]
    format: Option<FormatArg>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
    Both,
}

impl From<FormatArg> for Format {
    fn from(arg: FormatArg) -> Format {
        match arg {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
            FormatArg::Both => Format::Both,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the full invariant suite and report each check.
    Validate,
    /// Tunneling current against the phase difference.
    DcSweep,
    /// Time evolution under a voltage bias on region 1.
    AcRun,
    /// Junction coupling energy against the phase difference.
    EnergySweep,
    /// Pair correlation decay onto the long-range plateau.
    OdlroScan,
    /// Cross-check the exact engine against the mean-field engine.
    OracleCheck,
}

impl Command {
    fn kind(&self) -> Kind {
        match self {
            Command::Validate => Kind::Validate,
            Command::DcSweep => Kind::Dc,
            Command::AcRun => Kind::Ac,
            Command::EnergySweep => Kind::Energy,
            Command::OdlroScan => Kind::Odlro,
            Command::OracleCheck => Kind::Oracle,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let kind = cli.command.kind();
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = match std::fs::read_to_string(path) {
                Ok(text) => text,
                Err(err) => {
                    eprintln!("error: cannot read {}: {}", path.display(), err);
                    return ExitCode::from(2);
                }
            };
            match parse_config(&text) {
                Ok(cfg) => cfg,
                Err(errors) => {
                    eprintln!("error: {} problem(s) in {}:", errors.len(), path.display());
                    for err in &errors {
                        eprintln!("  {}", err);
                    }
                    return ExitCode::from(2);
                }
            }
        }
        None => Config::default(),
    };
    if let Some(declared) = cfg.experiment.kind {
        if declared != kind {
            eprintln!(
                "error: config declares experiment.kind = {} but the {} subcommand was run",
                declared.name(),
                kind.name()
            );
            return ExitCode::from(2);
        }
    }
    if let Some(fmt) = cli.format {
        cfg.output.format = fmt.into();
    }
    let out_dir = cli
        .out
        .clone()
        .or_else(|| cfg.output.directory.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    ExitCode::from(runner::execute(kind, &cfg, &out_dir))
}
