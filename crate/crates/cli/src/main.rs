mod commands;
mod config;
mod sweep;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use predprey_core::repro::{write_bundle, Bundle, FieldFormat, ReproOptions};

use commands::Context;
use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] predprey_core::Error),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// 2 for numerical failures, 1 for everything the user can fix.
pub fn exit_code_for(e: &predprey_core::Error) -> u8 {
    use predprey_core::Error::*;
    match e {
        Resonance(_) | Degenerate(_) | Transversality(_) | Tolerance(_) | Inconsistency(_) | Internal(_) => 2,
        Domain(_) | InvalidParameters(_) | InvalidControl(_) | Precondition(_) | DimensionMismatch(_) | Io(_) => 1,
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => exit_code_for(e),
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Pgm,
    Both,
}

#[derive(Debug, Parser)]
#[command(name = "predprey", version, about = "Blow-up, pattern and Hopf analysis of a delayed predator-prey model")]
struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Field output format for `pde`, `sweep` and `repro`.
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,
    /// Worker threads for `sweep` and `k-search` (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    /// Print the effective configuration and exit.
    #[arg(long, global = true)]
    dump_config: bool,
    /// Assert that the run uses no randomness. Every command is
    /// deterministic, so this only documents intent.
    #[arg(long, global = true)]
    seedless: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// ODE (tau = 0) or DDE trajectory to trajectory.csv.
    Simulate,
    /// Reaction-diffusion run with snapshot fields and summary.txt.
    Pde,
    /// Dispersion curve to dispersion.csv.
    Dispersion,
    /// Turing condition report.
    Turing,
    /// Critical delay and normal-form quantities for modes 0..=mode_max.
    Hopf,
    /// Non-delayed blow-up certificate.
    BlowupCheck,
    /// Bisection of the IC-scale blow-up threshold.
    Threshold,
    /// Run `sweep_task` over one or two swept keys.
    Sweep,
    /// Write a named reproduction bundle, or all of them.
    Repro {
        /// fig1-blowup, fig2-m16, fig3-stripes, fig5-dsweep or all.
        bundle: String,
        /// Nodes per side of the 2D lattice.
        #[arg(long, default_value_t = 100)]
        lattice: usize,
    },
    /// Long 1D runs over a range of carrying capacities.
    KSearch,
}

fn load_config(path: Option<&Path>) -> Result<RunConfig, CliError> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            RunConfig::parse(&text)
        }
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let cfg = load_config(cli.config.as_deref())?;
    if cli.dump_config {
        print!("{}", cfg.dump());
        return Ok(0);
    }
    let Some(command) = cli.command else {
        return Err(CliError::Usage("a subcommand is required (see --help)".into()));
    };
    let format = match cli.format {
        Format::Csv => FieldFormat::Csv,
        Format::Pgm => FieldFormat::Pgm,
        Format::Both => FieldFormat::Both,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers)
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let ctx = Context { format, pool };
    let out = cli.out_dir.as_path();
    let report = match command {
        Command::Simulate => commands::simulate(&cfg, out)?,
        Command::Pde => commands::pde(&cfg, out, format)?,
        Command::Dispersion => commands::dispersion(&cfg, out)?,
        Command::Turing => commands::turing(&cfg, out)?,
        Command::Hopf => commands::hopf(&cfg, out)?,
        Command::BlowupCheck => commands::blowup_check(&cfg, out)?,
        Command::Threshold => commands::threshold(&cfg, out)?,
        Command::Sweep => commands::sweep(&cfg, out, &ctx)?,
        Command::KSearch => commands::k_search(&cfg, out, &ctx)?,
        Command::Repro { bundle, lattice } => {
            let bundles: Vec<Bundle> = if bundle == "all" {
                Bundle::ALL.to_vec()
            } else {
                vec![Bundle::from_name(&bundle).ok_or_else(|| CliError::Usage(format!("unknown bundle `{bundle}`")))?]
            };
            let opts = ReproOptions { format, lattice_2d: lattice };
            let mut lines = Vec::new();
            for b in bundles {
                let files = write_bundle(b, &out.join(b.name()), &opts)?;
                lines.push(format!("{} files={}", b.name(), files.len()));
            }
            commands::Report { summary: lines.join("\n"), numerical_failure: false }
        }
    };
    println!("{}", report.summary);
    Ok(if report.numerical_failure { 2 } else { 0 })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
