//! `jsamode`: simulate, ingest, reconstruct and analyse joint spectral
//! amplitude measurements inside a run directory.

mod commands;
mod error;
mod rundir;

use std::{
    path::{Path, PathBuf},
    process::ExitCode,
};

use clap::{error::ErrorKind as ClapKind, Parser, Subcommand, ValueEnum};
use jsamode::presets::{Config, MeasurementMode, PRESET_NAMES};

use commands::Arm;
use error::{CliError, CliResult};
use rundir::{ConfigSource, RunDir};

#[derive(Debug, Parser)]
#[command(name = "jsamode", version, about = "Joint spectral amplitude reconstruction pipeline")]
struct Cli {
    /// Configuration file (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Built-in configuration, used when --config is absent.
    #[arg(long, global = true, value_name = "NAME")]
    preset: Option<String>,
    /// Overrides `run.seed`.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Run directory.
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    /// Accept inputs produced under a different configuration.
    #[arg(long, global = true)]
    force: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Writes the truth JSA, expected and sampled histograms, and optional tag streams.
    Simulate,
    /// Histograms time-tag streams into coincidence histograms.
    Ingest {
        /// Tag file to ingest instead of the run's own streams.
        #[arg(long, value_name = "PATH")]
        tags: Option<PathBuf>,
        /// Heralding arm of an explicit tag file.
        #[arg(long, value_enum, default_value_t = Arm::A)]
        arm: Arm,
    },
    /// Recovers the JSA (or signal modes) from the measured histograms.
    Reconstruct,
    /// Schmidt analysis, chirp fit and plot tables.
    Analyze {
        /// JSA file (default: jsa.jsab in the run directory).
        jsa: Option<PathBuf>,
    },
    /// simulate, ingest (when tags are enabled), reconstruct and analyze.
    Pipeline,
    /// Configuration utilities.
    Config {
        #[command(subcommand)]
        action: ConfigAction,
    },
}

#[derive(Debug, Subcommand)]
enum ConfigAction {
    /// Prints the default configuration with every key.
    PrintDefaults {
        #[arg(long, value_enum, default_value_t = ModeArg::Heralded)]
        mode: ModeArg,
    },
    /// Prints a built-in preset.
    Preset { name: String },
    /// Validates a configuration file.
    Check { path: PathBuf },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Heralded,
    Seeded,
    Unseeded,
}

impl From<ModeArg> for MeasurementMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Heralded => MeasurementMode::Heralded,
            ModeArg::Seeded => MeasurementMode::Seeded,
            ModeArg::Unseeded => MeasurementMode::Unseeded,
        }
    }
}

fn open(cli: &Cli) -> CliResult<RunDir> {
    let source = ConfigSource {
        path: cli.config.clone(),
        preset: cli.preset.clone(),
        seed: cli.seed,
    };
    RunDir::open(&cli.out, &source, cli.force)
}

fn run(cli: &Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Precondition("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Precondition(format!("thread pool: {e}")))?;
    }
    match &cli.command {
        Command::Simulate => commands::simulate(&mut open(cli)?),
        Command::Ingest { tags, arm } => {
            let explicit = tags.as_deref().map(|p| (p, *arm));
            commands::ingest(&mut open(cli)?, explicit)
        }
        Command::Reconstruct => commands::reconstruct(&mut open(cli)?),
        Command::Analyze { jsa } => commands::analyze(&mut open(cli)?, jsa.as_deref()),
        Command::Pipeline => {
            let mut rd = open(cli)?;
            commands::simulate(&mut rd)?;
            if rd.config.tags.enabled {
                commands::ingest(&mut rd, None)?;
            }
            commands::reconstruct(&mut rd)?;
            commands::analyze(&mut rd, None)
        }
        Command::Config { action } => config(action),
    }
}

fn config(action: &ConfigAction) -> CliResult<()> {
    match action {
        ConfigAction::PrintDefaults { mode } => print!("{}", Config::defaults((*mode).into()).to_toml()),
        ConfigAction::Preset { name } => {
            let c = Config::preset(name).ok_or_else(|| {
                CliError::Precondition(format!("unknown preset `{name}`; choose one of {}", PRESET_NAMES.join(", ")))
            })?;
            print!("{}", c.to_toml());
        }
        ConfigAction::Check { path } => {
            check(path)?;
            println!("{}: ok", path.display());
        }
    }
    Ok(())
}

fn check(path: &Path) -> CliResult<()> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Config::from_toml(&text).map_err(|e| CliError::file(path, e))?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ClapKind::DisplayHelp | ClapKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
