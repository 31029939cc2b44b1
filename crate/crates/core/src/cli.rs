//! Command-line front end. The binary only parses arguments and calls
//! [`main_with`]; each verb is also callable directly.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::ConfigFile;
use crate::error::{Error, Result};
use crate::eval::{mse_per_axis, run_comparison, ComparisonReport, RunMetrics, AXES};
use crate::experiments::Experiment;
use crate::output::{self, prepare_output_dir, write_files};
use crate::parallel::Execution;
use crate::sim::run_scenario;

#[derive(Debug, Parser)]
#[command(name = "uuvnav", version, about = "Underwater pose estimation simulator and EKF")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one scenario and write its logs and metrics.
    Run(RunArgs),
    /// Regenerate comparison tables (T2, T3, T4; all when none given).
    Reproduce(ReproduceArgs),
    /// Parse and check a config file without running it.
    ValidateConfig(ValidateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ConfigArgs {
    /// TOML scenario file; defaults are used when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `section.key=value`, applied after the file. Repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = "out/run")]
    pub out: PathBuf,
    /// Overwrite a non-empty output directory.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ReproduceArgs {
    pub tables: Vec<Experiment>,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Comma-separated seed list; overrides `experiment.seeds`.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    /// Single seed; shorthand for `--seeds N`.
    #[arg(long, conflicts_with = "seeds")]
    pub seed: Option<u64>,
    #[arg(long, default_value = "out/reproduce")]
    pub out: PathBuf,
    /// Run (config, seed) cells on the thread pool.
    #[arg(long)]
    pub parallel: bool,
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
}

fn load(args: &ConfigArgs, extra: &[String]) -> Result<ConfigFile> {
    let mut overrides = args.overrides.clone();
    overrides.extend_from_slice(extra);
    match &args.config {
        Some(path) => ConfigFile::load(path, &overrides),
        None => ConfigFile::parse_with_overrides("", &overrides),
    }
}

pub struct RunOutput {
    pub config: ConfigFile,
    pub metrics: RunMetrics,
    pub files: Vec<PathBuf>,
}

pub fn cmd_run(args: &RunArgs) -> Result<RunOutput> {
    let seed_override: Vec<String> = args
        .seed
        .map(|s| format!("experiment.seed={s}"))
        .into_iter()
        .collect();
    let config = load(&args.config, &seed_override)?;
    prepare_output_dir(&args.out, args.force)?;

    let log = run_scenario(&config.to_scenario())?;
    let metrics = mse_per_axis(&log)?;

    let mut files = vec![
        ("config.toml".to_string(), config.to_toml_string()?),
        ("run_log.csv".to_string(), output::run_log_csv(&log)),
        ("measurements.csv".to_string(), output::measurements_csv(&log)),
        ("metrics.csv".to_string(), output::metrics_csv(&log, &metrics)),
    ];
    for (axis, name) in AXES.iter().enumerate() {
        files.push((format!("series_{name}.csv"), output::series_csv(&log, axis)));
    }
    let files = write_files(&args.out, &files)?;
    Ok(RunOutput {
        config,
        metrics,
        files,
    })
}

pub fn cmd_reproduce(args: &ReproduceArgs) -> Result<Vec<(Experiment, ComparisonReport)>> {
    let mut config = load(&args.config, &[])?;
    if let Some(seeds) = &args.seeds {
        config.experiment.seeds = seeds.clone();
    } else if let Some(seed) = args.seed {
        config.experiment.seeds = vec![seed];
    }
    config.validate()?;
    let tables = if args.tables.is_empty() {
        Experiment::ALL.to_vec()
    } else {
        args.tables.clone()
    };
    prepare_output_dir(&args.out, args.force)?;
    write_files(
        &args.out,
        &[("config.toml".to_string(), config.to_toml_string()?)],
    )?;

    let base = config.to_scenario();
    let exec = Execution::from_flag(args.parallel);
    let mut reports = Vec::new();
    for table in tables {
        let report = run_comparison(&table.configs(&base), &config.experiment.seeds, exec)?;
        let dir = args.out.join(table.to_string());
        prepare_output_dir(&dir, true)?;
        write_files(
            &dir,
            &[
                ("comparison.csv".to_string(), output::comparison_csv(&report)),
                ("summary.csv".to_string(), output::summary_csv(&report)),
                (
                    "table.txt".to_string(),
                    output::render_table(&report, table.title(), table.row_header(), table.axes()),
                ),
            ],
        )?;
        reports.push((table, report));
    }
    Ok(reports)
}

pub fn cmd_validate_config(args: &ValidateArgs) -> Result<ConfigFile> {
    load(&args.config, &[])
}

/// Exit status for an error: 2 for bad input, 1 for everything else.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_)
        | Error::InvalidParameter { .. }
        | Error::DegenerateTrajectory(_)
        | Error::Io { .. } => 2,
        _ => 1,
    }
}

fn describe(path: &Path) -> String {
    path.display().to_string()
}

/// Runs the parsed command, printing results to stdout and errors to stderr.
pub fn main_with(cli: Cli) -> i32 {
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args).map(|out| {
            println!("{}", out.config.experiment.label);
            for (axis, v) in AXES.iter().zip(out.metrics.as_array()) {
                println!("  mse_{axis:<5} {v:.6e}");
            }
            println!("wrote {} files to {}", out.files.len(), describe(&args.out));
        }),
        Command::Reproduce(args) => cmd_reproduce(args).map(|reports| {
            for (table, report) in &reports {
                print!(
                    "{}",
                    output::render_table(report, table.title(), table.row_header(), table.axes())
                );
                println!();
            }
            println!("wrote results to {}", describe(&args.out));
        }),
        Command::ValidateConfig(args) => cmd_validate_config(args).map(|cfg| {
            let sensors: Vec<String> = cfg
                .to_scenario()
                .sensors
                .iter()
                .map(|s| s.to_string())
                .collect();
            println!("ok: `{}` with {}", cfg.experiment.label, sensors.join(", "));
        }),
    };
    match result {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            let mut source = std::error::Error::source(&err);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            exit_code(&err)
        }
    }
}
