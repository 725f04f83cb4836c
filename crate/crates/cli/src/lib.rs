//! `smdo-tune`: run, simulate, compare and batch PI tuning experiments over
//! JSON scenarios, writing CSV/JSON artifacts for external plotting.
//!
//! Exit codes: 0 success, 2 usage or invalid configuration, 3 I/O failure,
//! 4 degenerate comparison baseline.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use smdo_core::{scenario, Scenario};

pub mod error;
pub mod output;
pub mod report;
pub mod run;
pub mod spec;

pub use error::CliError;
pub use report::{CompareReport, CompareRow, SimulateReport};
pub use run::{BatchReport, RunOptions, RunSummary};
pub use spec::ControllerSpec;

#[derive(Debug, Parser)]
#[command(
    name = "smdo-tune",
    version,
    about = "MO-SMDO tuning of discrete PI control loops"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CiMode {
    On,
    Off,
}

impl From<CiMode> for bool {
    fn from(mode: CiMode) -> bool {
        mode == CiMode::On
    }
}

#[derive(Debug, clap::Args)]
pub struct TuneArgs {
    /// Scenario file, or `builtin:<name>`.
    #[arg(long)]
    pub scenario: String,
    /// RNG seed (default: the scenario's).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Iteration budget (default: the scenario's, normally 100).
    #[arg(long)]
    pub iters: Option<usize>,
    /// Stop once the cost is at or below this value.
    #[arg(long)]
    pub target: Option<f64>,
    /// Force conditional integration on or off in every loop.
    #[arg(long, value_enum)]
    pub ci: Option<CiMode>,
    /// Reference controller for the J index, `kp1,ki1[,kp2,ki2][@ci|@noci]`.
    #[arg(long)]
    pub baseline: Option<ControllerSpec>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

impl TuneArgs {
    fn options(&self) -> RunOptions {
        RunOptions {
            seed: self.seed,
            iters: self.iters,
            target: self.target,
            ci: self.ci.map(bool::from),
            baseline: self.baseline.clone(),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimize the scenario's gains and write convergence, trace and summary.
    Run(TuneArgs),
    /// Simulate fixed gains and write the trace and its metrics.
    Simulate {
        #[arg(long)]
        scenario: String,
        /// `kp1,ki1[,kp2,ki2][@ci|@noci]`.
        #[arg(long)]
        gains: ControllerSpec,
        #[arg(long)]
        out: PathBuf,
    },
    /// J index of candidate controllers relative to a baseline.
    Compare {
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        baseline: ControllerSpec,
        /// `[label=]kp1,ki1[,kp2,ki2][@ci|@noci]`; repeatable.
        #[arg(long = "candidate", required = true)]
        candidates: Vec<ControllerSpec>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Independent runs over a seed range, `a..b` inclusive.
    Batch {
        #[arg(long, value_parser = spec::parse_seed_range)]
        seeds: std::ops::RangeInclusive<u64>,
        #[command(flatten)]
        tune: BatchTuneArgs,
    },
    /// List built-in scenarios, or print one as JSON.
    Builtin { name: Option<String> },
}

/// [`TuneArgs`] without `--seed`.
#[derive(Debug, clap::Args)]
pub struct BatchTuneArgs {
    #[arg(long)]
    pub scenario: String,
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub target: Option<f64>,
    #[arg(long, value_enum)]
    pub ci: Option<CiMode>,
    #[arg(long)]
    pub baseline: Option<ControllerSpec>,
    #[arg(long)]
    pub out: PathBuf,
}

/// Scenario from a file path or `builtin:<name>`, with its report id (the
/// scenario name, else the file stem).
pub fn load(source: &str) -> Result<(String, Scenario), CliError> {
    let scenario = match source.strip_prefix("builtin:") {
        Some(name) => scenario::builtin(name).ok_or_else(|| {
            CliError::Usage(format!(
                "unknown built-in scenario `{name}` (available: {})",
                scenario::BUILTIN_NAMES.join(", ")
            ))
        })?,
        None => scenario::load_scenario(Path::new(source))?,
    };
    let id = if scenario.name().is_empty() {
        Path::new(source)
            .file_stem()
            .map_or_else(|| source.to_string(), |s| s.to_string_lossy().into_owned())
    } else {
        scenario.name().to_string()
    };
    Ok((id, scenario))
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => {
            let (id, scenario) = load(&args.scenario)?;
            let artifacts = run::execute(&id, &scenario, &args.options())?;
            artifacts.write(&args.out)?;
            println!("{}", artifacts.summary.headline());
        }
        Command::Simulate {
            scenario,
            gains,
            out,
        } => {
            let (id, scenario) = load(&scenario)?;
            let (report, trace) = report::simulate(&id, &scenario, &gains)?;
            output::create_dir(&out)?;
            output::write_file(&out.join("trace.csv"), &output::trace_csv(&trace))?;
            output::write_file(&out.join("metrics.json"), &output::json_bytes(&report))?;
            println!("{}", report.headline());
        }
        Command::Compare {
            scenario,
            baseline,
            candidates,
            out,
        } => {
            let (id, scenario) = load(&scenario)?;
            let report = report::compare(&id, &scenario, &baseline, &candidates)?;
            output::create_dir(&out)?;
            output::write_file(&out.join("compare.json"), &output::json_bytes(&report))?;
            print!("{}", report.table());
        }
        Command::Batch { seeds, tune } => {
            let (id, scenario) = load(&tune.scenario)?;
            let options = RunOptions {
                seed: None,
                iters: tune.iters,
                target: tune.target,
                ci: tune.ci.map(bool::from),
                baseline: tune.baseline,
            };
            let threads = run::thread_cap()?;
            let report = run::batch(&id, &scenario, seeds, &options, &tune.out, threads)?;
            println!("{}", report.headline());
        }
        Command::Builtin { name: None } => {
            for name in scenario::BUILTIN_NAMES {
                println!("{name}");
            }
        }
        Command::Builtin { name: Some(name) } => {
            let (_, scenario) = load(&format!("builtin:{name}"))?;
            println!("{}", scenario.to_json());
        }
    }
    Ok(())
}
