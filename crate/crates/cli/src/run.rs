//! The `run` and `batch` commands.

use std::ops::RangeInclusive;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use smdo_core::objective::j_index;
use smdo_core::sim::SimulationTrace;
use smdo_core::smdo::StopReason;
use smdo_core::{tune, PiGains, Scenario};

use crate::error::CliError;
use crate::output::{self, finite};
use crate::report::baseline_trace;
use crate::spec::ControllerSpec;

/// Environment variable capping batch parallelism.
pub const THREADS_ENV: &str = "SMDO_TUNE_THREADS";

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub iters: Option<usize>,
    pub target: Option<f64>,
    /// Overrides conditional integration in every loop of the tuned controller.
    pub ci: Option<bool>,
    pub baseline: Option<ControllerSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub scenario: String,
    pub seed: u64,
    pub iterations: usize,
    pub max_iterations: usize,
    /// Conditional integration per loop during the run.
    pub ci: Vec<bool>,
    pub final_gains: Vec<PiGains>,
    pub initial_cost: Option<f64>,
    /// Cost of the final gains under the scenario's weights; `null` if every
    /// evaluated gain set diverged.
    pub final_cost: Option<f64>,
    pub target_cost: Option<f64>,
    pub target_reached: bool,
    pub j_vs_baseline: Option<f64>,
    /// `|e|` at the last sample, per loop.
    pub terminal_error: Vec<f64>,
    pub evaluations: usize,
    pub divergence_count: usize,
    pub wall_clock_s: f64,
}

impl RunSummary {
    pub fn headline(&self) -> String {
        let cost = |c: Option<f64>| c.map_or_else(|| "diverged".into(), |c| format!("{c:.6}"));
        let mut line = format!(
            "{} seed {}: {} iterations, E {} -> {}",
            self.scenario,
            self.seed,
            self.iterations,
            cost(self.initial_cost),
            cost(self.final_cost)
        );
        if let Some(j) = self.j_vs_baseline {
            line.push_str(&format!(", J {j:.4}"));
        }
        if self.target_reached {
            line.push_str(" (target reached)");
        }
        line
    }
}

/// Everything a run writes, rendered in memory.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub summary: RunSummary,
    pub convergence_csv: Vec<u8>,
    pub trace_csv: Vec<u8>,
    pub final_trace: SimulationTrace,
}

impl RunArtifacts {
    pub fn write(&self, out: &Path) -> Result<(), CliError> {
        output::create_dir(out)?;
        output::write_file(&out.join("convergence.csv"), &self.convergence_csv)?;
        output::write_file(&out.join("trace_final.csv"), &self.trace_csv)?;
        output::write_file(
            &out.join("summary.json"),
            &output::json_bytes(&self.summary),
        )
    }
}

/// Optimize `scenario` and render the artifacts. All validation, including
/// the baseline, happens before the optimizer starts.
pub fn execute(
    id: &str,
    scenario: &Scenario,
    options: &RunOptions,
) -> Result<RunArtifacts, CliError> {
    let mut config = scenario.optimizer().clone();
    if let Some(seed) = options.seed {
        config.seed = seed;
    }
    if let Some(iters) = options.iters {
        config.max_iterations = iters;
    }
    if options.target.is_some() {
        config.target_cost = options.target;
    }
    config.validate()?;

    let baseline = match &options.baseline {
        Some(spec) => Some(baseline_trace(scenario, spec)?),
        None => None,
    };
    let tuned = match options.ci {
        Some(ci) => scenario.clone().with_ci_enabled(ci),
        None => scenario.clone(),
    };

    let start = Instant::now();
    let outcome = tune::tune(&tuned, &config)?;
    let wall_clock_s = start.elapsed().as_secs_f64();

    let trace = outcome.evaluation.run.trace.clone();
    let j_vs_baseline = match &baseline {
        Some(base) if !outcome.evaluation.diverged() => {
            let weights = scenario.cost().loop_weights()?;
            Some(j_index(&trace, base, &scenario.cost().metrics, &weights)?)
        }
        _ => None,
    };
    let summary = RunSummary {
        scenario: id.to_string(),
        seed: config.seed,
        iterations: outcome.result.iterations(),
        max_iterations: config.max_iterations,
        ci: tuned.loops().iter().map(|l| l.ci.enabled()).collect(),
        final_gains: outcome.gains.clone(),
        initial_cost: finite(outcome.result.initial_cost),
        final_cost: finite(outcome.evaluation.cost),
        target_cost: config.target_cost,
        target_reached: outcome.result.stop == StopReason::Target,
        j_vs_baseline,
        terminal_error: trace
            .loops
            .iter()
            .map(|l| l.error.last().map_or(f64::NAN, |e| e.abs()))
            .collect(),
        evaluations: outcome.evaluations,
        divergence_count: outcome.divergences,
        wall_clock_s,
    };
    Ok(RunArtifacts {
        convergence_csv: output::convergence_csv(&outcome.result, &scenario.cost().weights),
        trace_csv: output::trace_csv(&trace),
        final_trace: trace,
        summary,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchEntry {
    pub seed: u64,
    pub ok: bool,
    pub iterations: Option<usize>,
    pub final_cost: Option<f64>,
    pub target_reached: bool,
    pub error: Option<String>,
}

/// Order statistics of the final cost over successful, non-divergent runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub min: Option<f64>,
    pub median: Option<f64>,
    pub max: Option<f64>,
    pub succeeded: usize,
    pub failed: usize,
}

impl Aggregate {
    pub fn from_entries(entries: &[BatchEntry]) -> Self {
        let mut costs: Vec<f64> = entries.iter().filter_map(|e| e.final_cost).collect();
        costs.sort_by(f64::total_cmp);
        let n = costs.len();
        let median = match n {
            0 => None,
            _ if n % 2 == 1 => Some(costs[n / 2]),
            _ => Some(0.5 * (costs[n / 2 - 1] + costs[n / 2])),
        };
        let succeeded = entries.iter().filter(|e| e.ok).count();
        Self {
            min: costs.first().copied(),
            median,
            max: costs.last().copied(),
            succeeded,
            failed: entries.len() - succeeded,
        }
    }
}

/// Batch report; contains no timing so reruns are byte-identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    pub scenario: String,
    pub seeds: [u64; 2],
    pub runs: Vec<BatchEntry>,
    pub aggregate: Aggregate,
}

impl BatchReport {
    pub fn headline(&self) -> String {
        let a = &self.aggregate;
        let fmt = |c: Option<f64>| c.map_or_else(|| "-".into(), |c| format!("{c:.6}"));
        format!(
            "{} seeds {}..{}: {} ok, {} failed, E min {} median {} max {}",
            self.scenario,
            self.seeds[0],
            self.seeds[1],
            a.succeeded,
            a.failed,
            fmt(a.min),
            fmt(a.median),
            fmt(a.max)
        )
    }
}

/// Parallelism cap from [`THREADS_ENV`]; `0` leaves the choice to rayon.
pub fn thread_cap() -> Result<usize, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{THREADS_ENV}={v} is not a thread count"))),
        Err(_) => Ok(0),
    }
}

/// One run per seed, written to `out/seed_<n>/`, plus `out/batch.json`.
/// Fails only when every seed fails.
pub fn batch(
    id: &str,
    scenario: &Scenario,
    seeds: RangeInclusive<u64>,
    options: &RunOptions,
    out: &Path,
    threads: usize,
) -> Result<BatchReport, CliError> {
    if let Some(spec) = &options.baseline {
        baseline_trace(scenario, spec)?;
    }
    let (first, last) = (*seeds.start(), *seeds.end());
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    output::create_dir(out)?;

    let seeds: Vec<u64> = seeds.collect();
    let results: Vec<(u64, Result<RunSummary, CliError>)> = pool.install(|| {
        seeds
            .par_iter()
            .map(|&seed| {
                let opts = RunOptions {
                    seed: Some(seed),
                    ..options.clone()
                };
                let result = execute(id, scenario, &opts).and_then(|artifacts| {
                    artifacts.write(&out.join(format!("seed_{seed}")))?;
                    Ok(artifacts.summary)
                });
                (seed, result)
            })
            .collect()
    });

    let runs: Vec<BatchEntry> = results
        .iter()
        .map(|(seed, r)| match r {
            Ok(s) => BatchEntry {
                seed: *seed,
                ok: true,
                iterations: Some(s.iterations),
                final_cost: s.final_cost,
                target_reached: s.target_reached,
                error: None,
            },
            Err(e) => BatchEntry {
                seed: *seed,
                ok: false,
                iterations: None,
                final_cost: None,
                target_reached: false,
                error: Some(e.to_string()),
            },
        })
        .collect();
    let report = BatchReport {
        scenario: id.to_string(),
        seeds: [first, last],
        aggregate: Aggregate::from_entries(&runs),
        runs,
    };
    output::write_file(&out.join("batch.json"), &output::json_bytes(&report))?;
    if report.aggregate.succeeded == 0 {
        let (_, first_err) = results
            .into_iter()
            .find(|(_, r)| r.is_err())
            .expect("all failed");
        return Err(first_err.unwrap_err());
    }
    Ok(report)
}
