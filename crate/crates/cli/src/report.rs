//! The `simulate` and `compare` commands.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use smdo_core::objective::{evaluate, j_index_from_metrics, metric};
use smdo_core::sim::SimulationTrace;
use smdo_core::{MetricKind, MetricSet, PiGains, Scenario};

use crate::error::CliError;
use crate::output::finite;
use crate::spec::ControllerSpec;

/// `scenario` with the CI setting requested by `spec`, after checking the
/// gain count.
pub fn configured(scenario: &Scenario, spec: &ControllerSpec) -> Result<Scenario, CliError> {
    let loops = scenario.loops().len();
    if spec.gains.len() != loops {
        return Err(CliError::Usage(format!(
            "`{spec}` gives gains for {} loop(s), scenario has {loops}",
            spec.gains.len()
        )));
    }
    Ok(match spec.ci {
        Some(ci) => scenario.clone().with_ci_enabled(ci),
        None => scenario.clone(),
    })
}

/// Trace of the baseline controller, rejecting baselines that cannot
/// normalize a J index.
pub fn baseline_trace(
    scenario: &Scenario,
    spec: &ControllerSpec,
) -> Result<SimulationTrace, CliError> {
    let run = configured(scenario, spec)?.simulate(&spec.gains)?;
    if run.diverged() {
        return Err(CliError::DegenerateBaseline(format!(
            "baseline `{spec}` diverged at step {}",
            run.diverged_at.unwrap_or(0)
        )));
    }
    let per_loop = scenario_metrics(scenario, &run.trace)?;
    if let Some(i) = per_loop.iter().position(|&m| m == 0.0) {
        return Err(CliError::DegenerateBaseline(format!(
            "baseline `{spec}` has zero {} on loop {}",
            scenario.cost().metrics[i].name(),
            i + 1
        )));
    }
    Ok(run.trace)
}

/// The scenario's cost metric for each loop.
fn scenario_metrics(scenario: &Scenario, trace: &SimulationTrace) -> Result<Vec<f64>, CliError> {
    Ok(scenario
        .cost()
        .metrics
        .iter()
        .zip(&trace.loops)
        .map(|(&kind, l)| metric(kind, &l.error, &trace.time, trace.dt))
        .collect::<smdo_core::Result<_>>()?)
}

fn all_metrics(trace: &SimulationTrace) -> Result<Vec<MetricSet>, CliError> {
    if trace.is_empty() {
        return Ok(Vec::new());
    }
    Ok(MetricSet::per_loop(trace)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateReport {
    pub scenario: String,
    pub gains: Vec<PiGains>,
    pub ci: Vec<bool>,
    pub samples: usize,
    pub diverged: bool,
    pub diverged_at: Option<usize>,
    /// Weighted cost under the scenario's weights; `null` when diverged.
    pub cost: Option<f64>,
    /// All metrics per loop over the simulated samples.
    pub metrics: Vec<MetricSet>,
}

impl SimulateReport {
    pub fn headline(&self) -> String {
        match (self.diverged, self.cost) {
            (true, _) => format!(
                "{}: diverged at step {}",
                self.scenario,
                self.diverged_at.unwrap_or(0)
            ),
            (false, Some(c)) => format!("{}: {} samples, E {c:.6}", self.scenario, self.samples),
            (false, None) => format!("{}: {} samples", self.scenario, self.samples),
        }
    }
}

pub fn simulate(
    id: &str,
    scenario: &Scenario,
    spec: &ControllerSpec,
) -> Result<(SimulateReport, SimulationTrace), CliError> {
    let s = configured(scenario, spec)?;
    let eval = evaluate(&s, &spec.gains, &s.cost().weights)?;
    let trace = eval.run.trace.clone();
    let report = SimulateReport {
        scenario: id.to_string(),
        gains: spec.gains.clone(),
        ci: s.loops().iter().map(|l| l.ci.enabled()).collect(),
        samples: trace.len(),
        diverged: eval.diverged(),
        diverged_at: eval.run.diverged_at,
        cost: finite(eval.cost),
        metrics: all_metrics(&trace)?,
    };
    Ok((report, trace))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub label: String,
    pub gains: Vec<PiGains>,
    pub ci: Vec<bool>,
    pub diverged: bool,
    pub metrics: Vec<MetricSet>,
    /// Relative to the baseline row; `null` for divergent candidates.
    pub j: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub scenario: String,
    /// Metric entering J for each loop.
    pub j_metrics: Vec<MetricKind>,
    pub loop_weights: Vec<f64>,
    /// Baseline first, then candidates in command-line order.
    pub rows: Vec<CompareRow>,
}

impl CompareReport {
    pub fn table(&self) -> String {
        let width = self
            .rows
            .iter()
            .map(|r| r.label.len())
            .max()
            .unwrap_or(0)
            .max(8);
        let mut out = format!("{:<width$}  {:>10}", "config", "J");
        for (i, kind) in self.j_metrics.iter().enumerate() {
            let _ = write!(out, "  {:>14}", format!("{}_{}", kind.name(), i + 1));
        }
        out.push('\n');
        for row in &self.rows {
            let j = row
                .j
                .map_or_else(|| "diverged".into(), |j| format!("{j:.6}"));
            let _ = write!(out, "{:<width$}  {j:>10}", row.label);
            for (kind, m) in self.j_metrics.iter().zip(&row.metrics) {
                let _ = write!(out, "  {:>14.6}", m.get(*kind));
            }
            out.push('\n');
        }
        out
    }
}

pub fn compare(
    id: &str,
    scenario: &Scenario,
    baseline: &ControllerSpec,
    candidates: &[ControllerSpec],
) -> Result<CompareReport, CliError> {
    if candidates.is_empty() {
        return Err(CliError::Usage("at least one candidate is required".into()));
    }
    for spec in candidates {
        configured(scenario, spec)?;
    }
    let weights = scenario.cost().loop_weights()?;
    let base_trace = baseline_trace(scenario, baseline)?;
    let base = scenario_metrics(scenario, &base_trace)?;

    let row = |label: String,
               spec: &ControllerSpec,
               j: Option<f64>,
               trace: &SimulationTrace,
               diverged| {
        Ok::<_, CliError>(CompareRow {
            label,
            gains: spec.gains.clone(),
            ci: configured(scenario, spec)?
                .loops()
                .iter()
                .map(|l| l.ci.enabled())
                .collect(),
            diverged,
            metrics: if diverged {
                Vec::new()
            } else {
                all_metrics(trace)?
            },
            j,
        })
    };
    let mut rows = vec![row(
        "baseline".into(),
        baseline,
        Some(1.0),
        &base_trace,
        false,
    )?];
    for (n, spec) in candidates.iter().enumerate() {
        let run = configured(scenario, spec)?.simulate(&spec.gains)?;
        let label = spec
            .label
            .clone()
            .unwrap_or_else(|| format!("candidate_{}", n + 1));
        let j = if run.diverged() {
            None
        } else {
            let cand = scenario_metrics(scenario, &run.trace)?;
            Some(j_index_from_metrics(&cand, &base, &weights)?)
        };
        rows.push(row(label, spec, j, &run.trace, run.diverged())?);
    }
    Ok(CompareReport {
        scenario: id.to_string(),
        j_metrics: scenario.cost().metrics.clone(),
        loop_weights: weights,
        rows,
    })
}
