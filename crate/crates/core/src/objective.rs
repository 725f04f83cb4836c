//! Error metrics, the weighted multi-objective cost, and the relative
//! J index used to compare controllers against a baseline.

use serde::{Deserialize, Serialize};

use crate::control::PiGains;
use crate::error::{Error, Result};
use crate::scenario::Scenario;
use crate::sim::{ClosedLoopRun, SimulationTrace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Ise,
    Iae,
    Itae,
    Mse,
}

impl MetricKind {
    pub const ALL: [MetricKind; 4] = [Self::Ise, Self::Iae, Self::Itae, Self::Mse];

    pub fn name(self) -> &'static str {
        match self {
            Self::Ise => "ise",
            Self::Iae => "iae",
            Self::Itae => "itae",
            Self::Mse => "mse",
        }
    }
}

/// Left-point rectangle sums over the error sequence:
/// ISE = Σe²·dt, IAE = Σ|e|·dt, ITAE = Σt·|e|·dt, MSE = Σe²/N.
pub fn metric(kind: MetricKind, errors: &[f64], times: &[f64], dt: f64) -> Result<f64> {
    if errors.is_empty() {
        return Err(Error::EmptySequence);
    }
    if errors.len() != times.len() {
        return Err(Error::LengthMismatch(errors.len(), times.len()));
    }
    let value = match kind {
        MetricKind::Ise => errors.iter().map(|e| e * e).sum::<f64>() * dt,
        MetricKind::Iae => errors.iter().map(|e| e.abs()).sum::<f64>() * dt,
        MetricKind::Itae => {
            errors
                .iter()
                .zip(times)
                .map(|(e, t)| t * e.abs())
                .sum::<f64>()
                * dt
        }
        MetricKind::Mse => errors.iter().map(|e| e * e).sum::<f64>() / errors.len() as f64,
    };
    Ok(value)
}

/// All four metrics of one loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub ise: f64,
    pub iae: f64,
    pub itae: f64,
    pub mse: f64,
}

impl MetricSet {
    pub fn compute(errors: &[f64], times: &[f64], dt: f64) -> Result<Self> {
        Ok(Self {
            ise: metric(MetricKind::Ise, errors, times, dt)?,
            iae: metric(MetricKind::Iae, errors, times, dt)?,
            itae: metric(MetricKind::Itae, errors, times, dt)?,
            mse: metric(MetricKind::Mse, errors, times, dt)?,
        })
    }

    pub fn get(&self, kind: MetricKind) -> f64 {
        match kind {
            MetricKind::Ise => self.ise,
            MetricKind::Iae => self.iae,
            MetricKind::Itae => self.itae,
            MetricKind::Mse => self.mse,
        }
    }

    /// Metrics of every loop in `trace`.
    pub fn per_loop(trace: &SimulationTrace) -> Result<Vec<Self>> {
        trace
            .loops
            .iter()
            .map(|lt| Self::compute(&lt.error, &trace.time, trace.dt))
            .collect()
    }
}

/// Weighted sum `Σ wᵢ·Eᵢ`.
pub fn combine(costs: &[f64], weights: &[f64]) -> f64 {
    costs.iter().zip(weights).map(|(e, w)| w * e).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    #[default]
    Fixed,
    /// Weights redrawn from U[0, 1] once per optimizer iteration.
    PerIterationRandom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostSpec {
    /// Metric per loop.
    pub metrics: Vec<MetricKind>,
    /// Weight per loop, each in [0, 1].
    pub weights: Vec<f64>,
    #[serde(default)]
    pub weight_mode: WeightMode,
    /// Output magnitude treated as divergence.
    #[serde(default = "default_divergence_bound")]
    pub divergence_bound: f64,
}

fn default_divergence_bound() -> f64 {
    crate::sim::DEFAULT_DIVERGENCE_BOUND
}

impl CostSpec {
    pub fn uniform(kind: MetricKind, loops: usize) -> Self {
        Self {
            metrics: vec![kind; loops],
            weights: vec![0.5; loops],
            weight_mode: WeightMode::Fixed,
            divergence_bound: default_divergence_bound(),
        }
    }

    /// Weights normalized to sum to one, for [`j_index`].
    pub fn loop_weights(&self) -> Result<Vec<f64>> {
        let total: f64 = self.weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidWeights("weights sum to zero".into()));
        }
        Ok(self.weights.iter().map(|w| w / total).collect())
    }
}

/// Closed-loop evaluation of one gain set.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    /// Weighted cost; `+∞` when the simulation diverged.
    pub cost: f64,
    /// Per-loop metric of the scenario's kind (empty when diverged).
    pub loop_costs: Vec<f64>,
    pub run: ClosedLoopRun,
}

impl Evaluation {
    pub fn diverged(&self) -> bool {
        self.run.diverged()
    }
}

/// Simulate `scenario` with `gains` and compute the weighted cost.
pub fn evaluate(scenario: &Scenario, gains: &[PiGains], weights: &[f64]) -> Result<Evaluation> {
    let run = scenario.simulate(gains)?;
    if run.diverged() {
        return Ok(Evaluation {
            cost: f64::INFINITY,
            loop_costs: Vec::new(),
            run,
        });
    }
    let trace = &run.trace;
    let loop_costs = scenario
        .cost()
        .metrics
        .iter()
        .zip(&trace.loops)
        .map(|(&kind, lt)| metric(kind, &lt.error, &trace.time, trace.dt))
        .collect::<Result<Vec<_>>>()?;
    let cost = combine(&loop_costs, weights);
    Ok(Evaluation {
        cost: if cost.is_nan() { f64::INFINITY } else { cost },
        loop_costs,
        run,
    })
}

/// `J = Σ wₗ·(candidateₗ / baselineₗ)` from per-loop metric values.
pub fn j_index_from_metrics(
    candidate: &[f64],
    baseline: &[f64],
    loop_weights: &[f64],
) -> Result<f64> {
    if candidate.len() != baseline.len() {
        return Err(Error::LengthMismatch(candidate.len(), baseline.len()));
    }
    if loop_weights.len() != baseline.len() {
        return Err(Error::LengthMismatch(loop_weights.len(), baseline.len()));
    }
    if loop_weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(Error::InvalidWeights("negative loop weight".into()));
    }
    let total: f64 = loop_weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidWeights(format!(
            "loop weights sum to {total}"
        )));
    }
    let mut j = 0.0;
    for (idx, ((c, b), w)) in candidate.iter().zip(baseline).zip(loop_weights).enumerate() {
        if *b == 0.0 {
            return Err(Error::DegenerateBaseline(idx));
        }
        j += w * c / b;
    }
    // Dividing by the summed weights makes identical metrics give exactly 1.
    Ok(j / total)
}

/// J index of `candidate` relative to `baseline`, both traces of the same
/// scenario. Values below one mean the candidate performs better.
pub fn j_index(
    candidate: &SimulationTrace,
    baseline: &SimulationTrace,
    kinds: &[MetricKind],
    loop_weights: &[f64],
) -> Result<f64> {
    let per_loop = |trace: &SimulationTrace| -> Result<Vec<f64>> {
        kinds
            .iter()
            .zip(&trace.loops)
            .map(|(&kind, lt)| metric(kind, &lt.error, &trace.time, trace.dt))
            .collect()
    };
    j_index_from_metrics(&per_loop(candidate)?, &per_loop(baseline)?, loop_weights)
}
