//! Scenario-driven tuning: wraps closed-loop evaluation as an optimizer
//! objective and runs the search over all loop gains.

use std::cell::Cell;

use crate::control::PiGains;
use crate::error::Result;
use crate::objective::{evaluate, Evaluation};
use crate::scenario::Scenario;
use crate::smdo::{self, Objective, OptimizationResult, OptimizerConfig};

/// Cost of a gain vector `[kp₁, ki₁, …]` on a scenario. Divergent or
/// invalid candidates cost `+∞` and are counted.
#[derive(Debug)]
pub struct ScenarioObjective<'a> {
    scenario: &'a Scenario,
    evaluations: Cell<usize>,
    divergences: Cell<usize>,
}

impl<'a> ScenarioObjective<'a> {
    pub fn new(scenario: &'a Scenario) -> Self {
        Self {
            scenario,
            evaluations: Cell::new(0),
            divergences: Cell::new(0),
        }
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations.get()
    }

    pub fn divergences(&self) -> usize {
        self.divergences.get()
    }
}

impl Objective for ScenarioObjective<'_> {
    fn cost(&self, params: &[f64], weights: &[f64]) -> f64 {
        self.evaluations.set(self.evaluations.get() + 1);
        let gains = Scenario::gains_from_params(params);
        match evaluate(self.scenario, &gains, weights) {
            Ok(eval) if !eval.diverged() => eval.cost,
            _ => {
                self.divergences.set(self.divergences.get() + 1);
                f64::INFINITY
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct TuneOutcome {
    pub result: OptimizationResult,
    pub gains: Vec<PiGains>,
    /// Re-evaluation of `gains` under the scenario's configured weights.
    pub evaluation: Evaluation,
    pub evaluations: usize,
    pub divergences: usize,
}

/// Optimize all loop gains of `scenario` starting from its initial gains.
pub fn tune(scenario: &Scenario, config: &OptimizerConfig) -> Result<TuneOutcome> {
    let objective = ScenarioObjective::new(scenario);
    let cost = scenario.cost();
    let result = smdo::optimize(
        config,
        cost.weight_mode,
        cost.weights.clone(),
        scenario.initial_parameters(),
        &objective,
    )?;
    let gains = Scenario::gains_from_params(&result.best);
    let evaluation = evaluate(scenario, &gains, &cost.weights)?;
    Ok(TuneOutcome {
        result,
        gains,
        evaluation,
        evaluations: objective.evaluations(),
        divergences: objective.divergences(),
    })
}
