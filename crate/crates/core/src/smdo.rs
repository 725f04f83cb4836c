//! Multi-objective stochastic multi-parameter divergence optimization.
//!
//! Every iteration visits the parameters in index order. For parameter `v`
//! a forward trial `p_v + Ψ_v·ξ` is evaluated first; only if it fails to
//! strictly lower the cost is a backward trial `p_v − Ψ_v·ξ` (with a fresh
//! `ξ ~ U[0, 1]`) tried. Accepted trials replace the incumbent immediately,
//! so later parameters are perturbed around the updated point. Trials
//! outside the bounds are clamped onto them.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::WeightMode;

/// Optimizer state vector with per-component step scales `Ψ` and bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterVector {
    values: Vec<f64>,
    steps: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl ParameterVector {
    pub fn new(
        values: Vec<f64>,
        steps: Vec<f64>,
        lower: Vec<f64>,
        upper: Vec<f64>,
    ) -> Result<Self> {
        let n = values.len();
        if n == 0 {
            return Err(Error::InvalidConfig("empty parameter vector".into()));
        }
        for len in [steps.len(), lower.len(), upper.len()] {
            if len != n {
                return Err(Error::LengthMismatch(n, len));
            }
        }
        for v in 0..n {
            let (p, s, lo, hi) = (values[v], steps[v], lower[v], upper[v]);
            if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "component {v}: bounds [{lo}, {hi}] are not well ordered"
                )));
            }
            if !(lo <= p && p <= hi) {
                return Err(Error::InvalidConfig(format!(
                    "component {v}: value {p} outside [{lo}, {hi}]"
                )));
            }
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "component {v}: step scale must be positive, got {s}"
                )));
            }
        }
        Ok(Self {
            values,
            steps,
            lower,
            upper,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn steps(&self) -> &[f64] {
        &self.steps
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Incumbent with component `v` moved by `delta` and clamped to bounds.
    pub fn perturbed(&self, v: usize, delta: f64) -> Vec<f64> {
        let mut candidate = self.values.clone();
        candidate[v] = (candidate[v] + delta).clamp(self.lower[v], self.upper[v]);
        candidate
    }

    fn decay(&mut self, factor: f64) {
        self.steps.iter_mut().for_each(|s| *s *= factor);
    }
}

/// A black-box cost over a parameter vector. Weights are supplied by the
/// optimizer (one per objective term) and may be ignored.
pub trait Objective {
    fn cost(&self, params: &[f64], weights: &[f64]) -> f64;
}

impl<F: Fn(&[f64]) -> f64> Objective for F {
    fn cost(&self, params: &[f64], _weights: &[f64]) -> f64 {
        self(params)
    }
}

/// Source of the random step weights `ξ` and of per-iteration cost weights.
pub trait Sampler {
    fn xi(&mut self) -> f64;
    fn weight(&mut self) -> f64;
}

impl<R: RngCore> Sampler for R {
    fn xi(&mut self) -> f64 {
        self.random::<f64>()
    }

    fn weight(&mut self) -> f64 {
        self.random::<f64>()
    }
}

/// Sampler returning the same `ξ` for every trial.
#[derive(Debug, Clone, Copy)]
pub struct ConstantSampler {
    pub xi: f64,
    pub weight: f64,
}

impl Sampler for ConstantSampler {
    fn xi(&mut self) -> f64 {
        self.xi
    }

    fn weight(&mut self) -> f64 {
        self.weight
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    AcceptedForward,
    AcceptedBackward,
    Rejected,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::AcceptedForward => "forward",
            Outcome::AcceptedBackward => "backward",
            Outcome::Rejected => "rejected",
        }
    }
}

/// One forward or backward test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub direction: Direction,
    pub xi: f64,
    pub candidate: Vec<f64>,
    pub cost: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentRecord {
    pub component: usize,
    /// Incumbent point and cost before this component's tests.
    pub incumbent: Vec<f64>,
    pub incumbent_cost: f64,
    pub trials: Vec<Trial>,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// 1-based iteration number.
    pub iteration: usize,
    pub weights: Vec<f64>,
    /// Step scales used during this iteration.
    pub steps: Vec<f64>,
    /// Incumbent cost at the start of the iteration under `weights`.
    pub start_cost: f64,
    pub components: Vec<ComponentRecord>,
    pub params: Vec<f64>,
    pub cost: f64,
}

impl IterationRecord {
    pub fn accepted(&self) -> bool {
        self.components
            .iter()
            .any(|c| c.outcome != Outcome::Rejected)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerConfig {
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_cost: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    /// Per-iteration geometric decay of the step scales, in (0, 1].
    #[serde(default = "default_step_decay")]
    pub step_decay: f64,
}

fn default_max_iterations() -> usize {
    100
}

fn default_step_decay() -> f64 {
    1.0
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iterations: default_max_iterations(),
            target_cost: None,
            seed: 0,
            step_decay: default_step_decay(),
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig(
                "max_iterations must be at least 1".into(),
            ));
        }
        if !(self.step_decay > 0.0 && self.step_decay <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "step_decay must lie in (0, 1], got {}",
                self.step_decay
            )));
        }
        if self.target_cost.is_some_and(f64::is_nan) {
            return Err(Error::InvalidConfig("target_cost is NaN".into()));
        }
        Ok(())
    }
}

fn sanitize(cost: f64) -> f64 {
    if cost.is_nan() {
        f64::INFINITY
    } else {
        cost
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    params: ParameterVector,
    cost: f64,
    weights: Vec<f64>,
    iteration: usize,
    history: Vec<IterationRecord>,
}

impl OptimizerState {
    /// Evaluate the starting point under `weights`.
    pub fn new<O: Objective + ?Sized>(
        params: ParameterVector,
        weights: Vec<f64>,
        objective: &O,
    ) -> Self {
        let cost = sanitize(objective.cost(params.values(), &weights));
        Self {
            params,
            cost,
            weights,
            iteration: 0,
            history: Vec::new(),
        }
    }

    pub fn params(&self) -> &ParameterVector {
        &self.params
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn history(&self) -> &[IterationRecord] {
        &self.history
    }

    pub fn into_history(self) -> Vec<IterationRecord> {
        self.history
    }

    fn test<O: Objective + ?Sized>(
        &mut self,
        v: usize,
        xi: f64,
        direction: Direction,
        objective: &O,
    ) -> Trial {
        let delta = self.params.steps[v] * xi;
        let delta = match direction {
            Direction::Forward => delta,
            Direction::Backward => -delta,
        };
        let candidate = self.params.perturbed(v, delta);
        let cost = if candidate == self.params.values {
            self.cost
        } else {
            sanitize(objective.cost(&candidate, &self.weights))
        };
        let accepted = cost < self.cost;
        if accepted {
            self.params.values.clone_from(&candidate);
            self.cost = cost;
        }
        Trial {
            direction,
            xi,
            candidate,
            cost,
            accepted,
        }
    }

    /// Try `p_v + Ψ_v·ξ`; keep it iff the cost strictly decreases.
    pub fn forward_test<O: Objective + ?Sized>(
        &mut self,
        v: usize,
        xi: f64,
        objective: &O,
    ) -> Trial {
        self.test(v, xi, Direction::Forward, objective)
    }

    /// Try `p_v − Ψ_v·ξ`; keep it iff the cost strictly decreases.
    pub fn backward_test<O: Objective + ?Sized>(
        &mut self,
        v: usize,
        xi: f64,
        objective: &O,
    ) -> Trial {
        self.test(v, xi, Direction::Backward, objective)
    }

    /// One full sweep over all components, then step decay.
    pub fn iterate<O, S>(
        &mut self,
        objective: &O,
        sampler: &mut S,
        mode: WeightMode,
        step_decay: f64,
    ) where
        O: Objective + ?Sized,
        S: Sampler + ?Sized,
    {
        if mode == WeightMode::PerIterationRandom {
            for w in self.weights.iter_mut() {
                *w = sampler.weight();
            }
            self.cost = sanitize(objective.cost(self.params.values(), &self.weights));
        }
        let start_cost = self.cost;
        let steps = self.params.steps.clone();
        let mut components = Vec::with_capacity(self.params.len());
        for v in 0..self.params.len() {
            let incumbent = self.params.values.clone();
            let incumbent_cost = self.cost;
            let forward = self.forward_test(v, sampler.xi(), objective);
            let (trials, outcome) = if forward.accepted {
                (vec![forward], Outcome::AcceptedForward)
            } else {
                let backward = self.backward_test(v, sampler.xi(), objective);
                let outcome = if backward.accepted {
                    Outcome::AcceptedBackward
                } else {
                    Outcome::Rejected
                };
                (vec![forward, backward], outcome)
            };
            components.push(ComponentRecord {
                component: v,
                incumbent,
                incumbent_cost,
                trials,
                outcome,
            });
        }
        self.params.decay(step_decay);
        self.iteration += 1;
        self.history.push(IterationRecord {
            iteration: self.iteration,
            weights: self.weights.clone(),
            steps,
            start_cost,
            components,
            params: self.params.values.clone(),
            cost: self.cost,
        });
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Budget,
    Target,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    /// Best point seen (fixed weights) or the final incumbent (random weights).
    pub best: Vec<f64>,
    pub best_cost: f64,
    pub initial: Vec<f64>,
    pub initial_cost: f64,
    pub history: Vec<IterationRecord>,
    pub stop: StopReason,
}

impl OptimizationResult {
    pub fn iterations(&self) -> usize {
        self.history.len()
    }
}

/// Run the optimizer from `initial` with a ChaCha RNG seeded from the config.
pub fn optimize<O: Objective + ?Sized>(
    config: &OptimizerConfig,
    mode: WeightMode,
    weights: Vec<f64>,
    initial: ParameterVector,
    objective: &O,
) -> Result<OptimizationResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    optimize_with(config, mode, weights, initial, objective, &mut rng)
}

pub fn optimize_with<O, S>(
    config: &OptimizerConfig,
    mode: WeightMode,
    weights: Vec<f64>,
    initial: ParameterVector,
    objective: &O,
    sampler: &mut S,
) -> Result<OptimizationResult>
where
    O: Objective + ?Sized,
    S: Sampler + ?Sized,
{
    config.validate()?;
    let initial_values = initial.values().to_vec();
    let mut state = OptimizerState::new(initial, weights, objective);
    let initial_cost = state.cost;
    let mut best = (initial_values.clone(), initial_cost);
    let reached = |cost: f64| config.target_cost.is_some_and(|target| cost < target);

    let mut stop = StopReason::Budget;
    while state.iteration < config.max_iterations {
        if reached(state.cost) {
            stop = StopReason::Target;
            break;
        }
        state.iterate(objective, sampler, mode, config.step_decay);
        if mode == WeightMode::PerIterationRandom || state.cost < best.1 {
            best = (state.params.values.clone(), state.cost);
        }
    }
    if stop == StopReason::Budget && reached(state.cost) {
        stop = StopReason::Target;
    }

    Ok(OptimizationResult {
        best: best.0,
        best_cost: best.1,
        initial: initial_values,
        initial_cost,
        history: state.into_history(),
        stop,
    })
}

/// Check greedy monotonicity over a fixed-weight history: the incumbent cost
/// never rises, and drops strictly whenever an iteration accepted a move.
/// Returns the number of violations.
pub fn monotonicity_violations(initial_cost: f64, history: &[IterationRecord]) -> usize {
    let mut prev = initial_cost;
    let mut violations = 0;
    for rec in history {
        if rec.cost > prev || (rec.accepted() && !(rec.cost < prev)) {
            violations += 1;
        }
        prev = rec.cost;
    }
    violations
}

/// Re-evaluate every accepted trial and its incumbent and count the moves
/// that do not satisfy strict improvement.
pub fn soundness_violations<O: Objective + ?Sized>(
    history: &[IterationRecord],
    objective: &O,
) -> usize {
    let mut violations = 0;
    for rec in history {
        for comp in &rec.components {
            for trial in comp.trials.iter().filter(|t| t.accepted) {
                let before = sanitize(objective.cost(&comp.incumbent, &rec.weights));
                let after = sanitize(objective.cost(&trial.candidate, &rec.weights));
                if !(after - before < 0.0) {
                    violations += 1;
                }
            }
        }
    }
    violations
}
