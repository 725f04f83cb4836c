//! Scenario documents: schema, validation, and built-in fixtures.
//!
//! A [`Scenario`] can only be obtained through validation, either from a
//! JSON document or from one of the built-in constructors, so every value of
//! the type satisfies the schema invariants.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::control::{CiConfig, PiController, PiGains, SaturationLimits};
use crate::error::Result;
use crate::objective::{CostSpec, MetricKind, WeightMode};
use crate::sim::{
    self, ClosedLoopRun, Plant, ReferenceProfile, Segment, SimOptions, TransferFunction,
};
use crate::smdo::{OptimizerConfig, ParameterVector};

/// Invalid or unreadable scenario. `path` names the offending field, e.g.
/// `loops[1].saturation`.
#[derive(Debug)]
pub enum ScenarioError {
    Io {
        file: String,
        source: std::io::Error,
    },
    Parse {
        path: String,
        message: String,
    },
    Invalid {
        path: String,
        message: String,
    },
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Io { file, source } => write!(f, "cannot read {file}: {source}"),
            Self::Parse { path, message } if path.is_empty() || path == "." => {
                write!(f, "parse error: {message}")
            }
            Self::Parse { path, message } => write!(f, "parse error at {path}: {message}"),
            Self::Invalid { path, message } => write!(f, "{path}: {message}"),
        }
    }
}

impl std::error::Error for ScenarioError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Self::Io { source, .. } => Some(source),
            _ => None,
        }
    }
}

fn invalid(path: impl Into<String>, message: impl fmt::Display) -> ScenarioError {
    ScenarioError::Invalid {
        path: path.into(),
        message: message.to_string(),
    }
}

/// Coefficients of one transfer function, ascending powers of `z⁻¹`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TfDoc {
    pub num: Vec<f64>,
    pub den: Vec<f64>,
    /// Must equal the scenario's `dt_s` when given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PlantDoc {
    Siso(TfDoc),
    /// `mimo[i][j]` maps input `j` to output `i`.
    Mimo([[TfDoc; 2]; 2]),
}

/// Inclusive search bounds for one loop's gains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainBounds {
    pub kp: [f64; 2],
    pub ki: [f64; 2],
}

impl GainBounds {
    pub fn midpoint(&self) -> PiGains {
        PiGains {
            kp: 0.5 * (self.kp[0] + self.kp[1]),
            ki: 0.5 * (self.ki[0] + self.ki[1]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopDoc {
    /// Defaults to the midpoint of `gains_bounds`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gains_init: Option<PiGains>,
    pub gains_bounds: GainBounds,
    /// Optimizer step scales; defaults to a tenth of each bound width.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gains_step: Option<PiGains>,
    #[serde(default = "SaturationLimits::unbounded")]
    pub saturation: SaturationLimits,
    #[serde(default = "CiConfig::disabled")]
    pub ci: CiConfig,
    pub reference: ReferenceProfile,
    /// Additive disturbance on the measured output.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disturbance: Option<ReferenceProfile>,
}

/// Serialized form of a [`Scenario`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    #[serde(default)]
    pub name: String,
    pub plant: PlantDoc,
    pub loops: Vec<LoopDoc>,
    pub horizon_s: f64,
    pub dt_s: f64,
    pub cost: CostSpec,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
}

/// Validated per-loop controller configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopConfig {
    pub gains_init: PiGains,
    pub gains_bounds: GainBounds,
    pub gains_step: PiGains,
    pub saturation: SaturationLimits,
    pub ci: CiConfig,
    pub reference: ReferenceProfile,
    pub disturbance: Option<ReferenceProfile>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    name: String,
    plant: Plant,
    loops: Vec<LoopConfig>,
    horizon_s: f64,
    dt_s: f64,
    steps: usize,
    cost: CostSpec,
    optimizer: OptimizerConfig,
}

fn build_tf(doc: &TfDoc, dt: f64, path: &str) -> Result<TransferFunction, ScenarioError> {
    if let Some(own) = doc.dt_s {
        if own != dt {
            return Err(invalid(
                format!("{path}.dt_s"),
                format!("sample time {own} differs from scenario dt_s {dt}"),
            ));
        }
    }
    let tf = TransferFunction::new(doc.num.clone(), doc.den.clone(), dt)
        .map_err(|e| invalid(path, e))?;
    if !tf.is_strictly_proper() {
        return Err(invalid(
            path,
            "algebraic loop risk: plant must be strictly proper",
        ));
    }
    Ok(tf)
}

fn tf_doc(tf: &TransferFunction) -> TfDoc {
    TfDoc {
        num: tf.numerator().to_vec(),
        den: tf.denominator().to_vec(),
        dt_s: None,
    }
}

fn check_range(path: String, range: [f64; 2]) -> Result<(), ScenarioError> {
    if !(range[0].is_finite() && range[1].is_finite() && range[0] <= range[1]) {
        return Err(invalid(
            path,
            format!("bounds {range:?} are not well ordered"),
        ));
    }
    Ok(())
}

impl Scenario {
    pub fn from_doc(doc: ScenarioDoc) -> Result<Self, ScenarioError> {
        let dt = doc.dt_s;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(invalid("dt_s", format!("must be positive, got {dt}")));
        }
        let steps = sim::step_count(doc.horizon_s, dt).map_err(|e| invalid("horizon_s", e))?;

        let plant = match &doc.plant {
            PlantDoc::Siso(tf) => Plant::siso(build_tf(tf, dt, "plant.siso")?),
            PlantDoc::Mimo(grid) => {
                let tf = |i: usize, j: usize| {
                    build_tf(&grid[i][j], dt, &format!("plant.mimo[{i}][{j}]"))
                };
                Plant::mimo([[tf(0, 0)?, tf(0, 1)?], [tf(1, 0)?, tf(1, 1)?]])
                    .map_err(|e| invalid("plant", e))?
            }
        };

        if doc.loops.len() != plant.dim() {
            return Err(invalid(
                "loops",
                format!(
                    "plant has {} inputs, found {} loops",
                    plant.dim(),
                    doc.loops.len()
                ),
            ));
        }
        let loops = doc
            .loops
            .into_iter()
            .enumerate()
            .map(|(i, l)| Self::build_loop(i, l))
            .collect::<Result<Vec<_>, _>>()?;

        let cost = doc.cost;
        if cost.metrics.len() != loops.len() {
            return Err(invalid(
                "cost.metrics",
                format!("expected {} entries", loops.len()),
            ));
        }
        if cost.weights.len() != loops.len() {
            return Err(invalid(
                "cost.weights",
                format!("expected {} entries", loops.len()),
            ));
        }
        if let Some(idx) = cost.weights.iter().position(|w| !(0.0..=1.0).contains(w)) {
            return Err(invalid(
                format!("cost.weights[{idx}]"),
                "weight must lie in [0, 1]",
            ));
        }
        if !(cost.divergence_bound > 0.0) {
            return Err(invalid("cost.divergence_bound", "must be positive"));
        }
        doc.optimizer
            .validate()
            .map_err(|e| invalid("optimizer", e))?;

        Ok(Self {
            name: doc.name,
            plant,
            loops,
            horizon_s: doc.horizon_s,
            dt_s: dt,
            steps,
            cost,
            optimizer: doc.optimizer,
        })
    }

    fn build_loop(i: usize, doc: LoopDoc) -> Result<LoopConfig, ScenarioError> {
        let path = |field: &str| format!("loops[{i}].{field}");
        let bounds = doc.gains_bounds;
        check_range(path("gains_bounds.kp"), bounds.kp)?;
        check_range(path("gains_bounds.ki"), bounds.ki)?;
        let init = doc.gains_init.unwrap_or_else(|| bounds.midpoint());
        PiGains::new(init.kp, init.ki).map_err(|e| invalid(path("gains_init"), e))?;
        if !(bounds.kp[0] <= init.kp && init.kp <= bounds.kp[1]) {
            return Err(invalid(path("gains_init.kp"), "outside gains_bounds.kp"));
        }
        if !(bounds.ki[0] <= init.ki && init.ki <= bounds.ki[1]) {
            return Err(invalid(path("gains_init.ki"), "outside gains_bounds.ki"));
        }
        let step = doc.gains_step.unwrap_or(PiGains {
            kp: 0.1 * (bounds.kp[1] - bounds.kp[0]),
            ki: 0.1 * (bounds.ki[1] - bounds.ki[0]),
        });
        if !(step.kp > 0.0 && step.ki > 0.0 && step.kp.is_finite() && step.ki.is_finite()) {
            return Err(invalid(
                path("gains_step"),
                "step scales must be positive and finite",
            ));
        }
        Ok(LoopConfig {
            gains_init: init,
            gains_bounds: bounds,
            gains_step: step,
            saturation: doc.saturation,
            ci: doc.ci,
            reference: doc.reference,
            disturbance: doc.disturbance,
        })
    }

    pub fn to_doc(&self) -> ScenarioDoc {
        let plant = if self.plant.dim() == 1 {
            PlantDoc::Siso(tf_doc(self.plant.channel(0, 0)))
        } else {
            let c = |i, j| tf_doc(self.plant.channel(i, j));
            PlantDoc::Mimo([[c(0, 0), c(0, 1)], [c(1, 0), c(1, 1)]])
        };
        ScenarioDoc {
            name: self.name.clone(),
            plant,
            loops: self
                .loops
                .iter()
                .map(|l| LoopDoc {
                    gains_init: Some(l.gains_init),
                    gains_bounds: l.gains_bounds,
                    gains_step: Some(l.gains_step),
                    saturation: l.saturation,
                    ci: l.ci,
                    reference: l.reference.clone(),
                    disturbance: l.disturbance.clone(),
                })
                .collect(),
            horizon_s: self.horizon_s,
            dt_s: self.dt_s,
            cost: self.cost.clone(),
            optimizer: self.optimizer.clone(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let doc: ScenarioDoc =
            serde_path_to_error::deserialize(de).map_err(|e| ScenarioError::Parse {
                path: e.path().to_string(),
                message: e.inner().to_string(),
            })?;
        Self::from_doc(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("scenario documents always serialize")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn plant(&self) -> &Plant {
        &self.plant
    }

    pub fn loops(&self) -> &[LoopConfig] {
        &self.loops
    }

    pub fn horizon_s(&self) -> f64 {
        self.horizon_s
    }

    pub fn dt_s(&self) -> f64 {
        self.dt_s
    }

    /// Number of `dt` steps in the horizon; traces hold `steps + 1` samples.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn cost(&self) -> &CostSpec {
        &self.cost
    }

    pub fn optimizer(&self) -> &OptimizerConfig {
        &self.optimizer
    }

    pub fn with_optimizer(mut self, optimizer: OptimizerConfig) -> Result<Self> {
        optimizer.validate()?;
        self.optimizer = optimizer;
        Ok(self)
    }

    /// Same scenario with conditional integration switched on or off in every
    /// loop; the configured error bands are kept.
    pub fn with_ci_enabled(mut self, enabled: bool) -> Self {
        for l in &mut self.loops {
            l.ci = l.ci.with_enabled(enabled);
        }
        self
    }

    pub fn with_weights(
        mut self,
        weights: Vec<f64>,
        mode: WeightMode,
    ) -> Result<Self, ScenarioError> {
        if weights.len() != self.loops.len() || weights.iter().any(|w| !(0.0..=1.0).contains(w)) {
            return Err(invalid(
                "cost.weights",
                "one weight in [0, 1] per loop required",
            ));
        }
        self.cost.weights = weights;
        self.cost.weight_mode = mode;
        Ok(self)
    }

    pub fn initial_gains(&self) -> Vec<PiGains> {
        self.loops.iter().map(|l| l.gains_init).collect()
    }

    /// Optimizer vector `[kp₁, ki₁, kp₂, ki₂, …]` at the initial gains.
    pub fn initial_parameters(&self) -> ParameterVector {
        let mut values = Vec::new();
        let mut steps = Vec::new();
        let mut lower = Vec::new();
        let mut upper = Vec::new();
        for l in &self.loops {
            values.extend([l.gains_init.kp, l.gains_init.ki]);
            steps.extend([l.gains_step.kp, l.gains_step.ki]);
            lower.extend([l.gains_bounds.kp[0], l.gains_bounds.ki[0]]);
            upper.extend([l.gains_bounds.kp[1], l.gains_bounds.ki[1]]);
        }
        ParameterVector::new(values, steps, lower, upper).expect("validated at load")
    }

    pub fn gains_from_params(params: &[f64]) -> Vec<PiGains> {
        params
            .chunks_exact(2)
            .map(|c| PiGains { kp: c[0], ki: c[1] })
            .collect()
    }

    pub fn params_from_gains(gains: &[PiGains]) -> Vec<f64> {
        gains.iter().flat_map(|g| [g.kp, g.ki]).collect()
    }

    pub fn controllers(&self, gains: &[PiGains]) -> Result<Vec<PiController>> {
        if gains.len() != self.loops.len() {
            return Err(crate::Error::LoopCountMismatch {
                expected: self.loops.len(),
                found: gains.len(),
            });
        }
        self.loops
            .iter()
            .zip(gains)
            .map(|(l, g)| {
                Ok(PiController::new(
                    PiGains::new(g.kp, g.ki)?,
                    l.saturation,
                    l.ci,
                    self.dt_s,
                ))
            })
            .collect()
    }

    /// Closed-loop run with the given per-loop gains.
    pub fn simulate(&self, gains: &[PiGains]) -> Result<ClosedLoopRun> {
        let mut controllers = self.controllers(gains)?;
        let references: Vec<_> = self.loops.iter().map(|l| l.reference.clone()).collect();
        let options = SimOptions {
            horizon_s: self.horizon_s,
            divergence_bound: self.cost.divergence_bound,
            output_disturbances: self.loops.iter().map(|l| l.disturbance.clone()).collect(),
        };
        sim::simulate_closed_loop_with(&self.plant, &mut controllers, &references, &options)
    }
}

/// Read and validate a scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        file: path.display().to_string(),
        source,
    })?;
    Scenario::from_json(&text)
}

fn siso_oracle(name: &str, tf: TransferFunction) -> Scenario {
    let doc = ScenarioDoc {
        name: name.into(),
        plant: PlantDoc::Siso(tf_doc(&tf)),
        loops: vec![LoopDoc {
            gains_init: None,
            gains_bounds: GainBounds {
                kp: [0.0, 1.0],
                ki: [0.0, 1.0],
            },
            gains_step: None,
            saturation: SaturationLimits::unbounded(),
            ci: CiConfig::disabled(),
            reference: ReferenceProfile::constant(1.0),
            disturbance: None,
        }],
        horizon_s: 100.0,
        dt_s: 1.0,
        cost: CostSpec {
            metrics: vec![MetricKind::Itae],
            weights: vec![1.0],
            weight_mode: WeightMode::Fixed,
            divergence_bound: sim::DEFAULT_DIVERGENCE_BOUND,
        },
        optimizer: OptimizerConfig::default(),
    };
    Scenario::from_doc(doc).expect("oracle fixtures are valid")
}

/// Analytic test plants: unit delay, first order with pole 0.9 and unit DC
/// gain, and a second-order plant with real poles 0.8 and 0.6.
pub fn builtin_oracle_plants() -> Vec<Scenario> {
    vec![
        siso_oracle(
            "oracle-unit-delay",
            TransferFunction::unit_delay(1.0).unwrap(),
        ),
        siso_oracle(
            "oracle-first-order",
            TransferFunction::new(vec![0.0, 0.1], vec![1.0, -0.9], 1.0).unwrap(),
        ),
        // (1 − 0.8z⁻¹)(1 − 0.6z⁻¹), numerator (1 − 0.8)(1 − 0.6).
        siso_oracle(
            "oracle-second-order",
            TransferFunction::new(vec![0.0, 0.08], vec![1.0, -1.4, 0.48], 1.0).unwrap(),
        ),
    ]
}

/// Two-loop surrogate of a vapour-compression refrigeration cycle.
///
/// Loop 1 stands in for the evaporator secondary-flux outlet temperature
/// (slow channel, pole 0.98, three samples of input-to-output delay) and
/// loop 2 for the degree of superheat (pole 0.9). Coefficients are synthetic
/// fixture data, not the benchmark model. Loop 1 carries a constant output
/// disturbance that a pure proportional action cannot remove. Conditional
/// integration is configured (band 0.5) but disabled; see
/// `scenarios/README.md` for the derivation.
pub fn builtin_surrogate_refrigeration() -> Scenario {
    let dt = 1.0;
    let fo = |[b, a]: [f64; 2]| TfDoc {
        num: vec![0.0, b],
        den: vec![1.0, -a],
        dt_s: None,
    };
    let mut slow = fo(SURROGATE.g11);
    slow.num
        .splice(0..0, std::iter::repeat_n(0.0, SURROGATE.delay_11));
    let doc = ScenarioDoc {
        name: "surrogate-refrigeration".into(),
        plant: PlantDoc::Mimo([
            [slow, fo(SURROGATE.g12)],
            [fo(SURROGATE.g21), fo(SURROGATE.g22)],
        ]),
        loops: vec![
            LoopDoc {
                gains_init: None,
                gains_bounds: GainBounds {
                    kp: [0.0, 10.0],
                    ki: [0.0, 10.0],
                },
                gains_step: Some(PiGains { kp: 1.0, ki: 1.0 }),
                saturation: SaturationLimits::new(SURROGATE.u1_limits[0], SURROGATE.u1_limits[1])
                    .unwrap(),
                ci: CiConfig::new(false, SURROGATE.band_1).unwrap(),
                reference: ReferenceProfile::new(
                    SURROGATE
                        .reference_1
                        .iter()
                        .map(|&(start_s, level)| Segment::Hold { start_s, level })
                        .collect(),
                )
                .unwrap(),
                disturbance: Some(ReferenceProfile::constant(SURROGATE.bias_1)),
            },
            LoopDoc {
                gains_init: None,
                gains_bounds: GainBounds {
                    kp: [0.0, 10.0],
                    ki: [0.0, 10.0],
                },
                gains_step: Some(PiGains { kp: 1.0, ki: 1.0 }),
                saturation: SaturationLimits::new(SURROGATE.u2_limits[0], SURROGATE.u2_limits[1])
                    .unwrap(),
                ci: CiConfig::new(false, SURROGATE.band_2).unwrap(),
                reference: ReferenceProfile::new(
                    SURROGATE
                        .reference_2
                        .iter()
                        .map(|&(start_s, level)| Segment::Hold { start_s, level })
                        .collect(),
                )
                .unwrap(),
                disturbance: None,
            },
        ],
        horizon_s: 1200.0,
        dt_s: dt,
        cost: CostSpec::uniform(MetricKind::Itae, 2),
        optimizer: OptimizerConfig::default(),
    };
    let scenario = Scenario::from_doc(doc).expect("surrogate fixture is valid");
    assert!(
        scenario.plant().is_stable(),
        "surrogate channels must be stable"
    );
    scenario
}

/// Hand-tuned gains standing in for the pre-existing controller that tuned
/// gains are compared against.
pub fn surrogate_baseline_gains() -> Vec<PiGains> {
    SURROGATE.baseline.to_vec()
}

/// Channels are `[b, a]` for `b·z⁻¹ / (1 − a·z⁻¹)`, DC gain `b / (1 − a)`.
struct SurrogateFixture {
    g11: [f64; 2],
    /// Extra samples of input delay on the loop-1 channel.
    delay_11: usize,
    g12: [f64; 2],
    g21: [f64; 2],
    g22: [f64; 2],
    u1_limits: [f64; 2],
    u2_limits: [f64; 2],
    band_1: f64,
    band_2: f64,
    bias_1: f64,
    reference_1: &'static [(f64, f64)],
    reference_2: &'static [(f64, f64)],
    baseline: [PiGains; 2],
}

const SURROGATE: SurrogateFixture = SurrogateFixture {
    g11: [0.02, 0.98],
    delay_11: 2,
    g12: [0.0075, 0.95],
    g21: [-0.005, 0.95],
    g22: [0.1, 0.9],
    u1_limits: [-6.0, 6.0],
    u2_limits: [-2.0, 6.0],
    band_1: 0.5,
    band_2: 0.5,
    bias_1: 0.5,
    reference_1: &[(0.0, 2.0), (400.0, 3.5), (1100.0, 2.5)],
    reference_2: &[(0.0, 1.0), (300.0, 2.0), (700.0, 1.5)],
    baseline: [PiGains { kp: 1.0, ki: 0.02 }, PiGains { kp: 0.8, ki: 0.05 }],
};

/// Look up a built-in scenario by name.
pub fn builtin(name: &str) -> Option<Scenario> {
    if name == "surrogate-refrigeration" {
        return Some(builtin_surrogate_refrigeration());
    }
    builtin_oracle_plants()
        .into_iter()
        .find(|s| s.name() == name)
}

pub const BUILTIN_NAMES: [&str; 4] = [
    "oracle-unit-delay",
    "oracle-first-order",
    "oracle-second-order",
    "surrogate-refrigeration",
];
