//! Fixed-step simulation of discrete-time LTI plants, open loop and in
//! closed loop with per-loop controllers.
//!
//! Each closed-loop step measures before it acts: `y[k]` is read from the
//! plant memory, `e[k] = r[k] − y[k]` is formed, every controller produces
//! `u[k]`, and only then are the plant channels advanced with `u[k]`. The
//! plant therefore has to be strictly proper in every channel. All plant
//! memories start at zero.

mod plant;
mod reference;
mod tf;
mod trace;

pub use plant::Plant;
pub use reference::{ReferenceProfile, Segment};
pub use tf::{normalize, Filter, TransferFunction};
pub use trace::{LoopTrace, SimulationTrace};

use crate::error::{Error, Result};
use plant::PlantState;

/// Default magnitude beyond which an output is treated as divergent.
pub const DEFAULT_DIVERGENCE_BOUND: f64 = 1e9;

/// Controller output for one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlOutput {
    pub u: f64,
    pub saturated: bool,
}

/// A per-loop feedback law driven by the tracking error.
pub trait LoopController {
    fn step(&mut self, error: f64) -> Result<ControlOutput>;
}

impl<C: LoopController + ?Sized> LoopController for &mut C {
    fn step(&mut self, error: f64) -> Result<ControlOutput> {
        (**self).step(error)
    }
}

#[derive(Debug, Clone)]
pub struct SimOptions {
    pub horizon_s: f64,
    pub divergence_bound: f64,
    /// Additive disturbance on each measured output; `None` for none.
    pub output_disturbances: Vec<Option<ReferenceProfile>>,
}

impl SimOptions {
    pub fn new(horizon_s: f64) -> Self {
        Self {
            horizon_s,
            divergence_bound: DEFAULT_DIVERGENCE_BOUND,
            output_disturbances: Vec::new(),
        }
    }
}

/// Result of a closed-loop run. When the run diverged, `trace` holds the
/// samples completed before the blow-up.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedLoopRun {
    pub trace: SimulationTrace,
    pub steps: usize,
    pub diverged_at: Option<usize>,
}

impl ClosedLoopRun {
    pub fn diverged(&self) -> bool {
        self.diverged_at.is_some()
    }
}

/// Number of `dt` steps in `horizon_s`; errors unless it is a positive
/// integer multiple.
pub fn step_count(horizon_s: f64, dt: f64) -> Result<usize> {
    let ratio = horizon_s / dt;
    let n = ratio.round();
    if !(ratio.is_finite() && n >= 1.0 && (ratio - n).abs() <= 1e-9 * n.max(1.0)) {
        return Err(Error::HorizonNotMultiple {
            horizon: horizon_s,
            dt,
        });
    }
    Ok(n as usize)
}

/// Open-loop response of a single transfer function (zero initial state).
pub fn open_loop_response(tf: &TransferFunction, input: &[f64]) -> Result<Vec<f64>> {
    tf.response(input)
}

pub fn simulate_closed_loop<C: LoopController>(
    plant: &Plant,
    controllers: &mut [C],
    references: &[ReferenceProfile],
    horizon_s: f64,
) -> Result<ClosedLoopRun> {
    simulate_closed_loop_with(plant, controllers, references, &SimOptions::new(horizon_s))
}

/// Closed-loop simulation; controller `i` commands plant input `i` and is fed
/// the error of output `i`.
pub fn simulate_closed_loop_with<C: LoopController>(
    plant: &Plant,
    controllers: &mut [C],
    references: &[ReferenceProfile],
    options: &SimOptions,
) -> Result<ClosedLoopRun> {
    let dim = plant.dim();
    for found in [controllers.len(), references.len()] {
        if found != dim {
            return Err(Error::LoopCountMismatch {
                expected: dim,
                found,
            });
        }
    }
    if !options.output_disturbances.is_empty() && options.output_disturbances.len() != dim {
        return Err(Error::LoopCountMismatch {
            expected: dim,
            found: options.output_disturbances.len(),
        });
    }
    plant.check_strictly_proper()?;
    let dt = plant.dt();
    let steps = step_count(options.horizon_s, dt)?;

    let mut state = PlantState::new(plant);
    let mut trace = SimulationTrace {
        dt,
        time: Vec::with_capacity(steps + 1),
        loops: (0..dim)
            .map(|_| LoopTrace::with_capacity(steps + 1))
            .collect(),
    };
    let mut inputs = vec![0.0; dim];
    let mut diverged_at = None;

    'outer: for k in 0..=steps {
        let t = k as f64 * dt;
        let mut outputs = [0.0; 2];
        for (i, y) in outputs.iter_mut().enumerate().take(dim) {
            let bias = options
                .output_disturbances
                .get(i)
                .and_then(Option::as_ref)
                .map_or(0.0, |d| d.sample(t));
            *y = state.output(i) + bias;
            if !(y.abs() <= options.divergence_bound) {
                diverged_at = Some(k);
                break 'outer;
            }
        }
        trace.time.push(t);
        for i in 0..dim {
            let r = references[i].sample(t);
            let e = r - outputs[i];
            let out = controllers[i].step(e)?;
            inputs[i] = out.u;
            trace.loops[i].push(r, outputs[i], e, out.u, out.saturated);
        }
        if k < steps {
            state.advance(&inputs);
        }
    }

    Ok(ClosedLoopRun {
        trace,
        steps,
        diverged_at,
    })
}
