use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Signals recorded for one control loop.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LoopTrace {
    pub reference: Vec<f64>,
    pub output: Vec<f64>,
    pub control: Vec<f64>,
    pub error: Vec<f64>,
    pub saturated: Vec<bool>,
}

impl LoopTrace {
    pub(crate) fn with_capacity(n: usize) -> Self {
        Self {
            reference: Vec::with_capacity(n),
            output: Vec::with_capacity(n),
            control: Vec::with_capacity(n),
            error: Vec::with_capacity(n),
            saturated: Vec::with_capacity(n),
        }
    }

    pub(crate) fn push(&mut self, r: f64, y: f64, e: f64, u: f64, saturated: bool) {
        self.reference.push(r);
        self.output.push(y);
        self.error.push(e);
        self.control.push(u);
        self.saturated.push(saturated);
    }
}

/// Time-aligned closed-loop record on the grid `t[k] = k·dt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationTrace {
    pub dt: f64,
    pub time: Vec<f64>,
    pub loops: Vec<LoopTrace>,
}

impl SimulationTrace {
    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    /// Check the structural invariants: equal series lengths, a uniform
    /// strictly increasing time grid, and `e = r − y` at every sample.
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidTrace(format!("bad dt {}", self.dt)));
        }
        let n = self.time.len();
        for (k, &t) in self.time.iter().enumerate() {
            if t != k as f64 * self.dt {
                return Err(Error::InvalidTrace(format!(
                    "time[{k}] = {t}, expected {}",
                    k as f64 * self.dt
                )));
            }
        }
        for (i, lt) in self.loops.iter().enumerate() {
            let lens = [
                lt.reference.len(),
                lt.output.len(),
                lt.control.len(),
                lt.error.len(),
                lt.saturated.len(),
            ];
            if lens.iter().any(|&l| l != n) {
                return Err(Error::InvalidTrace(format!(
                    "loop {i}: series lengths {lens:?}, time has {n}"
                )));
            }
            for k in 0..n {
                if lt.error[k] != lt.reference[k] - lt.output[k] {
                    return Err(Error::InvalidTrace(format!(
                        "loop {i}: e[{k}] != r[{k}] - y[{k}]"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Validate and additionally require `horizon/dt + 1` samples.
    pub fn validate_complete(&self, steps: usize) -> Result<()> {
        self.validate()?;
        if self.len() != steps + 1 {
            return Err(Error::InvalidTrace(format!(
                "expected {} samples, found {}",
                steps + 1,
                self.len()
            )));
        }
        Ok(())
    }
}
