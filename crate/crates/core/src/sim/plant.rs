use crate::error::{Error, Result};
use crate::sim::tf::{Filter, TransferFunction};

/// Square transfer-function matrix. Entry `(i, j)` maps input `j` to
/// output `i`; every output is the sum of its row's channel outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Plant {
    dim: usize,
    // row-major
    channels: Vec<TransferFunction>,
}

impl Plant {
    pub fn siso(tf: TransferFunction) -> Self {
        Self {
            dim: 1,
            channels: vec![tf],
        }
    }

    pub fn mimo(channels: [[TransferFunction; 2]; 2]) -> Result<Self> {
        let channels: Vec<_> = channels.into_iter().flatten().collect();
        let dt = channels[0].dt();
        if let Some(other) = channels.iter().find(|tf| tf.dt() != dt) {
            return Err(Error::SampleTimeMismatch {
                expected: dt,
                found: other.dt(),
            });
        }
        Ok(Self { dim: 2, channels })
    }

    /// Number of inputs (= number of outputs).
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dt(&self) -> f64 {
        self.channels[0].dt()
    }

    pub fn channel(&self, row: usize, col: usize) -> &TransferFunction {
        &self.channels[row * self.dim + col]
    }

    /// Channels in row-major order with their `(row, col)` index.
    pub fn channels(&self) -> impl Iterator<Item = ((usize, usize), &TransferFunction)> {
        let dim = self.dim;
        self.channels
            .iter()
            .enumerate()
            .map(move |(idx, tf)| ((idx / dim, idx % dim), tf))
    }

    /// Every channel must carry at least one sample of delay.
    pub fn check_strictly_proper(&self) -> Result<()> {
        match self.channels().find(|(_, tf)| !tf.is_strictly_proper()) {
            Some(((row, col), _)) => Err(Error::AlgebraicLoop { row, col }),
            None => Ok(()),
        }
    }

    pub fn is_stable(&self) -> bool {
        self.channels.iter().all(TransferFunction::is_stable)
    }
}

/// Running state of a [`Plant`]: one filter per channel.
#[derive(Debug, Clone)]
pub(crate) struct PlantState {
    dim: usize,
    filters: Vec<Filter>,
}

impl PlantState {
    pub(crate) fn new(plant: &Plant) -> Self {
        Self {
            dim: plant.dim,
            filters: plant.channels.iter().cloned().map(Filter::new).collect(),
        }
    }

    /// Output `i` as determined by past inputs (strictly proper channels).
    pub(crate) fn output(&self, row: usize) -> f64 {
        self.filters[row * self.dim..(row + 1) * self.dim]
            .iter()
            .map(Filter::free_response)
            .sum()
    }

    pub(crate) fn advance(&mut self, inputs: &[f64]) {
        for (idx, filter) in self.filters.iter_mut().enumerate() {
            filter.step(inputs[idx % self.dim]);
        }
    }
}
