use crate::error::{Error, Result};

/// Rational discrete-time transfer function in ascending powers of `z⁻¹`:
///
/// ```text
///         b[0] + b[1] z⁻¹ + … + b[m] z⁻ᵐ
/// G(z) = --------------------------------
///         a[0] + a[1] z⁻¹ + … + a[n] z⁻ⁿ
/// ```
///
/// The stored denominator is always monic (`a[0] == 1`). In this convention a
/// transfer function is strictly proper (at least one sample of delay) exactly
/// when `b[0] == 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferFunction {
    num: Vec<f64>,
    den: Vec<f64>,
    dt: f64,
}

/// Divide both coefficient lists by the leading denominator coefficient.
pub fn normalize(num: &[f64], den: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if num.is_empty() {
        return Err(Error::EmptyCoefficients("numerator"));
    }
    let lead = *den.first().ok_or(Error::EmptyCoefficients("denominator"))?;
    if num.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFiniteCoefficient("numerator"));
    }
    if den.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFiniteCoefficient("denominator"));
    }
    if lead == 0.0 {
        return Err(Error::ZeroLeadingCoefficient);
    }
    if lead == 1.0 {
        return Ok((num.to_vec(), den.to_vec()));
    }
    Ok((
        num.iter().map(|c| c / lead).collect(),
        den.iter().map(|c| c / lead).collect(),
    ))
}

impl TransferFunction {
    pub fn new(num: Vec<f64>, den: Vec<f64>, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidSampleTime(dt));
        }
        let (num, den) = normalize(&num, &den)?;
        Ok(Self { num, den, dt })
    }

    /// `z⁻¹`
    pub fn unit_delay(dt: f64) -> Result<Self> {
        Self::new(vec![0.0, 1.0], vec![1.0], dt)
    }

    /// `y[k] = pole·y[k−1] + gain·(1 − pole)·u[k−1]`, DC gain `gain`.
    pub fn first_order(pole: f64, gain: f64, dt: f64) -> Result<Self> {
        Self::new(vec![0.0, gain * (1.0 - pole)], vec![1.0, -pole], dt)
    }

    /// Two real poles with one sample of delay and DC gain `gain`.
    pub fn second_order(p1: f64, p2: f64, gain: f64, dt: f64) -> Result<Self> {
        let b = gain * (1.0 - p1) * (1.0 - p2);
        Self::new(vec![0.0, b], vec![1.0, -(p1 + p2), p1 * p2], dt)
    }

    pub fn numerator(&self) -> &[f64] {
        &self.num
    }

    pub fn denominator(&self) -> &[f64] {
        &self.den
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn is_strictly_proper(&self) -> bool {
        self.num[0] == 0.0
    }

    /// `G(1)`; infinite when the denominator vanishes at `z = 1`.
    pub fn dc_gain(&self) -> f64 {
        let n: f64 = self.num.iter().sum();
        let d: f64 = self.den.iter().sum();
        n / d
    }

    /// Schur–Cohn step-down test: true iff every pole lies strictly inside
    /// the unit circle.
    pub fn is_stable(&self) -> bool {
        let mut poly = self.den.clone();
        while poly.len() > 1 && poly[poly.len() - 1] == 0.0 {
            poly.pop();
        }
        while poly.len() > 1 {
            let m = poly.len() - 1;
            let k = poly[m] / poly[0];
            if !(k.abs() < 1.0) {
                return false;
            }
            let scale = 1.0 - k * k;
            poly = (0..m)
                .map(|i| (poly[i] - k * poly[m - i]) / scale)
                .collect();
        }
        true
    }

    /// Zero-state response to `input`; output has the same length.
    pub fn response(&self, input: &[f64]) -> Result<Vec<f64>> {
        if let Some(idx) = input.iter().position(|u| !u.is_finite()) {
            return Err(Error::NonFiniteInput(idx));
        }
        let mut filter = Filter::new(self.clone());
        Ok(input.iter().map(|&u| filter.step(u)).collect())
    }
}

/// Direct-form difference-equation state for one transfer function.
#[derive(Debug, Clone)]
pub struct Filter {
    tf: TransferFunction,
    // u[k−1], u[k−2], …
    inputs: Vec<f64>,
    // y[k−1], y[k−2], …
    outputs: Vec<f64>,
}

impl Filter {
    pub fn new(tf: TransferFunction) -> Self {
        let inputs = vec![0.0; tf.num.len() - 1];
        let outputs = vec![0.0; tf.den.len() - 1];
        Self {
            tf,
            inputs,
            outputs,
        }
    }

    pub fn transfer_function(&self) -> &TransferFunction {
        &self.tf
    }

    /// Part of `y[k]` fixed by past samples. Equals `y[k]` for strictly
    /// proper filters.
    pub fn free_response(&self) -> f64 {
        let past_in: f64 = self.tf.num[1..]
            .iter()
            .zip(&self.inputs)
            .map(|(b, u)| b * u)
            .sum();
        let past_out: f64 = self.tf.den[1..]
            .iter()
            .zip(&self.outputs)
            .map(|(a, y)| a * y)
            .sum();
        past_in - past_out
    }

    /// Consume `u[k]`, return `y[k]`, and shift the history.
    pub fn step(&mut self, u: f64) -> f64 {
        let y = self.tf.num[0] * u + self.free_response();
        shift_in(&mut self.inputs, u);
        shift_in(&mut self.outputs, y);
        y
    }

    pub fn reset(&mut self) {
        self.inputs.iter_mut().for_each(|v| *v = 0.0);
        self.outputs.iter_mut().for_each(|v| *v = 0.0);
    }
}

fn shift_in(history: &mut [f64], value: f64) {
    if history.is_empty() {
        return;
    }
    history.rotate_right(1);
    history[0] = value;
}
