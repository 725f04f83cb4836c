//! Discrete PI control with output clamping and conditional integration.
//!
//! The integrator uses backward Euler, `i ← i + k_i·dt·e`, and is folded into
//! the current output. Integration happens only when the gate admits it
//! (always, or `|e| ≤ δ` with conditional integration on) and is rolled back
//! whenever the output had to be clamped, so the integrator never moves
//! while the actuator is saturated.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{ControlOutput, LoopController};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiGains {
    pub kp: f64,
    /// Integral gain in 1/s.
    pub ki: f64,
}

impl PiGains {
    pub fn new(kp: f64, ki: f64) -> Result<Self> {
        for g in [kp, ki] {
            if !g.is_finite() {
                return Err(Error::NonFiniteGain(g));
            }
        }
        Ok(Self { kp, ki })
    }
}

/// Actuator range. Infinite bounds disable clamping on that side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LimitsDoc", into = "LimitsDoc")]
pub struct SaturationLimits {
    u_min: f64,
    u_max: f64,
}

impl SaturationLimits {
    pub fn new(u_min: f64, u_max: f64) -> Result<Self> {
        if u_min.is_nan() || u_max.is_nan() || u_min >= u_max {
            return Err(Error::InvalidLimits { u_min, u_max });
        }
        Ok(Self { u_min, u_max })
    }

    pub fn unbounded() -> Self {
        Self {
            u_min: f64::NEG_INFINITY,
            u_max: f64::INFINITY,
        }
    }

    pub fn u_min(&self) -> f64 {
        self.u_min
    }

    pub fn u_max(&self) -> f64 {
        self.u_max
    }

    pub fn clamp(&self, u: f64) -> f64 {
        u.clamp(self.u_min, self.u_max)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LimitsDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    u_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    u_max: Option<f64>,
}

impl TryFrom<LimitsDoc> for SaturationLimits {
    type Error = Error;

    fn try_from(doc: LimitsDoc) -> Result<Self> {
        Self::new(
            doc.u_min.unwrap_or(f64::NEG_INFINITY),
            doc.u_max.unwrap_or(f64::INFINITY),
        )
    }
}

impl From<SaturationLimits> for LimitsDoc {
    fn from(l: SaturationLimits) -> Self {
        Self {
            u_min: l.u_min.is_finite().then_some(l.u_min),
            u_max: l.u_max.is_finite().then_some(l.u_max),
        }
    }
}

/// Conditional-integration gate. An infinite band admits every finite error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CiDoc", into = "CiDoc")]
pub struct CiConfig {
    enabled: bool,
    error_band: f64,
}

impl CiConfig {
    pub fn new(enabled: bool, error_band: f64) -> Result<Self> {
        if !(error_band > 0.0) {
            return Err(Error::InvalidErrorBand(error_band));
        }
        Ok(Self {
            enabled,
            error_band,
        })
    }

    pub fn disabled() -> Self {
        Self {
            enabled: false,
            error_band: f64::INFINITY,
        }
    }

    pub fn band(error_band: f64) -> Result<Self> {
        Self::new(true, error_band)
    }

    pub fn enabled(&self) -> bool {
        self.enabled
    }

    pub fn error_band(&self) -> f64 {
        self.error_band
    }

    pub fn with_enabled(self, enabled: bool) -> Self {
        Self { enabled, ..self }
    }

    /// Whether an integrator update is admitted for error `e`.
    pub fn admits(&self, e: f64) -> bool {
        !self.enabled || e.abs() <= self.error_band
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CiDoc {
    enabled: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    error_band: Option<f64>,
}

impl TryFrom<CiDoc> for CiConfig {
    type Error = Error;

    fn try_from(doc: CiDoc) -> Result<Self> {
        Self::new(doc.enabled, doc.error_band.unwrap_or(f64::INFINITY))
    }
}

impl From<CiConfig> for CiDoc {
    fn from(c: CiConfig) -> Self {
        Self {
            enabled: c.enabled,
            error_band: c.error_band.is_finite().then_some(c.error_band),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PiController {
    pub gains: PiGains,
    pub limits: SaturationLimits,
    pub ci: CiConfig,
    dt: f64,
    integrator: f64,
}

impl PiController {
    pub fn new(gains: PiGains, limits: SaturationLimits, ci: CiConfig, dt: f64) -> Self {
        Self {
            gains,
            limits,
            ci,
            dt,
            integrator: 0.0,
        }
    }

    pub fn integrator(&self) -> f64 {
        self.integrator
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Preload the integrator, e.g. to resume from a known operating point.
    pub fn with_integrator(mut self, value: f64) -> Self {
        self.integrator = value;
        self
    }

    pub fn ci_gate(&self, e: f64) -> bool {
        self.ci.admits(e)
    }

    pub fn reset(&mut self) {
        self.integrator = 0.0;
    }

    pub fn step(&mut self, e: f64) -> Result<ControlOutput> {
        if !e.is_finite() {
            return Err(Error::NonFiniteError(e));
        }
        let admitted = self.ci_gate(e);
        let candidate = if admitted {
            self.integrator + self.gains.ki * self.dt * e
        } else {
            self.integrator
        };
        let tentative = self.gains.kp * e + candidate;
        let u = self.limits.clamp(tentative);
        let saturated = u != tentative;
        if !saturated {
            self.integrator = candidate;
        }
        Ok(ControlOutput { u, saturated })
    }
}

impl LoopController for PiController {
    fn step(&mut self, error: f64) -> Result<ControlOutput> {
        PiController::step(self, error)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ctrl(limits: SaturationLimits, ci: CiConfig) -> PiController {
        PiController::new(PiGains::new(2.0, 1.0).unwrap(), limits, ci, 0.5).with_integrator(0.3)
    }

    #[test]
    fn unsaturated_step() {
        let mut c = ctrl(SaturationLimits::unbounded(), CiConfig::disabled());
        let out = c.step(0.4).unwrap();
        assert!((c.integrator() - 0.5).abs() < 1e-15);
        assert!((out.u - 1.3).abs() < 1e-15);
        assert!(!out.saturated);
    }

    #[test]
    fn clamped_step_rolls_back_integrator() {
        let mut c = ctrl(
            SaturationLimits::new(-1.0, 1.0).unwrap(),
            CiConfig::disabled(),
        );
        let out = c.step(0.4).unwrap();
        assert_eq!(out.u, 1.0);
        assert!(out.saturated);
        assert_eq!(c.integrator(), 0.3);
    }

    #[test]
    fn band_gate_freezes_integrator_outside_band() {
        let mut c = ctrl(SaturationLimits::unbounded(), CiConfig::band(0.1).unwrap());
        let out = c.step(0.4).unwrap();
        assert_eq!(c.integrator(), 0.3);
        assert!((out.u - 1.1).abs() < 1e-15);
    }

    #[test]
    fn zero_error_outputs_integrator() {
        for ci in [CiConfig::disabled(), CiConfig::band(0.1).unwrap()] {
            let mut c = ctrl(SaturationLimits::new(-5.0, 5.0).unwrap(), ci);
            let out = c.step(0.0).unwrap();
            assert_eq!(out.u, 0.3);
            assert_eq!(c.integrator(), 0.3);
        }
    }

    #[test]
    fn gate_rules() {
        let c = ctrl(SaturationLimits::unbounded(), CiConfig::disabled());
        assert!(c.ci_gate(1e6));
        let c = ctrl(SaturationLimits::unbounded(), CiConfig::band(0.1).unwrap());
        assert!(c.ci_gate(0.05));
        assert!(!c.ci_gate(-0.2));
        assert!(!c.ci_gate(0.2));
    }

    #[test]
    fn reset_clears_integrator_only() {
        let mut c = ctrl(
            SaturationLimits::new(-1.0, 1.0).unwrap(),
            CiConfig::disabled(),
        )
        .with_integrator(5.0);
        let before = c.clone();
        c.reset();
        assert_eq!(c.integrator(), 0.0);
        let once = c.clone();
        c.reset();
        assert_eq!(c, once);
        assert_eq!(c.gains, before.gains);
        assert_eq!(c.limits, before.limits);
        assert_eq!(c.ci, before.ci);
    }

    #[test]
    fn rejects_invalid_config() {
        assert!(SaturationLimits::new(1.0, 1.0).is_err());
        assert!(SaturationLimits::new(2.0, 1.0).is_err());
        assert!(CiConfig::band(0.0).is_err());
        assert!(CiConfig::band(-1.0).is_err());
        assert!(PiGains::new(f64::NAN, 0.0).is_err());
        let mut c = ctrl(SaturationLimits::unbounded(), CiConfig::disabled());
        assert!(c.step(f64::NAN).is_err());
    }

    #[test]
    fn serde_shapes() {
        let l: SaturationLimits = serde_json::from_str(r#"{"u_max": 3}"#).unwrap();
        assert_eq!(l.u_min(), f64::NEG_INFINITY);
        assert_eq!(serde_json::to_string(&l).unwrap(), r#"{"u_max":3.0}"#);
        assert!(serde_json::from_str::<SaturationLimits>(r#"{"u_min": 3, "u_max": 1}"#).is_err());
        let ci: CiConfig = serde_json::from_str(r#"{"enabled": true}"#).unwrap();
        assert_eq!(ci.error_band(), f64::INFINITY);
    }

    proptest! {
        #[test]
        fn output_within_limits_and_integrator_frozen_when_saturated(
            kp in -5.0..5.0f64,
            ki in 0.0..5.0f64,
            lo in -3.0..0.0f64,
            width in 0.1..6.0f64,
            band in prop_oneof![Just(f64::INFINITY), 0.05..2.0f64],
            errors in prop::collection::vec(-4.0..4.0f64, 1..200),
        ) {
            let limits = SaturationLimits::new(lo, lo + width).unwrap();
            let mut c = PiController::new(
                PiGains::new(kp, ki).unwrap(), limits, CiConfig::band(band).unwrap(), 0.5);
            for e in errors {
                let before = c.integrator();
                let out = c.step(e).unwrap();
                prop_assert!(out.u >= limits.u_min() && out.u <= limits.u_max());
                if out.saturated {
                    prop_assert_eq!(c.integrator(), before);
                }
            }
        }

        #[test]
        fn infinite_band_matches_disabled_gate(
            kp in -5.0..5.0f64,
            ki in -5.0..5.0f64,
            errors in prop::collection::vec(-1e3..1e3f64, 1..200),
        ) {
            let gains = PiGains::new(kp, ki).unwrap();
            let limits = SaturationLimits::new(-10.0, 10.0).unwrap();
            let mut gated = PiController::new(gains, limits, CiConfig::band(f64::INFINITY).unwrap(), 0.1);
            let mut plain = PiController::new(gains, limits, CiConfig::disabled(), 0.1);
            for e in errors {
                let a = gated.step(e).unwrap();
                let b = plain.step(e).unwrap();
                prop_assert_eq!(a.u.to_bits(), b.u.to_bits());
                prop_assert_eq!(a.saturated, b.saturated);
                prop_assert_eq!(gated.integrator().to_bits(), plain.integrator().to_bits());
            }
        }
    }
}
