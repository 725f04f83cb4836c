use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One piece of a setpoint schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Segment {
    Hold {
        start_s: f64,
        level: f64,
    },
    /// Linear from `from` at `start_s` to `to` at `end_s`, then holds `to`.
    Ramp {
        start_s: f64,
        end_s: f64,
        from: f64,
        to: f64,
    },
}

impl Segment {
    pub fn start(&self) -> f64 {
        match *self {
            Segment::Hold { start_s, .. } | Segment::Ramp { start_s, .. } => start_s,
        }
    }

    fn value_at(&self, t: f64) -> f64 {
        match *self {
            Segment::Hold { level, .. } => level,
            Segment::Ramp {
                start_s,
                end_s,
                from,
                to,
            } => {
                if t >= end_s {
                    to
                } else {
                    from + (to - from) * (t - start_s) / (end_s - start_s)
                }
            }
        }
    }
}

/// Piecewise constant / ramp signal starting at `t = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Segment>", into = "Vec<Segment>")]
pub struct ReferenceProfile {
    segments: Vec<Segment>,
}

impl ReferenceProfile {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        let first = segments
            .first()
            .ok_or_else(|| Error::InvalidReference("no segments".into()))?;
        if first.start() != 0.0 {
            return Err(Error::InvalidReference(format!(
                "first segment must start at 0, starts at {}",
                first.start()
            )));
        }
        for (idx, seg) in segments.iter().enumerate() {
            let finite = match *seg {
                Segment::Hold { start_s, level } => start_s.is_finite() && level.is_finite(),
                Segment::Ramp {
                    start_s,
                    end_s,
                    from,
                    to,
                } => [start_s, end_s, from, to].iter().all(|v| v.is_finite()),
            };
            if !finite {
                return Err(Error::InvalidReference(format!(
                    "segment {idx} has non-finite fields"
                )));
            }
            let next_start = segments.get(idx + 1).map(Segment::start);
            if let Some(next) = next_start {
                if next <= seg.start() {
                    return Err(Error::InvalidReference(format!(
                        "segment {} starts at {next}, not after {}",
                        idx + 1,
                        seg.start()
                    )));
                }
            }
            if let Segment::Ramp { start_s, end_s, .. } = *seg {
                if end_s <= start_s {
                    return Err(Error::InvalidReference(format!(
                        "segment {idx}: ramp end {end_s} not after start {start_s}"
                    )));
                }
                if next_start.is_some_and(|next| end_s > next) {
                    return Err(Error::InvalidReference(format!(
                        "segment {idx}: ramp overlaps the next segment"
                    )));
                }
            }
        }
        Ok(Self { segments })
    }

    pub fn constant(level: f64) -> Self {
        Self {
            segments: vec![Segment::Hold {
                start_s: 0.0,
                level,
            }],
        }
    }

    /// Step schedule from `(start_s, level)` pairs.
    pub fn steps(points: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            points
                .iter()
                .map(|&(start_s, level)| Segment::Hold { start_s, level })
                .collect(),
        )
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Value at `t`. At a segment boundary the later segment wins; past the
    /// last segment the final level is held.
    pub fn sample(&self, t: f64) -> f64 {
        let idx = self
            .segments
            .partition_point(|seg| seg.start() <= t)
            .saturating_sub(1);
        self.segments[idx].value_at(t)
    }
}

impl TryFrom<Vec<Segment>> for ReferenceProfile {
    type Error = Error;

    fn try_from(segments: Vec<Segment>) -> Result<Self> {
        Self::new(segments)
    }
}

impl From<ReferenceProfile> for Vec<Segment> {
    fn from(profile: ReferenceProfile) -> Self {
        profile.segments
    }
}
