use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    Constant,
    InverseSqrt,
}

/// Non-increasing positive learning rates: η or η/√t.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepSchedule {
    kind: ScheduleKind,
    eta: f64,
}

impl StepSchedule {
    pub fn new(kind: ScheduleKind, eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::arg(format!("base step size must be positive, got {eta}")));
        }
        Ok(StepSchedule { kind, eta })
    }

    pub fn constant(eta: f64) -> Result<Self> {
        StepSchedule::new(ScheduleKind::Constant, eta)
    }

    pub fn inverse_sqrt(eta: f64) -> Result<Self> {
        StepSchedule::new(ScheduleKind::InverseSqrt, eta)
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Step size at 1-based step `t`.
    pub fn step_size(&self, t: usize) -> f64 {
        assert!(t >= 1, "steps are 1-based");
        match self.kind {
            ScheduleKind::Constant => self.eta,
            ScheduleKind::InverseSqrt => self.eta / (t as f64).sqrt(),
        }
    }

    /// η_1, ..., η_T.
    pub fn sequence(&self, horizon: usize) -> Vec<f64> {
        (1..=horizon).map(|t| self.step_size(t)).collect()
    }
}
