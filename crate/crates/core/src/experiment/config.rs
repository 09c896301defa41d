//! Experiment configuration: a flat JSON object whose fields all have defaults.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::DualNorm;
use crate::noise::{NoiseClass, NoiseSpec};

pub const FULL_T_GRID: [usize; 7] = [100, 200, 300, 500, 1000, 2000, 3000];
pub const DESK_T_GRID: [usize; 7] = [100, 150, 200, 300, 500, 700, 1000];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// One constant step size per horizon, errors recorded at the horizon.
    FixedHorizon,
    /// η_t = 1/√t, errors recorded along one long run.
    Anytime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Constant step size used by fixed-horizon cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FixedEtaRule {
    #[serde(rename = "inv-sqrt-T")]
    InvSqrtT,
    #[serde(rename = "inv-T")]
    InvT,
}

impl FixedEtaRule {
    pub fn eta(self, horizon: usize) -> f64 {
        match self {
            FixedEtaRule::InvSqrtT => 1.0 / (horizon as f64).sqrt(),
            FixedEtaRule::InvT => 1.0 / horizon as f64,
        }
    }
}

/// Unit-variance scalar noise named like `gaussian`, `weibull:10/3`, `poly:5` or `zero`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct NoiseEntry {
    name: String,
    class: Option<NoiseClass>,
}

fn parse_number(s: &str) -> Result<f64> {
    let bad = || Error::Config(format!("cannot read '{s}' as a number"));
    let v = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| bad())?;
            let b: f64 = b.trim().parse().map_err(|_| bad())?;
            a / b
        }
        None => s.trim().parse().map_err(|_| bad())?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

impl NoiseEntry {
    pub fn gaussian() -> Self {
        NoiseEntry {
            name: "gaussian".into(),
            class: Some(NoiseClass::Gaussian),
        }
    }

    pub fn weibull(label: &str) -> Result<Self> {
        format!("weibull:{label}").parse()
    }

    /// None for the noise-free entry.
    pub fn class(&self) -> Option<NoiseClass> {
        self.class
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn tag(&self) -> &'static str {
        self.class.map_or("zero", |c| c.tag())
    }

    pub fn theta_or_p(&self) -> f64 {
        self.class.map_or(0.0, |c| c.shape())
    }

    pub fn spec(&self) -> Result<NoiseSpec> {
        match self.class {
            Some(c) => NoiseSpec::scalar(c),
            None => Ok(NoiseSpec::zero(1, DualNorm::L2)),
        }
    }
}

impl FromStr for NoiseEntry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let name = s.trim().to_string();
        let class = match name.split_once(':') {
            None if name == "gaussian" => Some(NoiseClass::Gaussian),
            None if name == "zero" => None,
            Some(("weibull", v)) => Some(NoiseClass::SymWeibull { theta: parse_number(v)? }),
            Some(("poly", v)) => Some(NoiseClass::SymPoly { p: parse_number(v)? }),
            _ => return Err(Error::Config(format!("unknown noise '{s}'"))),
        };
        if let Some(c) = class {
            NoiseSpec::scalar(c).map_err(|e| Error::Config(format!("noise '{s}': {e}")))?;
        }
        Ok(NoiseEntry { name, class })
    }
}

impl TryFrom<String> for NoiseEntry {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<NoiseEntry> for String {
    fn from(n: NoiseEntry) -> String {
        n.name
    }
}

impl fmt::Display for NoiseEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub runs: usize,
    /// Horizons of fixed-horizon cells.
    pub t_grid: Vec<usize>,
    /// Length of anytime runs.
    pub t_max: usize,
    pub mode: Mode,
    pub quantile: f64,
    pub base_seed: u64,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub noises: Vec<NoiseEntry>,
    pub x1: f64,
    pub fixed_eta_rule: FixedEtaRule,
    /// Share run seeds across noise classes.
    pub common_random_numbers: bool,
    /// Anytime runs record every step in the last `dense_window` steps.
    pub dense_window: usize,
    /// Points of the logarithmic anytime checkpoint grid.
    pub log_points: usize,
    /// Worker threads; 0 uses all cores.
    pub workers: usize,
}

fn default_noises() -> Vec<NoiseEntry> {
    let mut v = vec![NoiseEntry::gaussian()];
    for t in ["1", "2", "10/3"] {
        v.push(NoiseEntry::weibull(t).expect("valid default noise"));
    }
    v
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            runs: 20_000,
            t_grid: FULL_T_GRID.to_vec(),
            t_max: 3000,
            mode: Mode::FixedHorizon,
            quantile: 0.99,
            base_seed: 20_240_601,
            output: None,
            format: Format::Csv,
            noises: default_noises(),
            x1: 2.0,
            fixed_eta_rule: FixedEtaRule::InvSqrtT,
            common_random_numbers: false,
            dense_window: 1000,
            log_points: 60,
            workers: 0,
        }
    }
}

impl ExperimentConfig {
    /// 2k runs with horizons up to 1000.
    pub fn desk_scale() -> Self {
        ExperimentConfig {
            runs: 2_000,
            t_grid: DESK_T_GRID.to_vec(),
            t_max: 1000,
            ..ExperimentConfig::default()
        }
    }

    /// Reads a flat JSON object over the given base values. Keys absent from
    /// the file keep the base value.
    pub fn from_json_over(base: &ExperimentConfig, text: &str) -> Result<Self> {
        let patch: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let serde_json::Value::Object(patch) = patch else {
            return Err(Error::Config("config must be a JSON object".into()));
        };
        let mut merged = serde_json::to_value(base).map_err(|e| Error::Config(e.to_string()))?;
        let obj = merged.as_object_mut().expect("config serializes to an object");
        for (k, v) in patch {
            obj.insert(k, v);
        }
        let cfg: ExperimentConfig =
            serde_json::from_value(merged).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.runs == 0 {
            return fail("runs must be at least 1".into());
        }
        if !(self.quantile > 0.0 && self.quantile < 1.0) {
            return fail(format!("quantile must lie in (0, 1), got {}", self.quantile));
        }
        if self.noises.is_empty() {
            return fail("need at least one noise".into());
        }
        if !self.x1.is_finite() {
            return fail("x1 must be finite".into());
        }
        match self.mode {
            Mode::FixedHorizon => {
                if self.t_grid.is_empty() || self.t_grid[0] == 0 {
                    return fail("t_grid must be non-empty with positive horizons".into());
                }
                if self.t_grid.windows(2).any(|w| w[1] <= w[0]) {
                    return fail("t_grid must be strictly increasing".into());
                }
            }
            Mode::Anytime => {
                if self.t_max == 0 {
                    return fail("t_max must be at least 1".into());
                }
            }
        }
        Ok(())
    }
}
