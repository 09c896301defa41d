//! The fixed list of validator configurations and a flat row format for reports.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::calculus::{exponential_lambda_max, truncated_lambda_max};
use super::martingale::{IncrementClass, MartingaleGen};
use super::validate::{
    check_centering, check_mgf_bounds, check_subw_moment, validate_chicken_egg, validate_fuk_nagaev,
    validate_subw_maximal, validate_weighted_shortcuts, McConfig, MeanEstimate, MgfCase, ShortcutNoise,
    ShortcutSum, ViolationEstimate,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Prop {
    /// Sub-Weibull maximal inequality.
    E2,
    /// Fuk-Nagaev maximal inequality.
    E3,
    /// Self-normalized bound with the quadratic-variation condition.
    P1,
    /// Weighted inner-product sums.
    B1,
    /// Weighted centered squared-norm sums.
    B2,
    /// Moment and centering bounds.
    Moments,
    Mgf,
}

impl Prop {
    pub const ALL: [Prop; 7] = [Prop::E2, Prop::E3, Prop::P1, Prop::B1, Prop::B2, Prop::Moments, Prop::Mgf];

    pub fn tag(self) -> &'static str {
        match self {
            Prop::E2 => "e2",
            Prop::E3 => "e3",
            Prop::P1 => "p1",
            Prop::B1 => "b1",
            Prop::B2 => "b2",
            Prop::Moments => "moments",
            Prop::Mgf => "mgf",
        }
    }
}

impl fmt::Display for Prop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Prop {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Prop::ALL
            .into_iter()
            .find(|p| p.tag() == s)
            .ok_or_else(|| Error::arg(format!("unknown property '{s}'")))
    }
}

/// One reported configuration. For rate checks `estimate` is the violation
/// rate and `target` the allowed probability; for mean checks they are the
/// sample mean and the analytic bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationRow {
    pub prop: Prop,
    pub config: String,
    pub trials: u64,
    pub estimate: f64,
    pub stderr: f64,
    pub target: f64,
    pub pass: bool,
}

impl ValidationRow {
    fn rate(prop: Prop, config: impl Into<String>, e: ViolationEstimate) -> Self {
        ValidationRow {
            prop,
            config: config.into(),
            trials: e.trials,
            estimate: e.rate,
            stderr: e.stderr,
            target: e.target,
            pass: e.pass,
        }
    }

    fn mean(prop: Prop, config: impl Into<String>, e: MeanEstimate) -> Self {
        ValidationRow {
            prop,
            config: config.into(),
            trials: e.trials,
            estimate: e.mean,
            stderr: e.stderr,
            target: e.bound,
            pass: e.pass,
        }
    }
}

fn inv_sqrt(n: usize) -> Vec<f64> {
    (1..=n).map(|i| 1.0 / (i as f64).sqrt()).collect()
}

fn inv(n: usize) -> Vec<f64> {
    (1..=n).map(|i| 1.0 / i as f64).collect()
}

fn e2_rows(mc: &McConfig) -> Result<Vec<ValidationRow>> {
    let mut rows = vec![
        ValidationRow::rate(
            Prop::E2,
            "theta=1/2 m=1 n=100 delta=0.05",
            validate_subw_maximal(0.5, &[1.0; 100], 0.05, 0.0, mc)?,
        ),
        ValidationRow::rate(
            Prop::E2,
            "theta=1 m=0 n=100 delta=0.05 s=2",
            validate_subw_maximal(1.0, &[0.0; 100], 0.05, 2.0, mc)?,
        ),
    ];
    for s in [0.0, 2.0, 3.0] {
        rows.push(ValidationRow::rate(
            Prop::E2,
            format!("theta=1 m=1/sqrt(i) n=1000 delta=0.01 s={s}"),
            validate_subw_maximal(1.0, &inv_sqrt(1000), 0.01, s, mc)?,
        ));
    }
    for s in [0.0, 2.0, 3.0] {
        rows.push(ValidationRow::rate(
            Prop::E2,
            format!("theta=2 m=1 n=100 delta=0.05 s={s}"),
            validate_subw_maximal(2.0, &[1.0; 100], 0.05, s, mc)?,
        ));
    }
    Ok(rows)
}

fn e3_rows(mc: &McConfig) -> Result<Vec<ValidationRow>> {
    Ok(vec![
        ValidationRow::rate(Prop::E3, "p=5 k=1 n=100 delta=0.05", validate_fuk_nagaev(5.0, &[1.0; 100], 0.05, mc)?),
        ValidationRow::rate(Prop::E3, "p=5 k=1 n=100 delta=1", validate_fuk_nagaev(5.0, &[1.0; 100], 1.0, mc)?),
        ValidationRow::rate(
            Prop::E3,
            "p=5 k=1/sqrt(i) n=1000 delta=0.05",
            validate_fuk_nagaev(5.0, &inv_sqrt(1000), 0.05, mc)?,
        ),
    ])
}

fn p1_rows(mc: &McConfig) -> Result<Vec<ValidationRow>> {
    let rad = MartingaleGen::uniform(IncrementClass::Rademacher, 1.0, 100)?;
    let adv = MartingaleGen::uniform(IncrementClass::AdversarialScaled, 1.0, 100)?;
    Ok(vec![
        ValidationRow::rate(
            Prop::P1,
            "rademacher n=100 alpha=0 beta=200 x=40",
            validate_chicken_egg(0.0, 200.0, 40.0, &rad, mc)?,
        ),
        ValidationRow::rate(
            Prop::P1,
            "rademacher n=100 alpha=0 beta=200 x=1e6",
            validate_chicken_egg(0.0, 200.0, 1e6, &rad, mc)?,
        ),
        ValidationRow::rate(
            Prop::P1,
            "adversarial-scaled n=100 alpha=1 beta=1 x=12",
            validate_chicken_egg(1.0, 1.0, 12.0, &adv, mc)?,
        ),
    ])
}

fn shortcut_rows(prop: Prop, which: ShortcutSum, mc: &McConfig) -> Result<Vec<ValidationRow>> {
    let weibull = ShortcutNoise::Weibull { theta: 1.0, s: 3.0 };
    Ok(vec![
        ValidationRow::rate(
            prop,
            "weights=0 weibull theta=1 s=3 n=1000 delta=0.05",
            validate_weighted_shortcuts(weibull, which, &[0.0; 1000], 0.05, mc)?,
        ),
        ValidationRow::rate(
            prop,
            "weights=1/sqrt(t) weibull theta=1 s=3 n=1000 delta=0.05",
            validate_weighted_shortcuts(weibull, which, &inv_sqrt(1000), 0.05, mc)?,
        ),
        ValidationRow::rate(
            prop,
            "weights=1/t poly p=5 n=1000 delta=0.05",
            validate_weighted_shortcuts(ShortcutNoise::Poly { p: 5.0 }, which, &inv(1000), 0.05, mc)?,
        ),
    ])
}

fn moment_rows(mc: &McConfig) -> Result<Vec<ValidationRow>> {
    let mut rows = Vec::new();
    for (theta, nu, p) in [(1.0, 1.0, 2.0), (1.0, 1.0, 1e-3), (2.0, 1.0, 1.0), (10.0 / 3.0, 1.0, 2.0)] {
        rows.push(ValidationRow::mean(
            Prop::Moments,
            format!("moment theta={theta:.4} nu={nu} p={p}"),
            check_subw_moment(theta, nu, p, mc)?,
        ));
    }
    for theta in [1.0, 2.0] {
        rows.push(ValidationRow::mean(
            Prop::Moments,
            format!("centering theta={theta} nu=1"),
            check_centering(theta, 1.0, mc)?,
        ));
    }
    Ok(rows)
}

fn mgf_rows(mc: &McConfig) -> Result<Vec<ValidationRow>> {
    let mut rows = Vec::new();
    let nu = (8.0f64 / 3.0).sqrt();
    let grid = [0.0, 0.25, 0.5, -0.5, 1.0];
    for (l, e) in grid.iter().zip(check_mgf_bounds(MgfCase::Light, nu, &grid, mc)?) {
        rows.push(ValidationRow::mean(Prop::Mgf, format!("theta=1/2 nu=sqrt(8/3) lambda={l}"), e));
    }
    let edge = exponential_lambda_max(1.0);
    let grid = [0.0, 0.5 * edge, -edge, edge];
    for (l, e) in grid.iter().zip(check_mgf_bounds(MgfCase::Exponential, 1.0, &grid, mc)?) {
        rows.push(ValidationRow::mean(Prop::Mgf, format!("theta=1 nu=1 lambda={l:.6}"), e));
    }
    let edge = truncated_lambda_max(2.0, 1.0, 4.0);
    let grid = [0.0, 0.5 * edge, edge];
    let heavy = McConfig {
        trials: mc.trials * 10,
        ..*mc
    };
    let case = MgfCase::Truncated { theta: 2.0, h: 4.0 };
    for (l, e) in grid.iter().zip(check_mgf_bounds(case, 1.0, &grid, &heavy)?) {
        rows.push(ValidationRow::mean(Prop::Mgf, format!("truncated theta=2 nu=1 h=4 lambda={l:.6}"), e));
    }
    Ok(rows)
}

/// Runs every configuration of the requested properties, in a fixed order.
pub fn run_validation_suite(props: &[Prop], mc: &McConfig) -> Result<Vec<ValidationRow>> {
    let mut rows = Vec::new();
    for &prop in props {
        rows.extend(match prop {
            Prop::E2 => e2_rows(mc)?,
            Prop::E3 => e3_rows(mc)?,
            Prop::P1 => p1_rows(mc)?,
            Prop::B1 => shortcut_rows(Prop::B1, ShortcutSum::InnerProduct, mc)?,
            Prop::B2 => shortcut_rows(Prop::B2, ShortcutSum::SquaredNorm, mc)?,
            Prop::Moments => moment_rows(mc)?,
            Prop::Mgf => mgf_rows(mc)?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prop_tags_round_trip() {
        for p in Prop::ALL {
            assert_eq!(p.tag().parse::<Prop>().unwrap(), p);
        }
        assert!("e4".parse::<Prop>().is_err());
    }

    #[test]
    fn quick_suite_passes() {
        let mc = McConfig { trials: 2_000, seed: 3 };
        let rows = run_validation_suite(&Prop::ALL, &mc).unwrap();
        assert_eq!(rows.len(), 8 + 3 + 3 + 3 + 3 + 6 + 12);
        for r in &rows {
            assert!(r.pass, "{r:?}");
        }
    }
}
