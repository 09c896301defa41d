//! Closed-form high-probability error bounds.
//!
//! The unspecified absolute constants are exposed as `c` (default 1).
//! `nu` is the sub-Weibull scale and `kappa` the polynomial one; the
//! heavy-tail terms use whichever is active for the chosen regime.

use std::f64::consts::{E, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::concentration::thresholds::{
    shortcut_poly_inner, shortcut_poly_sq, shortcut_subw_inner, shortcut_subw_sq,
};
use crate::error::{Error, Result};
use crate::schedule::{ScheduleKind, StepSchedule};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TailBoundInputs {
    /// B_ψ(x*, x₁).
    pub breg0: f64,
    pub eta: f64,
    /// Lipschitz constant in the dual norm.
    pub g: f64,
    pub sigma2: f64,
    pub nu: f64,
    pub theta: f64,
    pub kappa: f64,
    pub p: f64,
    pub horizon: usize,
    pub delta: f64,
    pub c: f64,
    pub diameter: Option<f64>,
}

impl Default for TailBoundInputs {
    fn default() -> Self {
        TailBoundInputs {
            breg0: 1.0,
            eta: 1.0,
            g: 1.0,
            sigma2: 1.0,
            nu: 1.0,
            theta: 1.0,
            kappa: 1.0,
            p: 5.0,
            horizon: 100,
            delta: 0.05,
            c: 1.0,
            diameter: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailRegime {
    Weibull,
    Poly,
}

impl TailBoundInputs {
    /// Sets one field from its textual name, as used by flat key=value configs.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let num = || -> Result<f64> {
            value
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("{key}: cannot parse '{value}' as a number")))
        };
        match key {
            "breg0" => self.breg0 = num()?,
            "eta" => self.eta = num()?,
            "G" | "g" => self.g = num()?,
            "sigma2" => self.sigma2 = num()?,
            "sigma" => self.sigma2 = num()?.powi(2),
            "nu" => self.nu = num()?,
            "theta" => self.theta = num()?,
            "kappa" => self.kappa = num()?,
            "p" => self.p = num()?,
            "T" | "horizon" => {
                self.horizon = value
                    .trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("{key}: expected a positive integer")))?
            }
            "delta" => self.delta = num()?,
            "C" | "c" => self.c = num()?,
            "D" | "diameter" => self.diameter = Some(num()?),
            other => return Err(Error::Config(format!("unknown bound input '{other}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("breg0", self.breg0),
            ("G", self.g),
            ("sigma2", self.sigma2),
            ("nu", self.nu),
            ("kappa", self.kappa),
            ("C", self.c),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::arg(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::arg(format!("eta must be positive, got {}", self.eta)));
        }
        if self.horizon == 0 {
            return Err(Error::arg("T must be at least 1"));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(Error::arg(format!("delta must lie in (0, 1], got {}", self.delta)));
        }
        Ok(())
    }

    fn validate_regime(&self, regime: TailRegime) -> Result<()> {
        self.validate()?;
        match regime {
            TailRegime::Weibull if !(self.theta == 0.5 || self.theta >= 1.0) => Err(Error::arg(
                format!("theta must be 1/2 or >= 1, got {}", self.theta),
            )),
            TailRegime::Poly if !(self.p > 4.0) => {
                Err(Error::arg(format!("p must exceed 4, got {}", self.p)))
            }
            _ => Ok(()),
        }
    }

    fn t(&self) -> f64 {
        self.horizon as f64
    }

    fn log_e_over_delta(&self) -> f64 {
        1.0 - self.delta.ln()
    }

    fn scale(&self, regime: TailRegime) -> f64 {
        match regime {
            TailRegime::Weibull => self.nu,
            TailRegime::Poly => self.kappa,
        }
    }
}

/// Tail functions of the two martingales driving the average-iterate bound.
pub trait MartingaleTailFns {
    /// Level for the maximal normalized inner-product martingale.
    fn y1(&self, delta: f64, etas: &[f64]) -> Result<f64>;
    /// Level for Σ η_t²(‖ξ_t‖²_* − E_t‖ξ_t‖²_*).
    fn y2(&self, delta: f64, etas: &[f64]) -> Result<f64>;
}

/// Fixed levels, independent of δ and the step sizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantTails {
    pub y1: f64,
    pub y2: f64,
}

impl MartingaleTailFns for ConstantTails {
    fn y1(&self, _: f64, _: &[f64]) -> Result<f64> {
        Ok(self.y1)
    }

    fn y2(&self, _: f64, _: &[f64]) -> Result<f64> {
        Ok(self.y2)
    }
}

/// Levels from the weighted sub-Weibull shortcut inequalities, ω_t = η_t and η_t².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubWeibullTails {
    pub nu: f64,
    pub theta: f64,
    pub s: f64,
}

impl MartingaleTailFns for SubWeibullTails {
    fn y1(&self, delta: f64, etas: &[f64]) -> Result<f64> {
        shortcut_subw_inner(self.nu, self.theta, etas, delta, self.s)
    }

    fn y2(&self, delta: f64, etas: &[f64]) -> Result<f64> {
        let w: Vec<f64> = etas.iter().map(|e| e * e).collect();
        shortcut_subw_sq(self.nu, self.theta, &w, delta, self.s)
    }
}

/// Levels from the weighted Fuk-Nagaev shortcut inequalities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolyTails {
    pub kappa: f64,
    pub p: f64,
}

impl MartingaleTailFns for PolyTails {
    fn y1(&self, delta: f64, etas: &[f64]) -> Result<f64> {
        shortcut_poly_inner(self.kappa, self.p, etas, delta)
    }

    fn y2(&self, delta: f64, etas: &[f64]) -> Result<f64> {
        let w: Vec<f64> = etas.iter().map(|e| e * e).collect();
        shortcut_poly_sq(self.kappa, self.p, &w, delta)
    }
}

/// √(Y₂(δ/2) + Σ η_t²(G² + σ²)).
pub fn gamma_value(y2_half_delta: f64, sum_eta2_g2_sigma2: f64) -> Result<f64> {
    if !(y2_half_delta >= 0.0 && sum_eta2_g2_sigma2 >= 0.0) {
        return Err(Error::arg("gamma inputs must be non-negative"));
    }
    if y2_half_delta == 0.0 && sum_eta2_g2_sigma2 == 0.0 {
        return Err(Error::arg("gamma inputs must not both vanish"));
    }
    Ok((y2_half_delta + sum_eta2_g2_sigma2).sqrt())
}

/// Σ η_t²(G² + σ²) over the schedule's first T steps.
pub fn sum_eta2_g2_sigma2(inputs: &TailBoundInputs, etas: &[f64]) -> f64 {
    let s: f64 = etas.iter().map(|e| e * e).sum();
    s * (inputs.g * inputs.g + inputs.sigma2)
}

/// Average-iterate bound from generic martingale tail functions.
///
/// The schedule's base step replaces `inputs.eta`.
pub fn eval_thm1_bound(
    fns: &dyn MartingaleTailFns,
    inputs: &TailBoundInputs,
    schedule: &StepSchedule,
) -> Result<f64> {
    inputs.validate()?;
    let etas = schedule.sequence(inputs.horizon);
    let eta_t = etas[etas.len() - 1];
    let y1 = fns.y1(inputs.delta / 2.0, &etas)?;
    let y2 = fns.y2(inputs.delta / 2.0, &etas)?;
    let inner = inputs.breg0 + sum_eta2_g2_sigma2(inputs, &etas) + 2.0 * y1 * y1 + y2;
    Ok(3.0 / (eta_t * inputs.t()) * inner)
}

/// Sub-Weibull average-iterate bound.
pub fn eval_cor1_bound(case: ScheduleKind, inputs: &TailBoundInputs) -> Result<f64> {
    inputs.validate_regime(TailRegime::Weibull)?;
    let i = inputs;
    let t = i.t();
    let nu2 = i.nu * i.nu;
    let g2 = i.g * i.g;
    Ok(match case {
        ScheduleKind::Constant => {
            let heavy = (t / i.delta).ln() + 1.0;
            i.c / t
                * (i.breg0 / i.eta
                    + i.eta * (g2 + nu2 * i.log_e_over_delta()) * t
                    + i.eta * nu2 * heavy.powf(2.0 * i.theta))
        }
        ScheduleKind::InverseSqrt => {
            i.c * (E * t).ln() / t.sqrt()
                * (i.breg0 / i.eta
                    + i.eta * (g2 + nu2 * i.log_e_over_delta().powf(2.0 * i.theta)))
        }
    })
}

/// Polynomial-tail average-iterate bound.
pub fn eval_cor2_bound(case: ScheduleKind, inputs: &TailBoundInputs) -> Result<f64> {
    inputs.validate_regime(TailRegime::Poly)?;
    let i = inputs;
    let t = i.t();
    let k2 = i.kappa * i.kappa;
    let g2 = i.g * i.g;
    Ok(match case {
        ScheduleKind::Constant => {
            i.c / t
                * (i.breg0 / i.eta
                    + i.eta * (g2 + k2 * i.log_e_over_delta()) * t
                    + i.eta * k2 * (t / i.delta).powf(2.0 / i.p))
        }
        ScheduleKind::InverseSqrt => {
            i.c * (E * t).ln() / t.sqrt()
                * (i.breg0 / i.eta + i.eta * (g2 + k2 * (1.0 / i.delta).powf(2.0 / i.p)))
        }
    })
}

/// The two addends of the tuned constant-step bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TunedForm {
    pub sub_gaussian: f64,
    pub heavy_tail: f64,
}

impl TunedForm {
    pub fn total(&self) -> f64 {
        self.sub_gaussian + self.heavy_tail
    }
}

pub fn eval_tuned_eta_forms(regime: TailRegime, inputs: &TailBoundInputs) -> Result<TunedForm> {
    inputs.validate_regime(regime)?;
    let i = inputs;
    let t = i.t();
    let phi = i.scale(regime);
    let root_b = i.breg0.sqrt();
    let sub_gaussian = root_b * ((i.g * i.g + phi * phi * i.log_e_over_delta()) / t).sqrt();
    let heavy_tail = match regime {
        TailRegime::Weibull => root_b * phi * ((t / i.delta).ln() + 1.0).powf(i.theta) / t,
        TailRegime::Poly => {
            root_b * phi * (1.0 / i.delta).powf(1.0 / i.p) / t.powf(1.0 - 1.0 / i.p)
        }
    };
    Ok(TunedForm {
        sub_gaussian,
        heavy_tail,
    })
}

/// First T ≤ `t_max` at which the sub-Gaussian addend reaches the heavy-tail one.
pub fn crossover_horizon(
    regime: TailRegime,
    inputs: &TailBoundInputs,
    t_max: usize,
) -> Result<Option<usize>> {
    let mut probe = *inputs;
    for t in 1..=t_max {
        probe.horizon = t;
        let f = eval_tuned_eta_forms(regime, &probe)?;
        if f.sub_gaussian >= f.heavy_tail {
            return Ok(Some(t));
        }
    }
    Ok(None)
}

/// Last-iterate bound from the two tail functions evaluated at δ/3.
pub fn eval_thm2_last_bound(xi1: f64, xi2: f64, inputs: &TailBoundInputs) -> Result<f64> {
    inputs.validate()?;
    let i = inputs;
    let t = i.t();
    let l4t = (4.0 * t).ln();
    Ok(35.0 / t.sqrt()
        * (2.0 * xi1
            + SQRT_2 * i.eta * i.g * i.g * l4t
            + 9.0 * SQRT_2 * i.eta * (xi2 + 2.0 * i.sigma2 * l4t) * (3.0 / i.delta).ln()))
}

/// Concrete last-iterate bound for the anytime schedule.
pub fn eval_cor3_bound(regime: TailRegime, inputs: &TailBoundInputs) -> Result<f64> {
    inputs.validate_regime(regime)?;
    let i = inputs;
    let t = i.t();
    let l = i.log_e_over_delta();
    let noise = match regime {
        TailRegime::Weibull => i.nu * i.nu * l.powf(2.0 * i.theta + 1.0),
        TailRegime::Poly => i.kappa * i.kappa * (1.0 / i.delta).powf(2.0 / i.p) * l,
    };
    Ok(i.c * (E * t).ln() / t.sqrt() * (i.breg0 / i.eta + i.eta * (i.g * i.g + noise)))
}

/// Anytime average-iterate bound when all iterates stay within Bregman radius D.
pub fn eval_bounded_domain_bound(regime: TailRegime, inputs: &TailBoundInputs) -> Result<f64> {
    inputs.validate_regime(regime)?;
    let i = inputs;
    let d = i
        .diameter
        .ok_or_else(|| Error::arg("the bounded-domain bound needs a diameter D"))?;
    if !(d >= 0.0 && d.is_finite()) {
        return Err(Error::arg(format!("D must be finite and >= 0, got {d}")));
    }
    let t = i.t();
    let rt = t.sqrt();
    let l = i.log_e_over_delta();
    let phi = i.scale(regime);
    let noise = match regime {
        TailRegime::Weibull => {
            l + l.powf(2.0 * i.theta) / rt + ((t / i.delta).ln() + 1.0).powf(2.0 * i.theta) / t
        }
        TailRegime::Poly => l + (1.0 / i.delta).powf(2.0 / i.p) / rt,
    };
    Ok(i.c / rt * (d * d / i.eta + i.eta * i.g * i.g + i.eta * phi * phi * noise))
}

/// Inputs some named formulas need beyond [`TailBoundInputs`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoundExtras {
    /// Union-bound exponent of the sub-Weibull shortcut levels.
    pub s: f64,
    /// Tail levels of the last-iterate martingale terms.
    pub xi1: f64,
    pub xi2: f64,
    /// Search limit for crossover horizons.
    pub t_max: usize,
}

impl Default for BoundExtras {
    fn default() -> Self {
        BoundExtras {
            s: 2.0,
            xi1: 0.0,
            xi2: 0.0,
            t_max: 1_000_000,
        }
    }
}

impl BoundExtras {
    /// Sets `s`, `xi1`, `xi2` or `t_max`; returns false for other keys.
    pub fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        let num = || {
            value
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("{key}: cannot parse '{value}' as a number")))
        };
        match key {
            "s" => self.s = num()?,
            "xi1" => self.xi1 = num()?,
            "xi2" => self.xi2 = num()?,
            "t_max" => {
                self.t_max = value
                    .trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("{key}: expected a positive integer")))?
            }
            _ => return Ok(false),
        }
        Ok(true)
    }
}

/// Every formula reachable by name from configs and bindings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NamedBound {
    GeneralWeibullConstant,
    GeneralWeibullInvSqrt,
    GeneralPolyConstant,
    GeneralPolyInvSqrt,
    WeibullConstant,
    WeibullInvSqrt,
    PolyConstant,
    PolyInvSqrt,
    TunedWeibull,
    TunedPoly,
    CrossoverWeibull,
    CrossoverPoly,
    LastIterate,
    LastWeibull,
    LastPoly,
    BoundedWeibull,
    BoundedPoly,
}

impl NamedBound {
    pub const ALL: [NamedBound; 17] = [
        NamedBound::GeneralWeibullConstant,
        NamedBound::GeneralWeibullInvSqrt,
        NamedBound::GeneralPolyConstant,
        NamedBound::GeneralPolyInvSqrt,
        NamedBound::WeibullConstant,
        NamedBound::WeibullInvSqrt,
        NamedBound::PolyConstant,
        NamedBound::PolyInvSqrt,
        NamedBound::TunedWeibull,
        NamedBound::TunedPoly,
        NamedBound::CrossoverWeibull,
        NamedBound::CrossoverPoly,
        NamedBound::LastIterate,
        NamedBound::LastWeibull,
        NamedBound::LastPoly,
        NamedBound::BoundedWeibull,
        NamedBound::BoundedPoly,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NamedBound::GeneralWeibullConstant => "general-weibull-constant",
            NamedBound::GeneralWeibullInvSqrt => "general-weibull-inv-sqrt",
            NamedBound::GeneralPolyConstant => "general-poly-constant",
            NamedBound::GeneralPolyInvSqrt => "general-poly-inv-sqrt",
            NamedBound::WeibullConstant => "weibull-constant",
            NamedBound::WeibullInvSqrt => "weibull-inv-sqrt",
            NamedBound::PolyConstant => "poly-constant",
            NamedBound::PolyInvSqrt => "poly-inv-sqrt",
            NamedBound::TunedWeibull => "tuned-weibull",
            NamedBound::TunedPoly => "tuned-poly",
            NamedBound::CrossoverWeibull => "crossover-weibull",
            NamedBound::CrossoverPoly => "crossover-poly",
            NamedBound::LastIterate => "last-iterate",
            NamedBound::LastWeibull => "last-weibull",
            NamedBound::LastPoly => "last-poly",
            NamedBound::BoundedWeibull => "bounded-weibull",
            NamedBound::BoundedPoly => "bounded-poly",
        }
    }
}

impl std::str::FromStr for NamedBound {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        NamedBound::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::arg(format!("unknown formula '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BoundValue {
    Value(f64),
    Tuned(TunedForm),
    /// First horizon within the search limit, if any.
    Horizon(Option<usize>),
}

impl std::fmt::Display for BoundValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BoundValue::Value(v) => write!(f, "{v}"),
            BoundValue::Tuned(t) => write!(
                f,
                "{} (sub-gaussian {} + heavy-tail {})",
                t.total(),
                t.sub_gaussian,
                t.heavy_tail
            ),
            BoundValue::Horizon(Some(t)) => write!(f, "{t}"),
            BoundValue::Horizon(None) => f.write_str("none"),
        }
    }
}

pub fn eval_named(bound: NamedBound, i: &TailBoundInputs, x: &BoundExtras) -> Result<BoundValue> {
    use BoundValue::Value;
    let weibull = SubWeibullTails {
        nu: i.nu,
        theta: i.theta,
        s: x.s,
    };
    let poly = PolyTails {
        kappa: i.kappa,
        p: i.p,
    };
    let constant = || StepSchedule::constant(i.eta);
    let inv_sqrt = || StepSchedule::inverse_sqrt(i.eta);
    Ok(match bound {
        NamedBound::GeneralWeibullConstant => Value(eval_thm1_bound(&weibull, i, &constant()?)?),
        NamedBound::GeneralWeibullInvSqrt => Value(eval_thm1_bound(&weibull, i, &inv_sqrt()?)?),
        NamedBound::GeneralPolyConstant => Value(eval_thm1_bound(&poly, i, &constant()?)?),
        NamedBound::GeneralPolyInvSqrt => Value(eval_thm1_bound(&poly, i, &inv_sqrt()?)?),
        NamedBound::WeibullConstant => Value(eval_cor1_bound(ScheduleKind::Constant, i)?),
        NamedBound::WeibullInvSqrt => Value(eval_cor1_bound(ScheduleKind::InverseSqrt, i)?),
        NamedBound::PolyConstant => Value(eval_cor2_bound(ScheduleKind::Constant, i)?),
        NamedBound::PolyInvSqrt => Value(eval_cor2_bound(ScheduleKind::InverseSqrt, i)?),
        NamedBound::TunedWeibull => BoundValue::Tuned(eval_tuned_eta_forms(TailRegime::Weibull, i)?),
        NamedBound::TunedPoly => BoundValue::Tuned(eval_tuned_eta_forms(TailRegime::Poly, i)?),
        NamedBound::CrossoverWeibull => BoundValue::Horizon(crossover_horizon(TailRegime::Weibull, i, x.t_max)?),
        NamedBound::CrossoverPoly => BoundValue::Horizon(crossover_horizon(TailRegime::Poly, i, x.t_max)?),
        NamedBound::LastIterate => Value(eval_thm2_last_bound(x.xi1, x.xi2, i)?),
        NamedBound::LastWeibull => Value(eval_cor3_bound(TailRegime::Weibull, i)?),
        NamedBound::LastPoly => Value(eval_cor3_bound(TailRegime::Poly, i)?),
        NamedBound::BoundedWeibull => Value(eval_bounded_domain_bound(TailRegime::Weibull, i)?),
        NamedBound::BoundedPoly => Value(eval_bounded_domain_bound(TailRegime::Poly, i)?),
    })
}
