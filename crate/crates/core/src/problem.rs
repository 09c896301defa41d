//! Convex test objectives with a known minimizer and a first-order oracle.
//!
//! Every objective is centered at `c`, so x* = c and f* = 0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{check_same_dim, DualNorm, Point};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Objective {
    /// Σ |xᵢ − cᵢ|.
    AbsSum,
    /// max_i max(upᵢ (xᵢ − cᵢ), −downᵢ (xᵢ − cᵢ)) with positive slopes.
    PiecewiseLinearMax { up: Vec<f64>, down: Vec<f64> },
    /// (a/2)‖x − c‖₂². Lipschitz only on bounded domains.
    Quadratic { curvature: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleProblem {
    objective: Objective,
    center: Point,
    lipschitz: Option<f64>,
}

impl OracleProblem {
    pub fn abs_sum(center: Point) -> Self {
        OracleProblem {
            objective: Objective::AbsSum,
            center,
            lipschitz: None,
        }
    }

    /// f(x) = |x| on the real line.
    pub fn abs_1d() -> Self {
        OracleProblem::abs_sum(Point::zeros(1))
    }

    pub fn piecewise_linear_max(center: Point, up: Vec<f64>, down: Vec<f64>) -> Result<Self> {
        if up.len() != center.dim() || down.len() != center.dim() {
            return Err(Error::arg("slope vectors must match the center dimension"));
        }
        if up.iter().chain(&down).any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Error::arg("piecewise-linear slopes must be positive and finite"));
        }
        Ok(OracleProblem {
            objective: Objective::PiecewiseLinearMax { up, down },
            center,
            lipschitz: None,
        })
    }

    /// `lipschitz` is the dual-norm bound on subgradients over the domain in use,
    /// e.g. `curvature * (radius + ‖c‖₂)` on an ℓ₂ ball.
    pub fn quadratic(center: Point, curvature: f64, lipschitz: Option<f64>) -> Result<Self> {
        if !(curvature > 0.0 && curvature.is_finite()) {
            return Err(Error::arg("quadratic curvature must be positive"));
        }
        Ok(OracleProblem {
            objective: Objective::Quadratic { curvature },
            center,
            lipschitz,
        })
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn minimizer(&self) -> &Point {
        &self.center
    }

    pub fn optimal_value(&self) -> f64 {
        0.0
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let c = self.center.coords();
        match &self.objective {
            Objective::AbsSum => x.iter().zip(c).map(|(a, b)| (a - b).abs()).sum(),
            Objective::PiecewiseLinearMax { up, down } => x
                .iter()
                .zip(c)
                .enumerate()
                .map(|(i, (a, b))| {
                    let r = a - b;
                    (up[i] * r).max(-down[i] * r)
                })
                .fold(f64::NEG_INFINITY, f64::max),
            Objective::Quadratic { curvature } => {
                0.5 * curvature
                    * x.iter()
                        .zip(c)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
            }
        }
    }

    pub fn error(&self, x: &[f64]) -> f64 {
        self.value(x) - self.optimal_value()
    }

    /// A subgradient at `x`. Kinks resolve to 0 (for |·|) or the lowest active index.
    pub fn subgradient(&self, x: &[f64]) -> Vec<f64> {
        let c = self.center.coords();
        match &self.objective {
            Objective::AbsSum => x
                .iter()
                .zip(c)
                .map(|(a, b)| {
                    let r = a - b;
                    if r > 0.0 {
                        1.0
                    } else if r < 0.0 {
                        -1.0
                    } else {
                        0.0
                    }
                })
                .collect(),
            Objective::PiecewiseLinearMax { up, down } => {
                let mut best = (0, 0.0, f64::NEG_INFINITY);
                for (i, (a, b)) in x.iter().zip(c).enumerate() {
                    let r = a - b;
                    let (slope, v) = if up[i] * r >= -down[i] * r {
                        (up[i], up[i] * r)
                    } else {
                        (-down[i], -down[i] * r)
                    };
                    if v > best.2 {
                        best = (i, slope, v);
                    }
                }
                let mut g = vec![0.0; x.len()];
                if best.2 > 0.0 {
                    g[best.0] = best.1;
                }
                g
            }
            Objective::Quadratic { curvature } => {
                x.iter().zip(c).map(|(a, b)| curvature * (a - b)).collect()
            }
        }
    }

    /// Bound on the dual norm of every returned subgradient, when one exists.
    pub fn lipschitz(&self, dual: DualNorm) -> Option<f64> {
        match &self.objective {
            Objective::AbsSum => Some(match dual {
                DualNorm::LInf => 1.0,
                DualNorm::L2 => (self.dim() as f64).sqrt(),
            }),
            Objective::PiecewiseLinearMax { up, down } => {
                Some(up.iter().chain(down).copied().fold(0.0, f64::max))
            }
            Objective::Quadratic { .. } => self.lipschitz,
        }
    }

    pub(crate) fn check_point(&self, x: &[f64]) -> Result<()> {
        check_same_dim(x, &self.center, "objective")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn abs_subgradient_at_kink_is_zero() {
        let p = OracleProblem::abs_1d();
        assert_eq!(p.subgradient(&[0.0]), vec![0.0]);
        assert_eq!(p.subgradient(&[2.0]), vec![1.0]);
        assert_eq!(p.subgradient(&[-0.1]), vec![-1.0]);
        assert_eq!(p.value(&[-3.0]), 3.0);
    }

    #[test]
    fn piecewise_linear_max_picks_active_piece() {
        let p = OracleProblem::piecewise_linear_max(
            Point::new(vec![0.0, 1.0]).unwrap(),
            vec![1.0, 3.0],
            vec![2.0, 0.5],
        )
        .unwrap();
        assert_eq!(p.value(&[-1.0, 1.0]), 2.0);
        assert_eq!(p.subgradient(&[-1.0, 1.0]), vec![-2.0, 0.0]);
        assert_eq!(p.value(&[0.0, 2.0]), 3.0);
        assert_eq!(p.subgradient(&[0.0, 2.0]), vec![0.0, 3.0]);
        assert_eq!(p.subgradient(&[0.0, 1.0]), vec![0.0, 0.0]);
        assert_eq!(p.lipschitz(DualNorm::L2), Some(3.0));
    }

    #[test]
    fn quadratic_gradient() {
        let p = OracleProblem::quadratic(Point::new(vec![1.0, -1.0]).unwrap(), 2.0, Some(10.0))
            .unwrap();
        assert_eq!(p.subgradient(&[2.0, 0.0]), vec![2.0, 2.0]);
        assert_eq!(p.value(&[2.0, 0.0]), 2.0);
        assert_eq!(p.value(p.minimizer()), 0.0);
    }
}
