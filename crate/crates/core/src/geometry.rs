//! Mirror-descent geometry: points, norms, regularizers, domains and the
//! closed-form mirror step.
//!
//! Two regularizers are shipped:
//!
//! * `Euclidean`: ψ(x) = ½‖x‖₂², paired with the (ℓ₂, ℓ₂) norm pair on any of
//!   the supported domains. The mirror step is a gradient step followed by a
//!   Euclidean projection.
//! * `NegEntropy`: ψ(x) = Σ xᵢ ln xᵢ on the probability simplex, paired with
//!   (ℓ₁, ℓ∞). The mirror step is the multiplicative-weights update, computed
//!   in log-space with a max shift.
//!
//! Both are 1-strongly convex with respect to their primal norm on their
//! domain, so `bregman(x, y) ≥ ½‖x − y‖²` holds for every pair.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Floor applied to simplex coordinates after each entropic step so the
/// iterate stays in the interior of the domain.
pub const SIMPLEX_FLOOR: f64 = 1e-300;

/// A finite point in ℝᵈ, d ≥ 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::arg("point must have dimension at least 1"));
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::arg(format!(
                "coordinate {i} is not finite ({})",
                coords[i]
            )));
        }
        Ok(Point(coords))
    }

    pub fn scalar(x: f64) -> Result<Self> {
        Point::new(vec![x])
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        Point(vec![0.0; dim])
    }

    /// Uniform distribution on the simplex of dimension `dim`.
    pub fn uniform_simplex(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        Point(vec![1.0 / dim as f64; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Builds a point without the finiteness check. Callers guarantee finiteness.
    pub(crate) fn from_vec_unchecked(coords: Vec<f64>) -> Self {
        debug_assert!(!coords.is_empty());
        Point(coords)
    }
}

impl Deref for Point {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Point::new(v)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Self {
        p.0
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn check_same_dim(a: &[f64], b: &[f64], what: &str) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::arg(format!(
            "dimension mismatch in {what}: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrimalNorm {
    L2,
    L1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DualNorm {
    L2,
    LInf,
}

impl PrimalNorm {
    pub fn norm(self, v: &[f64]) -> f64 {
        match self {
            PrimalNorm::L2 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            PrimalNorm::L1 => v.iter().map(|x| x.abs()).sum(),
        }
    }

    pub fn dual(self) -> DualNorm {
        match self {
            PrimalNorm::L2 => DualNorm::L2,
            PrimalNorm::L1 => DualNorm::LInf,
        }
    }
}

impl DualNorm {
    pub fn norm(self, v: &[f64]) -> f64 {
        match self {
            DualNorm::L2 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            DualNorm::LInf => v.iter().fold(0.0_f64, |m, x| m.max(x.abs())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regularizer {
    Euclidean,
    NegEntropy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Domain {
    Unconstrained,
    L2Ball { radius: f64 },
    Box { lo: f64, hi: f64 },
    Simplex,
}

impl Domain {
    /// Whether `x` belongs to the domain, up to `tol`.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        match *self {
            Domain::Unconstrained => true,
            Domain::L2Ball { radius } => PrimalNorm::L2.norm(x) <= radius + tol,
            Domain::Box { lo, hi } => x.iter().all(|&c| c >= lo - tol && c <= hi + tol),
            Domain::Simplex => {
                x.iter().all(|&c| c >= -tol) && (x.iter().sum::<f64>() - 1.0).abs() <= tol
            }
        }
    }

    /// Euclidean projection onto the domain.
    pub fn project(&self, x: &mut [f64]) {
        match *self {
            Domain::Unconstrained => {}
            Domain::L2Ball { radius } => {
                let n = PrimalNorm::L2.norm(x);
                if n > radius {
                    let s = radius / n;
                    x.iter_mut().for_each(|c| *c *= s);
                }
            }
            Domain::Box { lo, hi } => x.iter_mut().for_each(|c| *c = c.clamp(lo, hi)),
            Domain::Simplex => project_simplex(x),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Domain::L2Ball { radius } if !(radius > 0.0 && radius.is_finite()) => {
                Err(Error::arg(format!("ball radius must be positive, got {radius}")))
            }
            Domain::Box { lo, hi } if !(lo < hi && lo.is_finite() && hi.is_finite()) => {
                Err(Error::arg(format!("box needs finite lo < hi, got [{lo}, {hi}]")))
            }
            _ => Ok(()),
        }
    }
}

/// Sort-based Euclidean projection onto the probability simplex.
fn project_simplex(x: &mut [f64]) {
    let mut u = x.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut tau = 0.0;
    for (k, &uk) in u.iter().enumerate() {
        cumsum += uk;
        let t = (cumsum - 1.0) / (k + 1) as f64;
        if uk - t > 0.0 {
            tau = t;
        }
    }
    x.iter_mut().for_each(|c| *c = (*c - tau).max(0.0));
}

/// Regularizer, domain and norm pair defining one mirror-descent geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MirrorSetup {
    regularizer: Regularizer,
    domain: Domain,
    primal: PrimalNorm,
    dual: DualNorm,
}

impl MirrorSetup {
    pub fn new(
        regularizer: Regularizer,
        domain: Domain,
        primal: PrimalNorm,
        dual: DualNorm,
    ) -> Result<Self> {
        domain.validate()?;
        if primal.dual() != dual {
            return Err(Error::arg(format!(
                "{dual:?} is not the dual of {primal:?}"
            )));
        }
        match regularizer {
            Regularizer::NegEntropy => {
                if domain != Domain::Simplex || primal != PrimalNorm::L1 {
                    return Err(Error::arg(
                        "neg-entropy is only 1-strongly convex as (simplex, l1, l-inf)",
                    ));
                }
            }
            Regularizer::Euclidean => {
                if primal != PrimalNorm::L2 {
                    return Err(Error::arg("euclidean regularizer pairs with (l2, l2)"));
                }
            }
        }
        Ok(MirrorSetup {
            regularizer,
            domain,
            primal,
            dual,
        })
    }

    pub fn euclidean(domain: Domain) -> Result<Self> {
        MirrorSetup::new(Regularizer::Euclidean, domain, PrimalNorm::L2, DualNorm::L2)
    }

    pub fn entropic_simplex() -> Self {
        MirrorSetup {
            regularizer: Regularizer::NegEntropy,
            domain: Domain::Simplex,
            primal: PrimalNorm::L1,
            dual: DualNorm::LInf,
        }
    }

    pub fn regularizer(&self) -> Regularizer {
        self.regularizer
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn primal_norm(&self) -> PrimalNorm {
        self.primal
    }

    pub fn dual_norm(&self) -> DualNorm {
        self.dual
    }

    /// Whether `x` may serve as the base point of a mirror step (interior of dom ψ).
    pub fn check_interior(&self, x: &[f64]) -> Result<()> {
        match self.regularizer {
            Regularizer::Euclidean => Ok(()),
            Regularizer::NegEntropy => {
                if let Some(i) = x.iter().position(|&c| c <= 0.0) {
                    Err(Error::Domain(format!(
                        "neg-entropy needs a strictly positive base point; coordinate {i} is {}",
                        x[i]
                    )))
                } else {
                    Ok(())
                }
            }
        }
    }
}

/// Bregman divergence B_ψ(x, y) = ψ(x) − ψ(y) − ⟨x − y, ∇ψ(y)⟩.
///
/// For the entropic setup this is the generalized KL divergence
/// Σ xᵢ ln(xᵢ/yᵢ) − xᵢ + yᵢ with 0·ln 0 = 0.
pub fn bregman(setup: &MirrorSetup, x: &[f64], y: &[f64]) -> Result<f64> {
    check_same_dim(x, y, "bregman")?;
    match setup.regularizer {
        Regularizer::Euclidean => Ok(0.5
            * x.iter()
                .zip(y)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()),
        Regularizer::NegEntropy => {
            setup.check_interior(y)?;
            if let Some(i) = x.iter().position(|&c| c < 0.0) {
                return Err(Error::Domain(format!(
                    "neg-entropy is undefined at negative coordinate {i} ({})",
                    x[i]
                )));
            }
            let mut acc = 0.0;
            for (&a, &b) in x.iter().zip(y) {
                if a > 0.0 {
                    acc += a * (a / b).ln();
                }
                acc += b - a;
            }
            // Rounding can push an exact zero slightly negative.
            Ok(acc.max(0.0))
        }
    }
}

/// Objective minimized by one mirror step: ⟨ĝ, x⟩ + B_ψ(x, x_t)/η.
pub fn step_objective(
    setup: &MirrorSetup,
    x_t: &[f64],
    ghat: &[f64],
    eta: f64,
    x: &[f64],
) -> Result<f64> {
    Ok(dot(ghat, x) + bregman(setup, x, x_t)? / eta)
}

/// One exact mirror step: argmin over the domain of ⟨ĝ, x⟩ + B_ψ(x, x_t)/η.
pub fn mirror_step(setup: &MirrorSetup, x_t: &Point, ghat: &[f64], eta: f64) -> Result<Point> {
    check_same_dim(x_t, ghat, "mirror step")?;
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::arg(format!("step size must be positive, got {eta}")));
    }
    if let Some(i) = ghat.iter().position(|g| !g.is_finite()) {
        return Err(Error::Numerical(format!(
            "stochastic subgradient coordinate {i} is not finite"
        )));
    }
    setup.check_interior(x_t)?;

    let next = match setup.regularizer {
        Regularizer::Euclidean => {
            let mut y: Vec<f64> = x_t.iter().zip(ghat).map(|(x, g)| x - eta * g).collect();
            setup.domain.project(&mut y);
            y
        }
        Regularizer::NegEntropy => {
            let logits: Vec<f64> = x_t
                .iter()
                .zip(ghat)
                .map(|(x, g)| x.ln() - eta * g)
                .collect();
            let shift = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut y: Vec<f64> = logits.iter().map(|l| (l - shift).exp()).collect();
            let total: f64 = y.iter().sum();
            y.iter_mut()
                .for_each(|c| *c = (*c / total).max(SIMPLEX_FLOOR));
            y
        }
    };
    if let Some(i) = next.iter().position(|c| !c.is_finite()) {
        return Err(Error::Numerical(format!(
            "mirror step produced a non-finite coordinate {i}"
        )));
    }
    Ok(Point::from_vec_unchecked(next))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn eu() -> MirrorSetup {
        MirrorSetup::euclidean(Domain::Unconstrained).unwrap()
    }

    #[test]
    fn euclidean_bregman_is_half_squared_distance() {
        assert_abs_diff_eq!(bregman(&eu(), &[1.0, 2.0], &[0.0, 0.0]).unwrap(), 2.5);
    }

    #[test]
    fn bregman_vanishes_on_the_diagonal() {
        let x = [0.2, 0.3, 0.5];
        assert_eq!(bregman(&eu(), &x, &x).unwrap(), 0.0);
        assert_abs_diff_eq!(
            bregman(&MirrorSetup::entropic_simplex(), &x, &x).unwrap(),
            0.0,
            epsilon = 1e-16
        );
    }

    #[test]
    fn entropic_bregman_at_a_vertex_is_ln2() {
        let b = bregman(&MirrorSetup::entropic_simplex(), &[1.0, 0.0], &[0.5, 0.5]).unwrap();
        assert_abs_diff_eq!(b, std::f64::consts::LN_2, epsilon = 1e-15);
    }

    #[test]
    fn entropic_bregman_rejects_boundary_base_point() {
        let err = bregman(&MirrorSetup::entropic_simplex(), &[0.5, 0.5], &[1.0, 0.0]);
        assert!(matches!(err, Err(Error::Domain(_))));
    }

    #[test]
    fn plain_gradient_step() {
        let x = Point::new(vec![1.0, 1.0]).unwrap();
        let y = mirror_step(&eu(), &x, &[2.0, 0.0], 0.5).unwrap();
        assert_eq!(y.coords(), &[0.0, 1.0]);
    }

    #[test]
    fn multiplicative_update_closed_form() {
        let x = Point::new(vec![0.5, 0.5]).unwrap();
        let y = mirror_step(
            &MirrorSetup::entropic_simplex(),
            &x,
            &[1.0, 0.0],
            std::f64::consts::LN_2,
        )
        .unwrap();
        assert_abs_diff_eq!(y[0], 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(y[1], 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn ball_step_projects_radially() {
        let setup = MirrorSetup::euclidean(Domain::L2Ball { radius: 1.0 }).unwrap();
        let x = Point::new(vec![1.0, 0.0]).unwrap();
        let y = mirror_step(&setup, &x, &[-2.0, 0.0], 1.0).unwrap();
        assert_eq!(y.coords(), &[1.0, 0.0]);
    }

    #[test]
    fn box_step_clamps() {
        let setup = MirrorSetup::euclidean(Domain::Box { lo: -1.0, hi: 1.0 }).unwrap();
        let x = Point::new(vec![0.5, -0.5]).unwrap();
        let y = mirror_step(&setup, &x, &[-4.0, 0.25], 1.0).unwrap();
        assert_eq!(y.coords(), &[1.0, -0.75]);
    }

    #[test]
    fn entropic_step_survives_huge_gradients() {
        let x = Point::new(vec![0.25, 0.25, 0.5]).unwrap();
        let y = mirror_step(&MirrorSetup::entropic_simplex(), &x, &[1e6, -1e6, 0.0], 10.0).unwrap();
        assert!(y.iter().all(|c| c.is_finite() && *c >= SIMPLEX_FLOOR));
        assert_abs_diff_eq!(y.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(y[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_an_argument_error() {
        let x = Point::new(vec![1.0, 1.0]).unwrap();
        assert!(matches!(
            mirror_step(&eu(), &x, &[1.0], 0.1),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn invalid_pairings_are_rejected() {
        assert!(MirrorSetup::new(
            Regularizer::NegEntropy,
            Domain::Unconstrained,
            PrimalNorm::L1,
            DualNorm::LInf
        )
        .is_err());
        assert!(MirrorSetup::new(
            Regularizer::Euclidean,
            Domain::Unconstrained,
            PrimalNorm::L1,
            DualNorm::LInf
        )
        .is_err());
        assert!(MirrorSetup::new(
            Regularizer::Euclidean,
            Domain::Unconstrained,
            PrimalNorm::L2,
            DualNorm::LInf
        )
        .is_err());
    }

    #[test]
    fn simplex_projection_lands_on_simplex() {
        let mut x = vec![0.9, 0.8, -0.3];
        project_simplex(&mut x);
        assert!(Domain::Simplex.contains(&x, 1e-12));
        assert_abs_diff_eq!(x[0], 0.55, epsilon = 1e-12);
        assert_abs_diff_eq!(x[1], 0.45, epsilon = 1e-12);
    }

    #[test]
    fn point_rejects_non_finite() {
        assert!(Point::new(vec![1.0, f64::NAN]).is_err());
        assert!(Point::new(vec![]).is_err());
    }
}
