//! Martingale difference generators with exact per-step tail certificates.
//!
//! A step's `scale` is the certificate of its increment: the sub-Weibull
//! ν for `Gaussian` (θ = 1/2) and `SymWeibull`, the p-th moment bound κ for
//! `SymPoly`, and the magnitude for `Rademacher`.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Pareto, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum IncrementClass {
    Gaussian,
    SymWeibull { theta: f64 },
    SymPoly { p: f64 },
    Rademacher,
    /// Gaussian steps at full scale while the martingale is non-positive and
    /// at half scale once it is positive.
    AdversarialScaled,
}

/// E exp((|X|/ν)^{1/θ}) = 2 exactly for X = ν 2^{−θ} E^θ with E ~ Exp(1).
pub fn weibull_unit_scale(theta: f64) -> f64 {
    2f64.powf(-theta)
}

/// Std of a centered Gaussian whose sub-Weibull(1/2) certificate is ν.
pub fn gaussian_std(nu: f64) -> f64 {
    nu * (3.0f64 / 8.0).sqrt()
}

/// Pareto floor x_m with E|X|^p = κ^p for tail index p + 1.
pub fn pareto_floor(kappa: f64, p: f64) -> f64 {
    kappa / (p + 1.0).powf(1.0 / p)
}

fn sign<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    if rng.random::<bool>() {
        1.0
    } else {
        -1.0
    }
}

/// |X| for a unit certificate of the given class, with E X².
pub(crate) fn unit_magnitude<R: Rng + ?Sized>(class: IncrementClass, rng: &mut R) -> f64 {
    match class {
        IncrementClass::Gaussian | IncrementClass::AdversarialScaled => {
            let z: f64 = StandardNormal.sample(rng);
            gaussian_std(1.0) * z.abs()
        }
        IncrementClass::SymWeibull { theta } => {
            let e: f64 = Exp1.sample(rng);
            weibull_unit_scale(theta) * e.powf(theta)
        }
        IncrementClass::SymPoly { p } => Pareto::new(pareto_floor(1.0, p), p + 1.0)
            .expect("floor and shape are positive")
            .sample(rng),
        IncrementClass::Rademacher => 1.0,
    }
}

/// E X² for a unit certificate.
pub fn unit_second_moment(class: IncrementClass) -> f64 {
    match class {
        IncrementClass::Gaussian | IncrementClass::AdversarialScaled => 3.0 / 8.0,
        IncrementClass::SymWeibull { theta } => weibull_unit_scale(theta).powi(2) * gamma(2.0 * theta + 1.0),
        IncrementClass::SymPoly { p } => {
            let a = p + 1.0;
            pareto_floor(1.0, p).powi(2) * a / (a - 2.0)
        }
        IncrementClass::Rademacher => 1.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MartingaleGen {
    pub class: IncrementClass,
    pub scales: Vec<f64>,
}

/// One increment with its conditional variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Increment {
    pub value: f64,
    pub cond_var: f64,
}

impl MartingaleGen {
    pub fn new(class: IncrementClass, scales: Vec<f64>) -> Result<Self> {
        if scales.is_empty() {
            return Err(Error::arg("a martingale needs at least one step"));
        }
        if scales.iter().any(|m| !(*m >= 0.0 && m.is_finite())) {
            return Err(Error::arg("scales must be finite and non-negative"));
        }
        match class {
            IncrementClass::SymWeibull { theta } if !(theta > 0.0 && theta <= 150.0) => {
                return Err(Error::arg(format!("theta must lie in (0, 150], got {theta}")))
            }
            IncrementClass::SymPoly { p } if !(p > 2.0) => {
                return Err(Error::arg(format!("p must exceed 2, got {p}")))
            }
            _ => {}
        }
        Ok(MartingaleGen { class, scales })
    }

    pub fn uniform(class: IncrementClass, scale: f64, n: usize) -> Result<Self> {
        MartingaleGen::new(class, vec![scale; n])
    }

    pub fn len(&self) -> usize {
        self.scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }

    /// Increment `i` (0-based) given the current value of the martingale.
    pub fn step<R: Rng + ?Sized>(&self, i: usize, current: f64, rng: &mut R) -> Increment {
        let mut m = self.scales[i];
        if self.class == IncrementClass::AdversarialScaled && current > 0.0 {
            m *= 0.5;
        }
        let value = sign(rng) * m * unit_magnitude(self.class, rng);
        Increment {
            value,
            cond_var: m * m * unit_second_moment(self.class),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    fn empirical<F: FnMut() -> f64>(n: usize, mut f: F) -> f64 {
        (0..n).map(|_| f()).sum::<f64>() / n as f64
    }

    #[test]
    fn weibull_certificate_is_exact() {
        let mut rng = stream_rng(1, 0);
        for theta in [0.5, 1.0, 2.0] {
            let cls = IncrementClass::SymWeibull { theta };
            let m = empirical(400_000, || (unit_magnitude(cls, &mut rng).powf(1.0 / theta)).exp().min(1e12));
            assert!((m - 2.0).abs() < 0.05, "theta {theta}: {m}");
        }
    }

    #[test]
    fn second_moments_match() {
        let mut rng = stream_rng(2, 0);
        for cls in [
            IncrementClass::Gaussian,
            IncrementClass::SymWeibull { theta: 1.0 },
            IncrementClass::SymPoly { p: 8.0 },
        ] {
            let m = empirical(400_000, || unit_magnitude(cls, &mut rng).powi(2));
            let e = unit_second_moment(cls);
            assert!((m / e - 1.0).abs() < 0.02, "{cls:?}: {m} vs {e}");
        }
    }

    #[test]
    fn poly_pth_moment_is_one() {
        // E|X|^p = x_m^p (p+1) = 1 for a unit κ; check with p = 3 where the variance is finite.
        let p = 3.0;
        let e = pareto_floor(1.0, p).powf(p) * (p + 1.0) / (p + 1.0 - p);
        assert!((e - 1.0).abs() < 1e-12);
    }

    #[test]
    fn adversarial_scale_halves_when_positive() {
        let g = MartingaleGen::uniform(IncrementClass::AdversarialScaled, 2.0, 3).unwrap();
        let mut rng = stream_rng(3, 0);
        let a = g.step(0, -1.0, &mut rng);
        let b = g.step(0, 1.0, &mut rng);
        assert!((a.cond_var / b.cond_var - 4.0).abs() < 1e-12);
    }

    #[test]
    fn bad_generators_rejected() {
        assert!(MartingaleGen::new(IncrementClass::Gaussian, vec![]).is_err());
        assert!(MartingaleGen::new(IncrementClass::SymPoly { p: 2.0 }, vec![1.0]).is_err());
        assert!(MartingaleGen::new(IncrementClass::Rademacher, vec![-1.0]).is_err());
    }
}
