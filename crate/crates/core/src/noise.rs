//! Zero-mean gradient noise with light, sub-Weibull or polynomial tails.
//!
//! A draw is a symmetric scalar magnitude times a direction on the unit
//! sphere of the dual norm, so ‖ξ‖_* is exactly the scalar's absolute value.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Pareto, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::geometry::DualNorm;

/// Beyond this shape the unit-variance scale underflows f64.
pub const MAX_WEIBULL_THETA: f64 = 150.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "class")]
pub enum NoiseClass {
    Gaussian,
    SymWeibull { theta: f64 },
    SymPoly { p: f64 },
}

impl NoiseClass {
    pub fn tag(&self) -> &'static str {
        match self {
            NoiseClass::Gaussian => "gaussian",
            NoiseClass::SymWeibull { .. } => "weibull",
            NoiseClass::SymPoly { .. } => "poly",
        }
    }

    /// θ for sub-Weibull classes (1/2 for Gaussian), p for polynomial ones.
    pub fn shape(&self) -> f64 {
        match *self {
            NoiseClass::Gaussian => 0.5,
            NoiseClass::SymWeibull { theta } => theta,
            NoiseClass::SymPoly { p } => p,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub class: NoiseClass,
    /// E‖ξ‖²_*; zero gives the noise-free oracle.
    pub second_moment: f64,
    pub dim: usize,
    pub dual: DualNorm,
}

/// Certified tail constants of a noise law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum TailParams {
    SubWeibull { theta: f64, nu: f64, sigma2: f64 },
    Poly { p: f64, kappa: f64, sigma2: f64 },
}

impl TailParams {
    pub fn sigma2(&self) -> f64 {
        match *self {
            TailParams::SubWeibull { sigma2, .. } | TailParams::Poly { sigma2, .. } => sigma2,
        }
    }

    /// ν or κ, whichever is active.
    pub fn scale(&self) -> f64 {
        match *self {
            TailParams::SubWeibull { nu, .. } => nu,
            TailParams::Poly { kappa, .. } => kappa,
        }
    }
}

impl NoiseSpec {
    pub fn new(class: NoiseClass, second_moment: f64, dim: usize, dual: DualNorm) -> Result<Self> {
        if !(second_moment >= 0.0 && second_moment.is_finite()) {
            return Err(Error::arg(format!(
                "second moment must be finite and non-negative, got {second_moment}"
            )));
        }
        if dim == 0 {
            return Err(Error::arg("noise dimension must be at least 1"));
        }
        match class {
            NoiseClass::SymWeibull { theta } if !(theta >= 1.0 && theta.is_finite()) => {
                return Err(Error::arg(format!("weibull shape must be >= 1, got {theta}")));
            }
            NoiseClass::SymPoly { p } if !(p > 4.0 && p.is_finite()) => {
                return Err(Error::arg(format!("poly moment order must be > 4, got {p}")));
            }
            _ => {}
        }
        Ok(NoiseSpec {
            class,
            second_moment,
            dim,
            dual,
        })
    }

    /// Unit-variance scalar noise.
    pub fn scalar(class: NoiseClass) -> Result<Self> {
        NoiseSpec::new(class, 1.0, 1, DualNorm::L2)
    }

    pub fn zero(dim: usize, dual: DualNorm) -> Self {
        NoiseSpec {
            class: NoiseClass::Gaussian,
            second_moment: 0.0,
            dim,
            dual,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.second_moment == 0.0
    }

    /// Scale of the magnitude law matching the target second moment:
    /// the standard deviation, the Weibull λ or the Pareto minimum.
    pub fn unit_variance_scale(&self) -> Result<f64> {
        let m2 = self.second_moment;
        match self.class {
            NoiseClass::Gaussian => Ok(m2.sqrt()),
            NoiseClass::SymWeibull { theta } => weibull_scale(theta, m2),
            NoiseClass::SymPoly { p } => {
                let a = p + 1.0;
                Ok((m2 * (a - 2.0) / a).sqrt())
            }
        }
    }

    pub fn tail_params(&self) -> Result<TailParams> {
        let sigma2 = self.second_moment;
        let s = self.unit_variance_scale()?;
        Ok(match self.class {
            NoiseClass::Gaussian => TailParams::SubWeibull {
                theta: 0.5,
                nu: s * (8.0_f64 / 3.0).sqrt(),
                sigma2,
            },
            NoiseClass::SymWeibull { theta } => TailParams::SubWeibull {
                theta,
                nu: weibull_certificate(theta, s)?,
                sigma2,
            },
            NoiseClass::SymPoly { p } => TailParams::Poly {
                p,
                kappa: s * (p + 1.0).powf(1.0 / p),
                sigma2,
            },
        })
    }

    /// Symmetric scalar magnitude; its absolute value is ‖ξ‖_*.
    pub fn sample_scalar<R: Rng + ?Sized>(&self, scale: f64, rng: &mut R) -> f64 {
        if scale == 0.0 {
            return 0.0;
        }
        match self.class {
            NoiseClass::Gaussian => {
                let z: f64 = StandardNormal.sample(rng);
                scale * z
            }
            NoiseClass::SymWeibull { theta } => {
                let e: f64 = Exp1.sample(rng);
                rademacher(rng) * scale * e.powf(theta)
            }
            NoiseClass::SymPoly { p } => {
                let m = Pareto::new(scale, p + 1.0)
                    .expect("pareto parameters validated")
                    .sample(rng);
                rademacher(rng) * m
            }
        }
    }

    /// One draw of ξ, with `scale` from [`NoiseSpec::unit_variance_scale`].
    pub fn sample_into<R: Rng + ?Sized>(&self, scale: f64, rng: &mut R, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim);
        let r = self.sample_scalar(scale, rng);
        if self.dim == 1 {
            out[0] = r;
            return;
        }
        if r == 0.0 {
            out.iter_mut().for_each(|c| *c = 0.0);
            return;
        }
        unit_direction(self.dual, rng, out);
        out.iter_mut().for_each(|c| *c *= r);
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<f64>> {
        let scale = self.unit_variance_scale()?;
        let mut out = vec![0.0; self.dim];
        self.sample_into(scale, rng, &mut out);
        Ok(out)
    }

    /// E⟨ξ, w⟩² for a fixed w, in closed form for the isotropic direction laws.
    pub fn second_moment_along(&self, w: &[f64]) -> f64 {
        let d = self.dim as f64;
        let w2: f64 = w.iter().map(|x| x * x).sum();
        if self.dim == 1 {
            return self.second_moment * w2;
        }
        match self.dual {
            DualNorm::L2 => self.second_moment * w2 / d,
            // One coordinate is ±1, the rest uniform on (−1, 1).
            DualNorm::LInf => self.second_moment * w2 * (1.0 + (d - 1.0) / 3.0) / d,
        }
    }
}

fn rademacher<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    if rng.random::<bool>() {
        1.0
    } else {
        -1.0
    }
}

fn unit_direction<R: Rng + ?Sized>(dual: DualNorm, rng: &mut R, out: &mut [f64]) {
    match dual {
        DualNorm::L2 => loop {
            for c in out.iter_mut() {
                *c = StandardNormal.sample(rng);
            }
            let n = out.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > 1e-300 {
                out.iter_mut().for_each(|c| *c /= n);
                return;
            }
        },
        DualNorm::LInf => {
            let face = rng.random_range(0..out.len());
            for (i, c) in out.iter_mut().enumerate() {
                *c = if i == face {
                    rademacher(rng)
                } else {
                    rng.random_range(-1.0..1.0)
                };
            }
        }
    }
}

/// λ with E[(λE^θ)²] = m2 for E ~ Exp(1).
fn weibull_scale(theta: f64, m2: f64) -> Result<f64> {
    if theta > MAX_WEIBULL_THETA {
        return Err(Error::Range(format!(
            "Γ(1 + 2θ) overflows for θ = {theta} (limit {MAX_WEIBULL_THETA})"
        )));
    }
    Ok((0.5 * (m2.ln() - ln_gamma(1.0 + 2.0 * theta))).exp())
}

/// ν solving E exp((λE^θ/ν)^{1/θ}) = 2, found by bisection.
///
/// The left side equals 1/(1 − (λ/ν)^{1/θ}) for ν > λ.
fn weibull_certificate(theta: f64, lambda: f64) -> Result<f64> {
    if lambda == 0.0 {
        return Ok(0.0);
    }
    let excess = |nu: f64| 1.0 / (1.0 - (lambda / nu).powf(1.0 / theta)) - 2.0;
    let mut lo = lambda * (1.0 + 1e-12);
    let mut hi = lambda * 2.0;
    while excess(hi) > 0.0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::Numerical("certificate bracket diverged".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use approx::assert_relative_eq;

    fn weibull(theta: f64) -> NoiseSpec {
        NoiseSpec::scalar(NoiseClass::SymWeibull { theta }).unwrap()
    }

    #[test]
    fn weibull_scales() {
        assert_relative_eq!(
            weibull(1.0).unit_variance_scale().unwrap(),
            std::f64::consts::FRAC_1_SQRT_2,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            weibull(2.0).unit_variance_scale().unwrap(),
            1.0 / 24f64.sqrt(),
            max_relative = 1e-14
        );
        let s = NoiseSpec::new(NoiseClass::SymWeibull { theta: 1.0 }, 4.0, 1, DualNorm::L2)
            .unwrap();
        assert_relative_eq!(s.unit_variance_scale().unwrap(), 2f64.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn huge_theta_is_a_range_error() {
        assert!(matches!(
            weibull(151.0).unit_variance_scale(),
            Err(Error::Range(_))
        ));
        assert!(weibull(150.0).unit_variance_scale().is_ok());
    }

    #[test]
    fn gaussian_certificate() {
        let t = NoiseSpec::scalar(NoiseClass::Gaussian)
            .unwrap()
            .tail_params()
            .unwrap();
        assert_relative_eq!(t.scale(), (8.0f64 / 3.0).sqrt(), max_relative = 1e-14);
        // 1/√(1 − 2/ν²) = 2 at the certificate.
        assert_relative_eq!(1.0 / (1.0 - 2.0 / t.scale().powi(2)).sqrt(), 2.0, max_relative = 1e-12);
    }

    #[test]
    fn weibull_certificate_matches_closed_form() {
        for theta in [1.0, 2.0, 10.0 / 3.0, 7.5] {
            let spec = weibull(theta);
            let lambda = spec.unit_variance_scale().unwrap();
            let nu = spec.tail_params().unwrap().scale();
            assert_relative_eq!(nu, lambda * 2f64.powf(theta), max_relative = 1e-10);
        }
    }

    #[test]
    fn weibull_certificate_by_quadrature() {
        // E exp((λE/ν)) for θ = 1, integrated on a grid.
        let lambda = std::f64::consts::FRAC_1_SQRT_2;
        let nu = weibull(1.0).tail_params().unwrap().scale();
        let c = lambda / nu;
        let h = 1e-4;
        let integral: f64 = (0..1_000_000)
            .map(|k| {
                let e = (k as f64 + 0.5) * h;
                (c * e - e).exp() * h
            })
            .sum();
        assert_relative_eq!(integral, 2.0, max_relative = 1e-6);
    }

    #[test]
    fn poly_kappa_certifies_pth_moment() {
        let spec = NoiseSpec::scalar(NoiseClass::SymPoly { p: 5.0 }).unwrap();
        let xm = spec.unit_variance_scale().unwrap();
        let a: f64 = 6.0;
        // Second moment of Pareto(xm, a) is a xm² / (a − 2).
        assert_relative_eq!(a * xm * xm / (a - 2.0), 1.0, max_relative = 1e-14);
        let kappa = spec.tail_params().unwrap().scale();
        assert_relative_eq!(a * xm.powi(5) / (a - 5.0), kappa.powi(5), max_relative = 1e-12);
    }

    #[test]
    fn zero_target_gives_zero_vector() {
        let mut rng = stream_rng(1, 0);
        for class in [
            NoiseClass::Gaussian,
            NoiseClass::SymWeibull { theta: 2.0 },
            NoiseClass::SymPoly { p: 6.0 },
        ] {
            let spec = NoiseSpec::new(class, 0.0, 3, DualNorm::LInf).unwrap();
            assert_eq!(spec.sample(&mut rng).unwrap(), vec![0.0; 3]);
        }
    }

    #[test]
    fn dual_norm_of_draw_is_the_scalar_magnitude() {
        for dual in [DualNorm::L2, DualNorm::LInf] {
            let spec = NoiseSpec::new(NoiseClass::SymWeibull { theta: 2.0 }, 1.0, 4, dual).unwrap();
            let scale = spec.unit_variance_scale().unwrap();
            let mut v = vec![0.0; 4];
            spec.sample_into(scale, &mut stream_rng(3, 9), &mut v);
            let r = spec.sample_scalar(scale, &mut stream_rng(3, 9));
            assert_relative_eq!(dual.norm(&v), r.abs(), max_relative = 1e-12);
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(NoiseSpec::scalar(NoiseClass::SymPoly { p: 4.0 }).is_err());
        assert!(NoiseSpec::scalar(NoiseClass::SymWeibull { theta: 0.9 }).is_err());
        assert!(NoiseSpec::new(NoiseClass::Gaussian, -1.0, 1, DualNorm::L2).is_err());
    }
}
