//! Deviation thresholds of the maximal martingale inequalities.

use std::f64::consts::{E, LN_2};

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta <= 1.0 {
        Ok(())
    } else {
        Err(Error::arg(format!("delta must lie in (0, 1], got {delta}")))
    }
}

fn check_scales(name: &str, v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::arg(format!("{name}: need at least one scale")));
    }
    if v.iter().any(|x| !(*x >= 0.0 && x.is_finite())) {
        return Err(Error::arg(format!("{name}: scales must be finite and non-negative")));
    }
    Ok(())
}

fn sum_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max)
}

/// log(2e Σ m^s / (m_*^s δ)), computed on ratios so large s stays finite.
fn union_log(scales: &[f64], m_star: f64, s: f64, delta: f64) -> f64 {
    let ratio: f64 = scales
        .iter()
        .filter(|&&m| m > 0.0)
        .map(|m| (m / m_star).powf(s))
        .sum();
    (2.0 * E * ratio / delta).ln()
}

fn gamma_term(log_two_mult: f64, gamma_arg: f64) -> f64 {
    (log_two_mult * LN_2 + ln_gamma(gamma_arg)).exp()
}

/// Sub-Weibull maximal inequality: with probability at least 1 − δ no partial
/// sum reaches the returned level. θ = 1/2 and θ ≥ 1 are supported.
pub fn subweibull_maximal(theta: f64, scales: &[f64], delta: f64, s: f64) -> Result<f64> {
    check_delta(delta)?;
    check_scales("sub-weibull maximal", scales)?;
    if theta == 0.5 {
        return Ok(4.0 * (E * sum_sq(scales) * (1.0 / delta).ln()).sqrt());
    }
    if !(theta >= 1.0) {
        return Err(Error::arg(format!("theta must be 1/2 or >= 1, got {theta}")));
    }
    if !(s >= 0.0) {
        return Err(Error::arg(format!("s must be non-negative, got {s}")));
    }
    let c1 = gamma_term(3.0 * theta + 1.0, 3.0 * theta + 1.0);
    let log2d = (2.0 / delta).ln();
    let first = (c1 * sum_sq(scales) * log2d).sqrt();
    let m_star = max_of(scales);
    if m_star == 0.0 {
        return Ok(first);
    }
    let tail = union_log(scales, m_star, s, delta)
        .powf(theta - 1.0)
        .max((s * theta - s).powf(theta - 1.0));
    Ok(first + 4.0 * m_star * tail * log2d)
}

/// Fuk-Nagaev maximal inequality for increments with E|X_i/κ_i|^p ≤ 1, p > 2.
/// The event is a strict exceedance.
pub fn fuk_nagaev(p: f64, kappas: &[f64], delta: f64) -> Result<f64> {
    check_delta(delta)?;
    check_scales("fuk-nagaev", kappas)?;
    if !(p > 2.0) {
        return Err(Error::arg(format!("p must exceed 2, got {p}")));
    }
    let sp: f64 = kappas.iter().map(|k| k.powf(p)).sum();
    Ok((2.0 * sum_sq(kappas) * (1.0 / delta).ln()).sqrt() + (2.0 + p / 3.0) * (sp / delta).powf(1.0 / p))
}

/// exp(−min{x²/(8β), x/(6α)}), with x/(6α) = ∞ at α = 0.
pub fn chicken_egg_cap(alpha: f64, beta: f64, x: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::arg(format!("beta must be positive, got {beta}")));
    }
    if !(alpha >= 0.0) {
        return Err(Error::arg(format!("alpha must be non-negative, got {alpha}")));
    }
    if !(x > 0.0) {
        return Err(Error::arg(format!("x must be positive, got {x}")));
    }
    let linear = if alpha == 0.0 { f64::INFINITY } else { x / (6.0 * alpha) };
    Ok((-(x * x / (8.0 * beta)).min(linear)).exp())
}

/// Level for max_k Σ_{t≤k} ω_t⟨ξ_t, u_t⟩ with ‖u_t‖ ≤ 1 and sub-Weibull(θ, φ) noise.
pub fn shortcut_subw_inner(phi: f64, theta: f64, weights: &[f64], delta: f64, s: f64) -> Result<f64> {
    check_delta(delta)?;
    check_scales("weights", weights)?;
    let c1 = gamma_term(3.0 * theta + 1.0, 3.0 * theta + 1.0);
    let c2 = 1f64.max((s * theta - s).powf(theta - 1.0));
    let first = phi * (c1 * sum_sq(weights) * (2.0 / delta).ln()).sqrt();
    let w_star = max_of(weights);
    if w_star == 0.0 {
        return Ok(first);
    }
    Ok(first + 4.0 * phi * w_star * c2 * union_log(weights, w_star, s, delta).powf(theta))
}

/// Level for max_k Σ_{t≤k} ω_t(‖ξ_t‖²_* − E‖ξ_t‖²_*) under sub-Weibull(θ, φ) noise.
pub fn shortcut_subw_sq(phi: f64, theta: f64, weights: &[f64], delta: f64, s: f64) -> Result<f64> {
    check_delta(delta)?;
    check_scales("weights", weights)?;
    let c1 = gamma_term(6.0 * theta + 1.0, 6.0 * theta + 1.0);
    let c2 = 1f64.max((2.0 * s * theta - s).powf(2.0 * theta - 1.0));
    let c3 = gamma_term(2.0 * theta + 1.0, 2.0 * theta + 1.0) / LN_2.powf(2.0 * theta);
    let first = c3 * phi * phi * (c1 * sum_sq(weights) * (2.0 / delta).ln()).sqrt();
    let w_star = max_of(weights);
    if w_star == 0.0 {
        return Ok(first);
    }
    Ok(first
        + 4.0 * c2 * c3 * phi * phi * w_star * union_log(weights, w_star, s, delta).powf(2.0 * theta))
}

/// Level for the inner-product sum under a p-th moment bound κ; strict exceedance.
pub fn shortcut_poly_inner(kappa: f64, p: f64, weights: &[f64], delta: f64) -> Result<f64> {
    check_delta(delta)?;
    check_scales("weights", weights)?;
    let sp: f64 = weights.iter().map(|w| w.powf(p)).sum();
    Ok(kappa * (2.0 * sum_sq(weights) * (1.0 / delta).ln()).sqrt()
        + (2.0 + p / 3.0) * kappa * (sp / delta).powf(1.0 / p))
}

/// Level for the centered squared-norm sum under a p-th moment bound κ; strict exceedance.
pub fn shortcut_poly_sq(kappa: f64, p: f64, weights: &[f64], delta: f64) -> Result<f64> {
    check_delta(delta)?;
    check_scales("weights", weights)?;
    let sp: f64 = weights.iter().map(|w| w.powf(p / 2.0)).sum();
    let k2 = kappa * kappa;
    Ok(2.0 * k2 * (2.0 * sum_sq(weights) * (1.0 / delta).ln()).sqrt()
        + 2.0 * (2.0 + p / 6.0) * k2 * (sp / delta).powf(2.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn light_threshold_example() {
        let thr = subweibull_maximal(0.5, &[1.0; 100], 0.05, 0.0).unwrap();
        assert_relative_eq!(thr, 4.0 * (100.0 * E * 20f64.ln()).sqrt(), max_relative = 1e-14);
        assert_relative_eq!(thr, 114.13, max_relative = 1e-3);
    }

    #[test]
    fn heavy_threshold_by_hand() {
        // θ = 1, s = 0: C₁ = 2⁴Γ(4) = 96 and the bracket is max{1, 1}.
        let thr = subweibull_maximal(1.0, &[1.0; 10], 0.1, 0.0).unwrap();
        let l = 20f64.ln();
        assert_relative_eq!(thr, (96.0 * 10.0 * l).sqrt() + 4.0 * l, max_relative = 1e-13);
        // θ = 2, s = 3, unit scales: bracket max{log(2e·n/δ), 3}.
        let thr = subweibull_maximal(2.0, &[1.0; 10], 0.1, 3.0).unwrap();
        let c1 = 2f64.powi(7) * 720.0;
        let br = (2.0 * E * 100.0).ln().max(3.0);
        assert_relative_eq!(thr, (c1 * 10.0 * l).sqrt() + 4.0 * br * l, max_relative = 1e-12);
    }

    #[test]
    fn zero_scales_give_zero_level() {
        assert_eq!(subweibull_maximal(1.0, &[0.0; 5], 0.05, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn fuk_nagaev_example() {
        let thr = fuk_nagaev(5.0, &[1.0; 100], 0.05).unwrap();
        let expect = (200.0 * 20f64.ln()).sqrt() + 11.0 / 3.0 * 2000f64.powf(0.2);
        assert_relative_eq!(thr, expect, max_relative = 1e-14);
        assert_relative_eq!(thr, 41.25, max_relative = 1e-3);
    }

    #[test]
    fn chicken_egg_examples() {
        assert_relative_eq!(chicken_egg_cap(0.0, 200.0, 40.0).unwrap(), (-1f64).exp(), max_relative = 1e-14);
        assert_relative_eq!(chicken_egg_cap(1.0, 1.0, 12.0).unwrap(), (-2f64).exp(), max_relative = 1e-14);
        assert!(chicken_egg_cap(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn shortcut_poly_with_unit_weights_matches_fuk_nagaev() {
        let w = vec![1.0; 50];
        assert_relative_eq!(
            shortcut_poly_inner(1.0, 5.0, &w, 0.05).unwrap(),
            fuk_nagaev(5.0, &w, 0.05).unwrap(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn thresholds_shrink_with_delta() {
        let w: Vec<f64> = (1..=100).map(|t| 1.0 / (t as f64).sqrt()).collect();
        let mut prev = f64::INFINITY;
        for d in [0.001, 0.01, 0.1, 0.5] {
            let v = shortcut_subw_inner(1.0, 2.0, &w, d, 3.0).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }
}
