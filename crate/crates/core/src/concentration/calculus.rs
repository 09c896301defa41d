//! Closed-form sub-Weibull calculus: moment bounds, the centering constant
//! and the three MGF bounds.

use std::f64::consts::{E, LN_2};

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

fn checked_exp(log_value: f64, what: &str) -> Result<f64> {
    let v = log_value.exp();
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Range(format!("{what} overflows f64 (log value {log_value})")))
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::arg(format!("{name} must be positive and finite, got {v}")))
    }
}

/// 2Γ(θp + 1)ν^p, the bound on E|X|^p for X sub-Weibull(θ, ν).
pub fn moment_bound(theta: f64, nu: f64, p: f64) -> Result<f64> {
    positive("theta", theta)?;
    positive("p", p)?;
    if nu == 0.0 {
        return Ok(0.0);
    }
    positive("nu", nu)?;
    checked_exp(
        LN_2 + ln_gamma(theta * p + 1.0) + p * nu.ln(),
        "moment bound",
    )
}

/// c_θ with X − EX sub-Weibull(θ, c_θ ν) whenever X is sub-Weibull(θ, ν).
pub fn centering_constant(theta: f64) -> Result<f64> {
    positive("theta", theta)?;
    checked_exp(
        (theta.max(1.0) + 1.0) * LN_2 + ln_gamma(theta + 1.0) - theta * LN_2.ln(),
        "centering constant",
    )
}

/// exp(4eν²λ²), valid for every λ when θ = 1/2.
pub fn mgf_bound_light(nu: f64, lambda: f64) -> f64 {
    (4.0 * E * nu * nu * lambda * lambda).exp()
}

/// Largest |λ| admitted by [`mgf_bound_exponential`].
pub fn exponential_lambda_max(nu: f64) -> f64 {
    1.0 / (2.0 * E * nu)
}

/// exp(2e²ν²λ²) for θ = 1 and |λ| ≤ 1/(2eν).
pub fn mgf_bound_exponential(nu: f64, lambda: f64) -> Result<f64> {
    positive("nu", nu)?;
    let lim = exponential_lambda_max(nu);
    if !(lambda.abs() <= lim * (1.0 + 1e-12)) {
        return Err(Error::arg(format!(
            "lambda {lambda} outside [-{lim}, {lim}]"
        )));
    }
    Ok((2.0 * E * E * nu * nu * lambda * lambda).exp())
}

/// Largest λ admitted by [`mgf_bound_truncated`].
pub fn truncated_lambda_max(theta: f64, nu: f64, h: f64) -> f64 {
    1.0 / (2.0 * h.powf(1.0 - 1.0 / theta) * nu)
}

/// Coefficient a in the truncated MGF bound exp(aν²λ²).
pub fn truncated_mgf_coefficient(theta: f64, h: f64) -> Result<f64> {
    let g2 = checked_exp(ln_gamma(2.0 * theta + 1.0), "Γ(2θ+1)")?;
    let g3 = checked_exp(
        3.0 * theta * LN_2 + ln_gamma(3.0 * theta + 1.0),
        "2^{3θ}Γ(3θ+1)",
    )?;
    Ok((2f64.powf(2.0 * theta) + 1.0) * g2 + g3 / 6.0 * h.powf(1.0 / theta - 1.0))
}

/// Bound on E exp(λX̃), X̃ = X·1{X ≤ νh}, for θ ≥ 1 and 0 ≤ λ ≤ 1/(2h^{1−1/θ}ν).
pub fn mgf_bound_truncated(theta: f64, nu: f64, h: f64, lambda: f64) -> Result<f64> {
    if !(theta >= 1.0) {
        return Err(Error::arg(format!("truncated bound needs theta >= 1, got {theta}")));
    }
    positive("nu", nu)?;
    positive("h", h)?;
    let lim = truncated_lambda_max(theta, nu, h);
    if !(lambda >= 0.0 && lambda <= lim * (1.0 + 1e-12)) {
        return Err(Error::arg(format!("lambda {lambda} outside [0, {lim}]")));
    }
    let a = truncated_mgf_coefficient(theta, h)?;
    Ok((a * nu * nu * lambda * lambda).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn moment_bound_values() {
        assert_relative_eq!(moment_bound(1.0, 1.0, 2.0).unwrap(), 4.0, max_relative = 1e-13);
        assert_relative_eq!(moment_bound(2.0, 1.0, 1.0).unwrap(), 4.0, max_relative = 1e-13);
        assert_relative_eq!(moment_bound(1.0, 1.0, 1e-9).unwrap(), 2.0, max_relative = 1e-6);
        assert!(matches!(moment_bound(200.0, 1.0, 10.0), Err(Error::Range(_))));
    }

    #[test]
    fn centering_constants() {
        assert_relative_eq!(centering_constant(1.0).unwrap(), 4.0 / LN_2, max_relative = 1e-13);
        assert_relative_eq!(
            centering_constant(2.0).unwrap(),
            8.0 * 2.0 / (LN_2 * LN_2),
            max_relative = 1e-13
        );
        assert_relative_eq!(centering_constant(2.0).unwrap(), 33.3019, max_relative = 1e-5);
        assert_relative_eq!(
            centering_constant(0.5).unwrap(),
            4.0 * 0.5 * std::f64::consts::PI.sqrt() / LN_2.sqrt(),
            max_relative = 1e-13
        );
    }

    #[test]
    fn mgf_bounds_at_zero_are_one() {
        assert_eq!(mgf_bound_light(3.0, 0.0), 1.0);
        assert_eq!(mgf_bound_exponential(3.0, 0.0).unwrap(), 1.0);
        assert_eq!(mgf_bound_truncated(2.0, 1.0, 4.0, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn light_bound_example() {
        let nu = (8.0f64 / 3.0).sqrt();
        assert_relative_eq!(mgf_bound_light(nu, 0.5).ln(), 4.0 * E * (8.0 / 3.0) * 0.25, max_relative = 1e-14);
    }

    #[test]
    fn lambda_ranges_enforced() {
        assert!(mgf_bound_exponential(1.0, 1.0).is_err());
        assert!(mgf_bound_exponential(1.0, -exponential_lambda_max(1.0)).is_ok());
        let lim = truncated_lambda_max(2.0, 1.0, 4.0);
        assert_relative_eq!(lim, 0.25, max_relative = 1e-14);
        assert!(mgf_bound_truncated(2.0, 1.0, 4.0, lim).is_ok());
        assert!(mgf_bound_truncated(2.0, 1.0, 4.0, 1.01 * lim).is_err());
        assert!(mgf_bound_truncated(2.0, 1.0, 4.0, -0.1).is_err());
    }

    #[test]
    fn truncated_coefficient() {
        // θ = 1: (4 + 1)·2 + 8·6/6 · h^0.
        assert_relative_eq!(truncated_mgf_coefficient(1.0, 3.0).unwrap(), 18.0, max_relative = 1e-13);
    }
}
