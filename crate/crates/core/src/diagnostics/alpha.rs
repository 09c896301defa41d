//! Weights α_j = 1/((T − j)(T − j + 1)) of the last-iterate decomposition.

use super::DiagnosticReport;
use crate::error::{Error, Result};

pub fn alpha(j: usize, horizon: usize) -> f64 {
    debug_assert!(j < horizon);
    let a = (horizon - j) as f64;
    1.0 / (a * (a + 1.0))
}

/// First index of the second half, ⌈T/2⌉.
pub fn half(horizon: usize) -> usize {
    horizon.div_ceil(2)
}

/// ρ_t = Σ_{j=⌈T/2⌉}^{min(t, T−1)} α_j, by direct summation.
pub fn rho(t: usize, horizon: usize) -> f64 {
    let top = t.min(horizon.saturating_sub(1));
    (half(horizon)..=top).map(|j| alpha(j, horizon)).sum()
}

/// Σ_{j=a}^{b} α_j, checked against the telescoped form 1/(T − b) − 1/(T − a + 1).
pub fn alpha_sum(a: usize, b: usize, horizon: usize) -> Result<f64> {
    if a == 0 || a > b || b >= horizon {
        return Err(Error::arg(format!(
            "need 1 <= a <= b < T, got a={a}, b={b}, T={horizon}"
        )));
    }
    let direct: f64 = (a..=b).map(|j| alpha(j, horizon)).sum();
    let closed = 1.0 / (horizon - b) as f64 - 1.0 / (horizon - a + 1) as f64;
    if (direct - closed).abs() > 1e-12 {
        return Err(Error::Identity(format!(
            "alpha sum {direct} differs from {closed} for (a, b, T) = ({a}, {b}, {horizon})"
        )));
    }
    Ok(direct)
}

fn double_sums(horizon: usize) -> (f64, f64) {
    let mut acc = 0.0;
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    for t in half(horizon)..=horizon {
        if t < horizon {
            acc += alpha(t, horizon);
        }
        s1 += acc;
        s2 += acc * acc;
    }
    (s1, s2)
}

/// (Σ_t ρ_t, Σ_t ρ_t²) over t = ⌈T/2⌉..T, checked against log(4T) and 3.
pub fn alpha_double_sums(horizon: usize) -> Result<(f64, f64)> {
    if horizon == 0 {
        return Err(Error::arg("T must be at least 1"));
    }
    let (s1, s2) = double_sums(horizon);
    let cap = (4.0 * horizon as f64).ln();
    if s1 > cap || s2 > 3.0 {
        return Err(Error::Identity(format!(
            "double sums ({s1}, {s2}) exceed ({cap}, 3) at T={horizon}"
        )));
    }
    Ok((s1, s2))
}

/// Checks the telescoped α-sum identity for every 1 ≤ a ≤ b < T ≤ `t_max`.
pub fn sweep_alpha_identity(t_max: usize) -> DiagnosticReport {
    let mut rep = DiagnosticReport::new("alpha-sum-identity");
    for t in 2..=t_max {
        for a in 1..t {
            let mut direct = 0.0;
            for b in a..t {
                direct += alpha(b, t);
                let closed = 1.0 / (t - b) as f64 - 1.0 / (t - a + 1) as f64;
                rep.observe_with_tol(t, (direct - closed).abs(), 0.0, 1e-12);
            }
        }
    }
    rep
}

/// Checks Σρ_t ≤ log(4T) and Σρ_t² ≤ 3 for T = 1..=`t_max`.
pub fn sweep_rho_sums(t_max: usize) -> DiagnosticReport {
    let mut rep = DiagnosticReport::new("rho-sums");
    for t in 1..=t_max {
        let (s1, s2) = double_sums(t);
        rep.observe(t, s1, (4.0 * t as f64).ln(), 0.0);
        rep.observe(t, s2, 3.0, 0.0);
    }
    rep
}
