//! One-step, weighted and iterate-comparison inequalities, and the D-recursion.

use super::{max_abs, DiagnosticReport};
use crate::error::{Error, Result};
use crate::geometry::{bregman, dot, Point};
use crate::smd::RunTrace;

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn check_comparator(trace: &RunTrace, z: &[f64]) -> Result<()> {
    if z.len() != trace.problem().dim() {
        return Err(Error::arg("comparator dimension differs from the trace"));
    }
    if !trace.setup().domain().contains(z, 1e-9) {
        return Err(Error::Domain("comparator is outside the domain".into()));
    }
    Ok(())
}

fn ghat_sq(trace: &RunTrace, t: usize) -> f64 {
    let n = trace.setup().dual_norm().norm(&trace.ghat[t - 1]);
    n * n
}

/// f(x_t) − f(z) ≤ (B(z,x_t) − B(z,x_{t+1}))/η_t + ⟨ξ_t, x_t − z⟩ + η_t‖ĝ_t‖²_*/2 at every step.
pub fn check_one_step(trace: &RunTrace, z: &[f64]) -> Result<DiagnosticReport> {
    check_comparator(trace, z)?;
    let setup = trace.setup();
    let f = |x: &[f64]| trace.problem().value(x);
    let fz = f(z);
    let mut rep = DiagnosticReport::new("one-step");
    let mut b_now = bregman(setup, z, trace.iterate(1))?;
    for t in 1..=trace.horizon() {
        let xt = trace.iterate(t);
        let eta = trace.eta[t - 1];
        let b_next = bregman(setup, z, trace.iterate(t + 1))?;
        let lhs = f(xt) - fz;
        let terms = [
            b_now / eta,
            -b_next / eta,
            dot(&trace.xi[t - 1], &diff(xt, z)),
            0.5 * eta * ghat_sq(trace, t),
        ];
        rep.observe(t, lhs, terms.iter().sum(), max_abs(&terms).max(f(xt).abs()));
        b_now = b_next;
    }
    Ok(rep)
}

/// Weighted telescoping with non-increasing positive weights w_1 ≥ w_2 ≥ …,
/// checked for every prefix s = 1..=weights.len().
pub fn check_weighted_iterates(trace: &RunTrace, z: &[f64], weights: &[f64]) -> Result<DiagnosticReport> {
    check_comparator(trace, z)?;
    if weights.is_empty() || weights.len() > trace.horizon() {
        return Err(Error::arg(format!(
            "need between 1 and {} weights, got {}",
            trace.horizon(),
            weights.len()
        )));
    }
    if weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
        return Err(Error::arg("weights must be positive and finite"));
    }
    if weights.windows(2).any(|p| p[1] > p[0]) {
        return Err(Error::arg("weights must be non-increasing"));
    }
    let setup = trace.setup();
    let f = |x: &[f64]| trace.problem().value(x);
    let fz = f(z);
    let b1 = weights[0] * bregman(setup, z, trace.iterate(1))?;
    let mut gains = 0.0;
    let mut var = 0.0;
    let mut mart = 0.0;
    let mut scale = b1.abs();
    let mut rep = DiagnosticReport::new("weighted-iterates");
    for (i, &w) in weights.iter().enumerate() {
        let t = i + 1;
        let eta = trace.eta[i];
        let xt = trace.iterate(t);
        let gain = w * eta * (f(xt) - fz);
        let v = 0.5 * w * eta * eta * ghat_sq(trace, t);
        let m = w * eta * dot(&trace.xi[i], &diff(xt, z));
        gains += gain;
        var += v;
        mart += m;
        scale = scale.max(gain.abs()).max(v).max(m.abs());
        let tail = w * bregman(setup, z, trace.iterate(t + 1))?;
        rep.observe(t, tail + gains, b1 + var + mart, scale.max(tail));
    }
    Ok(rep)
}

/// Comparison of later iterates with x_j for steps j..=r.
pub fn check_iterate_comparison(trace: &RunTrace, j: usize, r: usize) -> Result<DiagnosticReport> {
    if j == 0 || j > r || r > trace.horizon() {
        return Err(Error::arg(format!(
            "need 1 <= j <= r <= T, got j={j}, r={r}, T={}",
            trace.horizon()
        )));
    }
    let setup = trace.setup();
    let f = |x: &[f64]| trace.problem().value(x);
    let xj = trace.iterate(j).coords();
    let fj = f(xj);
    let mut gains = 0.0;
    let mut mart = 0.0;
    let mut var = 0.0;
    let mut drift = 0.0;
    let mut scale: f64 = 0.0;
    for t in j..=r {
        let xt = trace.iterate(t);
        let eta = trace.eta[t - 1];
        let inc = if t == 1 { 1.0 / eta } else { 1.0 / eta - 1.0 / trace.eta[t - 2] };
        let terms = [
            f(xt) - fj,
            dot(&trace.xi[t - 1], &diff(xt, xj)),
            0.5 * eta * ghat_sq(trace, t),
            inc * bregman(setup, xj, xt)?,
        ];
        gains += terms[0];
        mart += terms[1];
        var += terms[2];
        drift += terms[3];
        scale = scale.max(max_abs(&terms));
    }
    let tail = bregman(setup, xj, trace.iterate(r + 1))? / trace.eta[r - 1];
    let mut rep = DiagnosticReport::new("iterate-comparison");
    rep.observe(r, tail + gains, mart + var + drift, scale.max(tail));
    Ok(rep)
}

/// d_t = √B(x*, x_t) and D_t = max(γ, max_{s≤t} d_s).
#[derive(Debug, Clone, PartialEq)]
pub struct DSequence {
    pub gamma: f64,
    /// d_1..d_{T+1}.
    pub d: Vec<f64>,
    /// D_1..D_{T+1}.
    pub big_d: Vec<f64>,
}

pub fn d_sequence(trace: &RunTrace, gamma: f64) -> Result<DSequence> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::arg(format!("gamma must be positive, got {gamma}")));
    }
    let star = trace.problem().minimizer().clone();
    check_comparator(trace, &star)?;
    let mut d = Vec::with_capacity(trace.x.len());
    let mut big_d = Vec::with_capacity(trace.x.len());
    let mut run = gamma;
    for x in &trace.x {
        let v = bregman(trace.setup(), &star, x)?.max(0.0).sqrt();
        run = run.max(v);
        d.push(v);
        big_d.push(run);
    }
    Ok(DSequence { gamma, d, big_d })
}

/// Checks that D_s stays below the almost-sure envelope B_T built from γ, the
/// noisy-gradient energy and the running maximum of the normalized martingale,
/// together with the weighted relation that produces it.
pub fn check_d_recursion(trace: &RunTrace, gamma: f64) -> Result<(DiagnosticReport, DiagnosticReport)> {
    let seq = d_sequence(trace, gamma)?;
    let horizon = trace.horizon();
    let star: &Point = trace.problem().minimizer();
    let energy: f64 = (1..=horizon)
        .map(|t| 0.5 * trace.eta[t - 1].powi(2) * ghat_sq(trace, t))
        .sum();
    let mut run = 0.0;
    let mut best: f64 = 0.0;
    let mut parts = Vec::with_capacity(horizon);
    for t in 1..=horizon {
        let dt = seq.big_d[t - 1];
        let u = dot(&trace.xi[t - 1], &diff(trace.iterate(t), star));
        let m = trace.eta[t - 1] * u / (std::f64::consts::SQRT_2 * dt);
        run += m;
        best = best.max(run);
        parts.push(m);
    }
    let envelope = seq.d[0] + gamma.max(energy / gamma) + std::f64::consts::SQRT_2 * best;
    let scale = seq.d[0].max(gamma).max(energy / gamma).max(best.abs());

    let mut bound = DiagnosticReport::new("d-envelope");
    let mut relation = DiagnosticReport::new("d-relation");
    let mut gains = 0.0;
    for s in 1..=horizon {
        bound.observe(s, seq.big_d[s - 1], envelope, scale);
        let dt = seq.big_d[s - 1];
        gains += trace.eta[s - 1] * trace.err_last[s - 1] / dt;
        let lhs = seq.d[s].powi(2) / dt + gains;
        relation.observe(s, lhs, envelope, scale.max(lhs.abs()));
    }
    Ok((bound, relation))
}
