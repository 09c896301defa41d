//! Last-iterate decomposition over the second half of an inverse-sqrt run.

use std::f64::consts::SQRT_2;

use super::alpha::{alpha, half};
use super::{max_abs, DiagnosticReport};
use crate::error::{Error, Result};
use crate::geometry::{bregman, dot};
use crate::schedule::ScheduleKind;
use crate::smd::RunTrace;

/// Per-step quantities for t = ⌈T/2⌉..=T; index 0 is t = ⌈T/2⌉.
#[derive(Debug, Clone, PartialEq)]
pub struct LastIterateDecomp {
    pub start: usize,
    /// w_t = Σ_j α_j (x_t − x_j).
    pub w: Vec<Vec<f64>>,
    /// z_t = Σ_j α_j B(x_j, x_t).
    pub z: Vec<f64>,
    pub rho: Vec<f64>,
    /// Q_s = Σ_{t=start}^{s} ⟨ξ_t, w_t⟩.
    pub q: Vec<f64>,
    /// Σ E⟨ξ_t, w_t⟩² up to s.
    pub predictable_var: Vec<f64>,
    /// Σ ⟨ξ_t, w_t⟩² up to s.
    pub quadratic_var: Vec<f64>,
    /// First step attaining max_s Q_s.
    pub argmax_q: usize,
    pub z_max: f64,
}

impl LastIterateDecomp {
    fn at(&self, t: usize) -> usize {
        t - self.start
    }
}

pub fn last_iterate_decomposition(trace: &RunTrace) -> Result<LastIterateDecomp> {
    if trace.config.schedule.kind() != ScheduleKind::InverseSqrt {
        return Err(Error::arg("the last-iterate decomposition needs an inverse-sqrt schedule"));
    }
    let horizon = trace.horizon();
    let start = half(horizon);
    let dim = trace.problem().dim();
    let setup = trace.setup();
    let n = horizon - start + 1;
    let mut out = LastIterateDecomp {
        start,
        w: Vec::with_capacity(n),
        z: Vec::with_capacity(n),
        rho: Vec::with_capacity(n),
        q: Vec::with_capacity(n),
        predictable_var: Vec::with_capacity(n),
        quadratic_var: Vec::with_capacity(n),
        argmax_q: start,
        z_max: f64::NEG_INFINITY,
    };
    let (mut q, mut pv, mut qv) = (0.0, 0.0, 0.0);
    let mut q_best = f64::NEG_INFINITY;
    for t in start..=horizon {
        let xt = trace.iterate(t);
        let mut w = vec![0.0; dim];
        let mut z = 0.0;
        let mut rho = 0.0;
        for j in start..=t.min(horizon - 1) {
            let a = alpha(j, horizon);
            let xj = trace.iterate(j);
            for i in 0..dim {
                w[i] += a * (xt[i] - xj[i]);
            }
            z += a * bregman(setup, xj, xt)?;
            rho += a;
        }
        let inner = dot(&trace.xi[t - 1], &w);
        q += inner;
        pv += trace.noise().second_moment_along(&w);
        qv += inner * inner;
        if q > q_best {
            q_best = q;
            out.argmax_q = t;
        }
        out.z_max = out.z_max.max(z);
        out.w.push(w);
        out.z.push(z);
        out.rho.push(rho);
        out.q.push(q);
        out.predictable_var.push(pv);
        out.quadratic_var.push(qv);
    }
    Ok(out)
}

/// The three last-iterate inequalities plus ‖w_t‖² ≤ 2ρ_t z_t, in that order.
pub fn check_last_iterate_inequalities(trace: &RunTrace) -> Result<Vec<DiagnosticReport>> {
    let dec = last_iterate_decomposition(trace)?;
    let horizon = trace.horizon();
    let tf = horizon as f64;
    let eta = trace.config.schedule.eta();
    let setup = trace.setup();
    let sq = |v: f64| v * v;
    let steps = dec.start..=horizon;

    let gap: f64 = steps.clone().map(|t| trace.err_last[t - 1]).sum();
    let rho_ghat: f64 = steps
        .clone()
        .map(|t| dec.rho[dec.at(t)] * sq(setup.dual_norm().norm(&trace.ghat[t - 1])))
        .sum();
    let z_sum: f64 = dec.z.iter().sum();
    let q_last = *dec.q.last().expect("decomposition is never empty");

    let mut decomposition = DiagnosticReport::new("last-iterate-decomposition");
    let terms = [
        2.0 / tf * gap,
        q_last,
        eta / (2.0 * tf).sqrt() * rho_ghat,
        SQRT_2 / (eta * tf.sqrt()) * z_sum,
    ];
    let lhs = trace.err_last[horizon - 1];
    decomposition.observe(horizon, lhs, terms.iter().sum(), max_abs(&terms));

    let mut average_bound = DiagnosticReport::new("bregman-average-bound");
    let q_star = dec.q[dec.at(dec.argmax_q)];
    let terms = [
        6.0 * SQRT_2 * eta / (tf * tf.sqrt()) * gap,
        3.0 * SQRT_2 * eta / tf.sqrt() * q_star,
        3.0 * eta * eta / tf * rho_ghat,
    ];
    average_bound.observe(horizon, dec.z_max, terms.iter().sum(), max_abs(&terms));

    let mut variance = DiagnosticReport::new("variance-bound");
    let sigma2 = trace.noise().second_moment;
    let centered: f64 = steps
        .clone()
        .map(|t| dec.rho[dec.at(t)] * (sq(setup.dual_norm().norm(&trace.xi[t - 1])) - sigma2))
        .sum();
    let terms = [
        4.0 * sigma2 * dec.z_max * (4.0 * tf).ln(),
        2.0 * dec.z_max * centered,
    ];
    let lhs = dec.predictable_var.last().unwrap() + dec.quadratic_var.last().unwrap();
    variance.observe(horizon, lhs, terms.iter().sum(), max_abs(&terms));

    let mut norm_bound = DiagnosticReport::new("weight-norm-bound");
    for t in steps {
        let k = dec.at(t);
        let w = setup.primal_norm().norm(&dec.w[k]);
        let rhs = 2.0 * dec.rho[k] * dec.z[k];
        norm_bound.observe(t, w * w, rhs, rhs);
    }
    Ok(vec![decomposition, average_bound, variance, norm_bound])
}
