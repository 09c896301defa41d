//! Randomized sweep of every per-run check over many generated traces.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::alpha::{alpha_double_sums, alpha_sum};
use super::last_iterate::check_last_iterate_inequalities;
use super::inequalities::{check_d_recursion, check_iterate_comparison, check_one_step, check_weighted_iterates};
use super::DiagnosticReport;
use crate::error::Result;
use crate::geometry::{Domain, MirrorSetup, Point};
use crate::noise::{NoiseClass, NoiseSpec};
use crate::problem::OracleProblem;
use crate::rng::{cell_id, run_seed, stream_rng};
use crate::schedule::StepSchedule;
use crate::smd::{run_smd, RunConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub traces: usize,
    pub seed: u64,
    pub horizons: Vec<usize>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            traces: 1000,
            seed: 20240601,
            horizons: vec![1, 2, 4, 64],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub traces: usize,
    pub reports: Vec<DiagnosticReport>,
}

impl SuiteSummary {
    pub fn pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }
}

fn feasible_point(domain: &Domain, dim: usize, rng: &mut ChaCha8Rng) -> Point {
    let v: Vec<f64> = match *domain {
        Domain::Unconstrained => (0..dim).map(|_| rng.random_range(-3.0..3.0)).collect(),
        Domain::L2Ball { radius } => {
            let raw: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            let n = raw.iter().map(|c| c * c).sum::<f64>().sqrt().max(1e-12);
            let r = radius * rng.random::<f64>();
            raw.iter().map(|c| c * r / n).collect()
        }
        Domain::Box { lo, hi } => (0..dim).map(|_| rng.random_range(lo..hi)).collect(),
        Domain::Simplex => {
            let raw: Vec<f64> = (0..dim).map(|_| 0.05 + rng.random::<f64>()).collect();
            let s: f64 = raw.iter().sum();
            raw.iter().map(|c| c / s).collect()
        }
    };
    Point::new(v).expect("generated points are finite")
}

fn random_noise(dim: usize, setup: &MirrorSetup, rng: &mut ChaCha8Rng) -> NoiseSpec {
    if rng.random_bool(0.1) {
        return NoiseSpec::zero(dim, setup.dual_norm());
    }
    let class = match rng.random_range(0..8) {
        0 | 1 => NoiseClass::Gaussian,
        2 => NoiseClass::SymWeibull { theta: 1.0 },
        3 => NoiseClass::SymWeibull { theta: 2.0 },
        4 => NoiseClass::SymWeibull { theta: 10.0 / 3.0 },
        5 => NoiseClass::SymWeibull { theta: 6.0 },
        6 => NoiseClass::SymPoly { p: 4.5 },
        _ => NoiseClass::SymPoly { p: 8.0 },
    };
    let m2 = rng.random_range(0.1..4.0);
    NoiseSpec::new(class, m2, dim, setup.dual_norm()).expect("valid noise parameters")
}

fn random_config(horizons: &[usize], seed: u64, rng: &mut ChaCha8Rng) -> Result<RunConfig> {
    let entropic = rng.random_bool(0.4);
    let (setup, dim) = if entropic {
        (MirrorSetup::entropic_simplex(), rng.random_range(2..=4))
    } else {
        let domain = match rng.random_range(0..3) {
            0 => Domain::Unconstrained,
            1 => Domain::L2Ball { radius: rng.random_range(1.0..3.0) },
            _ => Domain::Box { lo: -1.5, hi: 2.0 },
        };
        (MirrorSetup::euclidean(domain)?, rng.random_range(1..=4))
    };
    let center = feasible_point(setup.domain(), dim, rng);
    let problem = match rng.random_range(0..3) {
        0 => OracleProblem::abs_sum(center),
        1 => {
            let up = (0..dim).map(|_| rng.random_range(0.5..2.0)).collect();
            let down = (0..dim).map(|_| rng.random_range(0.5..2.0)).collect();
            OracleProblem::piecewise_linear_max(center, up, down)?
        }
        _ => OracleProblem::quadratic(center, rng.random_range(0.2..1.0), None)?,
    };
    let eta = rng.random_range(0.05..1.5);
    let schedule = if rng.random_bool(0.5) {
        StepSchedule::constant(eta)?
    } else {
        StepSchedule::inverse_sqrt(eta)?
    };
    let noise = random_noise(dim, &setup, rng);
    let x1 = feasible_point(setup.domain(), dim, rng);
    let horizon = horizons[rng.random_range(0..horizons.len())];
    Ok(RunConfig { problem, setup, schedule, noise, horizon, x1, seed })
}

fn check_trace(cfg: &SuiteConfig, index: usize) -> Result<Vec<DiagnosticReport>> {
    let seed = run_seed(cfg.seed, cell_id("trace-suite"), index as u64);
    let mut rng = stream_rng(seed, u64::MAX);
    let run = random_config(&cfg.horizons, seed, &mut rng)?;
    let trace = run_smd(&run)?;
    let horizon = trace.horizon();
    let dim = run.problem.dim();
    let mut reports = Vec::new();

    let z = feasible_point(run.setup.domain(), dim, &mut rng);
    reports.push(check_one_step(&trace, &z)?);

    let mut w = 1.0;
    let weights: Vec<f64> = (0..horizon)
        .map(|_| {
            let cur = w;
            w *= rng.random_range(0.5..1.0);
            cur
        })
        .collect();
    reports.push(check_weighted_iterates(&trace, &z, &weights)?);

    let j = rng.random_range(1..=horizon);
    let r = rng.random_range(j..=horizon);
    reports.push(check_iterate_comparison(&trace, j, r)?);

    let gamma = rng.random_range(-2.0f64..2.0).exp();
    let (envelope, relation) = check_d_recursion(&trace, gamma)?;
    reports.push(envelope);
    reports.push(relation);

    let mut sums = DiagnosticReport::new("rho-sums");
    let (s1, s2) = alpha_double_sums(horizon)?;
    let cap = (4.0 * horizon as f64).ln();
    sums.observe(horizon, s1, cap, cap);
    sums.observe(horizon, s2, 3.0, 3.0);
    reports.push(sums);

    if horizon >= 2 {
        let mut ident = DiagnosticReport::new("alpha-sum-identity");
        let a = rng.random_range(1..horizon);
        let b = rng.random_range(a..horizon);
        let closed = 1.0 / (horizon - b) as f64 - 1.0 / (horizon - a + 1) as f64;
        ident.observe(horizon, (alpha_sum(a, b, horizon)? - closed).abs(), 0.0, closed);
        reports.push(ident);
    }

    if run.schedule.kind() == crate::schedule::ScheduleKind::InverseSqrt {
        reports.extend(check_last_iterate_inequalities(&trace)?);
    }
    Ok(reports)
}

/// Runs every check on `cfg.traces` random traces and merges reports by name.
pub fn run_trace_suite(cfg: &SuiteConfig) -> Result<SuiteSummary> {
    let per_trace: Vec<Vec<DiagnosticReport>> = (0..cfg.traces)
        .into_par_iter()
        .map(|i| check_trace(cfg, i))
        .collect::<Result<_>>()?;
    let mut merged: Vec<DiagnosticReport> = Vec::new();
    for rep in per_trace.iter().flatten() {
        match merged.iter_mut().find(|m| m.name == rep.name) {
            Some(m) => m.merge(rep),
            None => merged.push(rep.clone()),
        }
    }
    Ok(SuiteSummary {
        traces: cfg.traces,
        reports: merged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes_and_is_deterministic() {
        let cfg = SuiteConfig {
            traces: 60,
            ..SuiteConfig::default()
        };
        let a = run_trace_suite(&cfg).unwrap();
        for r in &a.reports {
            assert!(r.pass, "{r:?}");
        }
        assert_eq!(a, run_trace_suite(&cfg).unwrap());
    }
}
