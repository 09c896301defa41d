//! Monte Carlo sweeps over noise classes and horizons on f(x) = |x|.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Mode, NoiseEntry};
use crate::error::{Error, Result};
use crate::geometry::{Domain, MirrorSetup, Point};
use crate::problem::OracleProblem;
use crate::rng::{cell_id, run_seed};
use crate::schedule::StepSchedule;
use crate::smd::{run_smd_streaming, RunConfig, StreamSummary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IterateKind {
    Average,
    Last,
}

/// One aggregated cell. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileSummary {
    pub noise_class: String,
    pub theta_or_p: f64,
    #[serde(rename = "T")]
    pub t: usize,
    pub iterate_kind: IterateKind,
    pub runs: usize,
    pub mean_err: f64,
    pub q: f64,
    pub quantile_err: f64,
    pub base_seed: u64,
}

/// 1-based nearest-rank index ⌈q·n⌉, robust to q·n landing a hair above an integer.
fn nearest_rank(q: f64, n: usize) -> usize {
    let x = q * n as f64;
    let r = x.round();
    let k = if (x - r).abs() <= 1e-9 * x.max(1.0) { r } else { x.ceil() };
    (k as usize).clamp(1, n)
}

/// Mean and nearest-rank q-quantile. The mean is accumulated as offsets from
/// the sample minimum, so a constant sample returns its value exactly.
pub fn aggregate(errors: &[f64], q: f64) -> Result<(f64, f64)> {
    if errors.is_empty() {
        return Err(Error::arg("cannot aggregate an empty sample"));
    }
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::arg(format!("quantile level must lie in (0, 1], got {q}")));
    }
    let mut sorted = errors.to_vec();
    sorted.sort_by(f64::total_cmp);
    let lo = sorted[0];
    let mean = lo + errors.iter().map(|e| e - lo).sum::<f64>() / errors.len() as f64;
    Ok((mean, sorted[nearest_rank(q, errors.len()) - 1]))
}

fn cell_key(cfg: &ExperimentConfig, noise: &NoiseEntry, rest: &str) -> u64 {
    if cfg.common_random_numbers {
        cell_id(rest)
    } else {
        cell_id(&format!("{}|{rest}", noise.name()))
    }
}

fn run_config(cfg: &ExperimentConfig, noise: &NoiseEntry, schedule: StepSchedule, horizon: usize, seed: u64) -> Result<RunConfig> {
    Ok(RunConfig {
        problem: OracleProblem::abs_1d(),
        setup: MirrorSetup::euclidean(Domain::Unconstrained)?,
        schedule,
        noise: noise.spec()?,
        horizon,
        x1: Point::scalar(cfg.x1)?,
        seed,
    })
}

fn summarize(
    cfg: &ExperimentConfig,
    noise: &NoiseEntry,
    t: usize,
    kind: IterateKind,
    errors: &[f64],
) -> Result<QuantileSummary> {
    let (mean_err, quantile_err) = aggregate(errors, cfg.quantile)?;
    Ok(QuantileSummary {
        noise_class: noise.tag().to_string(),
        theta_or_p: noise.theta_or_p(),
        t,
        iterate_kind: kind,
        runs: errors.len(),
        mean_err,
        q: cfg.quantile,
        quantile_err,
        base_seed: cfg.base_seed,
    })
}

/// Constant step size per horizon; errors of x̄_T and x_T at each grid horizon.
pub fn fixed_horizon_experiment(cfg: &ExperimentConfig) -> Result<Vec<QuantileSummary>> {
    cfg.validate()?;
    let mut out = Vec::new();
    for noise in &cfg.noises {
        for &horizon in &cfg.t_grid {
            let schedule = StepSchedule::constant(cfg.fixed_eta_rule.eta(horizon))?;
            let cell = cell_key(cfg, noise, &format!("fixed|T={horizon}"));
            let runs: Vec<StreamSummary> = (0..cfg.runs)
                .into_par_iter()
                .map(|r| {
                    let seed = run_seed(cfg.base_seed, cell, r as u64);
                    run_smd_streaming(&run_config(cfg, noise, schedule, horizon, seed)?, &[horizon])
                })
                .collect::<Result<_>>()?;
            let avg: Vec<f64> = runs.iter().map(|s| s.checkpoints[0].err_avg).collect();
            let last: Vec<f64> = runs.iter().map(|s| s.checkpoints[0].err_last).collect();
            out.push(summarize(cfg, noise, horizon, IterateKind::Average, &avg)?);
            out.push(summarize(cfg, noise, horizon, IterateKind::Last, &last)?);
        }
    }
    Ok(out)
}

/// Logarithmic grid on [1, t_max] joined with the last `dense_window` steps.
pub fn anytime_checkpoints(t_max: usize, log_points: usize, dense_window: usize) -> Vec<usize> {
    let mut cps: Vec<usize> = (0..=log_points)
        .map(|k| {
            let frac = if log_points == 0 { 1.0 } else { k as f64 / log_points as f64 };
            ((t_max as f64).powf(frac).round() as usize).clamp(1, t_max)
        })
        .collect();
    cps.push(1);
    cps.extend(t_max.saturating_sub(dense_window) + 1..=t_max);
    cps.sort_unstable();
    cps.dedup();
    cps
}

const RUN_CHUNK: usize = 1024;

/// η_t = 1/√t along one run of length t_max; errors at every checkpoint.
pub fn anytime_experiment(cfg: &ExperimentConfig) -> Result<Vec<QuantileSummary>> {
    cfg.validate()?;
    let cps = anytime_checkpoints(cfg.t_max, cfg.log_points, cfg.dense_window);
    let schedule = StepSchedule::inverse_sqrt(1.0)?;
    let mut out = Vec::new();
    for noise in &cfg.noises {
        let cell = cell_key(cfg, noise, "anytime");
        // Column-major storage: one error vector per checkpoint.
        let mut avg = vec![Vec::with_capacity(cfg.runs); cps.len()];
        let mut last = vec![Vec::with_capacity(cfg.runs); cps.len()];
        for start in (0..cfg.runs).step_by(RUN_CHUNK) {
            let end = (start + RUN_CHUNK).min(cfg.runs);
            let chunk: Vec<StreamSummary> = (start..end)
                .into_par_iter()
                .map(|r| {
                    let seed = run_seed(cfg.base_seed, cell, r as u64);
                    run_smd_streaming(&run_config(cfg, noise, schedule, cfg.t_max, seed)?, &cps)
                })
                .collect::<Result<_>>()?;
            for s in &chunk {
                for (k, cp) in s.checkpoints.iter().enumerate() {
                    avg[k].push(cp.err_avg);
                    last[k].push(cp.err_last);
                }
            }
        }
        for (k, &t) in cps.iter().enumerate() {
            out.push(summarize(cfg, noise, t, IterateKind::Average, &avg[k])?);
            out.push(summarize(cfg, noise, t, IterateKind::Last, &last[k])?);
        }
    }
    Ok(out)
}

/// Dispatches on the mode, on a dedicated pool when `workers` is set.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<QuantileSummary>> {
    let go = || match cfg.mode {
        Mode::FixedHorizon => fixed_horizon_experiment(cfg),
        Mode::Anytime => anytime_experiment(cfg),
    };
    if cfg.workers == 0 {
        return go();
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {} workers: {e}", cfg.workers)))?
        .install(go)
}
