//! Stochastic mirror descent runs, full-trace and streaming.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{mirror_step, MirrorSetup, Point};
use crate::noise::NoiseSpec;
use crate::problem::OracleProblem;
use crate::rng::{reset_stream, stream_rng};
use crate::schedule::StepSchedule;

/// Largest horizon for which every iterate is kept.
pub const MAX_TRACE_HORIZON: usize = 100_000;

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub problem: OracleProblem,
    pub setup: MirrorSetup,
    pub schedule: StepSchedule,
    pub noise: NoiseSpec,
    pub horizon: usize,
    pub x1: Point,
    pub seed: u64,
}

/// Per-step record of one run. Index `t - 1` holds step `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub config: RunConfig,
    /// x_1, ..., x_{T+1}.
    pub x: Vec<Point>,
    /// Exact subgradients g_t ∈ ∂f(x_t).
    pub g: Vec<Vec<f64>>,
    pub xi: Vec<Vec<f64>>,
    /// ĝ_t = g_t − ξ_t.
    pub ghat: Vec<Vec<f64>>,
    pub eta: Vec<f64>,
    /// f(x_t) − f* for t = 1..=T+1.
    pub err_last: Vec<f64>,
    /// f(x̄_t) − f* for t = 1..=T+1.
    pub err_avg: Vec<f64>,
}

impl RunTrace {
    pub fn horizon(&self) -> usize {
        self.config.horizon
    }

    pub fn setup(&self) -> &MirrorSetup {
        &self.config.setup
    }

    pub fn problem(&self) -> &OracleProblem {
        &self.config.problem
    }

    pub fn noise(&self) -> &NoiseSpec {
        &self.config.noise
    }

    /// x_t, 1-based.
    pub fn iterate(&self, t: usize) -> &Point {
        &self.x[t - 1]
    }
}

/// Error values read off a streaming run at one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub t: usize,
    pub err_last: f64,
    pub err_avg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamSummary {
    pub checkpoints: Vec<Checkpoint>,
    /// x_{T+1}.
    pub last: Point,
    /// x̄_T.
    pub average: Point,
}

fn validate(cfg: &RunConfig) -> Result<()> {
    if cfg.horizon == 0 {
        return Err(Error::arg("horizon must be at least 1"));
    }
    let d = cfg.problem.dim();
    if cfg.x1.dim() != d || cfg.noise.dim != d {
        return Err(Error::arg(format!(
            "dimension mismatch: problem {d}, start {}, noise {}",
            cfg.x1.dim(),
            cfg.noise.dim
        )));
    }
    if cfg.noise.dual != cfg.setup.dual_norm() {
        return Err(Error::arg("noise directions must use the setup's dual norm"));
    }
    cfg.problem.check_point(&cfg.x1)?;
    cfg.setup.check_interior(&cfg.x1)?;
    if !cfg.setup.domain().contains(&cfg.x1, 1e-12) {
        return Err(Error::Domain("start point is outside the domain".into()));
    }
    Ok(())
}

/// Drives the recursion, handing every step to `visit`.
fn drive(
    cfg: &RunConfig,
    mut visit: impl FnMut(usize, &Point, &[f64], &[f64], &[f64], f64, &Point),
) -> Result<Point> {
    validate(cfg)?;
    let d = cfg.problem.dim();
    let scale = cfg.noise.unit_variance_scale()?;
    let mut rng = stream_rng(cfg.seed, 0);
    let mut x = cfg.x1.clone();
    let mut xi = vec![0.0; d];
    let mut ghat = vec![0.0; d];
    for t in 1..=cfg.horizon {
        let g = cfg.problem.subgradient(&x);
        reset_stream(&mut rng, t as u64);
        cfg.noise.sample_into(scale, &mut rng, &mut xi);
        for i in 0..d {
            ghat[i] = g[i] - xi[i];
        }
        let eta = cfg.schedule.step_size(t);
        let next = mirror_step(&cfg.setup, &x, &ghat, eta).map_err(|e| e.at_step(t))?;
        visit(t, &x, &g, &xi, &ghat, eta, &next);
        x = next;
    }
    Ok(x)
}

struct RunningMean {
    sum: Vec<f64>,
    count: usize,
}

impl RunningMean {
    fn new(d: usize) -> Self {
        RunningMean {
            sum: vec![0.0; d],
            count: 0,
        }
    }

    fn push(&mut self, x: &[f64]) {
        self.sum.iter_mut().zip(x).for_each(|(s, v)| *s += v);
        self.count += 1;
    }

    fn mean(&self) -> Vec<f64> {
        let n = self.count as f64;
        self.sum.iter().map(|s| s / n).collect()
    }
}

pub fn run_smd(cfg: &RunConfig) -> Result<RunTrace> {
    if cfg.horizon > MAX_TRACE_HORIZON {
        return Err(Error::arg(format!(
            "full traces are limited to T <= {MAX_TRACE_HORIZON}; use the streaming run"
        )));
    }
    let t_max = cfg.horizon;
    let d = cfg.problem.dim();
    let mut x = Vec::with_capacity(t_max + 1);
    let mut g = Vec::with_capacity(t_max);
    let mut xis = Vec::with_capacity(t_max);
    let mut ghats = Vec::with_capacity(t_max);
    let mut eta = Vec::with_capacity(t_max);
    let mut err_last = Vec::with_capacity(t_max + 1);
    let mut err_avg = Vec::with_capacity(t_max + 1);
    let mut mean = RunningMean::new(d);
    let problem = &cfg.problem;
    let last = drive(cfg, |_, xt, gt, xit, ght, e, _| {
        mean.push(xt);
        err_last.push(problem.error(xt));
        err_avg.push(problem.error(&mean.mean()));
        x.push(xt.clone());
        g.push(gt.to_vec());
        xis.push(xit.to_vec());
        ghats.push(ght.to_vec());
        eta.push(e);
    })?;
    mean.push(&last);
    err_last.push(problem.error(&last));
    err_avg.push(problem.error(&mean.mean()));
    x.push(last);
    Ok(RunTrace {
        config: cfg.clone(),
        x,
        g,
        xi: xis,
        ghat: ghats,
        eta,
        err_last,
        err_avg,
    })
}

/// Runs without storing the trace, reporting errors at the requested steps.
///
/// `checkpoints` are 1-based steps in `1..=T+1`; the reported values are
/// bit-identical to `err_last[t-1]` and `err_avg[t-1]` of the full trace.
pub fn run_smd_streaming(cfg: &RunConfig, checkpoints: &[usize]) -> Result<StreamSummary> {
    if let Some(&c) = checkpoints.iter().find(|&&c| c == 0 || c > cfg.horizon + 1) {
        return Err(Error::arg(format!(
            "checkpoint {c} outside 1..={}",
            cfg.horizon + 1
        )));
    }
    let mut wanted: Vec<usize> = checkpoints.to_vec();
    wanted.sort_unstable();
    wanted.dedup();
    let d = cfg.problem.dim();
    let mut mean = RunningMean::new(d);
    let mut out = Vec::with_capacity(wanted.len());
    let mut cursor = 0;
    let problem = &cfg.problem;
    let record = |t: usize, x: &Point, mean: &RunningMean, out: &mut Vec<Checkpoint>| {
        out.push(Checkpoint {
            t,
            err_last: problem.error(x),
            err_avg: problem.error(&mean.mean()),
        });
    };
    let last = drive(cfg, |t, xt, _, _, _, _, _| {
        mean.push(xt);
        if cursor < wanted.len() && wanted[cursor] == t {
            record(t, xt, &mean, &mut out);
            cursor += 1;
        }
    })?;
    // The running mean still excludes x_{T+1}; the summary reports x̄_T.
    let average = Point::from_vec_unchecked(mean.mean());
    mean.push(&last);
    if cursor < wanted.len() {
        record(cfg.horizon + 1, &last, &mean, &mut out);
    }
    Ok(StreamSummary {
        checkpoints: out,
        last,
        average,
    })
}

/// Mean of x_1..x_t over the stored iterates.
pub fn average_iterate(trace: &RunTrace, t: usize) -> Result<Point> {
    if t == 0 || t > trace.x.len() {
        return Err(Error::arg(format!(
            "average over {t} iterates requested, trace holds {}",
            trace.x.len()
        )));
    }
    let mut mean = RunningMean::new(trace.x[0].dim());
    for x in &trace.x[..t] {
        mean.push(x);
    }
    Ok(Point::from_vec_unchecked(mean.mean()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Domain, DualNorm};
    use crate::noise::NoiseClass;

    fn abs_run(noise: NoiseSpec, horizon: usize, eta: f64, seed: u64) -> RunConfig {
        RunConfig {
            problem: OracleProblem::abs_1d(),
            setup: MirrorSetup::euclidean(Domain::Unconstrained).unwrap(),
            schedule: StepSchedule::constant(eta).unwrap(),
            noise,
            horizon,
            x1: Point::scalar(2.0).unwrap(),
            seed,
        }
    }

    #[test]
    fn noise_free_abs_hand_computed() {
        let tr = run_smd(&abs_run(NoiseSpec::zero(1, DualNorm::L2), 2, 1.0, 0)).unwrap();
        let xs: Vec<f64> = tr.x.iter().map(|p| p[0]).collect();
        assert_eq!(xs, vec![2.0, 1.0, 0.0]);
        assert_eq!(tr.err_last, vec![2.0, 1.0, 0.0]);
        assert_eq!(tr.err_avg, vec![2.0, 1.5, 1.0]);
        assert_eq!(average_iterate(&tr, 3).unwrap().coords(), &[1.0]);
        assert_eq!(average_iterate(&tr, 1).unwrap().coords(), &[2.0]);
    }

    #[test]
    fn single_step_matches_mirror_step() {
        let cfg = abs_run(NoiseSpec::zero(1, DualNorm::L2), 1, 0.3, 0);
        let tr = run_smd(&cfg).unwrap();
        let expect = mirror_step(&cfg.setup, &cfg.x1, &[1.0], 0.3).unwrap();
        assert_eq!(tr.x[1], expect);
    }

    #[test]
    fn seeded_runs_are_bit_identical() {
        let noise = NoiseSpec::scalar(NoiseClass::Gaussian).unwrap();
        let a = run_smd(&abs_run(noise.clone(), 200, 0.1, 42)).unwrap();
        let b = run_smd(&abs_run(noise.clone(), 200, 0.1, 42)).unwrap();
        assert_eq!(a, b);
        let c = run_smd(&abs_run(noise, 200, 0.1, 43)).unwrap();
        assert_ne!(a.xi, c.xi);
    }

    #[test]
    fn trace_records_consistent_oracle() {
        let noise = NoiseSpec::scalar(NoiseClass::SymWeibull { theta: 2.0 }).unwrap();
        let tr = run_smd(&abs_run(noise, 50, 0.1, 5)).unwrap();
        assert_eq!(tr.x.len(), 51);
        assert_eq!(tr.err_last.len(), 51);
        for t in 0..50 {
            assert_eq!(tr.ghat[t][0], tr.g[t][0] - tr.xi[t][0]);
            assert_eq!(tr.g[t], tr.problem().subgradient(&tr.x[t]));
        }
    }

    #[test]
    fn streaming_matches_full_trace() {
        let noise = NoiseSpec::scalar(NoiseClass::SymWeibull { theta: 10.0 / 3.0 }).unwrap();
        let cfg = abs_run(noise, 300, 0.05, 9);
        let tr = run_smd(&cfg).unwrap();
        let cps = [1, 2, 17, 100, 300, 301];
        let s = run_smd_streaming(&cfg, &cps).unwrap();
        assert_eq!(s.checkpoints.len(), cps.len());
        for cp in &s.checkpoints {
            assert_eq!(cp.err_last.to_bits(), tr.err_last[cp.t - 1].to_bits());
            assert_eq!(cp.err_avg.to_bits(), tr.err_avg[cp.t - 1].to_bits());
        }
        assert_eq!(s.last, tr.x[300]);
        assert_eq!(s.average, average_iterate(&tr, 300).unwrap());
    }

    #[test]
    fn oversized_trace_rejected() {
        let cfg = abs_run(NoiseSpec::zero(1, DualNorm::L2), MAX_TRACE_HORIZON + 1, 0.1, 0);
        assert!(run_smd(&cfg).is_err());
    }

    #[test]
    fn bad_start_rejected() {
        let mut cfg = abs_run(NoiseSpec::zero(2, DualNorm::LInf), 3, 0.1, 0);
        cfg.problem = OracleProblem::abs_sum(Point::new(vec![0.5, 0.5]).unwrap());
        cfg.setup = MirrorSetup::entropic_simplex();
        cfg.x1 = Point::new(vec![1.0, 0.0]).unwrap();
        assert!(matches!(run_smd(&cfg), Err(Error::Domain(_))));
    }
}
