//! Monte Carlo validators. Trials are split into fixed shards, each with its
//! own counter-addressed generator, so counts do not depend on worker count.

use std::f64::consts::TAU;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use super::calculus::{
    centering_constant, mgf_bound_exponential, mgf_bound_light,
    mgf_bound_truncated, moment_bound,
};
use super::martingale::{
    gaussian_std, unit_magnitude, unit_second_moment, weibull_unit_scale, IncrementClass,
    MartingaleGen,
};
use super::thresholds::{
    chicken_egg_cap, fuk_nagaev, shortcut_poly_inner, shortcut_poly_sq, shortcut_subw_inner,
    shortcut_subw_sq, subweibull_maximal,
};
use crate::error::{Error, Result};
use crate::rng::{cell_id, run_seed, stream_rng};

const SHARD: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub trials: u64,
    pub seed: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            trials: 100_000,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViolationEstimate {
    pub trials: u64,
    pub violations: u64,
    pub rate: f64,
    /// Binomial standard error at the target rate.
    pub stderr: f64,
    pub target: f64,
    pub pass: bool,
}

impl ViolationEstimate {
    pub fn new(trials: u64, violations: u64, target: f64) -> Self {
        let n = trials as f64;
        let rate = violations as f64 / n;
        let stderr = (target * (1.0 - target) / n).max(0.0).sqrt();
        ViolationEstimate {
            trials,
            violations,
            rate,
            stderr,
            target,
            pass: rate <= target + 4.0 * stderr,
        }
    }
}

/// Sample mean of a statistic compared with an upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub trials: u64,
    pub mean: f64,
    pub stderr: f64,
    pub bound: f64,
    pub pass: bool,
}

impl MeanEstimate {
    fn new(trials: u64, sum: f64, sum_sq: f64, bound: f64) -> Self {
        let n = trials as f64;
        let mean = sum / n;
        let var = (sum_sq / n - mean * mean).max(0.0) * n / (n - 1.0).max(1.0);
        let stderr = (var / n).sqrt();
        MeanEstimate {
            trials,
            mean,
            stderr,
            bound,
            pass: mean <= bound + 4.0 * stderr,
        }
    }
}

fn shard_sizes(trials: u64) -> Vec<(u64, u64)> {
    (0..trials.div_ceil(SHARD))
        .map(|k| (k, SHARD.min(trials - k * SHARD)))
        .collect()
}

fn shard_rng(mc: &McConfig, key: &str, shard: u64) -> ChaCha8Rng {
    stream_rng(run_seed(mc.seed, cell_id(key), shard), 0)
}

fn count_events<F>(mc: &McConfig, key: &str, event: F) -> u64
where
    F: Fn(&mut ChaCha8Rng) -> bool + Sync,
{
    shard_sizes(mc.trials)
        .into_par_iter()
        .map(|(k, n)| {
            let mut rng = shard_rng(mc, key, k);
            (0..n).filter(|_| event(&mut rng)).count() as u64
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum()
}

fn moments_of<F>(mc: &McConfig, key: &str, stat: F) -> (f64, f64)
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    shard_sizes(mc.trials)
        .into_par_iter()
        .map(|(k, n)| {
            let mut rng = shard_rng(mc, key, k);
            (0..n).fold((0.0, 0.0), |(s, q), _| {
                let v = stat(&mut rng);
                (s + v, q + v * v)
            })
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((0.0, 0.0), |(s, q), (a, b)| (s + a, q + b))
}

fn check_trials(mc: &McConfig) -> Result<()> {
    if mc.trials == 0 {
        Err(Error::arg("need at least one trial"))
    } else {
        Ok(())
    }
}

/// `s ≥ level`, read as `s > 0` when the level is zero.
pub fn reaches(s: f64, level: f64) -> bool {
    s >= level && (level > 0.0 || s > 0.0)
}

fn max_partial_sum<R: Rng + ?Sized>(gen: &MartingaleGen, rng: &mut R) -> f64 {
    let mut s = 0.0;
    let mut best = f64::NEG_INFINITY;
    for i in 0..gen.len() {
        s += gen.step(i, s, rng).value;
        best = best.max(s);
    }
    best
}

fn key_of(tag: &str, parts: &impl std::fmt::Debug) -> String {
    format!("{tag}:{parts:?}")
}

/// Rate of max_t S_t reaching the sub-Weibull maximal level. θ = 1/2 uses Gaussian steps.
pub fn validate_subw_maximal(
    theta: f64,
    scales: &[f64],
    delta: f64,
    s: f64,
    mc: &McConfig,
) -> Result<ViolationEstimate> {
    check_trials(mc)?;
    let level = subweibull_maximal(theta, scales, delta, s)?;
    let class = if theta == 0.5 {
        IncrementClass::Gaussian
    } else {
        IncrementClass::SymWeibull { theta }
    };
    let gen = MartingaleGen::new(class, scales.to_vec())?;
    let key = key_of("e2", &(theta, delta, s, scales));
    let hits = count_events(mc, &key, |rng| reaches(max_partial_sum(&gen, rng), level));
    Ok(ViolationEstimate::new(mc.trials, hits, delta))
}

/// Rate of max_t S_t strictly exceeding the Fuk-Nagaev level.
pub fn validate_fuk_nagaev(p: f64, kappas: &[f64], delta: f64, mc: &McConfig) -> Result<ViolationEstimate> {
    check_trials(mc)?;
    let level = fuk_nagaev(p, kappas, delta)?;
    let gen = MartingaleGen::new(IncrementClass::SymPoly { p }, kappas.to_vec())?;
    let key = key_of("e3", &(p, delta, kappas));
    let hits = count_events(mc, &key, |rng| max_partial_sum(&gen, rng) > level);
    Ok(ViolationEstimate::new(mc.trials, hits, delta))
}

/// Frequency of some t with M_t ≥ x and ⟨M⟩_t + [M]_t ≤ αM_t + β.
pub fn validate_chicken_egg(
    alpha: f64,
    beta: f64,
    x: f64,
    gen: &MartingaleGen,
    mc: &McConfig,
) -> Result<ViolationEstimate> {
    check_trials(mc)?;
    let cap = chicken_egg_cap(alpha, beta, x)?;
    let key = key_of("p1", &(alpha, beta, x, gen));
    let hits = count_events(mc, &key, |rng| {
        let (mut m, mut v) = (0.0, 0.0);
        for i in 0..gen.len() {
            let inc = gen.step(i, m, rng);
            m += inc.value;
            v += inc.cond_var + inc.value * inc.value;
            if m >= x && v <= alpha * m + beta {
                return true;
            }
        }
        false
    });
    Ok(ViolationEstimate::new(mc.trials, hits, cap))
}

/// Rates of max_k S_k reaching each level, from one set of simulations.
pub fn maximal_rate_curve(gen: &MartingaleGen, levels: &[f64], mc: &McConfig) -> Result<Vec<f64>> {
    check_trials(mc)?;
    let key = key_of("curve", gen);
    let counts = shard_sizes(mc.trials)
        .into_par_iter()
        .map(|(k, n)| {
            let mut rng = shard_rng(mc, &key, k);
            let mut c = vec![0u64; levels.len()];
            for _ in 0..n {
                let best = max_partial_sum(gen, &mut rng);
                for (ci, &l) in c.iter_mut().zip(levels) {
                    *ci += u64::from(best >= l);
                }
            }
            c
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(vec![0u64; levels.len()], |mut acc, c| {
            acc.iter_mut().zip(c).for_each(|(a, b)| *a += b);
            acc
        });
    Ok(counts.iter().map(|&c| c as f64 / mc.trials as f64).collect())
}

/// Noise law of the weighted-sum validators; certificates are 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum ShortcutNoise {
    Weibull { theta: f64, s: f64 },
    Poly { p: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShortcutSum {
    InnerProduct,
    SquaredNorm,
}

/// Weighted sums of two-dimensional noise against predictable unit directions
/// that follow the running sum of past noise.
pub fn validate_weighted_shortcuts(
    noise: ShortcutNoise,
    which: ShortcutSum,
    weights: &[f64],
    delta: f64,
    mc: &McConfig,
) -> Result<ViolationEstimate> {
    check_trials(mc)?;
    let (class, level, strict) = match (noise, which) {
        (ShortcutNoise::Weibull { theta, s }, ShortcutSum::InnerProduct) => (
            IncrementClass::SymWeibull { theta },
            shortcut_subw_inner(1.0, theta, weights, delta, s)?,
            false,
        ),
        (ShortcutNoise::Weibull { theta, s }, ShortcutSum::SquaredNorm) => (
            IncrementClass::SymWeibull { theta },
            shortcut_subw_sq(1.0, theta, weights, delta, s)?,
            false,
        ),
        (ShortcutNoise::Poly { p }, ShortcutSum::InnerProduct) => {
            (IncrementClass::SymPoly { p }, shortcut_poly_inner(1.0, p, weights, delta)?, true)
        }
        (ShortcutNoise::Poly { p }, ShortcutSum::SquaredNorm) => {
            (IncrementClass::SymPoly { p }, shortcut_poly_sq(1.0, p, weights, delta)?, true)
        }
    };
    let _ = MartingaleGen::new(class, weights.to_vec())?;
    let mean_sq = unit_second_moment(class);
    let key = key_of("shortcut", &(noise, which, delta, weights));
    let hits = count_events(mc, &key, |rng| {
        let mut bias = [0.0f64; 2];
        let mut s = 0.0;
        let mut best = f64::NEG_INFINITY;
        for &w in weights {
            let r = unit_magnitude(class, rng);
            let angle = TAU * rng.random::<f64>();
            let xi = [r * angle.cos(), r * angle.sin()];
            let inc = match which {
                ShortcutSum::InnerProduct => {
                    let n = bias[0].hypot(bias[1]);
                    let u = if n > 0.0 { [bias[0] / n, bias[1] / n] } else { [1.0, 0.0] };
                    xi[0] * u[0] + xi[1] * u[1]
                }
                ShortcutSum::SquaredNorm => r * r - mean_sq,
            };
            s += w * inc;
            best = best.max(s);
            bias[0] += xi[0];
            bias[1] += xi[1];
        }
        if strict {
            best > level
        } else {
            reaches(best, level)
        }
    });
    Ok(ViolationEstimate::new(mc.trials, hits, delta))
}

/// E|X|^p against 2Γ(θp+1)ν^p for X with certificate exactly ν.
pub fn check_subw_moment(theta: f64, nu: f64, p: f64, mc: &McConfig) -> Result<MeanEstimate> {
    check_trials(mc)?;
    let bound = moment_bound(theta, nu, p)?;
    let class = IncrementClass::SymWeibull { theta };
    let _ = MartingaleGen::new(class, vec![nu])?;
    let key = key_of("moment", &(theta, nu, p));
    let (s, q) = moments_of(mc, &key, |rng| (nu * unit_magnitude(class, rng)).powf(p));
    Ok(MeanEstimate::new(mc.trials, s, q, bound))
}

/// E exp((|X − EX|/(c_θν))^{1/θ}) against 2 for the one-sided X = ν2^{−θ}E^θ.
pub fn check_centering(theta: f64, nu: f64, mc: &McConfig) -> Result<MeanEstimate> {
    check_trials(mc)?;
    let c = centering_constant(theta)?;
    if !(nu > 0.0) {
        return Err(Error::arg("nu must be positive"));
    }
    let scale = nu * weibull_unit_scale(theta);
    let mean = scale * gamma(theta + 1.0);
    let key = key_of("centering", &(theta, nu));
    let (s, q) = moments_of(mc, &key, |rng| {
        let e: f64 = Exp1.sample(rng);
        let x = scale * e.powf(theta);
        ((x - mean).abs() / (c * nu)).powf(1.0 / theta).exp()
    });
    Ok(MeanEstimate::new(mc.trials, s, q, 2.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum MgfCase {
    /// θ = 1/2, Gaussian X.
    Light,
    /// θ = 1, symmetrized exponential X.
    Exponential,
    /// θ ≥ 1, X̃ = X·1{X ≤ νh} for symmetric sub-Weibull X.
    Truncated { theta: f64, h: f64 },
}

/// E exp(λX) (or of X̃) against the case's bound at each λ.
pub fn check_mgf_bounds(case: MgfCase, nu: f64, lambdas: &[f64], mc: &McConfig) -> Result<Vec<MeanEstimate>> {
    check_trials(mc)?;
    if !(nu > 0.0) {
        return Err(Error::arg("nu must be positive"));
    }
    let bounds = lambdas
        .iter()
        .map(|&l| match case {
            MgfCase::Light => Ok(mgf_bound_light(nu, l)),
            MgfCase::Exponential => mgf_bound_exponential(nu, l),
            MgfCase::Truncated { theta, h } => mgf_bound_truncated(theta, nu, h, l),
        })
        .collect::<Result<Vec<f64>>>()?;
    let draw = move |rng: &mut ChaCha8Rng| -> f64 {
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        match case {
            MgfCase::Light => {
                let z: f64 = StandardNormal.sample(rng);
                gaussian_std(nu) * z
            }
            MgfCase::Exponential => {
                let e: f64 = Exp1.sample(rng);
                sign * nu * 0.5 * e
            }
            MgfCase::Truncated { theta, h } => {
                let e: f64 = Exp1.sample(rng);
                let x = sign * nu * weibull_unit_scale(theta) * e.powf(theta);
                if x <= nu * h {
                    x
                } else {
                    0.0
                }
            }
        }
    };
    Ok(lambdas
        .iter()
        .zip(bounds)
        .map(|(&l, b)| {
            let key = key_of("mgf", &(case, nu, l));
            let (s, q) = moments_of(mc, &key, |rng| (l * draw(rng)).exp());
            MeanEstimate::new(mc.trials, s, q, b)
        })
        .collect())
}
