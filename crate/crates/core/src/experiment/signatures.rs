//! Qualitative signatures of a fixed-horizon sweep: the average iterate's
//! heavy-tail gap closes with T, the last iterate's does not, errors decay
//! like T^{−1/2}, and mean errors barely depend on the noise class.

use serde::{Deserialize, Serialize};

use super::run::{IterateKind, QuantileSummary};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignatureCheck {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Least-squares slope of log y against log x.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::arg("need at least two matching points"));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return Err(Error::arg("log-log slope needs positive values"));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::arg("all x values coincide"));
    }
    Ok(sxy / sxx)
}

fn is_heaviest(r: &QuantileSummary) -> bool {
    r.noise_class == "weibull" && (r.theta_or_p - 10.0 / 3.0).abs() < 1e-9
}

fn series(
    rows: &[QuantileSummary],
    kind: IterateKind,
    pick: impl Fn(&QuantileSummary) -> bool,
) -> Vec<&QuantileSummary> {
    let mut v: Vec<_> = rows.iter().filter(|r| r.iterate_kind == kind && pick(r)).collect();
    v.sort_by_key(|r| r.t);
    v
}

/// Evaluates the four signatures on fixed-horizon rows containing Gaussian
/// and θ = 10/3 Weibull cells over a common horizon grid.
pub fn check_signatures(rows: &[QuantileSummary]) -> Result<Vec<SignatureCheck>> {
    let gauss_avg = series(rows, IterateKind::Average, |r| r.noise_class == "gaussian");
    let heavy_avg = series(rows, IterateKind::Average, is_heaviest);
    let gauss_last = series(rows, IterateKind::Last, |r| r.noise_class == "gaussian");
    let heavy_last = series(rows, IterateKind::Last, is_heaviest);
    if gauss_avg.len() < 2 || gauss_avg.len() != heavy_avg.len() || gauss_last.len() != heavy_last.len() {
        return Err(Error::arg("need gaussian and weibull:10/3 rows on a common grid of at least two horizons"));
    }
    let mut out = Vec::new();

    let gap = |g: &QuantileSummary, h: &QuantileSummary| (h.quantile_err - g.quantile_err) / g.quantile_err;
    let (g0, h0) = (gauss_avg[0], heavy_avg[0]);
    let (g1, h1) = (*gauss_avg.last().unwrap(), *heavy_avg.last().unwrap());
    let (first, last) = (gap(g0, h0), gap(g1, h1));
    out.push(SignatureCheck {
        name: "average-iterate gap closes".into(),
        pass: last < first,
        detail: format!("gap ratio {first:.4} at T={} vs {last:.4} at T={}", g0.t, g1.t),
    });

    let sep: Vec<String> = gauss_last
        .iter()
        .zip(&heavy_last)
        .filter(|(g, h)| !(h.quantile_err > g.quantile_err))
        .map(|(g, _)| g.t.to_string())
        .collect();
    out.push(SignatureCheck {
        name: "last-iterate separation".into(),
        pass: sep.is_empty(),
        detail: if sep.is_empty() {
            format!("heavy p99 above gaussian at all {} horizons", gauss_last.len())
        } else {
            format!("no separation at T = {}", sep.join(", "))
        },
    });

    let mut slopes = Vec::new();
    let mut slopes_ok = true;
    let mut classes: Vec<(String, u64)> = rows
        .iter()
        .map(|r| (r.noise_class.clone(), r.theta_or_p.to_bits()))
        .collect();
    classes.dedup();
    classes.sort();
    classes.dedup();
    for (class, bits) in &classes {
        for kind in [IterateKind::Average, IterateKind::Last] {
            let s = series(rows, kind, |r| &r.noise_class == class && r.theta_or_p.to_bits() == *bits);
            let ts: Vec<f64> = s.iter().map(|r| r.t as f64).collect();
            let ms: Vec<f64> = s.iter().map(|r| r.mean_err).collect();
            let slope = loglog_slope(&ts, &ms)?;
            slopes_ok &= (-0.65..=-0.35).contains(&slope);
            slopes.push(format!("{class}:{:.4}/{kind:?}={slope:.3}", f64::from_bits(*bits)));
        }
    }
    out.push(SignatureCheck {
        name: "mean-error slope".into(),
        pass: slopes_ok,
        detail: slopes.join(" "),
    });

    let mut worst: f64 = 0.0;
    let mut worst_at = String::new();
    let mut ts: Vec<usize> = rows.iter().map(|r| r.t).collect();
    ts.sort_unstable();
    ts.dedup();
    for t in ts {
        for kind in [IterateKind::Average, IterateKind::Last] {
            let means: Vec<f64> = rows
                .iter()
                .filter(|r| r.t == t && r.iterate_kind == kind)
                .map(|r| r.mean_err)
                .collect();
            let lo = means.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = means.iter().copied().fold(0.0, f64::max);
            let spread = (hi - lo) / lo;
            if spread > worst {
                worst = spread;
                worst_at = format!("T={t} {kind:?}");
            }
        }
    }
    out.push(SignatureCheck {
        name: "means agree across noises".into(),
        pass: worst <= 0.25,
        detail: format!("largest relative spread {worst:.4} at {worst_at}"),
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn slope_of_power_law() {
        let xs = [100.0, 200.0, 400.0, 1000.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-0.5)).collect();
        assert_relative_eq!(loglog_slope(&xs, &ys).unwrap(), -0.5, epsilon = 1e-12);
        assert!(loglog_slope(&[1.0], &[1.0]).is_err());
    }

    fn row(class: &str, shape: f64, t: usize, kind: IterateKind, mean: f64, q: f64) -> QuantileSummary {
        QuantileSummary {
            noise_class: class.into(),
            theta_or_p: shape,
            t,
            iterate_kind: kind,
            runs: 10,
            mean_err: mean,
            q: 0.99,
            quantile_err: q,
            base_seed: 0,
        }
    }

    #[test]
    fn synthetic_signatures() {
        let mut rows = Vec::new();
        for t in [100usize, 400, 1600] {
            let s = (t as f64).powf(-0.5);
            rows.push(row("gaussian", 0.5, t, IterateKind::Average, s, 3.0 * s));
            rows.push(row("weibull", 10.0 / 3.0, t, IterateKind::Average, 1.1 * s, 3.0 * s * (1.0 + 10.0 * s)));
            rows.push(row("gaussian", 0.5, t, IterateKind::Last, s, 3.0 * s));
            rows.push(row("weibull", 10.0 / 3.0, t, IterateKind::Last, s, 5.0 * s));
        }
        let checks = check_signatures(&rows).unwrap();
        assert_eq!(checks.len(), 4);
        assert!(checks.iter().all(|c| c.pass), "{checks:?}");
        rows[3].quantile_err = 0.0;
        assert!(!check_signatures(&rows).unwrap()[1].pass);
    }
}
