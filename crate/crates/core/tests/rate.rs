use mirrortail_core::bounds::{eval_cor1_bound, TailBoundInputs};
use mirrortail_core::experiment::config::FULL_T_GRID;
use mirrortail_core::experiment::{loglog_slope, run_experiment, ExperimentConfig, IterateKind};
use mirrortail_core::{
    run_smd, Domain, DualNorm, MirrorSetup, NoiseSpec, OracleProblem, Point, RunConfig, RunTrace, ScheduleKind,
    StepSchedule,
};

fn noise_free_abs(eta: f64) -> RunTrace {
    run_smd(&RunConfig {
        problem: OracleProblem::abs_1d(),
        setup: MirrorSetup::euclidean(Domain::Unconstrained).unwrap(),
        schedule: StepSchedule::inverse_sqrt(eta).unwrap(),
        noise: NoiseSpec::zero(1, DualNorm::L2),
        horizon: 3000,
        x1: Point::scalar(2.0).unwrap(),
        seed: 0,
    })
    .unwrap()
}

/// Without noise the iterates oscillate around the kink and the average
/// cancels them, so its error falls like 1/T (or erratically), not 1/√T.
#[test]
#[ignore = "noise-free average error does not follow 1/sqrt(T): slope near -1, or erratic at eta = 1"]
fn noise_free_average_error_has_inverse_sqrt_slope() {
    let tr = noise_free_abs(1.0);
    let ts: Vec<f64> = FULL_T_GRID.iter().map(|&t| t as f64).collect();
    let errs: Vec<f64> = FULL_T_GRID.iter().map(|&t| tr.err_avg[t - 1]).collect();
    let slope = loglog_slope(&ts, &errs).unwrap();
    assert!((-0.65..=-0.35).contains(&slope), "slope {slope}");
}

#[test]
fn noise_free_average_error_stays_under_the_deterministic_rate() {
    for eta in [0.1, 0.5, 1.0, 2.0] {
        let tr = noise_free_abs(eta);
        for t in 1..=3000 {
            let i = TailBoundInputs {
                breg0: 2.0,
                eta,
                g: 1.0,
                sigma2: 0.0,
                nu: 0.0,
                horizon: t,
                ..TailBoundInputs::default()
            };
            let bound = eval_cor1_bound(ScheduleKind::InverseSqrt, &i).unwrap();
            assert!(tr.err_avg[t - 1] <= bound, "eta {eta} T {t}: {} > {bound}", tr.err_avg[t - 1]);
        }
    }
}

#[test]
fn noisy_average_error_has_inverse_sqrt_slope() {
    let cfg = ExperimentConfig {
        runs: 400,
        t_grid: vec![100, 200, 500, 1000],
        ..ExperimentConfig::desk_scale()
    };
    let rows = run_experiment(&cfg).unwrap();
    for noise in &cfg.noises {
        let cell: Vec<_> = rows
            .iter()
            .filter(|r| r.iterate_kind == IterateKind::Average && r.noise_class == noise.tag() && r.theta_or_p == noise.theta_or_p())
            .collect();
        let ts: Vec<f64> = cell.iter().map(|r| r.t as f64).collect();
        let ms: Vec<f64> = cell.iter().map(|r| r.mean_err).collect();
        let slope = loglog_slope(&ts, &ms).unwrap();
        assert!((-0.65..=-0.35).contains(&slope), "{}: slope {slope}", noise.name());
    }
}
