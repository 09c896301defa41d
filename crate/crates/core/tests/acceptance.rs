//! Acceptance gate. Runs the five primary criteria in order and prints one
//! PASS/FAIL line for each; the test fails if any criterion fails.
//!
//! cargo test --release --test acceptance

use std::time::{Duration, Instant};

use mirrortail_core::concentration::{run_validation_suite, McConfig, Prop};
use mirrortail_core::diagnostics::{run_trace_suite, sweep_alpha_identity, sweep_rho_sums, SuiteConfig};
use mirrortail_core::experiment::{check_signatures, render, rows_to_csv, ExperimentConfig, Format};

struct Outcome {
    pass: bool,
    detail: String,
    elapsed: Duration,
}

struct Artifacts {
    traces: Vec<u8>,
    sweeps: Vec<u8>,
    validation: Vec<u8>,
    experiment: Vec<u8>,
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool")
        .install(f)
}

fn timed(limit: Duration, f: impl FnOnce() -> (bool, String)) -> Outcome {
    let start = Instant::now();
    let (ok, detail) = f();
    let elapsed = start.elapsed();
    Outcome {
        pass: ok && elapsed <= limit,
        detail: format!("{detail}; {:.1}s (limit {}s)", elapsed.as_secs_f64(), limit.as_secs()),
        elapsed,
    }
}

fn trace_suite(threads: usize, out: &mut Vec<u8>) -> (bool, String) {
    let cfg = SuiteConfig::default();
    let summary = in_pool(threads, || run_trace_suite(&cfg)).expect("trace suite");
    *out = rows_to_csv(&summary.reports).expect("csv");
    let failed: Vec<&str> = summary.reports.iter().filter(|r| !r.pass).map(|r| r.name.as_str()).collect();
    let checked: usize = summary.reports.iter().map(|r| r.checked).sum();
    (
        failed.is_empty() && summary.traces == 1000,
        format!("{} traces, {} checks, {} reports, failing: {:?}", summary.traces, checked, summary.reports.len(), failed),
    )
}

fn sweeps(out: &mut Vec<u8>) -> (bool, String) {
    let reports = vec![sweep_alpha_identity(200), sweep_rho_sums(500)];
    *out = rows_to_csv(&reports).expect("csv");
    let detail = reports
        .iter()
        .map(|r| format!("{} {} checks max_violation {:.2e}", r.name, r.checked, r.max_violation))
        .collect::<Vec<_>>()
        .join(", ");
    (reports.iter().all(|r| r.pass), detail)
}

fn validation(threads: usize, out: &mut Vec<u8>) -> (bool, String) {
    let rows = in_pool(threads, || run_validation_suite(&Prop::ALL, &McConfig::default())).expect("validation");
    *out = rows_to_csv(&rows).expect("csv");
    let failed: Vec<String> = rows
        .iter()
        .filter(|r| !r.pass)
        .map(|r| format!("{} {}", r.prop, r.config))
        .collect();
    (failed.is_empty(), format!("{} configurations, failing: {:?}", rows.len(), failed))
}

fn experiment(workers: usize, out: &mut Vec<u8>) -> (bool, String) {
    let cfg = ExperimentConfig {
        workers,
        ..ExperimentConfig::desk_scale()
    };
    let rows = mirrortail_core::experiment::run_experiment(&cfg).expect("experiment");
    *out = render(&rows, Format::Csv).expect("csv");
    let checks = check_signatures(&rows).expect("signatures");
    let detail = checks
        .iter()
        .map(|c| format!("{} {} ({})", c.name, if c.pass { "ok" } else { "FAILED" }, c.detail))
        .collect::<Vec<_>>()
        .join("; ");
    (checks.iter().all(|c| c.pass), detail)
}

fn run_all(threads: usize, art: &mut Artifacts) -> Vec<Outcome> {
    vec![
        timed(Duration::from_secs(120), || trace_suite(threads, &mut art.traces)),
        timed(Duration::from_secs(5), || sweeps(&mut art.sweeps)),
        timed(Duration::from_secs(900), || validation(threads, &mut art.validation)),
        timed(Duration::from_secs(600), || experiment(threads, &mut art.experiment)),
    ]
}

fn empty() -> Artifacts {
    Artifacts {
        traces: Vec::new(),
        sweeps: Vec::new(),
        validation: Vec::new(),
        experiment: Vec::new(),
    }
}

fn main() {
    let names = [
        "1 per-run inequality suite",
        "2 exact weight combinatorics",
        "3 concentration validators",
        "4 desk-scale percentile signatures",
        "5 byte-identical artifacts across repeats and worker counts",
    ];

    let mut first = empty();
    let mut outcomes = run_all(1, &mut first);

    let start = Instant::now();
    let mut second = empty();
    let repeat = run_all(4, &mut second);
    let pairs = [
        ("traces", &first.traces, &second.traces),
        ("sweeps", &first.sweeps, &second.sweeps),
        ("validation", &first.validation, &second.validation),
        ("experiment", &first.experiment, &second.experiment),
    ];
    let differing: Vec<&str> = pairs.iter().filter(|(_, a, b)| a != b).map(|(n, _, _)| *n).collect();
    let sizes: Vec<String> = pairs.iter().map(|(n, a, _)| format!("{n} {}B", a.len())).collect();
    outcomes.push(Outcome {
        pass: differing.is_empty() && pairs.iter().all(|(_, a, _)| !a.is_empty()) && repeat.iter().all(|o| o.pass),
        detail: format!("1 vs 4 workers, {}; differing: {:?}", sizes.join(", "), differing),
        elapsed: start.elapsed(),
    });

    println!();
    for (name, o) in names.iter().zip(&outcomes) {
        println!("[{}] criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    let total: f64 = outcomes.iter().map(|o| o.elapsed.as_secs_f64()).sum();
    println!("total {total:.1}s");

    let failed: Vec<&str> = names.iter().zip(&outcomes).filter(|(_, o)| !o.pass).map(|(n, _)| *n).collect();
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
