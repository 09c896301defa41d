use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::builder::{PossibleValuesParser, TypedValueParser};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use mirrortail_core::bounds::{eval_named, BoundExtras, NamedBound, TailBoundInputs};
use mirrortail_core::concentration::{run_validation_suite, McConfig, Prop};
use mirrortail_core::diagnostics::{run_trace_suite, sweep_alpha_identity, sweep_rho_sums, DiagnosticReport, SuiteConfig};
use mirrortail_core::experiment::{
    check_signatures, emit_results, render, rows_to_csv, ExperimentConfig, FixedEtaRule, Format, Mode,
};
use mirrortail_core::Error;

#[derive(Parser)]
#[command(name = "mirrortail", version, about = "Stochastic mirror descent under heavy-tailed noise")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the fixed-horizon or anytime percentile experiment.
    RunExperiment(RunExperimentArgs),
    /// Evaluate closed-form tail bounds from key=value inputs.
    EvalBounds(EvalBoundsArgs),
    /// Check the surely-true per-run inequalities on random traces.
    CheckInvariants(CheckInvariantsArgs),
    /// Monte Carlo checks of the concentration inequalities.
    ValidateConcentration(ValidateArgs),
}

#[derive(Args)]
struct RunExperimentArgs {
    /// Flat JSON config; absent fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Start from 2k runs and horizons up to 1000 instead of 20k and 3000.
    #[arg(long)]
    desk_scale: bool,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, value_enum)]
    fixed_eta_rule: Option<EtaRuleArg>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Exit with status 1 when a fixed-horizon signature check fails.
    #[arg(long)]
    check_signatures: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    FixedHorizon,
    Anytime,
}

#[derive(Clone, Copy, ValueEnum)]
enum EtaRuleArg {
    #[value(name = "inv-sqrt-T")]
    InvSqrtT,
    #[value(name = "inv-T")]
    InvT,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct EvalBoundsArgs {
    /// File of key=value lines; '#' starts a comment.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra key=value inputs, applied after the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Formulas to print; all of them when omitted.
    #[arg(
        long,
        value_delimiter = ',',
        value_parser = PossibleValuesParser::new(NamedBound::ALL.map(NamedBound::name))
            .map(|s| s.parse::<NamedBound>().expect("listed name")),
    )]
    formula: Vec<NamedBound>,
}

#[derive(Args)]
struct CheckInvariantsArgs {
    #[arg(long, default_value_t = 1000)]
    traces: usize,
    #[arg(long, default_value_t = SuiteConfig::default().seed)]
    seed: u64,
    /// Horizons drawn for the traces.
    #[arg(long, value_delimiter = ',', default_values_t = SuiteConfig::default().horizons)]
    horizons: Vec<usize>,
    /// Largest T of the exhaustive alpha-sum identity sweep.
    #[arg(long, default_value_t = 200)]
    identity_t_max: usize,
    /// Largest T of the rho-sum sweep.
    #[arg(long, default_value_t = 500)]
    rho_t_max: usize,
    /// Also write the table as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Properties to check; all of them when omitted.
    #[arg(long, value_delimiter = ',')]
    prop: Vec<Prop>,
    #[arg(long, default_value_t = McConfig::default().trials)]
    trials: u64,
    #[arg(long, default_value_t = McConfig::default().seed)]
    seed: u64,
    /// Also write the rows as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

type CliResult = Result<ExitCode, Error>;

fn read_text(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn write_csv_rows<T: Serialize>(rows: &[T], path: &Path) -> Result<(), Error> {
    fs::write(path, rows_to_csv(rows)?).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn status(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn run_experiment(a: RunExperimentArgs) -> CliResult {
    let base = if a.desk_scale {
        ExperimentConfig::desk_scale()
    } else {
        ExperimentConfig::default()
    };
    let mut cfg = match &a.config {
        Some(p) => ExperimentConfig::from_json_over(&base, &read_text(p)?)?,
        None => base,
    };
    if let Some(m) = a.mode {
        cfg.mode = match m {
            ModeArg::FixedHorizon => Mode::FixedHorizon,
            ModeArg::Anytime => Mode::Anytime,
        };
    }
    if let Some(r) = a.runs {
        cfg.runs = r;
    }
    if let Some(s) = a.seed {
        cfg.base_seed = s;
    }
    if let Some(w) = a.workers {
        cfg.workers = w;
    }
    if let Some(r) = a.fixed_eta_rule {
        cfg.fixed_eta_rule = match r {
            EtaRuleArg::InvSqrtT => FixedEtaRule::InvSqrtT,
            EtaRuleArg::InvT => FixedEtaRule::InvT,
        };
    }
    if let Some(o) = a.output {
        cfg.output = Some(o);
    }
    if let Some(f) = a.format {
        cfg.format = match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        };
    }
    cfg.validate()?;
    let rows = mirrortail_core::experiment::run_experiment(&cfg)?;
    match &cfg.output {
        Some(p) => {
            emit_results(&rows, cfg.format, p)?;
            eprintln!("wrote {} rows to {}", rows.len(), p.display());
        }
        None => io::stdout()
            .write_all(&render(&rows, cfg.format)?)
            .map_err(|e| Error::Io {
                path: "<stdout>".into(),
                source: e,
            })?,
    }
    let mut ok = true;
    if cfg.mode == Mode::FixedHorizon {
        match check_signatures(&rows) {
            Ok(checks) => {
                for c in checks {
                    eprintln!("{} {}: {}", status(c.pass), c.name, c.detail);
                    ok &= c.pass;
                }
            }
            Err(e) if a.check_signatures => return Err(e),
            Err(_) => {}
        }
    }
    Ok(if ok || !a.check_signatures {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn parse_bound_inputs(a: &EvalBoundsArgs) -> Result<(TailBoundInputs, BoundExtras), Error> {
    let mut lines: Vec<String> = match &a.config {
        Some(p) => read_text(p)?.lines().map(str::to_string).collect(),
        None => Vec::new(),
    };
    lines.extend(a.sets.iter().cloned());
    let mut inputs = TailBoundInputs::default();
    let mut extra = BoundExtras::default();
    for line in &lines {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected key=value, got '{line}'")))?;
        let (k, v) = (k.trim(), v.trim());
        if !extra.set(k, v)? {
            inputs.set(k, v)?;
        }
    }
    inputs.validate()?;
    Ok((inputs, extra))
}

fn eval_bounds(a: EvalBoundsArgs) -> CliResult {
    let (i, x) = parse_bound_inputs(&a)?;
    let formulas = if a.formula.is_empty() {
        NamedBound::ALL.to_vec()
    } else {
        a.formula.clone()
    };
    for f in formulas {
        let name = f.name();
        let value = eval_named(f, &i, &x);
        match value {
            Ok(v) => println!("{name} {v}"),
            Err(e) => {
                // With no explicit request, formulas whose inputs do not apply are skipped.
                if !a.formula.is_empty() {
                    return Err(e);
                }
                println!("{name} n/a ({e})");
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn print_reports(reports: &[DiagnosticReport]) {
    println!("{:<28} {:>9} {:>14} {:>12} {:>6}  result", "check", "checked", "max_violation", "tolerance", "step");
    for r in reports {
        println!(
            "{:<28} {:>9} {:>14.6e} {:>12.3e} {:>6}  {}",
            r.name,
            r.checked,
            r.max_violation,
            r.tolerance,
            r.worst_step,
            status(r.pass)
        );
    }
}

fn check_invariants(a: CheckInvariantsArgs) -> CliResult {
    let cfg = SuiteConfig {
        traces: a.traces,
        seed: a.seed,
        horizons: a.horizons,
    };
    if cfg.horizons.is_empty() || cfg.horizons.contains(&0) {
        return Err(Error::Config("horizons must be positive".into()));
    }
    let mut reports = run_trace_suite(&cfg)?.reports;
    reports.push(sweep_alpha_identity(a.identity_t_max));
    let mut rho = sweep_rho_sums(a.rho_t_max);
    rho.name = "rho-sums-sweep".into();
    reports.push(rho);
    print_reports(&reports);
    if let Some(p) = &a.csv {
        write_csv_rows(&reports, p)?;
    }
    let pass = reports.iter().all(|r| r.pass);
    println!("{} traces: {}", cfg.traces, status(pass));
    Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn validate_concentration(a: ValidateArgs) -> CliResult {
    let props = if a.prop.is_empty() { Prop::ALL.to_vec() } else { a.prop };
    let mc = McConfig {
        trials: a.trials,
        seed: a.seed,
    };
    let rows = run_validation_suite(&props, &mc)?;
    println!("{:<8} {:<58} {:>9} {:>12} {:>11} {:>12}  result", "prop", "config", "trials", "estimate", "stderr", "target");
    for r in &rows {
        println!(
            "{:<8} {:<58} {:>9} {:>12.5e} {:>11.3e} {:>12.5e}  {}",
            r.prop.tag(),
            r.config,
            r.trials,
            r.estimate,
            r.stderr,
            r.target,
            status(r.pass)
        );
    }
    if let Some(p) = &a.csv {
        write_csv_rows(&rows, p)?;
    }
    let pass = rows.iter().all(|r| r.pass);
    Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::RunExperiment(a) => run_experiment(a),
        Command::EvalBounds(a) => eval_bounds(a),
        Command::CheckInvariants(a) => check_invariants(a),
        Command::ValidateConcentration(a) => validate_concentration(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
