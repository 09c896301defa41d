//! Python bindings: mirror steps, SMD runs with their diagnostics, tail-bound
//! formulas, the percentile experiment and the validation suites.

use pyo3::exceptions::{PyOSError, PyOverflowError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use pythonize::{depythonize, pythonize};

use mirrortail_core::bounds::{eval_named, BoundExtras, NamedBound, TailBoundInputs};
use mirrortail_core::concentration::{run_validation_suite, McConfig, Prop};
use mirrortail_core::diagnostics::{
    check_d_recursion, check_iterate_comparison, check_last_iterate_inequalities, check_one_step,
    check_weighted_iterates, run_trace_suite, sweep_alpha_identity, sweep_rho_sums, SuiteConfig,
};
use mirrortail_core::experiment::{render, ExperimentConfig, Format, NoiseEntry};
use mirrortail_core::{
    Domain, Error, MirrorSetup, NoiseSpec, OracleProblem, Point, RunConfig, RunTrace, StepSchedule,
};

fn to_py(e: Error) -> PyErr {
    let msg = e.to_string();
    let root = match &e {
        Error::Step { source, .. } => source.as_ref(),
        other => other,
    };
    match root {
        Error::Argument(_) | Error::Domain(_) | Error::Config(_) | Error::Identity(_) => {
            PyValueError::new_err(msg)
        }
        Error::Range(_) => PyOverflowError::new_err(msg),
        Error::Io { .. } => PyOSError::new_err(msg),
        _ => PyRuntimeError::new_err(msg),
    }
}

fn ser<'py, T: serde::Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    Ok(pythonize(py, v)?)
}

/// "euclidean" (with an optional domain dict) or "entropic" (the simplex).
fn make_setup(regularizer: &str, domain: Option<&Bound<'_, PyAny>>) -> PyResult<MirrorSetup> {
    match regularizer {
        "euclidean" => {
            let domain: Domain = match domain {
                Some(d) => depythonize(d)?,
                None => Domain::Unconstrained,
            };
            MirrorSetup::euclidean(domain).map_err(to_py)
        }
        "entropic" => Ok(MirrorSetup::entropic_simplex()),
        other => Err(PyValueError::new_err(format!(
            "regularizer must be 'euclidean' or 'entropic', got '{other}'"
        ))),
    }
}

fn point(v: Vec<f64>) -> PyResult<Point> {
    Point::new(v).map_err(to_py)
}

/// One SMD run with every iterate kept.
#[pyclass(frozen, name = "Trace")]
struct PyTrace(RunTrace);

#[pymethods]
impl PyTrace {
    #[getter]
    fn horizon(&self) -> usize {
        self.0.horizon()
    }

    /// x_1, ..., x_{T+1}.
    #[getter]
    fn x(&self) -> Vec<Vec<f64>> {
        self.0.x.iter().map(|p| p.coords().to_vec()).collect()
    }

    #[getter]
    fn g(&self) -> Vec<Vec<f64>> {
        self.0.g.clone()
    }

    #[getter]
    fn xi(&self) -> Vec<Vec<f64>> {
        self.0.xi.clone()
    }

    #[getter]
    fn ghat(&self) -> Vec<Vec<f64>> {
        self.0.ghat.clone()
    }

    #[getter]
    fn eta(&self) -> Vec<f64> {
        self.0.eta.clone()
    }

    #[getter]
    fn err_last(&self) -> Vec<f64> {
        self.0.err_last.clone()
    }

    #[getter]
    fn err_avg(&self) -> Vec<f64> {
        self.0.err_avg.clone()
    }

    /// Per-step inequality against the comparator `z`.
    fn check_one_step<'py>(&self, py: Python<'py>, z: Vec<f64>) -> PyResult<Bound<'py, PyAny>> {
        ser(py, &check_one_step(&self.0, &z).map_err(to_py)?)
    }

    fn check_weighted_iterates<'py>(
        &self,
        py: Python<'py>,
        z: Vec<f64>,
        weights: Vec<f64>,
    ) -> PyResult<Bound<'py, PyAny>> {
        ser(py, &check_weighted_iterates(&self.0, &z, &weights).map_err(to_py)?)
    }

    fn check_iterate_comparison<'py>(&self, py: Python<'py>, j: usize, r: usize) -> PyResult<Bound<'py, PyAny>> {
        ser(py, &check_iterate_comparison(&self.0, j, r).map_err(to_py)?)
    }

    /// Envelope and relation reports of the normalized distance sequence.
    fn check_d_recursion<'py>(&self, py: Python<'py>, gamma: f64) -> PyResult<Bound<'py, PyAny>> {
        let (env, rel) = check_d_recursion(&self.0, gamma).map_err(to_py)?;
        ser(py, &vec![env, rel])
    }

    /// Needs an inverse-sqrt schedule.
    fn check_last_iterate<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        ser(py, &check_last_iterate_inequalities(&self.0).map_err(to_py)?)
    }

    fn __repr__(&self) -> String {
        format!(
            "Trace(horizon={}, err_last={}, err_avg={})",
            self.0.horizon(),
            self.0.err_last.last().copied().unwrap_or(f64::NAN),
            self.0.err_avg.last().copied().unwrap_or(f64::NAN)
        )
    }
}

#[pymodule]
mod mirrortail {
    use super::*;

    #[pymodule_export]
    use super::PyTrace;

    #[pyfunction]
    #[pyo3(signature = (x, y, regularizer = "euclidean", domain = None))]
    fn bregman(x: Vec<f64>, y: Vec<f64>, regularizer: &str, domain: Option<&Bound<'_, PyAny>>) -> PyResult<f64> {
        let setup = make_setup(regularizer, domain)?;
        mirrortail_core::bregman(&setup, &x, &y).map_err(to_py)
    }

    #[pyfunction]
    #[pyo3(signature = (x, ghat, eta, regularizer = "euclidean", domain = None))]
    fn mirror_step(
        x: Vec<f64>,
        ghat: Vec<f64>,
        eta: f64,
        regularizer: &str,
        domain: Option<&Bound<'_, PyAny>>,
    ) -> PyResult<Vec<f64>> {
        let setup = make_setup(regularizer, domain)?;
        let next = mirrortail_core::mirror_step(&setup, &point(x)?, &ghat, eta).map_err(to_py)?;
        Ok(next.into_vec())
    }

    /// Minimizes Σ|x_i − c_i| from `x1` with noisy subgradients.
    /// `noise` is "zero", "gaussian", "weibull:<theta>" or "poly:<p>".
    #[pyfunction]
    #[pyo3(signature = (
        horizon, eta, x1 = vec![2.0], center = None, noise = "gaussian", second_moment = 1.0,
        schedule = "constant", seed = 0, regularizer = "euclidean", domain = None,
    ))]
    #[allow(clippy::too_many_arguments)]
    fn run_smd(
        py: Python<'_>,
        horizon: usize,
        eta: f64,
        x1: Vec<f64>,
        center: Option<Vec<f64>>,
        noise: &str,
        second_moment: f64,
        schedule: &str,
        seed: u64,
        regularizer: &str,
        domain: Option<&Bound<'_, PyAny>>,
    ) -> PyResult<PyTrace> {
        let setup = make_setup(regularizer, domain)?;
        let d = x1.len();
        let center = match center {
            Some(c) => point(c)?,
            None if regularizer == "entropic" => Point::uniform_simplex(d),
            None => Point::zeros(d),
        };
        let schedule = match schedule {
            "constant" => StepSchedule::constant(eta),
            "inverse-sqrt" => StepSchedule::inverse_sqrt(eta),
            other => {
                return Err(PyValueError::new_err(format!(
                    "schedule must be 'constant' or 'inverse-sqrt', got '{other}'"
                )))
            }
        }
        .map_err(to_py)?;
        let entry: NoiseEntry = noise.parse().map_err(to_py)?;
        let noise = match entry.class() {
            Some(c) if second_moment > 0.0 => {
                NoiseSpec::new(c, second_moment, d, setup.dual_norm()).map_err(to_py)?
            }
            _ => NoiseSpec::zero(d, setup.dual_norm()),
        };
        let cfg = RunConfig {
            problem: OracleProblem::abs_sum(center),
            setup,
            schedule,
            noise,
            horizon,
            x1: point(x1)?,
            seed,
        };
        let trace = py.detach(|| mirrortail_core::run_smd(&cfg)).map_err(to_py)?;
        Ok(PyTrace(trace))
    }

    /// Named tail-bound formulas; `inputs` maps input names (T, delta, eta,
    /// G, sigma2, nu, theta, kappa, p, breg0, C, D, s, xi1, xi2, t_max) to values.
    #[pyfunction]
    #[pyo3(signature = (inputs = None, formulas = None))]
    fn eval_bounds<'py>(
        py: Python<'py>,
        inputs: Option<&Bound<'py, PyDict>>,
        formulas: Option<Vec<String>>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let mut i = TailBoundInputs::default();
        let mut x = BoundExtras::default();
        if let Some(d) = inputs {
            for (k, v) in d.iter() {
                let k: String = k.extract()?;
                let v = v.str()?.to_string();
                if !x.set(&k, &v).map_err(to_py)? {
                    i.set(&k, &v).map_err(to_py)?;
                }
            }
        }
        i.validate().map_err(to_py)?;
        let names: Vec<NamedBound> = match formulas {
            Some(f) => f.iter().map(|s| s.parse()).collect::<Result<_, _>>().map_err(to_py)?,
            None => NamedBound::ALL.to_vec(),
        };
        let explicit = inputs.is_some() && names.len() < NamedBound::ALL.len();
        let out = PyDict::new(py);
        for b in names {
            match eval_named(b, &i, &x) {
                Ok(v) => out.set_item(b.name(), ser(py, &v)?)?,
                Err(_) if !explicit => out.set_item(b.name(), py.None())?,
                Err(e) => return Err(to_py(e)),
            }
        }
        Ok(out)
    }

    /// (mean, nearest-rank q-quantile).
    #[pyfunction]
    fn aggregate(errors: Vec<f64>, q: f64) -> PyResult<(f64, f64)> {
        mirrortail_core::experiment::aggregate(&errors, q).map_err(to_py)
    }

    /// Runs the percentile experiment. `config` is a dict of config fields
    /// laid over the defaults (or the desk-scale defaults). Returns a list of
    /// row dicts, or the CSV text when `as_csv` is set.
    #[pyfunction]
    #[pyo3(signature = (config = None, desk_scale = false, as_csv = false))]
    fn run_experiment<'py>(
        py: Python<'py>,
        config: Option<&Bound<'py, PyAny>>,
        desk_scale: bool,
        as_csv: bool,
    ) -> PyResult<Bound<'py, PyAny>> {
        let base = if desk_scale {
            ExperimentConfig::desk_scale()
        } else {
            ExperimentConfig::default()
        };
        let cfg = match config {
            Some(c) => {
                let value: serde_json::Value = depythonize(c)?;
                ExperimentConfig::from_json_over(&base, &value.to_string()).map_err(to_py)?
            }
            None => base,
        };
        let rows = py
            .detach(|| mirrortail_core::experiment::run_experiment(&cfg))
            .map_err(to_py)?;
        if as_csv {
            let bytes = render(&rows, Format::Csv).map_err(to_py)?;
            let text = String::from_utf8(bytes).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
            Ok(text.into_pyobject(py)?.into_any())
        } else {
            ser(py, &rows)
        }
    }

    /// Random-trace suite plus the two exhaustive weight sweeps.
    #[pyfunction]
    #[pyo3(signature = (traces = 1000, seed = None, horizons = None, identity_t_max = 200, rho_t_max = 500))]
    fn check_invariants<'py>(
        py: Python<'py>,
        traces: usize,
        seed: Option<u64>,
        horizons: Option<Vec<usize>>,
        identity_t_max: usize,
        rho_t_max: usize,
    ) -> PyResult<Bound<'py, PyAny>> {
        let def = SuiteConfig::default();
        let cfg = SuiteConfig {
            traces,
            seed: seed.unwrap_or(def.seed),
            horizons: horizons.unwrap_or(def.horizons),
        };
        let reports = py
            .detach(|| -> mirrortail_core::Result<_> {
                let mut r = run_trace_suite(&cfg)?.reports;
                r.push(sweep_alpha_identity(identity_t_max));
                r.push(sweep_rho_sums(rho_t_max));
                Ok(r)
            })
            .map_err(to_py)?;
        ser(py, &reports)
    }

    /// Monte Carlo checks of the concentration inequalities, one dict per configuration.
    #[pyfunction]
    #[pyo3(signature = (props = None, trials = 100_000, seed = None))]
    fn validate_concentration<'py>(
        py: Python<'py>,
        props: Option<Vec<String>>,
        trials: u64,
        seed: Option<u64>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let props: Vec<Prop> = match props {
            Some(p) => p
                .iter()
                .map(|s| s.parse::<Prop>())
                .collect::<Result<_, _>>()
                .map_err(to_py)?,
            None => Prop::ALL.to_vec(),
        };
        let mc = McConfig {
            trials,
            seed: seed.unwrap_or(McConfig::default().seed),
        };
        let rows = py.detach(|| run_validation_suite(&props, &mc)).map_err(to_py)?;
        ser(py, &rows)
    }

    #[pyfunction]
    fn alpha_sum(a: usize, b: usize, horizon: usize) -> PyResult<f64> {
        mirrortail_core::diagnostics::alpha_sum(a, b, horizon).map_err(to_py)
    }

    #[pyfunction]
    fn alpha_double_sums(horizon: usize) -> PyResult<(f64, f64)> {
        mirrortail_core::diagnostics::alpha_double_sums(horizon).map_err(to_py)
    }

    #[pyfunction]
    #[pyo3(signature = (theta, scales, delta, s = 2.0))]
    fn subweibull_maximal(theta: f64, scales: Vec<f64>, delta: f64, s: f64) -> PyResult<f64> {
        mirrortail_core::concentration::thresholds::subweibull_maximal(theta, &scales, delta, s).map_err(to_py)
    }

    #[pyfunction]
    fn fuk_nagaev(p: f64, kappas: Vec<f64>, delta: f64) -> PyResult<f64> {
        mirrortail_core::concentration::thresholds::fuk_nagaev(p, &kappas, delta).map_err(to_py)
    }

    #[pyfunction]
    fn chicken_egg_cap(alpha: f64, beta: f64, x: f64) -> PyResult<f64> {
        mirrortail_core::concentration::thresholds::chicken_egg_cap(alpha, beta, x).map_err(to_py)
    }
}
