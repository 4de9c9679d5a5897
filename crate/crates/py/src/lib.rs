//! Python access to the simulator: run a scenario, get the report back as
//! plain dicts and lists.

use std::path::Path;

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use icn5gc::scenario::{load_scenario, parse_scenario, presets, run_scenario, Mode, Outcome, ScenarioConfig, ScenarioError};

fn to_py(e: ScenarioError) -> PyErr {
    match e {
        ScenarioError::Io { .. } => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn resolve(scenario: &str) -> Result<ScenarioConfig, ScenarioError> {
    if !Path::new(scenario).exists() {
        if let Some(cfg) = presets::bundled(scenario) {
            return Ok(cfg);
        }
    }
    load_scenario(scenario)
}

fn execute(py: Python<'_>, mut cfg: ScenarioConfig, seed: Option<u64>, max_time_ms: Option<u64>) -> PyResult<Py<PyDict>> {
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(t) = max_time_ms {
        cfg.max_time_ms = t;
    }
    let outcome = py.detach(|| run_scenario(&cfg));
    outcome_dict(py, &outcome)
}

fn outcome_dict(py: Python<'_>, o: &Outcome) -> PyResult<Py<PyDict>> {
    let r = &o.report;
    let d = PyDict::new(py);
    d.set_item("name", &r.name)?;
    d.set_item("mode", r.mode.to_string())?;
    d.set_item("seed", r.seed)?;
    d.set_item("final_clock", r.final_clock)?;
    d.set_item("quiescent", r.quiescent)?;
    d.set_item("events", r.events)?;
    let counters = PyDict::new(py);
    for (k, v) in &r.counters {
        counters.set_item(*k, *v)?;
    }
    d.set_item("counters", counters)?;
    d.set_item("latencies", r.latencies.clone())?;
    let steps = PyList::empty(py);
    for s in &r.steps {
        steps.append((s.step, s.messages, s.first_sent, s.last_delivered))?;
    }
    d.set_item("steps", steps)?;
    d.set_item("handover_duration", r.handover_duration)?;
    d.set_item("abort_reasons", r.abort_reasons.clone())?;
    d.set_item("inconsistencies", r.inconsistencies())?;
    d.set_item("residue", o.residue.clone())?;
    d.set_item("trace", o.trace.clone())?;
    d.set_item("metrics", &o.metrics)?;
    Ok(d.unbind())
}

/// Run a scenario file or bundled scenario by name.
#[pyfunction]
#[pyo3(signature = (scenario, seed=None, max_time_ms=None))]
fn run(py: Python<'_>, scenario: &str, seed: Option<u64>, max_time_ms: Option<u64>) -> PyResult<Py<PyDict>> {
    let cfg = resolve(scenario).map_err(to_py)?;
    execute(py, cfg, seed, max_time_ms)
}

/// Run scenario text (TOML).
#[pyfunction]
#[pyo3(signature = (text, seed=None, max_time_ms=None))]
fn run_text(py: Python<'_>, text: &str, seed: Option<u64>, max_time_ms: Option<u64>) -> PyResult<Py<PyDict>> {
    let cfg = parse_scenario(text).map_err(to_py)?;
    execute(py, cfg, seed, max_time_ms)
}

#[pyfunction]
fn bundled() -> Vec<&'static str> {
    presets::BUNDLED.iter().map(|(n, _)| *n).collect()
}

/// Connected-car scenario text for `mode` ("ip-mec" or "icn-mec").
#[pyfunction]
#[pyo3(signature = (mode, vehicles=10, seed=7))]
fn generate(mode: &str, vehicles: usize, seed: u64) -> PyResult<String> {
    let mode = match mode {
        "ip-mec" => Mode::IpMec,
        "icn-mec" => Mode::IcnMec,
        _ => return Err(PyValueError::new_err(format!("'{mode}' is not a mec mode"))),
    };
    Ok(presets::mec(mode, vehicles, seed))
}

#[pymodule]
fn pyicn5gc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(run_text, m)?)?;
    m.add_function(wrap_pyfunction!(bundled, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    Ok(())
}
