//! Python bindings. Configs, tables and traces cross the boundary in their
//! text forms so files written by the CLI load unchanged.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use cyclotactor::harness::{self, GestureScript, Trace};
use cyclotactor::{CalibrationTable, DeviceConfig, DriveStage, Error, ProximitySensor};

fn to_py(err: Error) -> PyErr {
    match err {
        Error::Contract(_) | Error::Config(_) | Error::Parse { .. } | Error::InsufficientData(_) => {
            PyValueError::new_err(err.to_string())
        }
        _ => PyRuntimeError::new_err(err.to_string()),
    }
}

fn config(text: Option<&str>) -> PyResult<DeviceConfig> {
    text.map_or_else(|| Ok(DeviceConfig::default()), |t| DeviceConfig::parse(t).map_err(to_py))
}

/// Default configuration in `key = value` form.
#[pyfunction]
fn default_config() -> String {
    DeviceConfig::default().to_text()
}

/// One config value as text, after applying `config` over the defaults.
#[pyfunction]
#[pyo3(signature = (key, config_text=None))]
fn config_value(key: &str, config_text: Option<&str>) -> PyResult<String> {
    config(config_text)?.get(key).ok_or_else(|| PyValueError::new_err(format!("unknown config key {key:?}")))
}

/// Sensor counts for a true gap in mm.
#[pyfunction]
#[pyo3(signature = (gap_mm, config_text=None))]
fn sense_proximity(gap_mm: f64, config_text: Option<&str>) -> PyResult<u32> {
    let cfg = config(config_text)?;
    let mut sensor = ProximitySensor::from_config(&cfg);
    Ok(sensor.sense_proximity(gap_mm, 0).map_err(to_py)?.counts)
}

/// Drive code for a force command in `[0, 1]` at coil temperature `temp_c`.
#[pyfunction]
#[pyo3(signature = (command, temp_c, config_text=None))]
fn quantize_drive(command: f64, temp_c: f64, config_text: Option<&str>) -> PyResult<u32> {
    let cfg = config(config_text)?;
    DriveStage::from_config(&cfg).compensate_and_quantize(command, temp_c).map_err(to_py)
}

/// Effective actuation the plant sees for a drive code.
#[pyfunction]
#[pyo3(signature = (steps, temp_c, config_text=None))]
fn drive_actuation(steps: u32, temp_c: f64, config_text: Option<&str>) -> PyResult<f64> {
    let cfg = config(config_text)?;
    DriveStage::from_config(&cfg).drive_steps_to_actuation(steps, temp_c).map_err(to_py)
}

/// `(all_pass, [(name, value, unit, relation, limit, pass), ...])`.
#[pyfunction]
#[pyo3(signature = (config_text=None))]
#[allow(clippy::type_complexity)]
fn latency_report(config_text: Option<&str>) -> PyResult<(bool, Vec<(String, f64, String, String, f64, bool)>)> {
    let report = harness::latency_report(&config(config_text)?);
    let verdicts = report
        .verdicts
        .iter()
        .map(|v| (v.name.to_string(), v.value, v.unit.to_string(), v.relation.to_string(), v.limit, v.pass))
        .collect();
    Ok((report.all_pass(), verdicts))
}

/// Calibration table as CSV.
#[pyfunction]
#[pyo3(signature = (config_text=None, points=None))]
fn calibrate(py: Python<'_>, config_text: Option<&str>, points: Option<usize>) -> PyResult<String> {
    let cfg = config(config_text)?;
    let points = points.unwrap_or(cfg.calibration_points as usize);
    py.detach(|| harness::calibrate(&cfg, points)).map(|t| t.to_csv()).map_err(to_py)
}

/// Runs a gesture script; returns `(trace_csv, audio)`.
#[pyfunction]
#[pyo3(signature = (gesture_text, config_text=None, table_csv=None, seed=0))]
fn run_scenario(
    py: Python<'_>,
    gesture_text: &str,
    config_text: Option<&str>,
    table_csv: Option<&str>,
    seed: u64,
) -> PyResult<(String, Vec<f64>)> {
    let cfg = config(config_text)?;
    let gesture = GestureScript::parse(gesture_text, cfg.sensor_range_mm).map_err(to_py)?;
    let table = table_csv.map(CalibrationTable::from_csv).transpose().map_err(to_py)?;
    let (trace, audio) = py.detach(|| harness::run_scenario(&cfg, &gesture, table, seed)).map_err(to_py)?;
    Ok((trace.to_csv(), audio))
}

/// Rigidity peaks `[(time, value)]` and the nearness/pitch correlation.
#[pyfunction]
#[pyo3(signature = (trace_csv, config_text=None))]
#[allow(clippy::type_complexity)]
fn analyze(trace_csv: &str, config_text: Option<&str>) -> PyResult<(Vec<(f64, f64)>, Option<f64>)> {
    let cfg = config(config_text)?;
    let window = cfg.nearness_window().map_err(to_py)?;
    let trace = Trace::from_csv(trace_csv, window, cfg.sensor_rate_hz, cfg.audio_rate_hz).map_err(to_py)?;
    let f = harness::analyze_trace(&trace).map_err(to_py)?;
    Ok((f.peaks.iter().map(|p| (p.time, p.value)).collect(), f.sweep_correlation))
}

#[pymodule]
fn pycyclotactor(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(default_config, m)?)?;
    m.add_function(wrap_pyfunction!(config_value, m)?)?;
    m.add_function(wrap_pyfunction!(sense_proximity, m)?)?;
    m.add_function(wrap_pyfunction!(quantize_drive, m)?)?;
    m.add_function(wrap_pyfunction!(drive_actuation, m)?)?;
    m.add_function(wrap_pyfunction!(latency_report, m)?)?;
    m.add_function(wrap_pyfunction!(calibrate, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    Ok(())
}
