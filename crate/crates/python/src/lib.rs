//! Python bindings for the threshold-sampling walk toolkit.
//!
//! The module mirrors the `aoi-walk` crate with plain-data return values
//! (floats, lists, dicts) so results drop straight into numpy or pandas
//! workflows. Validation and error grouping follow the underlying crate:
//! caller mistakes raise `ValueError`, internal failures raise
//! `RuntimeError` — the same split the CLI maps to exit codes 2 and 3.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use aoi_walk::{BoundedValue, Error, RunLength, SimConfig, StationaryDist, SweepRow, WalkParams};

/// Maps crate errors onto Python exceptions using the same grouping as the
/// CLI exit codes: caller mistakes become `ValueError`, internal
/// consistency failures become `RuntimeError`.
fn to_py_err(e: Error) -> PyErr {
    match e.exit_code() {
        2 => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn walk(p: f64, q: f64, t: u32) -> PyResult<WalkParams> {
    WalkParams::new(p, q, t).map_err(to_py_err)
}

/// Certified enclosure as a dict: point estimate, bracket, and the number
/// of series terms that were summed exactly.
fn bounded<'py>(py: Python<'py>, bv: &BoundedValue) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("value", bv.value)?;
    d.set_item("lower", bv.lower)?;
    d.set_item("upper", bv.upper)?;
    d.set_item("l_s", bv.l_s)?;
    Ok(d)
}

/// Long-run updates per slot, `1 / E[L]`, of the threshold-`t` policy.
#[pyfunction]
fn update_rate(p: f64, q: f64, t: u32) -> PyResult<f64> {
    Ok(aoi_walk::update_rate(&walk(p, q, t)?))
}

/// Expected slots between updates, `E[L]`.
#[pyfunction]
fn expected_cycle_length(p: f64, q: f64, t: u32) -> PyResult<f64> {
    Ok(aoi_walk::expected_cycle_length(&walk(p, q, t)?))
}

/// Cycle-length probabilities `[P(L = 1), ..., P(L = l_max)]`.
///
/// Pass either `l_max` (explicit table length) or `epsilon` (table long
/// enough that the omitted tail mass stays below `epsilon`); passing
/// neither defaults to `epsilon = 1e-9`.
#[pyfunction]
#[pyo3(signature = (p, q, t, l_max = None, epsilon = None))]
fn cycle_length_pmf(
    p: f64,
    q: f64,
    t: u32,
    l_max: Option<u64>,
    epsilon: Option<f64>,
) -> PyResult<Vec<f64>> {
    let params = walk(p, q, t)?;
    let l_max = match (l_max, epsilon) {
        (Some(_), Some(_)) => {
            return Err(PyValueError::new_err(
                "pass at most one of l_max= and epsilon=",
            ))
        }
        (Some(l), None) => l as usize,
        (None, eps) => aoi_walk::certified_truncation(&params, eps.unwrap_or(1e-9))
            .map_err(to_py_err)? as usize,
    };
    Ok(aoi_walk::cycle_length_pmf(&params, l_max)
        .map_err(to_py_err)?
        .probs()
        .to_vec())
}

/// Normalized stationary age of information, `(1 + E[L^2] / E[L]) / 2`.
///
/// Returns a dict holding the certified enclosure of width at most
/// `epsilon`: `value` (enclosure midpoint), `lower` and `upper` (certified
/// bracket on the exact quantity), and `l_s` (series terms summed).
#[pyfunction]
#[pyo3(signature = (p, q, t, epsilon = 1e-6))]
fn nsaoi<'py>(
    py: Python<'py>,
    p: f64,
    q: f64,
    t: u32,
    epsilon: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let bv = aoi_walk::nsaoi(&walk(p, q, t)?, epsilon).map_err(to_py_err)?;
    bounded(py, &bv)
}

/// Expected mean squared error of the hold-last-value monitor.
#[pyfunction]
fn emse(p: f64, q: f64, t: u32) -> PyResult<f64> {
    aoi_walk::emse(&walk(p, q, t)?).map_err(to_py_err)
}

/// Long-run law of the monitor's displacement (its estimation error).
///
/// Returns a dict with `displacements` (state values `-(T-1)..=T-1`),
/// `time_average` (long-run fraction of time in each state), and
/// `periodic`. Periodic chains (`p + q = 1` with even `t`) have no single
/// limiting law, so the dict also carries the two alternating parity-class
/// laws under `even` and `odd`.
#[pyfunction]
fn stationary<'py>(py: Python<'py>, p: f64, q: f64, t: u32) -> PyResult<Bound<'py, PyDict>> {
    let dist = aoi_walk::stationary_distribution(&walk(p, q, t)?).map_err(to_py_err)?;
    let d = PyDict::new(py);
    d.set_item("displacements", StationaryDist::displacements(t))?;
    d.set_item("time_average", dist.time_average())?;
    match dist {
        StationaryDist::Aperiodic(_) => d.set_item("periodic", false)?,
        StationaryDist::Periodic { even, odd } => {
            d.set_item("periodic", true)?;
            d.set_item("even", even)?;
            d.set_item("odd", odd)?;
        }
    }
    Ok(d)
}

/// Runs the slot-level simulator and returns its aggregate report.
///
/// Exactly one of `slots=` (fixed window; cycles still open when it closes
/// are excluded from cycle statistics) or `cycles=` (run until that many
/// cycles complete) is required. `warmup=None` picks the mode default:
/// 1000 slots for slot windows, 0 for cycle windows. Identical arguments
/// produce bit-identical reports on every platform.
///
/// The report dict carries `seed`, `warmup_slots`, `slots`, `cycles`,
/// `update_rate`, `mean_cycle`, `cycle_second_moment`, `nsaoi`,
/// `nsaoi_stderr`, `mse`, `mse_stderr`, and `histogram` (cycle-length
/// counts).
#[pyfunction]
#[pyo3(signature = (p, q, t, seed, slots = None, cycles = None, warmup = None))]
#[allow(clippy::too_many_arguments)]
fn simulate<'py>(
    py: Python<'py>,
    p: f64,
    q: f64,
    t: u32,
    seed: u64,
    slots: Option<u64>,
    cycles: Option<u64>,
    warmup: Option<u64>,
) -> PyResult<Bound<'py, PyDict>> {
    let run = match (slots, cycles) {
        (Some(s), None) => RunLength::Slots(s),
        (None, Some(c)) => RunLength::Cycles(c),
        _ => {
            return Err(PyValueError::new_err(
                "exactly one of slots= and cycles= is required",
            ))
        }
    };
    let config = SimConfig {
        params: walk(p, q, t)?,
        seed,
        run,
        warmup,
    };
    let report = aoi_walk::simulate(&config).map_err(to_py_err)?;
    let d = PyDict::new(py);
    d.set_item("seed", report.seed)?;
    d.set_item("warmup_slots", report.warmup_slots)?;
    d.set_item("slots", report.slots)?;
    d.set_item("cycles", report.cycles)?;
    d.set_item("update_rate", report.update_rate)?;
    d.set_item("mean_cycle", report.mean_cycle)?;
    d.set_item("cycle_second_moment", report.cycle_second_moment)?;
    d.set_item("nsaoi", report.nsaoi)?;
    d.set_item("nsaoi_stderr", report.nsaoi_stderr)?;
    d.set_item("mse", report.mse)?;
    d.set_item("mse_stderr", report.mse_stderr)?;
    d.set_item("histogram", report.histogram)?;
    Ok(d)
}

fn sweep_dict<'py>(py: Python<'py>, row: &SweepRow) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("t", row.t)?;
    d.set_item("lambda", row.lambda)?;
    d.set_item("nsaoi", bounded(py, &row.nsaoi)?)?;
    d.set_item("emse", row.emse)?;
    d.set_item("periodic", row.periodic)?;
    d.set_item("truncated", row.truncated)?;
    Ok(d)
}

/// Sweeps thresholds `t_min..=t_max` in increasing order.
///
/// Each row is a dict with `t`, `lambda` (update rate), `nsaoi` (certified
/// enclosure dict as returned by `nsaoi()`), `emse`, `periodic`, and
/// `truncated` (set when the requested certification width was out of
/// reach and the enclosure is best-effort).
#[pyfunction]
#[pyo3(signature = (p, q, t_min, t_max, epsilon = 1e-6))]
fn sweep<'py>(
    py: Python<'py>,
    p: f64,
    q: f64,
    t_min: u32,
    t_max: u32,
    epsilon: f64,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    aoi_walk::sweep(p, q, t_min, t_max, epsilon)
        .map_err(to_py_err)?
        .iter()
        .map(|row| sweep_dict(py, row))
        .collect()
}

/// Solves the design problem: the largest threshold (hence smallest update
/// rate) whose certified NSAoI and exact EMSE meet the given ceilings,
/// scanning `1..=t_search_max`.
///
/// Returns a dict with `feasible`, `chosen_t`, `lambda_min`, `binding`
/// (which ceiling fails just past the chosen threshold: `"nsaoi"`,
/// `"emse"`, `"both"`, or `"none"`), and `feasibility_gap`. An infeasible
/// problem reports `feasible=False` with `chosen_t=None` rather than
/// raising.
#[pyfunction]
#[pyo3(signature = (p, q, nsaoi_max, emse_max, t_search_max = 64, epsilon = 1e-6))]
fn min_update_rate<'py>(
    py: Python<'py>,
    p: f64,
    q: f64,
    nsaoi_max: f64,
    emse_max: f64,
    t_search_max: u32,
    epsilon: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let plan = aoi_walk::min_update_rate(p, q, nsaoi_max, emse_max, t_search_max, epsilon)
        .map_err(to_py_err)?;
    let d = PyDict::new(py);
    d.set_item("feasible", plan.feasible)?;
    d.set_item("chosen_t", plan.chosen_t)?;
    d.set_item("lambda_min", plan.lambda_min)?;
    d.set_item("binding", plan.binding.as_str())?;
    d.set_item("feasibility_gap", plan.feasibility_gap)?;
    Ok(d)
}

/// Analytic and Monte Carlo toolkit for threshold-sampled lazy random
/// walks: update rate, cycle-length law, certified age-of-information
/// enclosures, estimation error, and threshold planning.
#[pymodule]
fn aoiwalk(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("MAX_THRESHOLD", aoi_walk::MAX_THRESHOLD)?;
    m.add_function(wrap_pyfunction!(update_rate, m)?)?;
    m.add_function(wrap_pyfunction!(expected_cycle_length, m)?)?;
    m.add_function(wrap_pyfunction!(cycle_length_pmf, m)?)?;
    m.add_function(wrap_pyfunction!(nsaoi, m)?)?;
    m.add_function(wrap_pyfunction!(emse, m)?)?;
    m.add_function(wrap_pyfunction!(stationary, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(min_update_rate, m)?)?;
    Ok(())
}
