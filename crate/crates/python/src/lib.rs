//! Python bindings for the `nnlif` solver.

use std::collections::BTreeMap;

use nnlif::cli;
use nnlif::config::parse_config;
use nnlif::error::Error;
use nnlif::grid::{gaussian_initial, DensityField, Grid};
use nnlif::network::{self, GaussianSpec, GridSpec, InitialData, RunConfig, SimulationResult, Stepping};
use nnlif::params::{Model, ModelParameters, OnePopParameters, Population, RefractoryMode};
use nnlif::presets::{self as catalog, Command};
use nnlif::steady::{self, SweepParameter, DEFAULT_MU_MAX, DEFAULT_MU_MIN, DEFAULT_MU_POINTS, DEFAULT_SCAN_POINTS};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    if e.is_config() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn population(label: &str) -> PyResult<Population> {
    match label {
        "E" | "e" => Ok(Population::Excitatory),
        "I" | "i" => Ok(Population::Inhibitory),
        other => Err(PyValueError::new_err(format!("unknown population '{other}' (expected 'E' or 'I')"))),
    }
}

fn refractory(mode: &str) -> PyResult<RefractoryMode> {
    mode.parse().map_err(PyValueError::new_err)
}

fn grid_spec(v_left: f64, n_cells: usize) -> GridSpec {
    GridSpec { v_left, n_cells }
}

/// Model parameters for one or two populations.
#[pyclass(name = "Model", frozen)]
#[derive(Clone)]
struct PyModel {
    inner: Model,
}

#[pymethods]
impl PyModel {
    #[staticmethod]
    #[pyo3(signature = (b, nu_ext=0.0, tau=0.025, delay=0.0, d0=1.0, d1=0.0, v_f=2.0, v_r=1.0, refractory_mode="ratio"))]
    #[allow(clippy::too_many_arguments)]
    fn one_population(
        b: f64,
        nu_ext: f64,
        tau: f64,
        delay: f64,
        d0: f64,
        d1: f64,
        v_f: f64,
        v_r: f64,
        refractory_mode: &str,
    ) -> PyResult<Self> {
        let p = OnePopParameters { b, nu_ext, tau, delay, d0, d1, v_f, v_r, refractory: refractory(refractory_mode)? };
        Ok(PyModel { inner: Model::One(p).validate().map_err(to_py)? })
    }

    /// Keyword arguments are the fields of the two-population parameter set
    /// (`b_ee`, `b_ie`, `tau_e`, `delay_ee`, ...); missing ones keep their
    /// defaults.
    #[staticmethod]
    #[pyo3(signature = (refractory_mode="ratio", **params))]
    fn two_populations(refractory_mode: &str, params: Option<BTreeMap<String, f64>>) -> PyResult<Self> {
        let mut p = ModelParameters { refractory: refractory(refractory_mode)?, ..Default::default() };
        for (key, value) in params.unwrap_or_default() {
            let slot = match key.as_str() {
                "b_ee" => &mut p.b_ee,
                "b_ie" => &mut p.b_ie,
                "b_ii" => &mut p.b_ii,
                "b_ei" => &mut p.b_ei,
                "d_e" => &mut p.d_e,
                "d_i" => &mut p.d_i,
                "dcoef_ee" => &mut p.dcoef_ee,
                "dcoef_ie" => &mut p.dcoef_ie,
                "dcoef_ii" => &mut p.dcoef_ii,
                "dcoef_ei" => &mut p.dcoef_ei,
                "nu_e_ext" => &mut p.nu_e_ext,
                "delay_ee" => &mut p.delay_ee,
                "delay_ie" => &mut p.delay_ie,
                "delay_ii" => &mut p.delay_ii,
                "delay_ei" => &mut p.delay_ei,
                "tau_e" => &mut p.tau_e,
                "tau_i" => &mut p.tau_i,
                "v_f" => &mut p.v_f,
                "v_r" => &mut p.v_r,
                other => return Err(PyValueError::new_err(format!("unknown parameter '{other}'"))),
            };
            *slot = value;
        }
        Ok(PyModel { inner: Model::Two(p).validate().map_err(to_py)? })
    }

    /// The `[model]` table of a configuration document.
    #[staticmethod]
    fn from_config(text: &str) -> PyResult<Self> {
        Ok(PyModel { inner: parse_config(text).map_err(to_py)?.config.model })
    }

    #[getter]
    fn populations(&self) -> usize {
        self.inner.populations().len()
    }

    #[getter]
    fn refractory_mode(&self) -> &'static str {
        self.inner.refractory_mode().name()
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

#[pyclass(name = "SteadyState", frozen)]
struct PySteadyState {
    #[pyo3(get)]
    n_e: f64,
    #[pyo3(get)]
    n_i: f64,
    #[pyo3(get)]
    residual: f64,
    #[pyo3(get)]
    v: Vec<f64>,
    profiles: Vec<(Population, f64, Vec<f64>)>,
}

#[pymethods]
impl PySteadyState {
    /// Stationary density of a population on the grid nodes `v`.
    #[pyo3(signature = (pop="E"))]
    fn profile(&self, pop: &str) -> PyResult<Vec<f64>> {
        let pop = population(pop)?;
        self.profiles
            .iter()
            .find(|p| p.0 == pop)
            .map(|p| p.2.clone())
            .ok_or_else(|| PyValueError::new_err("population not present in this model"))
    }

    #[pyo3(signature = (pop="E"))]
    fn refractory(&self, pop: &str) -> PyResult<f64> {
        let pop = population(pop)?;
        self.profiles
            .iter()
            .find(|p| p.0 == pop)
            .map(|p| p.1)
            .ok_or_else(|| PyValueError::new_err("population not present in this model"))
    }

    fn __repr__(&self) -> String {
        format!("SteadyState(n_e={}, n_i={}, residual={:e})", self.n_e, self.n_i, self.residual)
    }
}

/// All steady states, ascending in `N_E`.
#[pyfunction]
#[pyo3(signature = (model, v_left=6.0, n_cells=1000, scan_points=DEFAULT_SCAN_POINTS))]
fn steady_states(model: &PyModel, v_left: f64, n_cells: usize, scan_points: usize) -> PyResult<Vec<PySteadyState>> {
    let grid = grid_spec(v_left, n_cells).build(&model.inner).map_err(to_py)?;
    let v: Vec<f64> = grid.nodes().collect();
    let states = steady::find_steady_states(&model.inner, &grid, scan_points).map_err(to_py)?;
    Ok(states
        .solutions
        .into_iter()
        .map(|s| PySteadyState {
            n_e: s.n_e(),
            n_i: s.n_i(),
            residual: s.residual,
            v: v.clone(),
            profiles: s.populations.into_iter().map(|p| (p.population, p.refractory, p.profile.0)).collect(),
        })
        .collect())
}

/// The scalar map whose fixed points `F(N_E) = 1` are the steady states.
#[pyfunction]
fn f_of_ne(model: &PyModel, n_e: f64) -> PyResult<f64> {
    steady::f_of_ne(n_e, &model.inner).map_err(to_py)
}

/// Root sets `[(N_E, N_I), ...]` for each value of the swept parameter.
#[pyfunction]
#[pyo3(signature = (model, parameter, values, scan_points=DEFAULT_SCAN_POINTS))]
fn bifurcation(model: &PyModel, parameter: &str, values: Vec<f64>, scan_points: usize) -> PyResult<Vec<Vec<(f64, f64)>>> {
    let param = SweepParameter::parse(parameter)
        .ok_or_else(|| PyValueError::new_err(format!("unknown sweep parameter '{parameter}'")))?;
    let scan = steady::bifurcation_scan(&model.inner, param, &values, scan_points, None).map_err(to_py)?;
    Ok(scan.points.into_iter().map(|p| p.roots).collect())
}

/// Concentration test on a Gaussian initial density of the excitatory
/// population. Returns `(satisfied, best_mu, margin)`.
#[pyfunction]
#[pyo3(signature = (model, v0, sigma0, mass=1.0, mu_min=DEFAULT_MU_MIN, mu_max=DEFAULT_MU_MAX, mu_points=DEFAULT_MU_POINTS, v_left=6.0, n_cells=1000))]
#[allow(clippy::too_many_arguments)]
fn blowup_criterion(
    model: &PyModel,
    v0: f64,
    sigma0: f64,
    mass: f64,
    mu_min: f64,
    mu_max: f64,
    mu_points: usize,
    v_left: f64,
    n_cells: usize,
) -> PyResult<(bool, f64, f64)> {
    let grid = grid_spec(v_left, n_cells).build(&model.inner).map_err(to_py)?;
    let rho = gaussian_initial(&grid, v0, sigma0, mass).map_err(to_py)?;
    let b_ee = match model.inner {
        Model::One(p) => p.b,
        Model::Two(p) => p.b_ee,
    };
    let c = steady::blowup_criterion(&rho, &grid, b_ee, &steady::log_spaced(mu_min, mu_max, mu_points));
    Ok((c.satisfied, c.best_mu, c.margin))
}

/// Output of a time integration.
#[pyclass(name = "Simulation", frozen)]
struct PySimulation {
    result: SimulationResult,
}

impl PySimulation {
    fn column(&self, pop: &str, pick: fn(&network::Record, usize) -> f64) -> PyResult<Vec<f64>> {
        let k = population(pop)?.index();
        if k >= self.result.series.populations {
            return Err(PyValueError::new_err("population not present in this model"));
        }
        Ok(self.result.series.records.iter().map(|r| pick(r, k)).collect())
    }
}

#[pymethods]
impl PySimulation {
    #[getter]
    fn times(&self) -> Vec<f64> {
        self.result.series.times()
    }

    #[pyo3(signature = (pop="E"))]
    fn rates(&self, pop: &str) -> PyResult<Vec<f64>> {
        self.column(pop, |r, k| r.n[k])
    }

    #[pyo3(signature = (pop="E"))]
    fn refractory(&self, pop: &str) -> PyResult<Vec<f64>> {
        self.column(pop, |r, k| r.r[k])
    }

    #[pyo3(signature = (pop="E"))]
    fn mass(&self, pop: &str) -> PyResult<Vec<f64>> {
        self.column(pop, |r, k| r.mass[k])
    }

    /// Relative entropy samples, when a reference state was requested.
    #[getter]
    fn entropy(&self) -> Option<Vec<f64>> {
        self.result.series.records.iter().map(|r| r.entropy).collect()
    }

    #[getter]
    fn classification(&self) -> &'static str {
        self.result.outcome.kind.name()
    }

    #[getter]
    fn blowup_time(&self) -> Option<f64> {
        self.result.outcome.blowup_time
    }

    #[getter]
    fn period(&self) -> Option<f64> {
        self.result.outcome.period
    }

    #[getter]
    fn mean_rates(&self) -> Vec<f64> {
        self.result.outcome.mean_rates.clone()
    }

    #[getter]
    fn v(&self) -> Vec<f64> {
        self.result.series.grid.nodes().collect()
    }

    /// `(t, [density per population])` for each requested snapshot.
    #[getter]
    fn snapshots(&self) -> Vec<(f64, Vec<Vec<f64>>)> {
        self.result.series.snapshots.iter().map(|s| (s.t, s.densities.clone())).collect()
    }

    #[pyo3(signature = (pop="E"))]
    fn final_density(&self, pop: &str) -> PyResult<Vec<f64>> {
        let pop = population(pop)?;
        self.result
            .final_state
            .iter()
            .find(|f| f.population == pop)
            .map(|f| f.density.clone())
            .ok_or_else(|| PyValueError::new_err("population not present in this model"))
    }

    #[getter]
    fn max_conservation_error(&self) -> f64 {
        self.result.series.max_conservation_error()
    }

    #[getter]
    fn counters(&self) -> BTreeMap<&'static str, f64> {
        let c = &self.result.counters;
        BTreeMap::from([
            ("steps", c.steps as f64),
            ("negative_floors", c.negative_floors as f64),
            ("rate_clamps", c.rate_clamps as f64),
            ("refractory_clamps", c.refractory_clamps as f64),
            ("min_dt", c.min_dt),
            ("max_dt", c.max_dt),
        ])
    }

    fn __repr__(&self) -> String {
        format!(
            "Simulation(classification={}, samples={}, blowup_time={:?})",
            self.classification(),
            self.result.series.records.len(),
            self.blowup_time()
        )
    }
}

/// Integrates the model up to `t_end`.
///
/// Initial data is either `gaussian=[(v0, sigma0, r0), ...]` with one entry
/// per population, or `stationary=(N_E, N_I)` for the stationary profiles at
/// those rates (optionally scaled by `1 + nudge`).
#[pyfunction]
#[pyo3(signature = (
    model, t_end, *, gaussian=None, stationary=None, nudge=0.0, output_dt=0.01,
    snapshot_times=vec![], concurrent=false, entropy=false, v_left=6.0, n_cells=1000,
))]
#[allow(clippy::too_many_arguments)]
fn simulate(
    py: Python<'_>,
    model: &PyModel,
    t_end: f64,
    gaussian: Option<Vec<(f64, f64, f64)>>,
    stationary: Option<(f64, f64)>,
    nudge: f64,
    output_dt: f64,
    snapshot_times: Vec<f64>,
    concurrent: bool,
    entropy: bool,
    v_left: f64,
    n_cells: usize,
) -> PyResult<PySimulation> {
    let initial = match (gaussian, stationary) {
        (Some(g), None) => InitialData::Gaussian(
            g.into_iter().map(|(v0, sigma0, r0)| GaussianSpec { v0, sigma0, r0, mass: None }).collect(),
        ),
        (None, Some((n_e, n_i))) => InitialData::Stationary { n_e, n_i, r0: None, nudge },
        _ => return Err(PyValueError::new_err("give exactly one of `gaussian` or `stationary`")),
    };
    let mut cfg = RunConfig::new(model.inner, initial, t_end);
    cfg.grid = grid_spec(v_left, n_cells);
    cfg.output_dt = output_dt;
    cfg.snapshot_times = snapshot_times;
    if concurrent {
        cfg.stepping = Stepping::Concurrent;
    }
    if entropy {
        let grid = cfg.grid.build(&model.inner).map_err(to_py)?;
        let states = steady::find_steady_states(&model.inner, &grid, DEFAULT_SCAN_POINTS).map_err(to_py)?;
        cfg.entropy_reference = states.solutions.into_iter().next();
        if cfg.entropy_reference.is_none() {
            return Err(PyValueError::new_err("entropy requested but no steady state was found"));
        }
    }
    let result = py.allow_threads(|| network::simulate(&cfg)).map_err(to_py)?;
    Ok(PySimulation { result })
}

/// Runs a CLI command on a configuration document and returns the output
/// files as `{relative path: contents}`.
#[pyfunction]
#[pyo3(signature = (command, config, overrides=vec![]))]
fn run(py: Python<'_>, command: &str, config: &str, overrides: Vec<String>) -> PyResult<BTreeMap<String, String>> {
    let command = Command::parse(command).ok_or_else(|| PyValueError::new_err(format!("unknown command '{command}'")))?;
    let bundle = py.allow_threads(|| cli::run_document(command, config, &overrides, None)).map_err(to_py)?;
    Ok(files(&bundle))
}

/// Runs every configuration of a named preset; see `presets()`.
#[pyfunction]
#[pyo3(signature = (id, overrides=vec![]))]
fn run_preset(py: Python<'_>, id: &str, overrides: Vec<String>) -> PyResult<BTreeMap<String, String>> {
    let p = catalog::preset(id).map_err(to_py)?;
    let bundle = py.allow_threads(|| cli::run_preset(&p, &overrides)).map_err(to_py)?;
    Ok(files(&bundle))
}

fn files(bundle: &nnlif::output::Bundle) -> BTreeMap<String, String> {
    bundle
        .paths()
        .map(|p| (p.to_string_lossy().into_owned(), bundle.get(p).unwrap_or_default().to_owned()))
        .collect()
}

/// `(id, title)` of each built-in experiment.
#[pyfunction]
fn presets() -> Vec<(String, String)> {
    catalog::all_presets().into_iter().map(|p| (p.id.to_string(), p.title.to_string())).collect()
}

/// Gaussian density on the solver grid, normalized to `mass`.
#[pyfunction]
#[pyo3(signature = (v0, sigma0, mass=1.0, v_left=6.0, v_f=2.0, v_r=1.0, n_cells=1000))]
fn gaussian_density(v0: f64, sigma0: f64, mass: f64, v_left: f64, v_f: f64, v_r: f64, n_cells: usize) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let grid = Grid::new(v_left, v_f, v_r, n_cells).map_err(to_py)?;
    let DensityField(rho) = gaussian_initial(&grid, v0, sigma0, mass).map_err(to_py)?;
    Ok((grid.nodes().collect(), rho))
}

#[pymodule]
fn pynnlif(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModel>()?;
    m.add_class::<PySteadyState>()?;
    m.add_class::<PySimulation>()?;
    m.add_function(wrap_pyfunction!(steady_states, m)?)?;
    m.add_function(wrap_pyfunction!(f_of_ne, m)?)?;
    m.add_function(wrap_pyfunction!(bifurcation, m)?)?;
    m.add_function(wrap_pyfunction!(blowup_criterion, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(run_preset, m)?)?;
    m.add_function(wrap_pyfunction!(presets, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_density, m)?)?;
    Ok(())
}
