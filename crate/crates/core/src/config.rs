//! Experiment configuration as a TOML document with the sections `[model]`,
//! `[grid]`, `[initial]`, `[run]` and `[output]`.
//!
//! ```toml
//! [model]
//! populations = 1
//! b = -4.0
//! nu_ext = 20.0
//! D = 0.1
//!
//! [initial]
//! kind = "gaussian"
//! v0 = 1.83
//! sigma0 = 0.0003
//! R0 = 0.2
//!
//! [run]
//! t_end = 10.0
//! ```
//!
//! Per-population keys of `[initial]` take a number for one population and
//! an `[E, I]` array for two. Every key is optional except `run.t_end` and
//! `initial.kind` for commands that simulate.

use serde::{Deserialize, Serialize};

use crate::diagnostics::{BlowupThresholds, ClassifyOptions};
use crate::error::{Error, Result};
use crate::network::{GaussianSpec, GridSpec, InitialData, RunConfig, Stepping};
use crate::params::{Model, ModelParameters, OnePopParameters, RefractoryMode};
use crate::steady::{find_steady_states, SweepParameter, DEFAULT_MU_MAX, DEFAULT_MU_MIN, DEFAULT_MU_POINTS, DEFAULT_SCAN_POINTS};
use crate::stepper::DEFAULT_CFL_SAFETY;

const DEFAULT_OUTPUT_DT: f64 = 0.01;
const DEFAULT_SIGMA0: f64 = 0.0003;

/// Parameter sweep of the `bifurcation` command.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub from: f64,
    pub to: f64,
    pub points: usize,
    pub log: bool,
}

impl SweepSpec {
    pub fn values(&self) -> Vec<f64> {
        if self.points < 2 {
            return vec![self.from];
        }
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|k| {
                let s = k as f64 / last;
                if self.log {
                    (self.from.ln() + s * (self.to.ln() - self.from.ln())).exp()
                } else {
                    self.from + s * (self.to - self.from)
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub t_end: Option<f64>,
    pub cfl_safety: f64,
    pub dt_bar: Option<f64>,
    pub thresholds: BlowupThresholds,
    pub stepping: Stepping,
    /// Track the relative entropy against the lowest steady state.
    pub entropy: bool,
    pub classify: ClassifyOptions,
    pub scan_points: usize,
    pub sweep: Option<SweepSpec>,
    /// Relative rate perturbation of the `stability` command.
    pub nudge: f64,
    pub mu_min: f64,
    pub mu_max: f64,
    pub mu_points: usize,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings {
            t_end: None,
            cfl_safety: DEFAULT_CFL_SAFETY,
            dt_bar: None,
            thresholds: BlowupThresholds::default(),
            stepping: Stepping::Sequential,
            entropy: false,
            classify: ClassifyOptions::default(),
            scan_points: DEFAULT_SCAN_POINTS,
            sweep: None,
            nudge: 0.0,
            mu_min: DEFAULT_MU_MIN,
            mu_max: DEFAULT_MU_MAX,
            mu_points: DEFAULT_MU_POINTS,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSettings {
    pub output_dt: f64,
    pub snapshot_times: Vec<f64>,
    /// Samples of `F(N_E)` written per sweep value, if any.
    pub curve_points: Option<usize>,
}

impl Default for OutputSettings {
    fn default() -> Self {
        OutputSettings { output_dt: DEFAULT_OUTPUT_DT, snapshot_times: Vec::new(), curve_points: None }
    }
}

/// A fully resolved configuration document.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: Model,
    pub grid: GridSpec,
    pub initial: Option<InitialData>,
    pub run: RunSettings,
    pub output: OutputSettings,
}

/// Result of [`parse_config`]: the configuration and the `section.key`
/// names that were filled with defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedConfig {
    pub config: ExperimentConfig,
    pub defaulted: Vec<String>,
}

impl ExperimentConfig {
    pub fn new(model: Model) -> Self {
        ExperimentConfig {
            model,
            grid: GridSpec::default(),
            initial: None,
            run: RunSettings::default(),
            output: OutputSettings::default(),
        }
    }

    pub fn with_initial(mut self, initial: InitialData) -> Self {
        self.initial = Some(initial);
        self
    }

    pub fn with_t_end(mut self, t_end: f64) -> Self {
        self.run.t_end = Some(t_end);
        self
    }

    /// The simulation described by the document. With `run.entropy` the
    /// lowest steady state is solved for and used as the entropy reference.
    pub fn run_config(&self) -> Result<RunConfig> {
        let initial = self
            .initial
            .clone()
            .ok_or_else(|| Error::InvalidConfig("missing required section [initial] (key `kind`)".into()))?;
        let t_end = self
            .run
            .t_end
            .ok_or_else(|| Error::InvalidConfig("missing required key `t_end` in [run]".into()))?;
        let mut cfg = RunConfig::new(self.model, initial, t_end);
        cfg.grid = self.grid;
        cfg.output_dt = self.output.output_dt;
        cfg.snapshot_times = self.output.snapshot_times.clone();
        cfg.cfl_safety = self.run.cfl_safety;
        cfg.dt_bar = self.run.dt_bar;
        cfg.thresholds = self.run.thresholds;
        cfg.stepping = self.run.stepping;
        cfg.classify = self.run.classify;
        if self.run.entropy {
            let grid = self.grid.build(&self.model)?;
            let states = find_steady_states(&self.model, &grid, self.run.scan_points)?;
            let lowest = states
                .solutions
                .into_iter()
                .next()
                .ok_or_else(|| Error::InvalidConfig("entropy requested but no steady state was found".into()))?;
            cfg.entropy_reference = Some(lowest);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn mu_grid(&self) -> Vec<f64> {
        crate::steady::log_spaced(self.run.mu_min, self.run.mu_max, self.run.mu_points)
    }
}

// ---------------------------------------------------------------------------
// Document layer

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum PerPop {
    One(f64),
    Many(Vec<f64>),
}

impl PerPop {
    fn values(&self) -> Vec<f64> {
        match self {
            PerPop::One(x) => vec![*x],
            PerPop::Many(v) => v.clone(),
        }
    }

    fn from_values(v: &[f64]) -> Self {
        if v.len() == 1 {
            PerPop::One(v[0])
        } else {
            PerPop::Many(v.to_vec())
        }
    }
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OneModelDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    populations: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    d0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    d1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    nu_ext: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tau: Option<f64>,
    #[serde(rename = "D", skip_serializing_if = "Option::is_none")]
    delay: Option<f64>,
    #[serde(rename = "V_F", skip_serializing_if = "Option::is_none")]
    v_f: Option<f64>,
    #[serde(rename = "V_R", skip_serializing_if = "Option::is_none")]
    v_r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    refractory_mode: Option<RefractoryMode>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TwoModelDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    populations: Option<u8>,
    #[serde(rename = "b_EE", skip_serializing_if = "Option::is_none")]
    b_ee: Option<f64>,
    #[serde(rename = "b_IE", skip_serializing_if = "Option::is_none")]
    b_ie: Option<f64>,
    #[serde(rename = "b_II", skip_serializing_if = "Option::is_none")]
    b_ii: Option<f64>,
    #[serde(rename = "b_EI", skip_serializing_if = "Option::is_none")]
    b_ei: Option<f64>,
    #[serde(rename = "d_E", skip_serializing_if = "Option::is_none")]
    d_e: Option<f64>,
    #[serde(rename = "d_I", skip_serializing_if = "Option::is_none")]
    d_i: Option<f64>,
    #[serde(rename = "dcoef_EE", skip_serializing_if = "Option::is_none")]
    dcoef_ee: Option<f64>,
    #[serde(rename = "dcoef_IE", skip_serializing_if = "Option::is_none")]
    dcoef_ie: Option<f64>,
    #[serde(rename = "dcoef_II", skip_serializing_if = "Option::is_none")]
    dcoef_ii: Option<f64>,
    #[serde(rename = "dcoef_EI", skip_serializing_if = "Option::is_none")]
    dcoef_ei: Option<f64>,
    #[serde(rename = "nu_E_ext", skip_serializing_if = "Option::is_none")]
    nu_e_ext: Option<f64>,
    #[serde(rename = "D_EE", skip_serializing_if = "Option::is_none")]
    delay_ee: Option<f64>,
    #[serde(rename = "D_IE", skip_serializing_if = "Option::is_none")]
    delay_ie: Option<f64>,
    #[serde(rename = "D_II", skip_serializing_if = "Option::is_none")]
    delay_ii: Option<f64>,
    #[serde(rename = "D_EI", skip_serializing_if = "Option::is_none")]
    delay_ei: Option<f64>,
    #[serde(rename = "tau_E", skip_serializing_if = "Option::is_none")]
    tau_e: Option<f64>,
    #[serde(rename = "tau_I", skip_serializing_if = "Option::is_none")]
    tau_i: Option<f64>,
    #[serde(rename = "V_F", skip_serializing_if = "Option::is_none")]
    v_f: Option<f64>,
    #[serde(rename = "V_R", skip_serializing_if = "Option::is_none")]
    v_r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    refractory_mode: Option<RefractoryMode>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    v_left: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n_cells: Option<usize>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InitialDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    kind: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    v0: Option<PerPop>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma0: Option<PerPop>,
    #[serde(rename = "R0", skip_serializing_if = "Option::is_none")]
    r0: Option<PerPop>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mass: Option<PerPop>,
    #[serde(rename = "N_E", alias = "N", skip_serializing_if = "Option::is_none")]
    n_e: Option<f64>,
    #[serde(rename = "N_I", skip_serializing_if = "Option::is_none")]
    n_i: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    nudge: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    t_end: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cfl_safety: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dt_bar: Option<f64>,
    #[serde(rename = "N_cap", skip_serializing_if = "Option::is_none")]
    n_cap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dt_floor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    stepping: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    entropy: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    classify_window: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    classify_flatness: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    classify_min_peaks: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    classify_spacing_cv: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    classify_amplitude_decay: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    scan_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep_parameter: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep_from: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep_to: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep_log: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    nudge: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mu_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mu_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mu_points: Option<usize>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    output_dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    snapshot_times: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    curve_points: Option<usize>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document<M> {
    #[serde(default)]
    model: M,
    #[serde(default)]
    grid: GridDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    initial: Option<InitialDoc>,
    #[serde(default)]
    run: RunDoc,
    #[serde(default)]
    output: OutputDoc,
}

const SECTION_KEYS: &[(&str, &[&str])] = &[
    (
        "model",
        &[
            "populations", "b", "d0", "d1", "nu_ext", "tau", "D", "b_EE", "b_IE", "b_II", "b_EI", "d_E", "d_I",
            "dcoef_EE", "dcoef_IE", "dcoef_II", "dcoef_EI", "nu_E_ext", "D_EE", "D_IE", "D_II", "D_EI", "tau_E",
            "tau_I", "V_F", "V_R", "refractory_mode",
        ],
    ),
    ("grid", &["v_left", "n_cells"]),
    ("initial", &["kind", "v0", "sigma0", "R0", "mass", "N_E", "N", "N_I", "nudge"]),
    (
        "run",
        &[
            "t_end", "cfl_safety", "dt_bar", "N_cap", "dt_floor", "stepping", "entropy", "classify_window",
            "classify_flatness", "classify_min_peaks", "classify_spacing_cv", "classify_amplitude_decay",
            "scan_points", "sweep_parameter", "sweep_from", "sweep_to", "sweep_points", "sweep_log", "nudge",
            "mu_min", "mu_max", "mu_points",
        ],
    ),
    ("output", &["output_dt", "snapshot_times", "curve_points"]),
];

/// Tracks defaults and locates keys for error messages.
struct Resolver<'a> {
    text: &'a str,
    defaulted: Vec<String>,
}

impl<'a> Resolver<'a> {
    fn or<T>(&mut self, v: Option<T>, section: &str, key: &str, default: T) -> T {
        v.unwrap_or_else(|| {
            self.defaulted.push(format!("{section}.{key}"));
            default
        })
    }

    fn error(&self, section: &str, key: &str, message: impl Into<String>) -> Error {
        Error::ConfigAt { line: key_line(self.text, section, key), message: message.into() }
    }
}

/// Line of `key` inside `[section]`, else of the section header, else the
/// line after the last.
fn key_line(text: &str, section: &str, key: &str) -> usize {
    let mut current = String::new();
    let mut header = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.split(']').next()) {
            current = name.trim().to_string();
            if current == section {
                header = Some(i + 1);
            }
            continue;
        }
        if current == section {
            if let Some((k, _)) = line.split_once('=') {
                let k = k.trim().trim_matches('"');
                if k == key {
                    return i + 1;
                }
            }
        }
    }
    header.unwrap_or(text.lines().count() + 1)
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

fn toml_error(text: &str, e: &toml::de::Error) -> Error {
    let line = e.span().map_or(1, |s| line_of(text, s.start));
    let msg = e.message().trim().to_string();
    let message = match msg.strip_prefix("unknown field `") {
        Some(rest) => {
            let name = rest.split('`').next().unwrap_or(rest);
            format!("unknown key `{name}`")
        }
        None => msg,
    };
    Error::ConfigAt { line, message }
}

/// Parses a configuration document.
pub fn parse_config(text: &str) -> Result<ParsedConfig> {
    let table: toml::Table = toml::from_str(text).map_err(|e| toml_error(text, &e))?;
    let populations = match table.get("model").and_then(|m| m.get("populations")) {
        None => 1,
        Some(v) => match v.as_integer() {
            Some(1) => 1,
            Some(2) => 2,
            _ => {
                return Err(Error::ConfigAt {
                    line: key_line(text, "model", "populations"),
                    message: "`populations` must be 1 or 2".into(),
                })
            }
        },
    };
    let mut r = Resolver { text, defaulted: Vec::new() };
    let (model, grid, initial, run, output) = if populations == 1 {
        let doc: Document<OneModelDoc> = toml::from_str(text).map_err(|e| toml_error(text, &e))?;
        (resolve_one(&mut r, &doc.model)?, doc.grid, doc.initial, doc.run, doc.output)
    } else {
        let doc: Document<TwoModelDoc> = toml::from_str(text).map_err(|e| toml_error(text, &e))?;
        (resolve_two(&mut r, &doc.model)?, doc.grid, doc.initial, doc.run, doc.output)
    };
    let grid = GridSpec {
        v_left: r.or(grid.v_left, "grid", "v_left", GridSpec::default().v_left),
        n_cells: r.or(grid.n_cells, "grid", "n_cells", GridSpec::default().n_cells),
    };
    let initial = match initial {
        Some(doc) => Some(resolve_initial(&mut r, &doc, &model)?),
        None => None,
    };
    let run = resolve_run(&mut r, &run, &model)?;
    let output = OutputSettings {
        output_dt: r.or(output.output_dt, "output", "output_dt", DEFAULT_OUTPUT_DT),
        snapshot_times: output.snapshot_times.unwrap_or_default(),
        curve_points: output.curve_points,
    };
    let config = ExperimentConfig { model, grid, initial, run, output };
    Ok(ParsedConfig { config, defaulted: r.defaulted })
}

fn resolve_one(r: &mut Resolver, d: &OneModelDoc) -> Result<Model> {
    let def = OnePopParameters::default();
    let p = OnePopParameters {
        b: r.or(d.b, "model", "b", def.b),
        d0: r.or(d.d0, "model", "d0", def.d0),
        d1: r.or(d.d1, "model", "d1", def.d1),
        nu_ext: r.or(d.nu_ext, "model", "nu_ext", def.nu_ext),
        tau: r.or(d.tau, "model", "tau", def.tau),
        delay: r.or(d.delay, "model", "D", def.delay),
        v_f: r.or(d.v_f, "model", "V_F", def.v_f),
        v_r: r.or(d.v_r, "model", "V_R", def.v_r),
        refractory: r.or(d.refractory_mode, "model", "refractory_mode", def.refractory),
    };
    p.validate().map(Model::One).map_err(|e| r.error("model", "b", e.to_string()))
}

fn resolve_two(r: &mut Resolver, d: &TwoModelDoc) -> Result<Model> {
    let def = ModelParameters::default();
    let p = ModelParameters {
        b_ee: r.or(d.b_ee, "model", "b_EE", def.b_ee),
        b_ie: r.or(d.b_ie, "model", "b_IE", def.b_ie),
        b_ii: r.or(d.b_ii, "model", "b_II", def.b_ii),
        b_ei: r.or(d.b_ei, "model", "b_EI", def.b_ei),
        d_e: r.or(d.d_e, "model", "d_E", def.d_e),
        d_i: r.or(d.d_i, "model", "d_I", def.d_i),
        dcoef_ee: r.or(d.dcoef_ee, "model", "dcoef_EE", def.dcoef_ee),
        dcoef_ie: r.or(d.dcoef_ie, "model", "dcoef_IE", def.dcoef_ie),
        dcoef_ii: r.or(d.dcoef_ii, "model", "dcoef_II", def.dcoef_ii),
        dcoef_ei: r.or(d.dcoef_ei, "model", "dcoef_EI", def.dcoef_ei),
        nu_e_ext: r.or(d.nu_e_ext, "model", "nu_E_ext", def.nu_e_ext),
        delay_ee: r.or(d.delay_ee, "model", "D_EE", def.delay_ee),
        delay_ie: r.or(d.delay_ie, "model", "D_IE", def.delay_ie),
        delay_ii: r.or(d.delay_ii, "model", "D_II", def.delay_ii),
        delay_ei: r.or(d.delay_ei, "model", "D_EI", def.delay_ei),
        tau_e: r.or(d.tau_e, "model", "tau_E", def.tau_e),
        tau_i: r.or(d.tau_i, "model", "tau_I", def.tau_i),
        v_f: r.or(d.v_f, "model", "V_F", def.v_f),
        v_r: r.or(d.v_r, "model", "V_R", def.v_r),
        refractory: r.or(d.refractory_mode, "model", "refractory_mode", def.refractory),
    };
    p.validate().map(Model::Two).map_err(|e| r.error("model", "populations", e.to_string()))
}

fn per_pop(r: &Resolver, v: &Option<PerPop>, key: &str, count: usize, default: f64) -> Result<Vec<f64>> {
    match v {
        None => Ok(vec![default; count]),
        Some(PerPop::One(x)) => Ok(vec![*x; count]),
        Some(p @ PerPop::Many(_)) => {
            let vals = p.values();
            if vals.len() != count {
                return Err(r.error(
                    "initial",
                    key,
                    format!("`{key}` needs {count} value(s), one per population (got {})", vals.len()),
                ));
            }
            Ok(vals)
        }
    }
}

fn resolve_initial(r: &mut Resolver, d: &InitialDoc, model: &Model) -> Result<InitialData> {
    let count = model.populations().len();
    let kind = d.kind.as_deref().ok_or_else(|| r.error("initial", "kind", "missing required key `kind` in [initial]"))?;
    match kind {
        "gaussian" => {
            let v0 = d.v0.as_ref().ok_or_else(|| r.error("initial", "v0", "missing required key `v0` in [initial]"))?;
            let v0 = per_pop(r, &Some(v0.clone()), "v0", count, 0.0)?;
            if d.sigma0.is_none() {
                r.defaulted.push("initial.sigma0".into());
            }
            if d.r0.is_none() {
                r.defaulted.push("initial.R0".into());
            }
            let sigma0 = per_pop(r, &d.sigma0, "sigma0", count, DEFAULT_SIGMA0)?;
            let r0 = per_pop(r, &d.r0, "R0", count, 0.0)?;
            let mass = match &d.mass {
                None => vec![None; count],
                Some(_) => per_pop(r, &d.mass, "mass", count, 0.0)?.into_iter().map(Some).collect(),
            };
            if d.n_e.is_some() || d.n_i.is_some() || d.nudge.is_some() {
                return Err(r.error("initial", "kind", "`N_E`, `N_I` and `nudge` apply to kind = \"stationary\""));
            }
            Ok(InitialData::Gaussian(
                (0..count).map(|k| GaussianSpec { v0: v0[k], sigma0: sigma0[k], r0: r0[k], mass: mass[k] }).collect(),
            ))
        }
        "stationary" => {
            let n_e = d.n_e.ok_or_else(|| r.error("initial", "N_E", "missing required key `N_E` in [initial]"))?;
            let n_i = if count == 2 {
                d.n_i.ok_or_else(|| r.error("initial", "N_I", "missing required key `N_I` in [initial]"))?
            } else {
                0.0
            };
            if d.v0.is_some() || d.sigma0.is_some() || d.mass.is_some() {
                return Err(r.error("initial", "kind", "`v0`, `sigma0` and `mass` apply to kind = \"gaussian\""));
            }
            let r0 = match &d.r0 {
                None => None,
                Some(_) => Some(per_pop(r, &d.r0, "R0", count, 0.0)?),
            };
            let nudge = r.or(d.nudge, "initial", "nudge", 0.0);
            Ok(InitialData::Stationary { n_e, n_i, r0, nudge })
        }
        other => Err(r.error(
            "initial",
            "kind",
            format!("unknown initial kind `{other}` (expected \"gaussian\" or \"stationary\")"),
        )),
    }
}

fn resolve_run(r: &mut Resolver, d: &RunDoc, model: &Model) -> Result<RunSettings> {
    let def = RunSettings::default();
    let dc = ClassifyOptions::default();
    let stepping = match d.stepping.as_deref() {
        None => {
            r.defaulted.push("run.stepping".into());
            Stepping::Sequential
        }
        Some("sequential") => Stepping::Sequential,
        Some("concurrent") => Stepping::Concurrent,
        Some(other) => {
            return Err(r.error(
                "run",
                "stepping",
                format!("unknown stepping `{other}` (expected \"sequential\" or \"concurrent\")"),
            ))
        }
    };
    let sweep = match &d.sweep_parameter {
        None => None,
        Some(name) => {
            let parameter = SweepParameter::parse(name)
                .ok_or_else(|| r.error("run", "sweep_parameter", format!("unknown sweep parameter `{name}`")))?;
            if parameter.value(model).is_none() {
                return Err(r.error(
                    "run",
                    "sweep_parameter",
                    format!("sweep parameter `{name}` does not apply to this model"),
                ));
            }
            let from = d.sweep_from.ok_or_else(|| r.error("run", "sweep_from", "missing required key `sweep_from` in [run]"))?;
            let to = d.sweep_to.ok_or_else(|| r.error("run", "sweep_to", "missing required key `sweep_to` in [run]"))?;
            let points = r.or(d.sweep_points, "run", "sweep_points", 20);
            let log = r.or(d.sweep_log, "run", "sweep_log", false);
            if log && !(from > 0.0 && to > 0.0) {
                return Err(r.error("run", "sweep_log", "a logarithmic sweep needs positive bounds"));
            }
            Some(SweepSpec { parameter, from, to, points, log })
        }
    };
    Ok(RunSettings {
        t_end: d.t_end,
        cfl_safety: r.or(d.cfl_safety, "run", "cfl_safety", def.cfl_safety),
        dt_bar: d.dt_bar,
        thresholds: BlowupThresholds {
            n_cap: r.or(d.n_cap, "run", "N_cap", def.thresholds.n_cap),
            dt_floor: r.or(d.dt_floor, "run", "dt_floor", def.thresholds.dt_floor),
        },
        stepping,
        entropy: r.or(d.entropy, "run", "entropy", false),
        classify: ClassifyOptions {
            window: r.or(d.classify_window, "run", "classify_window", dc.window),
            flatness: r.or(d.classify_flatness, "run", "classify_flatness", dc.flatness),
            min_peaks: r.or(d.classify_min_peaks, "run", "classify_min_peaks", dc.min_peaks),
            spacing_cv: r.or(d.classify_spacing_cv, "run", "classify_spacing_cv", dc.spacing_cv),
            amplitude_decay: r.or(d.classify_amplitude_decay, "run", "classify_amplitude_decay", dc.amplitude_decay),
        },
        scan_points: r.or(d.scan_points, "run", "scan_points", def.scan_points),
        sweep,
        nudge: r.or(d.nudge, "run", "nudge", 0.0),
        mu_min: r.or(d.mu_min, "run", "mu_min", def.mu_min),
        mu_max: r.or(d.mu_max, "run", "mu_max", def.mu_max),
        mu_points: r.or(d.mu_points, "run", "mu_points", def.mu_points),
    })
}

/// Renders `cfg` as a document with every key explicit;
/// `parse_config(&render(cfg))` reproduces `cfg`.
pub fn render(cfg: &ExperimentConfig) -> Result<String> {
    let grid = GridDoc { v_left: Some(cfg.grid.v_left), n_cells: Some(cfg.grid.n_cells) };
    let initial = cfg.initial.as_ref().map(render_initial).transpose()?;
    let run = render_run(&cfg.run);
    let output = OutputDoc {
        output_dt: Some(cfg.output.output_dt),
        snapshot_times: Some(cfg.output.snapshot_times.clone()),
        curve_points: cfg.output.curve_points,
    };
    let text = match &cfg.model {
        Model::One(p) => toml::to_string(&Document {
            model: OneModelDoc {
                populations: Some(1),
                b: Some(p.b),
                d0: Some(p.d0),
                d1: Some(p.d1),
                nu_ext: Some(p.nu_ext),
                tau: Some(p.tau),
                delay: Some(p.delay),
                v_f: Some(p.v_f),
                v_r: Some(p.v_r),
                refractory_mode: Some(p.refractory),
            },
            grid,
            initial,
            run,
            output,
        }),
        Model::Two(p) => toml::to_string(&Document {
            model: TwoModelDoc {
                populations: Some(2),
                b_ee: Some(p.b_ee),
                b_ie: Some(p.b_ie),
                b_ii: Some(p.b_ii),
                b_ei: Some(p.b_ei),
                d_e: Some(p.d_e),
                d_i: Some(p.d_i),
                dcoef_ee: Some(p.dcoef_ee),
                dcoef_ie: Some(p.dcoef_ie),
                dcoef_ii: Some(p.dcoef_ii),
                dcoef_ei: Some(p.dcoef_ei),
                nu_e_ext: Some(p.nu_e_ext),
                delay_ee: Some(p.delay_ee),
                delay_ie: Some(p.delay_ie),
                delay_ii: Some(p.delay_ii),
                delay_ei: Some(p.delay_ei),
                tau_e: Some(p.tau_e),
                tau_i: Some(p.tau_i),
                v_f: Some(p.v_f),
                v_r: Some(p.v_r),
                refractory_mode: Some(p.refractory),
            },
            grid,
            initial,
            run,
            output,
        }),
    };
    text.map_err(|e| Error::InvalidConfig(format!("cannot render configuration: {e}")))
}

fn render_initial(init: &InitialData) -> Result<InitialDoc> {
    match init {
        InitialData::Gaussian(specs) => {
            let col = |f: fn(&GaussianSpec) -> f64| PerPop::from_values(&specs.iter().map(f).collect::<Vec<_>>());
            let mass = if specs.iter().all(|s| s.mass.is_some()) {
                Some(col(|s| s.mass.unwrap_or(0.0)))
            } else if specs.iter().all(|s| s.mass.is_none()) {
                None
            } else {
                return Err(Error::InvalidConfig("mass must be given for all populations or none".into()));
            };
            Ok(InitialDoc {
                kind: Some("gaussian".into()),
                v0: Some(col(|s| s.v0)),
                sigma0: Some(col(|s| s.sigma0)),
                r0: Some(col(|s| s.r0)),
                mass,
                ..Default::default()
            })
        }
        InitialData::Stationary { n_e, n_i, r0, nudge } => Ok(InitialDoc {
            kind: Some("stationary".into()),
            r0: r0.as_ref().map(|v| PerPop::from_values(v)),
            n_e: Some(*n_e),
            n_i: Some(*n_i),
            nudge: Some(*nudge),
            ..Default::default()
        }),
        InitialData::Explicit { .. } => Err(Error::InvalidConfig("explicit densities cannot be written to a config".into())),
    }
}

fn render_run(run: &RunSettings) -> RunDoc {
    let sweep = run.sweep.as_ref();
    RunDoc {
        t_end: run.t_end,
        cfl_safety: Some(run.cfl_safety),
        dt_bar: run.dt_bar,
        n_cap: Some(run.thresholds.n_cap),
        dt_floor: Some(run.thresholds.dt_floor),
        stepping: Some(
            match run.stepping {
                Stepping::Sequential => "sequential",
                Stepping::Concurrent => "concurrent",
            }
            .into(),
        ),
        entropy: Some(run.entropy),
        classify_window: Some(run.classify.window),
        classify_flatness: Some(run.classify.flatness),
        classify_min_peaks: Some(run.classify.min_peaks),
        classify_spacing_cv: Some(run.classify.spacing_cv),
        classify_amplitude_decay: Some(run.classify.amplitude_decay),
        scan_points: Some(run.scan_points),
        sweep_parameter: sweep.map(|s| s.parameter.name().to_string()),
        sweep_from: sweep.map(|s| s.from),
        sweep_to: sweep.map(|s| s.to),
        sweep_points: sweep.map(|s| s.points),
        sweep_log: sweep.map(|s| s.log),
        nudge: Some(run.nudge),
        mu_min: Some(run.mu_min),
        mu_max: Some(run.mu_max),
        mu_points: Some(run.mu_points),
    }
}

/// Applies `section.key=value` overrides (a bare `key` is looked up among
/// the known keys) and returns the modified document.
pub fn apply_overrides(text: &str, overrides: &[String]) -> Result<String> {
    if overrides.is_empty() {
        return Ok(text.to_string());
    }
    let mut table: toml::Table = toml::from_str(text).map_err(|e| toml_error(text, &e))?;
    for item in overrides {
        let (path, raw) = item
            .split_once('=')
            .ok_or_else(|| Error::InvalidConfig(format!("override `{item}` is not of the form key=value")))?;
        let (path, raw) = (path.trim(), raw.trim());
        let (section, key) = match path.split_once('.') {
            Some((s, k)) => (s.to_string(), k.to_string()),
            None => {
                let owner = SECTION_KEYS
                    .iter()
                    .filter(|(_, keys)| keys.contains(&path))
                    .map(|(s, _)| *s)
                    .collect::<Vec<_>>();
                match owner.as_slice() {
                    [s] => (s.to_string(), path.to_string()),
                    [] => return Err(Error::InvalidConfig(format!("override of unknown key `{path}`"))),
                    _ => {
                        return Err(Error::InvalidConfig(format!(
                            "override key `{path}` is ambiguous; write it as section.key"
                        )))
                    }
                }
            }
        };
        if !SECTION_KEYS.iter().any(|(s, _)| *s == section) {
            return Err(Error::InvalidConfig(format!("override of unknown section `{section}`")));
        }
        let value = match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
            Ok(mut t) => t.remove("v").expect("parsed key"),
            Err(_) => toml::Value::String(raw.to_string()),
        };
        let entry = table
            .entry(section.clone())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        match entry {
            toml::Value::Table(t) => {
                t.insert(key, value);
            }
            _ => return Err(Error::InvalidConfig(format!("`{section}` is not a section"))),
        }
    }
    toml::to_string(&table).map_err(|e| Error::InvalidConfig(format!("cannot apply overrides: {e}")))
}
