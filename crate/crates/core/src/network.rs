//! Full simulations of one or two populations, with blow-up detection,
//! diagnostics and outcome classification.

use rayon::prelude::*;

use crate::diagnostics::{
    classify_signal, combine_classes, detect_blowup, relative_entropy, BlowupThresholds, BlowupTrigger,
    ClassifyOptions, OutcomeKind, SignalClass,
};
use crate::error::{Error, Result};
use crate::grid::{gaussian_initial, stationary_initial, total_mass, DensityField, Grid, DEFAULT_N_CELLS, DEFAULT_V_LEFT};
use crate::params::{Model, Population, RefractoryMode};
use crate::steady::SteadyStateSolution;
use crate::stepper::{PopulationStepper, StepInputs, DEFAULT_CFL_SAFETY};

/// Minimal spacing of the internal rate trace used for classification.
const TRACE_SPACING: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub v_left: f64,
    pub n_cells: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { v_left: DEFAULT_V_LEFT, n_cells: DEFAULT_N_CELLS }
    }
}

impl GridSpec {
    pub fn build(&self, model: &Model) -> Result<Grid> {
        Grid::for_model(model, self.v_left, self.n_cells)
    }
}

/// Gaussian bump of one population. The density mass defaults to `1 - r0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianSpec {
    pub v0: f64,
    pub sigma0: f64,
    pub r0: f64,
    pub mass: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    /// One entry per population.
    Gaussian(Vec<GaussianSpec>),
    /// Stationary profiles at approximate rates, evaluated at rates scaled by
    /// `1 + nudge`. `r0` defaults to `tau_alpha N_alpha` at the scaled rates;
    /// a nonzero nudge also rescales each density to mass `1 - R(0)`.
    Stationary { n_e: f64, n_i: f64, r0: Option<Vec<f64>>, nudge: f64 },
    Explicit { densities: Vec<DensityField>, r0: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Stepping {
    #[default]
    Sequential,
    /// Populations advance on separate threads within each step.
    Concurrent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: Model,
    pub grid: GridSpec,
    pub initial: InitialData,
    pub t_end: f64,
    pub output_dt: f64,
    pub snapshot_times: Vec<f64>,
    pub cfl_safety: f64,
    /// Delay sampling interval; each history uses `delay / 64` when unset.
    pub dt_bar: Option<f64>,
    pub thresholds: BlowupThresholds,
    pub entropy_reference: Option<SteadyStateSolution>,
    pub stepping: Stepping,
    pub classify: ClassifyOptions,
}

impl RunConfig {
    pub fn new(model: Model, initial: InitialData, t_end: f64) -> Self {
        RunConfig {
            model,
            grid: GridSpec::default(),
            initial,
            t_end,
            output_dt: 0.01,
            snapshot_times: Vec::new(),
            cfl_safety: DEFAULT_CFL_SAFETY,
            dt_bar: None,
            thresholds: BlowupThresholds::default(),
            entropy_reference: None,
            stepping: Stepping::Sequential,
            classify: ClassifyOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            problems.push(format!("t_end must be > 0 (got {})", self.t_end));
        }
        if !(self.output_dt > 0.0) {
            problems.push(format!("output_dt must be > 0 (got {})", self.output_dt));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            problems.push(format!("cfl_safety must lie in (0, 1] (got {})", self.cfl_safety));
        }
        if !(self.thresholds.n_cap > 0.0) {
            problems.push(format!("n_cap must be > 0 (got {})", self.thresholds.n_cap));
        }
        if !(self.thresholds.dt_floor >= 0.0) {
            problems.push(format!("dt_floor must be >= 0 (got {})", self.thresholds.dt_floor));
        }
        if let Some(d) = self.dt_bar {
            if !(d > 0.0) {
                problems.push(format!("dt_bar must be > 0 (got {d})"));
            }
        }
        if !(0.0 < self.classify.window && self.classify.window <= 1.0) {
            problems.push(format!("classification window must lie in (0, 1] (got {})", self.classify.window));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(problems.join("; ")))
        }
    }
}

/// One output sample. Entries of absent populations are NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Record {
    pub t: f64,
    pub n: [f64; 2],
    pub r: [f64; 2],
    pub mass: [f64; 2],
    pub entropy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    /// One density per population.
    pub densities: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub populations: usize,
    pub grid: Grid,
    pub records: Vec<Record>,
    pub snapshots: Vec<Snapshot>,
}

impl TimeSeries {
    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    pub fn rates(&self, pop: Population) -> Vec<f64> {
        self.records.iter().map(|r| r.n[pop.index()]).collect()
    }

    /// Largest `|mass + R - 1|` over the records and populations.
    pub fn max_conservation_error(&self) -> f64 {
        self.records
            .iter()
            .flat_map(|r| (0..self.populations).map(move |k| (r.mass[k] + r.r[k] - 1.0).abs()))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeClassification {
    pub kind: OutcomeKind,
    pub blowup_time: Option<f64>,
    pub blowup_trigger: Option<BlowupTrigger>,
    pub period: Option<f64>,
    pub amplitude: Option<f64>,
    pub terminal_rates: Vec<f64>,
    /// Time-averaged rates over the classification window.
    pub mean_rates: Vec<f64>,
    /// `sum_alpha ||rho_alpha(t_end) - rho_inf||_1` when a reference is given.
    pub reference_distance: Option<f64>,
    pub per_population: Vec<SignalClass>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Counters {
    pub steps: u64,
    pub negative_floors: u64,
    pub rate_clamps: u64,
    pub refractory_clamps: u64,
    pub min_dt: f64,
    pub max_dt: f64,
}

#[derive(Debug, Clone)]
pub struct PopulationFinal {
    pub population: Population,
    pub density: Vec<f64>,
    pub refractory: f64,
    pub rate: f64,
}

#[derive(Debug, Clone)]
pub struct SimulationResult {
    pub series: TimeSeries,
    pub outcome: OutcomeClassification,
    pub counters: Counters,
    pub final_state: Vec<PopulationFinal>,
}

/// Densities and refractory fractions at t = 0.
pub fn initial_state(model: &Model, grid: &Grid, initial: &InitialData) -> Result<(Vec<DensityField>, Vec<f64>)> {
    let pops = model.populations();
    let no_refractory = model.refractory_mode() == RefractoryMode::None;
    match initial {
        InitialData::Gaussian(specs) => {
            if specs.len() != pops.len() {
                return Err(Error::InvalidInitialData(format!(
                    "{} Gaussian specifications for {} populations",
                    specs.len(),
                    pops.len()
                )));
            }
            let mut dens = Vec::new();
            let mut r0 = Vec::new();
            for s in specs {
                let r = if no_refractory { 0.0 } else { s.r0 };
                dens.push(gaussian_initial(grid, s.v0, s.sigma0, s.mass.unwrap_or(1.0 - r))?);
                r0.push(r);
            }
            Ok((dens, r0))
        }
        InitialData::Stationary { n_e, n_i, r0, nudge } => {
            let (ne, ni) = (n_e * (1.0 + nudge), n_i * (1.0 + nudge));
            let mut dens = Vec::new();
            let mut rs = Vec::new();
            for (k, &pop) in pops.iter().enumerate() {
                let mut rho = stationary_initial(grid, ne, ni, model, pop)?;
                let own = if pop == Population::Excitatory { ne } else { ni };
                let r = match r0 {
                    Some(v) => *v.get(k).ok_or_else(|| {
                        Error::InvalidInitialData("one R(0) per population is required".into())
                    })?,
                    None if no_refractory => 0.0,
                    None => model.tau(pop) * own,
                };
                // Away from a root the profile carries the wrong mass; rescale
                // so that density and refractory fraction still sum to one.
                if *nudge != 0.0 {
                    let mass = total_mass(&rho, grid);
                    if mass > 0.0 {
                        let k = (1.0 - r) / mass;
                        rho.values_mut().iter_mut().for_each(|x| *x *= k);
                    }
                }
                dens.push(rho);
                rs.push(r);
            }
            Ok((dens, rs))
        }
        InitialData::Explicit { densities, r0 } => {
            if densities.len() != pops.len() || r0.len() != pops.len() {
                return Err(Error::InvalidInitialData("one density and one R(0) per population are required".into()));
            }
            Ok((densities.clone(), r0.clone()))
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Event {
    t: f64,
    output: bool,
    snapshot: bool,
}

fn event_times(cfg: &RunConfig) -> Vec<Event> {
    let mut events = Vec::new();
    let count = (cfg.t_end / cfg.output_dt * (1.0 + 1e-12)).floor() as u64;
    for k in 1..=count {
        events.push(Event { t: k as f64 * cfg.output_dt, output: true, snapshot: false });
    }
    for &s in &cfg.snapshot_times {
        if s > 0.0 && s <= cfg.t_end {
            events.push(Event { t: s, output: false, snapshot: true });
        }
    }
    events.push(Event { t: cfg.t_end, output: true, snapshot: false });
    events.sort_by(|a, b| a.t.total_cmp(&b.t));
    let mut merged: Vec<Event> = Vec::with_capacity(events.len());
    for e in events {
        match merged.last_mut() {
            Some(last) if (e.t - last.t).abs() <= 1e-12 * cfg.t_end.max(1.0) => {
                last.output |= e.output;
                last.snapshot |= e.snapshot;
            }
            _ => merged.push(e),
        }
    }
    merged
}

struct Runner<'a> {
    cfg: &'a RunConfig,
    model: Model,
    grid: Grid,
    pops: Vec<PopulationStepper>,
    include_refractory: bool,
}

impl Runner<'_> {
    fn record(&self, t: f64) -> Result<Record> {
        let mut rec = Record { t, n: [f64::NAN; 2], r: [f64::NAN; 2], mass: [f64::NAN; 2], entropy: None };
        for (k, p) in self.pops.iter().enumerate() {
            rec.n[k] = p.rate();
            rec.r[k] = p.refractory();
            rec.mass[k] = p.mass();
        }
        if let Some(reference) = &self.cfg.entropy_reference {
            let dens: Vec<&[f64]> = self.pops.iter().map(|p| p.density()).collect();
            let rs: Vec<f64> = self.pops.iter().map(|p| p.refractory()).collect();
            rec.entropy = Some(relative_entropy(&dens, &rs, reference, &self.grid, self.include_refractory)?);
        }
        Ok(rec)
    }

    fn snapshot(&self, t: f64) -> Snapshot {
        Snapshot { t, densities: self.pops.iter().map(|p| p.density().to_vec()).collect() }
    }

    /// Step coefficients of every population, read from the pre-step state only.
    fn inputs(&self, t: f64) -> Result<Vec<StepInputs>> {
        let mut out = Vec::with_capacity(self.pops.len());
        for p in &self.pops {
            let target = p.population();
            let n_e = self.pops[0].delayed_rate(target, t)?;
            let n_i = match self.pops.get(1) {
                Some(q) => q.delayed_rate(target, t)?,
                None => 0.0,
            };
            out.push(p.inputs(&self.model, t, n_e, n_i)?);
        }
        Ok(out)
    }

    fn advance(&mut self, inputs: &[StepInputs], dt: f64, t_new: f64) -> Result<bool> {
        let reports = match (self.cfg.stepping, self.pops.as_mut_slice()) {
            (Stepping::Concurrent, [a, b]) => {
                let (ra, rb) = rayon::join(|| a.advance(&inputs[0], dt, t_new), || b.advance(&inputs[1], dt, t_new));
                vec![ra?, rb?]
            }
            (_, pops) => pops
                .iter_mut()
                .zip(inputs)
                .map(|(p, inp)| p.advance(inp, dt, t_new))
                .collect::<Result<Vec<_>>>()?,
        };
        Ok(reports.iter().all(|r| r.finite))
    }
}

/// Runs a configuration for either model.
pub fn simulate(cfg: &RunConfig) -> Result<SimulationResult> {
    cfg.validate()?;
    let model = cfg.model.validate()?;
    let grid = cfg.grid.build(&model)?;
    let (densities, r0) = initial_state(&model, &grid, &cfg.initial)?;
    let include_refractory = model.refractory_mode() != RefractoryMode::None;
    let mut pops = Vec::new();
    for ((&pop, rho), r) in model.populations().iter().zip(densities).zip(r0) {
        pops.push(PopulationStepper::new(&model, &grid, pop, rho, r, cfg.dt_bar)?);
    }
    let dt_cap = 0.5 * pops.iter().map(|p| p.min_dt_bar()).fold(f64::INFINITY, f64::min);
    let mut run = Runner { cfg, model, grid: grid.clone(), pops, include_refractory };

    let npop = run.pops.len();
    let mut records = vec![run.record(0.0)?];
    let mut snapshots = Vec::new();
    if cfg.snapshot_times.iter().any(|&s| s == 0.0) {
        snapshots.push(run.snapshot(0.0));
    }
    let mut trace_t = vec![0.0];
    let mut trace_n: Vec<Vec<f64>> = run.pops.iter().map(|p| vec![p.rate()]).collect();
    let mut counters = Counters { min_dt: f64::INFINITY, ..Default::default() };

    let events = event_times(cfg);
    let mut next = 0;
    let mut t = 0.0;
    let mut blowup: Option<(f64, BlowupTrigger)> = None;
    while next < events.len() {
        let inputs = run.inputs(t)?;
        let dt_cfl = run
            .pops
            .iter()
            .zip(&inputs)
            .map(|(p, inp)| p.max_timestep(inp, cfg.cfl_safety))
            .fold(f64::INFINITY, f64::min);
        if let Some(trig) = detect_blowup(&[], dt_cfl, !dt_cfl.is_nan(), &cfg.thresholds) {
            blowup = Some((t, trig));
            break;
        }
        let mut dt = dt_cfl.min(dt_cap);
        let event = events[next];
        let hit = t + dt >= event.t - 1e-12 * event.t.max(1.0);
        let t_new = if hit {
            dt = event.t - t;
            event.t
        } else {
            t + dt
        };
        let finite = run.advance(&inputs, dt, t_new)?;
        t = t_new;
        counters.steps += 1;
        counters.min_dt = counters.min_dt.min(dt_cfl.min(dt_cap));
        counters.max_dt = counters.max_dt.max(dt);

        let rates: Vec<f64> = run.pops.iter().map(|p| p.rate()).collect();
        if let Some(trig) = detect_blowup(&rates, dt_cfl, finite, &cfg.thresholds) {
            blowup = Some((t, trig));
            if finite {
                records.push(run.record(t)?);
            }
            break;
        }
        if t - trace_t[trace_t.len() - 1] >= TRACE_SPACING || hit {
            trace_t.push(t);
            for (k, n) in rates.iter().enumerate() {
                trace_n[k].push(*n);
            }
        }
        if hit {
            if event.output {
                records.push(run.record(t)?);
            }
            if event.snapshot {
                snapshots.push(run.snapshot(t));
            }
            next += 1;
        }
    }
    if counters.min_dt == f64::INFINITY {
        counters.min_dt = 0.0;
    }
    for p in &run.pops {
        counters.negative_floors += p.negative_floors();
        counters.rate_clamps += p.rate_clamps();
        counters.refractory_clamps += p.refractory_clamps();
    }

    let per_population: Vec<SignalClass> =
        trace_n.iter().map(|n| classify_signal(&trace_t, n, &cfg.classify)).collect();
    let kind = if blowup.is_some() { OutcomeKind::Blowup } else { combine_classes(&per_population) };
    let period = per_population.iter().find_map(|c| c.period);
    let amplitude = if kind == OutcomeKind::Periodic {
        per_population.iter().map(|c| c.amplitude).reduce(f64::max)
    } else {
        None
    };
    let reference_distance = match &cfg.entropy_reference {
        Some(reference) if blowup.is_none() => Some(
            run.pops
                .iter()
                .zip(&reference.populations)
                .map(|(p, s)| DensityField(p.density().to_vec()).l1_distance(&s.profile, &grid))
                .sum(),
        ),
        _ => None,
    };
    let outcome = OutcomeClassification {
        kind,
        blowup_time: blowup.map(|b| b.0),
        blowup_trigger: blowup.map(|b| b.1),
        period: if kind == OutcomeKind::Periodic { period } else { None },
        amplitude,
        terminal_rates: run.pops.iter().map(|p| p.rate()).collect(),
        mean_rates: per_population.iter().map(|c| c.mean).collect(),
        reference_distance,
        per_population,
    };
    let final_state = run
        .pops
        .iter()
        .map(|p| PopulationFinal {
            population: p.population(),
            density: p.density().to_vec(),
            refractory: p.refractory(),
            rate: p.rate(),
        })
        .collect();
    Ok(SimulationResult {
        series: TimeSeries { populations: npop, grid, records, snapshots },
        outcome,
        counters,
        final_state,
    })
}

pub fn simulate_one_population(cfg: &RunConfig) -> Result<SimulationResult> {
    if cfg.model.is_two_population() {
        return Err(Error::InvalidConfig("expected a one-population model".into()));
    }
    simulate(cfg)
}

pub fn simulate_two_populations(cfg: &RunConfig) -> Result<SimulationResult> {
    if !cfg.model.is_two_population() {
        return Err(Error::InvalidConfig("expected a two-population model".into()));
    }
    simulate(cfg)
}

/// The same run under both refractory closures.
#[derive(Debug, Clone)]
pub struct RefractoryComparison {
    pub ratio: SimulationResult,
    pub delayed: SimulationResult,
    /// Sup over the common output times of `|N_ratio - N_delayed|`.
    pub rate_gap: f64,
    pub refractory_gap: f64,
    pub same_kind: bool,
    /// Largest relative gap between the window-averaged rates.
    pub mean_rate_gap: f64,
    /// Largest relative gap between the final rates.
    pub terminal_rate_gap: f64,
}

fn relative_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(1e-300))
        .fold(0.0, f64::max)
}

pub fn compare_refractory_modes(cfg: &RunConfig) -> Result<RefractoryComparison> {
    let mut a = cfg.clone();
    a.model = cfg.model.with_refractory(RefractoryMode::Ratio);
    let mut b = cfg.clone();
    b.model = cfg.model.with_refractory(RefractoryMode::Delayed);
    let (ra, rb) = rayon::join(|| simulate(&a), || simulate(&b));
    let (ratio, delayed) = (ra?, rb?);
    let mut rate_gap: f64 = 0.0;
    let mut refractory_gap: f64 = 0.0;
    for (x, y) in ratio.series.records.iter().zip(&delayed.series.records) {
        if x.t != y.t {
            break;
        }
        for k in 0..ratio.series.populations {
            rate_gap = rate_gap.max((x.n[k] - y.n[k]).abs());
            refractory_gap = refractory_gap.max((x.r[k] - y.r[k]).abs());
        }
    }
    Ok(RefractoryComparison {
        same_kind: ratio.outcome.kind == delayed.outcome.kind,
        mean_rate_gap: relative_gap(&ratio.outcome.mean_rates, &delayed.outcome.mean_rates),
        terminal_rate_gap: relative_gap(&ratio.outcome.terminal_rates, &delayed.outcome.terminal_rates),
        rate_gap,
        refractory_gap,
        ratio,
        delayed,
    })
}

#[derive(Debug, Clone)]
pub struct StabilityProbe {
    pub n_e: f64,
    pub n_i: f64,
    pub result: SimulationResult,
}

/// Starts a run from each stationary solution (its profile at the root,
/// rates scaled by `1 + nudge`) and reports how each evolves. `template`
/// supplies everything but the initial data.
pub fn probe_stability(template: &RunConfig, solutions: &[SteadyStateSolution], nudge: f64) -> Result<Vec<StabilityProbe>> {
    solutions
        .par_iter()
        .map(|s| {
            let mut cfg = template.clone();
            cfg.initial = InitialData::Stationary { n_e: s.n_e(), n_i: s.n_i(), r0: None, nudge };
            cfg.entropy_reference = None;
            Ok(StabilityProbe { n_e: s.n_e(), n_i: s.n_i(), result: simulate(&cfg)? })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{ModelParameters, OnePopParameters};

    fn one_pop(b: f64, delay: f64, mode: RefractoryMode) -> Model {
        Model::One(OnePopParameters { b, delay, refractory: mode, ..Default::default() })
    }

    #[test]
    fn events_land_on_output_grid_and_end() {
        let mut cfg = RunConfig::new(one_pop(0.0, 0.0, RefractoryMode::Ratio), InitialData::Gaussian(vec![]), 0.105);
        cfg.output_dt = 0.01;
        cfg.snapshot_times = vec![0.05, 0.0505];
        let ev = event_times(&cfg);
        assert_eq!(ev.len(), 12);
        assert!(ev[4].output && ev[4].snapshot);
        assert!(ev[5].snapshot && !ev[5].output);
        assert_eq!(ev[ev.len() - 1].t, 0.105);
    }

    #[test]
    fn short_run_records_are_increasing_and_conservative() {
        let model = one_pop(0.5, 0.0, RefractoryMode::Ratio);
        let g = GaussianSpec { v0: 0.0, sigma0: 0.5, r0: 0.2, mass: None };
        let mut cfg = RunConfig::new(model, InitialData::Gaussian(vec![g]), 0.2);
        cfg.snapshot_times = vec![0.0, 0.1];
        let res = simulate(&cfg).unwrap();
        let t = res.series.times();
        assert_eq!(t.len(), 21);
        assert!(t.windows(2).all(|w| w[1] > w[0]));
        assert!(res.series.max_conservation_error() < 1e-6);
        assert_eq!(res.series.snapshots.len(), 2);
        assert_eq!(res.counters.negative_floors, 0);
    }

    #[test]
    fn sequential_and_concurrent_stepping_agree_exactly() {
        let p = ModelParameters { delay_ie: 0.05, ..Default::default() };
        let g = GaussianSpec { v0: 0.0, sigma0: 0.4, r0: 0.0, mass: None };
        let mut cfg = RunConfig::new(Model::Two(p), InitialData::Gaussian(vec![g, g]), 0.1);
        let a = simulate(&cfg).unwrap();
        cfg.stepping = Stepping::Concurrent;
        let b = simulate(&cfg).unwrap();
        assert_eq!(a.series.records, b.series.records);
    }

    #[test]
    fn rate_cap_fires() {
        let model = one_pop(0.5, 0.0, RefractoryMode::None);
        let g = GaussianSpec { v0: 1.83, sigma0: 0.0003, r0: 0.0, mass: None };
        let mut cfg = RunConfig::new(model, InitialData::Gaussian(vec![g]), 1.0);
        cfg.thresholds.n_cap = 10.0;
        let res = simulate(&cfg).unwrap();
        assert_eq!(res.outcome.kind, OutcomeKind::Blowup);
        assert_eq!(res.outcome.blowup_trigger, Some(BlowupTrigger::RateCap));
        assert!(res.outcome.blowup_time.unwrap() < 1.0);
    }

    #[test]
    fn wrong_population_count_is_rejected() {
        let model = one_pop(0.5, 0.0, RefractoryMode::Ratio);
        let g = GaussianSpec { v0: 0.0, sigma0: 0.5, r0: 0.0, mass: None };
        let cfg = RunConfig::new(model, InitialData::Gaussian(vec![g, g]), 0.1);
        assert!(matches!(simulate(&cfg), Err(Error::InvalidInitialData(_))));
        assert!(simulate_two_populations(&cfg).is_err());
    }
}
