//! Command-line front end. [`execute`] runs one command on a resolved
//! configuration and returns its files in memory; [`run`] parses arguments,
//! writes the bundle and maps failures to exit codes.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{apply_overrides, parse_config, render, ExperimentConfig};
use crate::error::{Error, Result};
use crate::network::{compare_refractory_modes, initial_state, probe_stability, simulate, InitialData, SimulationResult};
use crate::output::{bifurcation_csv, curve_csv, density_csv, series_bundle, Bundle, Summary};
use crate::params::{Model, Population};
use crate::presets::{preset, Command, Preset, PRESET_IDS};
use crate::steady::{bifurcation_scan, blowup_criterion, f_of_ne, find_steady_states, uniqueness_bounds};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 4;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => EXIT_IO,
        e if e.is_config() => EXIT_CONFIG,
        _ => EXIT_NUMERICAL,
    }
}

/// Files and summary of one command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub bundle: Bundle,
    pub summary: Summary,
}

fn simulation_summary(res: &SimulationResult) -> Summary {
    let o = &res.outcome;
    let c = &res.counters;
    let mut s = Summary::new();
    s.text("classification", o.kind.name())
        .text("blowup", o.kind == crate::diagnostics::OutcomeKind::Blowup)
        .opt("blowup_time", o.blowup_time)
        .text("blowup_trigger", o.blowup_trigger.map_or("none", |t| t.name()))
        .opt("period", o.period)
        .opt("amplitude", o.amplitude)
        .nums("terminal_rates", &o.terminal_rates)
        .nums("mean_rates", &o.mean_rates)
        .opt("reference_distance", o.reference_distance);
    for (pop, class) in ["E", "I"].iter().zip(&o.per_population) {
        s.text(&format!("class_{pop}"), class.kind.name())
            .text(&format!("peaks_{pop}"), class.peaks)
            .opt(&format!("period_{pop}"), class.period)
            .num(&format!("amplitude_{pop}"), class.amplitude)
            .num(&format!("mean_{pop}"), class.mean);
    }
    s.num("max_conservation_error", res.series.max_conservation_error())
        .text("steps", c.steps)
        .text("negative_floors", c.negative_floors)
        .text("rate_clamps", c.rate_clamps)
        .text("refractory_clamps", c.refractory_clamps)
        .num("min_dt", c.min_dt)
        .num("max_dt", c.max_dt)
        .text("records", res.series.records.len())
        .text("snapshots", res.series.snapshots.len());
    s
}

fn run_settings_summary(cfg: &ExperimentConfig) -> Summary {
    let mut s = Summary::new();
    s.num("N_cap", cfg.run.thresholds.n_cap).num("dt_floor", cfg.run.thresholds.dt_floor);
    s
}

fn simulate_command(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let res = simulate(&cfg.run_config()?)?;
    let mut summary = run_settings_summary(cfg);
    summary.extend(&simulation_summary(&res));
    Ok(RunOutput { bundle: series_bundle(&res.series), summary })
}

fn sweep_value(cfg: &ExperimentConfig) -> f64 {
    cfg.run.sweep.and_then(|s| s.parameter.value(&cfg.model)).unwrap_or(f64::NAN)
}

fn second_rate(model: &Model, n_i: f64) -> f64 {
    if model.is_two_population() {
        n_i
    } else {
        f64::NAN
    }
}

fn steady_command(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let grid = cfg.grid.build(&cfg.model)?;
    let states = find_steady_states(&cfg.model, &grid, cfg.run.scan_points)?;
    let sv = sweep_value(cfg);
    let mut bundle = Bundle::new();
    let rows: Vec<_> = states
        .solutions
        .iter()
        .enumerate()
        .map(|(k, s)| (sv, k + 1, s.n_e(), second_rate(&cfg.model, s.n_i())))
        .collect();
    bundle.add("bifurcation.csv", bifurcation_csv(&rows));
    let mut summary = Summary::new();
    summary.text("roots", states.solutions.len()).text("tangency_warning", states.tangency_warning);
    for (k, s) in states.solutions.iter().enumerate() {
        let dens: Vec<&[f64]> = s.populations.iter().map(|p| p.profile.values()).collect();
        bundle.add(format!("profile_{}.csv", k + 1), density_csv(&grid, &dens));
        let idx = k + 1;
        summary.num(&format!("root_{idx}_N_E"), s.n_e());
        if cfg.model.is_two_population() {
            summary.num(&format!("root_{idx}_N_I"), s.n_i());
        }
        let rs: Vec<f64> = s.populations.iter().map(|p| p.refractory).collect();
        summary.nums(&format!("root_{idx}_R"), &rs).num(&format!("root_{idx}_residual"), s.residual);
    }
    if let Model::Two(p) = &cfg.model {
        let b = uniqueness_bounds(p)?;
        summary.num("uniqueness_bound_A", b.a).num("uniqueness_bound_B", b.b).text("sufficient_unique", b.sufficient_unique);
    }
    if let Some(k) = cfg.output.curve_points {
        let upper = 1.0 / cfg.model.tau(Population::Excitatory);
        let curve = (0..=k)
            .map(|j| {
                let n = upper * j as f64 / k as f64;
                f_of_ne(n, &cfg.model).map(|f| (sv, n, f))
            })
            .collect::<Result<Vec<_>>>()?;
        bundle.add("curve.csv", curve_csv(&curve));
    }
    Ok(RunOutput { bundle, summary })
}

fn bifurcation_command(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let sweep = cfg
        .run
        .sweep
        .ok_or_else(|| Error::InvalidConfig("bifurcation needs `sweep_parameter`, `sweep_from` and `sweep_to` in [run]".into()))?;
    let scan = bifurcation_scan(&cfg.model, sweep.parameter, &sweep.values(), cfg.run.scan_points, cfg.output.curve_points)?;
    let mut rows = Vec::new();
    let mut curve = Vec::new();
    let mut summary = Summary::new();
    summary.text("sweep_parameter", sweep.parameter.name()).text("sweep_points", scan.points.len());
    for pt in &scan.points {
        for (k, &(ne, ni)) in pt.roots.iter().enumerate() {
            rows.push((pt.value, k + 1, ne, second_rate(&cfg.model, ni)));
        }
        if let Some(c) = &pt.curve {
            curve.extend(c.iter().map(|&(n, f)| (pt.value, n, f)));
        }
        summary.text(&format!("roots_at_{}", crate::output::num(pt.value)), pt.roots.len());
    }
    let warnings = scan.points.iter().filter(|p| p.tangency_warning).count();
    summary.text("tangency_warnings", warnings);
    let mut bundle = Bundle::new();
    bundle.add("bifurcation.csv", bifurcation_csv(&rows));
    if cfg.output.curve_points.is_some() {
        bundle.add("curve.csv", curve_csv(&curve));
    }
    Ok(RunOutput { bundle, summary })
}

fn stability_command(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let grid = cfg.grid.build(&cfg.model)?;
    let states = find_steady_states(&cfg.model, &grid, cfg.run.scan_points)?;
    let mut template_cfg = cfg.clone();
    template_cfg.initial = Some(InitialData::Stationary { n_e: 0.0, n_i: 0.0, r0: None, nudge: 0.0 });
    let template = template_cfg.run_config()?;
    let probes = probe_stability(&template, &states.solutions, cfg.run.nudge)?;
    let mut bundle = Bundle::new();
    let rows: Vec<_> = states
        .solutions
        .iter()
        .enumerate()
        .map(|(k, s)| (f64::NAN, k + 1, s.n_e(), second_rate(&cfg.model, s.n_i())))
        .collect();
    bundle.add("bifurcation.csv", bifurcation_csv(&rows));
    let mut summary = run_settings_summary(cfg);
    summary.num("nudge", cfg.run.nudge).text("roots", probes.len());
    for (k, p) in probes.iter().enumerate() {
        let label = format!("root_{}", k + 1);
        let sim = simulation_summary(&p.result);
        summary
            .num(&format!("{label}_N_E"), p.n_e)
            .num(&format!("{label}_N_I"), second_rate(&cfg.model, p.n_i))
            .text(&format!("{label}_classification"), p.result.outcome.kind.name())
            .opt(&format!("{label}_blowup_time"), p.result.outcome.blowup_time)
            .nums(&format!("{label}_terminal_rates"), &p.result.outcome.terminal_rates);
        let mut inner = series_bundle(&p.result.series);
        inner.add("summary.txt", sim.render());
        bundle.nest(&label, inner);
    }
    Ok(RunOutput { bundle, summary })
}

fn blowup_check_command(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let initial = cfg
        .initial
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("blowup-check needs an [initial] section".into()))?;
    let grid = cfg.grid.build(&cfg.model)?;
    let (densities, _) = initial_state(&cfg.model, &grid, initial)?;
    let b_ee = match &cfg.model {
        Model::One(p) => p.b,
        Model::Two(p) => p.b_ee,
    };
    let c = blowup_criterion(&densities[0], &grid, b_ee, &cfg.mu_grid());
    let mut summary = Summary::new();
    summary
        .text("satisfied", c.satisfied)
        .num("best_mu", c.best_mu)
        .num("margin", c.margin)
        .num("b_EE", b_ee)
        .num("mu_min", cfg.run.mu_min)
        .num("mu_max", cfg.run.mu_max)
        .text("mu_points", cfg.run.mu_points);
    Ok(RunOutput { bundle: Bundle::new(), summary })
}

fn compare_command(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let cmp = compare_refractory_modes(&cfg.run_config()?)?;
    let mut summary = run_settings_summary(cfg);
    summary
        .text("same_classification", cmp.same_kind)
        .text("ratio_classification", cmp.ratio.outcome.kind.name())
        .text("delayed_classification", cmp.delayed.outcome.kind.name())
        .num("mean_rate_gap", cmp.mean_rate_gap)
        .num("terminal_rate_gap", cmp.terminal_rate_gap)
        .num("max_rate_gap", cmp.rate_gap)
        .num("max_refractory_gap", cmp.refractory_gap);
    let mut bundle = Bundle::new();
    for (label, res) in [("ratio", &cmp.ratio), ("delayed", &cmp.delayed)] {
        let mut inner = series_bundle(&res.series);
        inner.add("summary.txt", simulation_summary(res).render());
        bundle.nest(label, inner);
    }
    Ok(RunOutput { bundle, summary })
}

/// Runs `command` on `cfg`. The returned bundle holds the data files; see
/// [`finish`] for the summary and configuration files.
pub fn execute(command: Command, cfg: &ExperimentConfig) -> Result<RunOutput> {
    match command {
        Command::Steady => steady_command(cfg),
        Command::Bifurcation => bifurcation_command(cfg),
        Command::Simulate => simulate_command(cfg),
        Command::Stability => stability_command(cfg),
        Command::BlowupCheck => blowup_check_command(cfg),
        Command::CompareRefractory => compare_command(cfg),
    }
}

/// Adds `summary.txt` (header, defaults, preset pins and results) and the
/// resolved `config.toml` to the bundle.
pub fn finish(
    command: Command,
    cfg: &ExperimentConfig,
    defaulted: &[String],
    preset: Option<&Preset>,
    out: RunOutput,
) -> Result<Bundle> {
    let mut s = Summary::new();
    s.text("command", command.name());
    if let Some(p) = preset {
        s.text("preset", p.id).text("title", p.title);
        for pin in &p.pins {
            s.text("pin", pin);
        }
    }
    s.text("populations", cfg.model.populations().len())
        .text("refractory_mode", cfg.model.refractory_mode().name())
        .text("defaulted", format!("[{}]", defaulted.join(", ")))
        .blank()
        .extend(&out.summary);
    let mut bundle = out.bundle;
    bundle.add("summary.txt", s.render());
    bundle.add("config.toml", render(cfg)?);
    Ok(bundle)
}

/// Parses a document, applies overrides and runs `command`.
pub fn run_document(command: Command, text: &str, overrides: &[String], preset: Option<&Preset>) -> Result<Bundle> {
    let text = apply_overrides(text, overrides)?;
    let parsed = parse_config(&text)?;
    let out = execute(command, &parsed.config)?;
    finish(command, &parsed.config, &parsed.defaulted, preset, out)
}

/// Every run of a preset, each under its own label. Runs are independent
/// and evaluated in parallel.
pub fn run_preset(p: &Preset, overrides: &[String]) -> Result<Bundle> {
    use rayon::prelude::*;
    let bundles = p
        .runs
        .par_iter()
        .map(|r| run_document(r.command, &render(&r.config)?, overrides, Some(p)))
        .collect::<Result<Vec<_>>>()?;
    let mut bundle = Bundle::new();
    for (r, b) in p.runs.iter().zip(bundles) {
        bundle.nest(r.label, b);
    }
    Ok(bundle)
}

#[derive(Debug, Parser)]
#[command(name = "nnlif", version, about = "Steady states, bifurcations and simulations of the NNLIF network model")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Args)]
struct Common {
    /// Configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Start from the configuration of a built-in preset.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// `section.key=value`; may be repeated.
    #[arg(long = "override", value_name = "KEY=VALUE", num_args = 1..)]
    overrides: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Stationary states and their profiles.
    Steady(Common),
    /// Steady-state rates along a parameter sweep.
    Bifurcation(Common),
    /// Time integration.
    Simulate(Common),
    /// Time integration started from each steady state.
    Stability(Common),
    /// Concentration criterion for blow-up on the initial data.
    BlowupCheck(Common),
    /// The same run under both refractory closures.
    CompareRefractory(Common),
    /// Every run of a built-in experiment; without an id, lists them.
    Preset {
        id: Option<String>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long = "override", value_name = "KEY=VALUE", num_args = 1..)]
        overrides: Vec<String>,
    },
}

fn document(common: &Common) -> Result<(String, Option<Preset>)> {
    match (&common.config, &common.preset) {
        (Some(_), Some(_)) => Err(Error::InvalidConfig("give either --config or --preset, not both".into())),
        (Some(path), None) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            Ok((text, None))
        }
        (None, Some(id)) => {
            let p = preset(id)?;
            Ok((render(&p.primary().config)?, Some(p)))
        }
        (None, None) => Ok((String::new(), None)),
    }
}

fn report(bundle: &Bundle, dir: &Path) {
    for path in bundle.paths().filter(|p| p.ends_with("summary.txt")) {
        println!("== {}", dir.join(path).display());
        if let Some(text) = bundle.get(path) {
            print!("{text}");
        }
    }
}

fn dispatch(sub: Sub) -> Result<()> {
    let (command, common) = match sub {
        Sub::Preset { id: None, .. } => {
            for id in PRESET_IDS {
                println!("{id}\t{}", preset(id)?.title);
            }
            return Ok(());
        }
        Sub::Preset { id: Some(id), out, overrides } => {
            let p = preset(&id)?;
            let bundle = run_preset(&p, &overrides)?;
            bundle.write(&out)?;
            report(&bundle, &out);
            return Ok(());
        }
        Sub::Steady(c) => (Command::Steady, c),
        Sub::Bifurcation(c) => (Command::Bifurcation, c),
        Sub::Simulate(c) => (Command::Simulate, c),
        Sub::Stability(c) => (Command::Stability, c),
        Sub::BlowupCheck(c) => (Command::BlowupCheck, c),
        Sub::CompareRefractory(c) => (Command::CompareRefractory, c),
    };
    let (text, p) = document(&common)?;
    let bundle = run_document(command, &text, &common.overrides, p.as_ref())?;
    bundle.write(&common.out)?;
    report(&bundle, &common.out);
    Ok(())
}

/// Entry point of the binary; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::UnknownPreset(_) = e {
                eprintln!("known presets: {}", PRESET_IDS.join(", "));
            }
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_separate_input_from_numerics() {
        assert_eq!(exit_code(&Error::ConfigAt { line: 1, message: "x".into() }), EXIT_CONFIG);
        assert_eq!(exit_code(&Error::UnknownPreset("x".into())), EXIT_CONFIG);
        assert_eq!(exit_code(&Error::NonFiniteInput), EXIT_NUMERICAL);
        assert_eq!(exit_code(&Error::Io("x".into())), EXIT_IO);
    }

    #[test]
    fn unknown_subcommand_and_preset_are_config_errors() {
        assert_eq!(run(["nnlif", "frobnicate"]), EXIT_CONFIG);
        assert_eq!(run(["nnlif", "preset", "nope"]), EXIT_CONFIG);
        assert_eq!(run(["nnlif", "steady", "--preset", "nope"]), EXIT_CONFIG);
    }

    #[test]
    fn one_population_steady_state() {
        let text = "[model]\nb = -4\nnu_ext = 20\ntau = 0.025\n";
        let b = run_document(Command::Steady, text, &[], None).unwrap();
        let s = b.get("summary.txt").unwrap();
        assert!(s.contains("roots = 1"), "{s}");
        let (_, rows) = crate::output::parse_csv(b.get("bifurcation.csv").unwrap()).unwrap();
        assert_eq!(rows.len(), 1);
        assert!((rows[0][2] - 3.669).abs() < 0.05);
        assert!(b.get("profile_1.csv").is_some());
    }

    #[test]
    fn summary_records_defaults() {
        let b = run_document(Command::Steady, "[model]\nb = -4\n", &[], None).unwrap();
        let s = b.get("summary.txt").unwrap();
        assert!(s.contains("model.V_F"), "{s}");
        assert!(!s.contains("model.b,"), "{s}");
    }
}
