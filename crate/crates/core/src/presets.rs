//! Built-in experiments, one per figure of the reference study. Every value
//! a caption leaves open is pinned here and listed in [`Preset::pins`].

use crate::config::{ExperimentConfig, SweepSpec};
use crate::error::{Error, Result};
use crate::network::{GaussianSpec, InitialData};
use crate::params::{Model, ModelParameters, OnePopParameters, RefractoryMode};
use crate::steady::SweepParameter;

/// What a run does with its configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Steady,
    Bifurcation,
    Simulate,
    Stability,
    BlowupCheck,
    CompareRefractory,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Steady,
        Command::Bifurcation,
        Command::Simulate,
        Command::Stability,
        Command::BlowupCheck,
        Command::CompareRefractory,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Steady => "steady",
            Command::Bifurcation => "bifurcation",
            Command::Simulate => "simulate",
            Command::Stability => "stability",
            Command::BlowupCheck => "blowup-check",
            Command::CompareRefractory => "compare-refractory",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Command::ALL.into_iter().find(|c| c.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PresetRun {
    /// Subdirectory of the preset's output directory.
    pub label: &'static str,
    pub command: Command,
    pub config: ExperimentConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub id: &'static str,
    pub title: &'static str,
    /// The first run is the one `--preset` selects.
    pub runs: Vec<PresetRun>,
    /// Values chosen here because the caption does not state them.
    pub pins: Vec<&'static str>,
}

impl Preset {
    pub fn primary(&self) -> &PresetRun {
        &self.runs[0]
    }
}

pub const PRESET_IDS: [&str; 13] = [
    "bif_EI",
    "blowup_1pob",
    "blowup_EIR_bEE",
    "blowup_EIR_ci",
    "blowup_EIR_ci_delay",
    "noblowup_EIRD_ci",
    "est_eq_EI1",
    "est_eq_EI2",
    "osci_R_MJ-1",
    "osci_R_MJ-2",
    "osci_R_MJ-3",
    "blowup_ERD_ci_MJ",
    "oscilaciones_EI",
];

const SIGMA0: f64 = 0.0003;
const TWO_POP_T_END: f64 = 5.0;

const GRID_PIN: &str = "grid: v_left = 6 (domain [-6, V_F]), n_cells = 1000";
const OUTPUT_PIN: &str = "output_dt = 0.01; snapshots at t = 0, t_end/2, t_end";

fn gauss(v0: f64, r0: f64) -> GaussianSpec {
    GaussianSpec { v0, sigma0: SIGMA0, r0, mass: None }
}

fn one(b: f64, nu_ext: f64, delay: f64, refractory: RefractoryMode) -> Model {
    Model::One(OnePopParameters { b, nu_ext, delay, tau: 0.025, refractory, ..Default::default() })
}

fn ei(b_ee: f64, b_ie: f64, b_ii: f64, b_ei: f64, delays: [f64; 4]) -> ModelParameters {
    let [delay_ee, delay_ie, delay_ii, delay_ei] = delays;
    ModelParameters {
        b_ee,
        b_ie,
        b_ii,
        b_ei,
        delay_ee,
        delay_ie,
        delay_ii,
        delay_ei,
        refractory: RefractoryMode::Delayed,
        ..Default::default()
    }
}

fn simulation(model: Model, initial: InitialData, t_end: f64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(model).with_initial(initial).with_t_end(t_end);
    cfg.output.snapshot_times = vec![0.0, t_end / 2.0, t_end];
    cfg
}

fn run(label: &'static str, command: Command, config: ExperimentConfig) -> PresetRun {
    PresetRun { label, command, config }
}

fn sweep(cfg: &mut ExperimentConfig, parameter: SweepParameter, from: f64, to: f64, points: usize) {
    cfg.run.sweep = Some(SweepSpec { parameter, from, to, points, log: false });
}

fn three_states(tau_e: f64) -> Model {
    Model::Two(ModelParameters { tau_e, tau_i: 0.2, ..ei(3.0, 7.0, 2.0, 0.01, [0.0; 4]) })
}

/// The built-in preset `id`.
pub fn preset(id: &str) -> Result<Preset> {
    let p = match id {
        "bif_EI" => {
            let mut by_b = ExperimentConfig::new(three_states(0.2));
            sweep(&mut by_b, SweepParameter::BEe, 0.5, 4.0, 20);
            by_b.output.curve_points = Some(400);
            let mut by_tau = ExperimentConfig::new(three_states(0.2));
            sweep(&mut by_tau, SweepParameter::TauE, 0.05, 0.6, 20);
            by_tau.output.curve_points = Some(400);
            Preset {
                id: "bif_EI",
                title: "Number of steady states as b_EE and tau_E vary",
                runs: vec![run("b_EE", Command::Bifurcation, by_b), run("tau_E", Command::Bifurcation, by_tau)],
                pins: vec![
                    "b_EE sweep: 0.5 to 4, 20 points, tau_E = tau_I = 0.2",
                    "tau_E sweep: 0.05 to 0.6, 20 points, b_EE = 3, tau_I = 0.2",
                    "F(N_E) sampled at 401 points on [0, 1/tau_E] per sweep value",
                ],
            }
        }
        "blowup_1pob" => {
            let none = RefractoryMode::None;
            let ratio = RefractoryMode::Ratio;
            Preset {
                id: "blowup_1pob",
                title: "One excitatory population: blow-up without delay, none with delay",
                runs: vec![
                    run("no_refractory_D0", Command::Simulate, simulation(one(0.5, 0.0, 0.0, none), InitialData::Gaussian(vec![gauss(1.83, 0.0)]), 5.0)),
                    run("no_refractory_D0.1", Command::Simulate, simulation(one(0.5, 0.0, 0.1, none), InitialData::Gaussian(vec![gauss(1.83, 0.0)]), 10.0)),
                    run("refractory_D0", Command::Simulate, simulation(one(0.5, 0.0, 0.0, ratio), InitialData::Gaussian(vec![gauss(1.83, 0.2)]), 5.0)),
                    run("refractory_D0.07", Command::Simulate, simulation(one(0.5, 0.0, 0.07, ratio), InitialData::Gaussian(vec![gauss(1.83, 0.2)]), 10.0)),
                    run("criterion", Command::BlowupCheck, simulation(one(0.5, 0.0, 0.0, none), InitialData::Gaussian(vec![gauss(1.83, 0.0)]), 5.0)),
                ],
                pins: vec![
                    "t_end = 5 for D = 0 runs, 10 for delayed runs",
                    "runs without refractory state use refractory_mode = none, R(0) = 0, density mass 1",
                    "runs with refractory state: density mass 1 - R(0) = 0.8",
                    "nu_ext = 0",
                ],
            }
        }
        "blowup_EIR_bEE" => Preset {
            id: "blowup_EIR_bEE",
            title: "Two populations: blow-up from strong excitatory coupling",
            runs: vec![run(
                "simulate",
                Command::Simulate,
                simulation(Model::Two(ei(6.0, 0.75, 0.25, 0.5, [0.0; 4])), InitialData::Gaussian(vec![gauss(1.25, 0.0), gauss(1.25, 0.0)]), TWO_POP_T_END),
            )],
            pins: vec!["t_end = 5", "R_E(0) = R_I(0) = 0, density masses 1", "all delays 0"],
        },
        "blowup_EIR_ci" => Preset {
            id: "blowup_EIR_ci",
            title: "Two populations: blow-up from concentrated excitatory data",
            runs: vec![run(
                "simulate",
                Command::Simulate,
                simulation(Model::Two(ei(0.5, 0.75, 0.25, 0.5, [0.0; 4])), InitialData::Gaussian(vec![gauss(1.89, 0.0), gauss(1.25, 0.0)]), TWO_POP_T_END),
            )],
            pins: vec!["t_end = 5", "R_E(0) = R_I(0) = 0, density masses 1", "all delays 0"],
        },
        "blowup_EIR_ci_delay" => Preset {
            id: "blowup_EIR_ci_delay",
            title: "Two populations: blow-up persists when only D_EE vanishes",
            runs: vec![run(
                "simulate",
                Command::Simulate,
                simulation(Model::Two(ei(0.5, 0.75, 0.25, 0.5, [0.0, 0.1, 0.1, 0.1])), InitialData::Gaussian(vec![gauss(1.89, 0.0), gauss(1.25, 0.0)]), TWO_POP_T_END),
            )],
            pins: vec!["t_end = 5", "R_E(0) = R_I(0) = 0, density masses 1"],
        },
        "noblowup_EIRD_ci" => Preset {
            id: "noblowup_EIRD_ci",
            title: "Two populations: an excitatory delay prevents blow-up",
            runs: vec![run(
                "simulate",
                Command::Simulate,
                simulation(Model::Two(ei(0.5, 0.75, 0.25, 0.5, [0.1, 0.0, 0.0, 0.0])), InitialData::Gaussian(vec![gauss(1.89, 0.0), gauss(1.25, 0.0)]), TWO_POP_T_END),
            )],
            pins: vec!["t_end = 5", "R_E(0) = R_I(0) = 0, density masses 1", "D_EE = 0.1, other delays 0 as captioned"],
        },
        "est_eq_EI1" | "est_eq_EI2" => {
            let (id, tau_e, title) = if id == "est_eq_EI1" {
                ("est_eq_EI1", 0.2, "Stability of three steady states, tau_E = 0.2")
            } else {
                ("est_eq_EI2", 0.3, "Stability of three steady states, tau_E = 0.3")
            };
            let mut cfg = ExperimentConfig::new(three_states(tau_e)).with_t_end(TWO_POP_T_END);
            cfg.output.snapshot_times = vec![0.0, TWO_POP_T_END / 2.0, TWO_POP_T_END];
            Preset {
                id,
                title,
                runs: vec![run("stability", Command::Stability, cfg)],
                pins: vec![
                    "t_end = 5",
                    "each run starts from the discrete stationary profile at the computed root, no nudge",
                    "R(0) = tau_alpha N_alpha at the root",
                    "refractory_mode = delayed, all delays 0, nu_E_ext = 0",
                ],
            }
        }
        "osci_R_MJ-1" => {
            let m = one(1.5, 0.0, 0.1, RefractoryMode::Ratio);
            Preset {
                id: "osci_R_MJ-1",
                title: "One excitatory population with delay: oscillation or relaxation by initial data",
                runs: vec![
                    run("v0_1.83", Command::Simulate, simulation(m, InitialData::Gaussian(vec![gauss(1.83, 0.2)]), 10.0)),
                    run("v0_1.5", Command::Simulate, simulation(m, InitialData::Gaussian(vec![gauss(1.5, 0.2)]), 20.0)),
                ],
                pins: vec!["t_end = 10 for v0 = 1.83", "t_end = 20 for v0 = 1.5 so the slow relaxation flattens inside the window"],
            }
        }
        "osci_R_MJ-2" => {
            let ratio = RefractoryMode::Ratio;
            Preset {
                id: "osci_R_MJ-2",
                title: "One inhibitory population with delay: periodic solutions",
                runs: vec![
                    run("v0_1.83_nu20", Command::Simulate, simulation(one(-4.0, 20.0, 0.1, ratio), InitialData::Gaussian(vec![gauss(1.83, 0.2)]), 10.0)),
                    run("v0_1.5_nu20", Command::Simulate, simulation(one(-4.0, 20.0, 0.1, ratio), InitialData::Gaussian(vec![gauss(1.5, 0.2)]), 10.0)),
                    run("v0_1.5_nu0", Command::Simulate, simulation(one(-4.0, 0.0, 0.1, ratio), InitialData::Gaussian(vec![gauss(1.5, 0.2)]), 10.0)),
                ],
                pins: vec!["t_end = 10", "density mass 1 - R(0) = 0.8"],
            }
        }
        "osci_R_MJ-3" => {
            let m = one(-4.0, 20.0, 0.1, RefractoryMode::Ratio);
            let start = InitialData::Stationary { n_e: 3.669, n_i: 0.0, r0: Some(vec![0.091725]), nudge: 0.0 };
            let mut steady = ExperimentConfig::new(m);
            steady.output.curve_points = Some(400);
            let mut by_nu = ExperimentConfig::new(m);
            sweep(&mut by_nu, SweepParameter::NuExt, 0.0, 40.0, 41);
            Preset {
                id: "osci_R_MJ-3",
                title: "One inhibitory population: oscillation from the unique steady state",
                runs: vec![
                    run("simulate", Command::Simulate, simulation(m, start, 10.0)),
                    run("steady", Command::Steady, steady),
                    run("nu_ext_sweep", Command::Bifurcation, by_nu),
                ],
                pins: vec![
                    "t_end = 10",
                    "initial profile at N = 3.669 without renormalization",
                    "nu_ext sweep: 0 to 40 in steps of 1 (steady-state rate only)",
                    "F(N) sampled at 401 points on [0, 1/tau]",
                ],
            }
        }
        "blowup_ERD_ci_MJ" => {
            let top = simulation(one(-4.0, 20.0, 0.1, RefractoryMode::Ratio), InitialData::Gaussian(vec![gauss(1.83, 0.2)]), 10.0);
            let middle = simulation(one(0.5, 0.0, 0.07, RefractoryMode::Ratio), InitialData::Gaussian(vec![gauss(1.83, 0.2)]), 10.0);
            Preset {
                id: "blowup_ERD_ci_MJ",
                title: "Refractory release M = R/tau against M = N(t - tau)",
                runs: vec![run("inhibitory", Command::CompareRefractory, top), run("excitatory", Command::CompareRefractory, middle)],
                pins: vec![
                    "t_end = 10",
                    "delayed release before t = tau uses the constant prehistory R(0)/tau",
                    "rates compared by their time average over the classification window",
                ],
            }
        }
        "oscilaciones_EI" => {
            let p = ModelParameters { nu_e_ext: 20.0, ..ei(0.5, 0.75, 4.0, 1.0, [0.1; 4]) };
            Preset {
                id: "oscilaciones_EI",
                title: "Two populations with delays: synchronous oscillations",
                runs: vec![run(
                    "simulate",
                    Command::Simulate,
                    simulation(Model::Two(p), InitialData::Gaussian(vec![gauss(1.25, 0.0), gauss(1.25, 0.0)]), TWO_POP_T_END),
                )],
                pins: vec!["t_end = 5", "all delays 0.1", "R_E(0) = R_I(0) = 0, density masses 1", "v_ext enters as nu_E_ext = 20"],
            }
        }
        other => return Err(Error::UnknownPreset(other.to_string())),
    };
    let mut p = p;
    p.pins.extend([GRID_PIN, OUTPUT_PIN]);
    Ok(p)
}

pub fn all_presets() -> Vec<Preset> {
    PRESET_IDS.iter().map(|id| preset(id).expect("built-in preset")).collect()
}
