use crate::error::{Error, Result};
use crate::grid::{stationary_initial, DensityField, Grid};
use crate::params::{Model, ModelParameters, Population, RefractoryMode};

use super::integrals::integral_i;

pub const DEFAULT_SCAN_POINTS: usize = 512;
pub const INNER_TOL: f64 = 1e-10;
pub const OUTER_TOL: f64 = 1e-9;

/// Bisection on `[lo, hi]` for a function with `f(lo) < 0 < f(hi)`.
fn bisect<F: FnMut(f64) -> Result<f64>>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The unique `N_I` in `(0, 1/tau_I)` with `N_I (tau_I + I_2(N_E, N_I)) = 1`.
pub fn solve_inner_ni(n_e: f64, p: &ModelParameters, tol: f64) -> Result<f64> {
    let model = Model::Two(*p);
    let upper = 1.0 / p.tau_i;
    let residual = |n_i: f64| -> Result<f64> {
        let i2 = integral_i(n_e, n_i, &model, Population::Inhibitory)?;
        Ok(n_i * (p.tau_i + i2) - 1.0)
    };
    let at_upper = residual(upper)?;
    if !(at_upper > 0.0) {
        return Err(Error::InnerSolve {
            n_e,
            reason: format!("N_I (tau_I + I_2) - 1 = {at_upper} at N_I = 1/tau_I, expected > 0"),
        });
    }
    bisect(residual, 0.0, upper, tol)
}

/// `F(N_E) = N_E (tau_E + I_1(N_E, N_I(N_E)))` for two populations, or
/// `F(N) = N (tau + I(N))` for one. Steady states are the solutions of `F = 1`.
pub fn f_of_ne(n_e: f64, model: &Model) -> Result<f64> {
    if n_e == 0.0 {
        return Ok(0.0);
    }
    match model {
        Model::One(p) => Ok(n_e * (p.tau + integral_i(n_e, 0.0, model, Population::Excitatory)?)),
        Model::Two(p) => {
            let n_i = solve_inner_ni(n_e, p, INNER_TOL)?;
            Ok(n_e * (p.tau_e + integral_i(n_e, n_i, model, Population::Excitatory)?))
        }
    }
}

/// Stationary data of one population at a fixed point.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryPopulation {
    pub population: Population,
    pub rate: f64,
    pub refractory: f64,
    pub profile: DensityField,
}

/// A solution of the stationary system with its profiles.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyStateSolution {
    pub populations: Vec<StationaryPopulation>,
    /// `max_alpha |1 - N_alpha (tau_alpha + I_alpha)|`.
    pub residual: f64,
}

impl SteadyStateSolution {
    pub fn n_e(&self) -> f64 {
        self.populations[0].rate
    }

    pub fn n_i(&self) -> f64 {
        self.populations.get(1).map_or(0.0, |p| p.rate)
    }

    pub fn population(&self, pop: Population) -> Option<&StationaryPopulation> {
        self.populations.iter().find(|p| p.population == pop)
    }

    /// Rebuilds the solution (profiles and residual) at the given rates.
    pub fn at_rates(model: &Model, grid: &Grid, n_e: f64, n_i: f64) -> Result<Self> {
        let mut populations = Vec::new();
        let mut residual: f64 = 0.0;
        for &pop in model.populations() {
            let rate = match pop {
                Population::Excitatory => n_e,
                Population::Inhibitory => n_i,
            };
            let tau = model.tau(pop);
            let i = integral_i(n_e, n_i, model, pop)?;
            residual = residual.max((1.0 - rate * (tau + i)).abs());
            populations.push(StationaryPopulation {
                population: pop,
                rate,
                refractory: tau * rate,
                profile: stationary_initial(grid, n_e, n_i, model, pop)?,
            });
        }
        Ok(SteadyStateSolution { populations, residual })
    }
}

/// Outcome of [`find_steady_states`].
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyStates {
    /// Sorted by ascending `N_E`.
    pub solutions: Vec<SteadyStateSolution>,
    /// Set when two roots lie within three ladder spacings of each other.
    pub tangency_warning: bool,
}

impl SteadyStates {
    pub fn rates(&self) -> Vec<(f64, f64)> {
        self.solutions.iter().map(|s| (s.n_e(), s.n_i())).collect()
    }
}

/// Rates `N_E` where `F(N_E) = 1`, found by bracketing sign changes on a
/// uniform ladder over `[0, 1/tau_E]` and refining each by bisection.
pub fn steady_rates(model: &Model, scan_points: usize) -> Result<(Vec<f64>, bool)> {
    if model.refractory_mode() == RefractoryMode::None {
        return Err(Error::InvalidParameters(vec![
            "steady states require a refractory closure (ratio or delayed)".into(),
        ]));
    }
    let scan_points = scan_points.max(2);
    let upper = 1.0 / model.tau(Population::Excitatory);
    let h = upper / scan_points as f64;
    let g = |n: f64| -> Result<f64> { Ok(f_of_ne(n, model)? - 1.0) };
    let top = g(upper)?;
    if !(top > 0.0) {
        return Err(Error::InnerSolve {
            n_e: upper,
            reason: format!("F(1/tau_E) - 1 = {top}, expected > 0"),
        });
    }
    let mut roots = Vec::new();
    let mut prev_n = 0.0;
    let mut prev_g = -1.0;
    for k in 1..=scan_points {
        let n = if k == scan_points { upper } else { k as f64 * h };
        let gk = if k == scan_points { top } else { g(n)? };
        if gk == 0.0 {
            roots.push(n);
        } else if (prev_g < 0.0) != (gk < 0.0) && prev_g != 0.0 {
            let root = if prev_g < 0.0 {
                bisect(g, prev_n, n, OUTER_TOL)?
            } else {
                bisect(|x| g(x).map(|v| -v), prev_n, n, OUTER_TOL)?
            };
            roots.push(root);
        }
        prev_n = n;
        prev_g = gk;
    }
    let tangency = roots.windows(2).any(|w| w[1] - w[0] < 3.0 * h);
    Ok((roots, tangency))
}

/// All steady states of the network, with the inner rate, refractory
/// fractions and profiles reconstructed per root.
pub fn find_steady_states(model: &Model, grid: &Grid, scan_points: usize) -> Result<SteadyStates> {
    let (roots, tangency_warning) = steady_rates(model, scan_points)?;
    let mut solutions = Vec::with_capacity(roots.len());
    for n_e in roots {
        let n_i = match model {
            Model::One(_) => 0.0,
            Model::Two(p) => solve_inner_ni(n_e, p, INNER_TOL)?,
        };
        solutions.push(SteadyStateSolution::at_rates(model, grid, n_e, n_i)?);
    }
    Ok(SteadyStates { solutions, tangency_warning })
}

/// Parameters that a bifurcation scan may vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    BEe,
    BIe,
    BIi,
    BEi,
    TauE,
    TauI,
    /// One-population connectivity `b`.
    B,
    /// One-population external drive.
    NuExt,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::BEe => "b_EE",
            SweepParameter::BIe => "b_IE",
            SweepParameter::BIi => "b_II",
            SweepParameter::BEi => "b_EI",
            SweepParameter::TauE => "tau_E",
            SweepParameter::TauI => "tau_I",
            SweepParameter::B => "b",
            SweepParameter::NuExt => "nu_ext",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "b_EE" => SweepParameter::BEe,
            "b_IE" => SweepParameter::BIe,
            "b_II" => SweepParameter::BIi,
            "b_EI" => SweepParameter::BEi,
            "tau_E" => SweepParameter::TauE,
            "tau_I" => SweepParameter::TauI,
            "b" => SweepParameter::B,
            "nu_ext" => SweepParameter::NuExt,
            _ => return None,
        })
    }

    pub fn apply(self, model: &Model, value: f64) -> Result<Model> {
        let mut out = *model;
        let mismatch = || {
            Error::InvalidConfig(format!(
                "sweep parameter {} does not apply to this model",
                self.name()
            ))
        };
        match (&mut out, self) {
            (Model::Two(p), SweepParameter::BEe) => p.b_ee = value,
            (Model::Two(p), SweepParameter::BIe) => p.b_ie = value,
            (Model::Two(p), SweepParameter::BIi) => p.b_ii = value,
            (Model::Two(p), SweepParameter::BEi) => p.b_ei = value,
            (Model::Two(p), SweepParameter::TauE) => p.tau_e = value,
            (Model::Two(p), SweepParameter::TauI) => p.tau_i = value,
            (Model::One(p), SweepParameter::B) => p.b = value,
            (Model::One(p), SweepParameter::NuExt) => p.nu_ext = value,
            (Model::One(p), SweepParameter::TauE) => p.tau = value,
            _ => return Err(mismatch()),
        }
        Ok(out)
    }

    pub fn value(self, model: &Model) -> Option<f64> {
        Some(match (model, self) {
            (Model::Two(p), SweepParameter::BEe) => p.b_ee,
            (Model::Two(p), SweepParameter::BIe) => p.b_ie,
            (Model::Two(p), SweepParameter::BIi) => p.b_ii,
            (Model::Two(p), SweepParameter::BEi) => p.b_ei,
            (Model::Two(p), SweepParameter::TauE) => p.tau_e,
            (Model::Two(p), SweepParameter::TauI) => p.tau_i,
            (Model::One(p), SweepParameter::B) => p.b,
            (Model::One(p), SweepParameter::NuExt) => p.nu_ext,
            (Model::One(p), SweepParameter::TauE) => p.tau,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BifurcationPoint {
    pub value: f64,
    /// `(N_E, N_I)` per root, ascending in `N_E`.
    pub roots: Vec<(f64, f64)>,
    pub tangency_warning: bool,
    /// `(N_E, F(N_E))` samples when curves were requested.
    pub curve: Option<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BifurcationScan {
    pub parameter: SweepParameter,
    pub points: Vec<BifurcationPoint>,
}

/// Root sets of `F = 1` as `parameter` runs over `values`. Sweep points are
/// independent and evaluated in parallel; the output order follows `values`.
pub fn bifurcation_scan(
    model: &Model,
    parameter: SweepParameter,
    values: &[f64],
    scan_points: usize,
    curve_points: Option<usize>,
) -> Result<BifurcationScan> {
    use rayon::prelude::*;
    let points = values
        .par_iter()
        .map(|&value| -> Result<BifurcationPoint> {
            let m = parameter.apply(model, value)?.validate()?;
            let (rates, tangency_warning) = steady_rates(&m, scan_points)?;
            let roots = rates
                .into_iter()
                .map(|n_e| -> Result<(f64, f64)> {
                    let n_i = match &m {
                        Model::One(_) => 0.0,
                        Model::Two(p) => solve_inner_ni(n_e, p, INNER_TOL)?,
                    };
                    Ok((n_e, n_i))
                })
                .collect::<Result<Vec<_>>>()?;
            let curve = match curve_points {
                None => None,
                Some(k) => {
                    let upper = 1.0 / m.tau(Population::Excitatory);
                    Some(
                        (0..=k)
                            .map(|j| {
                                let n = upper * j as f64 / k as f64;
                                f_of_ne(n, &m).map(|f| (n, f))
                            })
                            .collect::<Result<Vec<_>>>()?,
                    )
                }
            };
            Ok(BifurcationPoint { value, roots, tangency_warning, curve })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BifurcationScan { parameter, points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::OnePopParameters;

    fn three_state() -> ModelParameters {
        ModelParameters {
            b_ee: 3.0,
            b_ie: 7.0,
            b_ii: 2.0,
            b_ei: 0.01,
            tau_e: 0.2,
            tau_i: 0.2,
            ..Default::default()
        }
    }

    #[test]
    fn inner_rate_satisfies_its_equation() {
        let p = three_state();
        let model = Model::Two(p);
        for n_e in [0.0, 0.3, 2.0, 5.0] {
            let n_i = solve_inner_ni(n_e, &p, INNER_TOL).unwrap();
            let i2 = integral_i(n_e, n_i, &model, Population::Inhibitory).unwrap();
            // The residual inherits the bisection width times the slope.
            assert!((n_i * (p.tau_i + i2) - 1.0).abs() < 1e-8);
            assert!(n_i > 0.0 && n_i < 1.0 / p.tau_i);
        }
    }

    #[test]
    fn inner_rate_increases_with_excitation() {
        let p = ModelParameters { b_ei: 0.5, ..three_state() };
        let lo = solve_inner_ni(0.0, &p, INNER_TOL).unwrap();
        let hi = solve_inner_ni(1.0 / p.tau_e, &p, INNER_TOL).unwrap();
        assert!(lo < hi);
    }

    #[test]
    fn uncoupled_inner_rate_is_constant() {
        let p = ModelParameters { b_ei: 0.0, ..three_state() };
        let a = solve_inner_ni(0.0, &p, INNER_TOL).unwrap();
        let b = solve_inner_ni(4.0, &p, INNER_TOL).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn f_vanishes_at_zero_and_exceeds_one_at_saturation() {
        let model = Model::Two(three_state());
        assert_eq!(f_of_ne(0.0, &model).unwrap(), 0.0);
        assert!(f_of_ne(5.0, &model).unwrap() > 1.0);
    }

    #[test]
    fn one_population_inhibitory_reference_rate() {
        let model = Model::One(OnePopParameters { b: -4.0, nu_ext: 20.0, tau: 0.025, ..Default::default() });
        let f = f_of_ne(3.669, &model).unwrap();
        assert!((f - 1.0).abs() < 5e-3, "F(3.669) = {f}");
    }

    #[test]
    fn bisection_respects_tolerance() {
        let r = bisect(|x| Ok(x * x - 2.0), 0.0, 2.0, 1e-12).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn empty_sweep_is_empty() {
        let scan = bifurcation_scan(&Model::Two(three_state()), SweepParameter::BEe, &[], 64, None).unwrap();
        assert!(scan.points.is_empty());
    }

    #[test]
    fn sweep_rejects_foreign_parameter() {
        let model = Model::One(OnePopParameters::default());
        assert!(SweepParameter::BEe.apply(&model, 1.0).is_err());
    }
}
