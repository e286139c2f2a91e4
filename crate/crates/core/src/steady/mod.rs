//! Stationary states: the mass integrals, the implicit rate equations and
//! their roots, bifurcation scans, the uniqueness bounds and the
//! concentration criterion for blow-up.

mod criteria;
mod integrals;
mod roots;

pub use criteria::{
    blowup_criterion, log_spaced, uniqueness_bounds, BlowupCriterion, UniquenessBounds,
    DEFAULT_MU_MAX, DEFAULT_MU_MIN, DEFAULT_MU_POINTS,
};
pub use integrals::{
    auxiliary_integral, integral_i, integral_i_bruteforce, reduced_integral,
    reduced_integral_bruteforce, ReducedVariables, SERIES_SWITCH,
};
pub use roots::{
    bifurcation_scan, f_of_ne, find_steady_states, solve_inner_ni, steady_rates,
    BifurcationPoint, BifurcationScan, StationaryPopulation, SteadyStateSolution, SteadyStates,
    SweepParameter, DEFAULT_SCAN_POINTS, INNER_TOL, OUTER_TOL,
};
