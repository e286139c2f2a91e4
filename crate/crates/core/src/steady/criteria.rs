use crate::error::Result;
use crate::grid::{DensityField, Grid};
use crate::params::{Model, ModelParameters, Population};

use super::integrals::{auxiliary_integral, ReducedVariables};
use super::roots::{solve_inner_ni, INNER_TOL};

/// Bounds `A <= d/dN_E [...] <= B` on the bracket in `F'(N_E)`; `A >= 0`
/// makes `F` increasing and the steady state unique.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniquenessBounds {
    pub a: f64,
    pub b: f64,
    /// `A >= 0`. Sufficient for uniqueness, not necessary.
    pub sufficient_unique: bool,
}

/// Auxiliary integral of the inhibitory population at `(N_E, N_I(N_E))`.
fn inhibitory_auxiliary(model: &Model, n_e: f64, n_i: f64) -> Result<f64> {
    let r = ReducedVariables::new(model, Population::Inhibitory, n_e, n_i)?;
    auxiliary_integral(r.w_f, r.w_r)
}

pub fn uniqueness_bounds(p: &ModelParameters) -> Result<UniquenessBounds> {
    let model = Model::Two(*p);
    let top = 1.0 / p.tau_e;
    let ni_lo = solve_inner_ni(0.0, p, INNER_TOL)?;
    let ni_hi = solve_inner_ni(top, p, INNER_TOL)?;
    let aux_lo = inhibitory_auxiliary(&model, 0.0, ni_lo)?;
    let aux_hi = inhibitory_auxiliary(&model, top, ni_hi)?;
    let sqrt_ae = model.diffusion(Population::Excitatory, 0.0, 0.0).sqrt();
    let sqrt_ai = model.diffusion(Population::Inhibitory, 0.0, 0.0).sqrt();
    let base = -p.b_ee / sqrt_ae;
    let cross = p.b_ie / sqrt_ae;
    let a = base
        + cross * (p.b_ei * ni_lo * ni_lo * aux_hi) / (sqrt_ai + p.b_ii * ni_hi * ni_hi * aux_lo);
    let b = base
        + cross * (p.b_ei * ni_hi * ni_hi * aux_lo) / (sqrt_ai + p.b_ii * ni_lo * ni_lo * aux_hi);
    Ok(UniquenessBounds { a, b, sufficient_unique: a >= 0.0 })
}

pub const DEFAULT_MU_MIN: f64 = 0.01;
pub const DEFAULT_MU_MAX: f64 = 50.0;
pub const DEFAULT_MU_POINTS: usize = 200;

/// `points` log-spaced values in `[lo, hi]`.
pub fn log_spaced(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    let (l, h) = (lo.ln(), hi.ln());
    (0..points)
        .map(|k| (l + (h - l) * k as f64 / (points - 1) as f64).exp())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowupCriterion {
    pub satisfied: bool,
    pub best_mu: f64,
    /// `max_mu b mu exp(-mu V_F) int exp(mu v) rho dv`; at least 1 when satisfied.
    pub margin: f64,
}

/// Scan of the concentration condition
/// `int exp(mu v) rho0 dv >= exp(mu V_F) / (b_EE mu)` over `mu_grid`.
pub fn blowup_criterion(rho0: &DensityField, grid: &Grid, b_ee: f64, mu_grid: &[f64]) -> BlowupCriterion {
    let mut best = BlowupCriterion { satisfied: false, best_mu: f64::NAN, margin: 0.0 };
    let mut weighted = vec![0.0; grid.len()];
    for &mu in mu_grid {
        for ((w, &r), v) in weighted.iter_mut().zip(rho0.values()).zip(grid.nodes()) {
            // exp(mu (v - V_F)) <= 1 on the mesh, so this cannot overflow.
            *w = (mu * (v - grid.v_f())).exp() * r;
        }
        let margin = b_ee * mu * grid.integrate(&weighted);
        if margin > best.margin || best.best_mu.is_nan() {
            best.margin = margin;
            best.best_mu = mu;
        }
    }
    best.satisfied = best.margin >= 1.0;
    best
}
