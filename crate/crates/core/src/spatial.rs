//! Right-hand side of the density equation on the mesh:
//!
//! `d rho/dt = -d/dv (h rho) + a d^2 rho/dv^2 + M delta(v - V_R)`, `h = V_0 - v`.
//!
//! Advection uses fifth-order WENO reconstruction of Lax-Friedrichs split
//! fluxes, diffusion the three-point stencil. Values below the left end are
//! taken as zero. Beyond the threshold the density is continued by odd
//! reflection while the drift there points outward, and by zero otherwise;
//! the end nodes themselves are held fixed.

use crate::error::{Error, Result};
use crate::grid::{DensityField, Grid};
use crate::params::{Model, Population};

pub const WENO_EPS: f64 = 1e-6;
const GHOSTS: usize = 3;

/// `h(v) = V_0(N_E, N_I) - v` for population `pop` at the delayed rates.
pub fn drift_at(v: f64, n_e_d: f64, n_i_d: f64, model: &Model, pop: Population) -> f64 {
    model.mean_drive(pop, n_e_d, n_i_d) - v
}

pub fn diffusion_coeff(n_e_d: f64, n_i_d: f64, model: &Model, pop: Population) -> f64 {
    model.diffusion(pop, n_e_d, n_i_d)
}

/// Left-biased fifth-order WENO value at the interface to the right of
/// `c`, from the stencil `(a, b, c, d, e)`.
#[inline(always)]
fn weno5(a: f64, b: f64, c: f64, d: f64, e: f64) -> f64 {
    let q0 = (2.0 * a - 7.0 * b + 11.0 * c) / 6.0;
    let q1 = (-b + 5.0 * c + 2.0 * d) / 6.0;
    let q2 = (2.0 * c + 5.0 * d - e) / 6.0;
    let s0 = a - 2.0 * b + c;
    let t0 = a - 4.0 * b + 3.0 * c;
    let s1 = b - 2.0 * c + d;
    let t1 = b - d;
    let s2 = c - 2.0 * d + e;
    let t2 = 3.0 * c - 4.0 * d + e;
    let beta0 = 13.0 / 12.0 * s0 * s0 + 0.25 * t0 * t0;
    let beta1 = 13.0 / 12.0 * s1 * s1 + 0.25 * t1 * t1;
    let beta2 = 13.0 / 12.0 * s2 * s2 + 0.25 * t2 * t2;
    let a0 = 0.1 / ((WENO_EPS + beta0) * (WENO_EPS + beta0));
    let a1 = 0.6 / ((WENO_EPS + beta1) * (WENO_EPS + beta1));
    let a2 = 0.3 / ((WENO_EPS + beta2) * (WENO_EPS + beta2));
    (a0 * q0 + a1 * q1 + a2 * q2) / (a0 + a1 + a2)
}

/// Numerical fluxes at the `n - 1 + extra` interfaces `i + 1/2` from split
/// fluxes padded with [`GHOSTS`] values on each side.
fn weno5_fluxes(plus: &[f64], minus: &[f64], interfaces: usize, flux: &mut [f64]) {
    for (i, out) in flux.iter_mut().enumerate().take(interfaces) {
        let k = i + GHOSTS;
        let fp = weno5(plus[k - 2], plus[k - 1], plus[k], plus[k + 1], plus[k + 2]);
        let fm = weno5(minus[k + 3], minus[k + 2], minus[k + 1], minus[k], minus[k - 1]);
        *out = fp + fm;
    }
}

/// Scratch buffers for repeated right-hand-side evaluations on one grid.
#[derive(Debug, Clone)]
pub struct SpatialOperator {
    plus: Vec<f64>,
    minus: Vec<f64>,
    flux: Vec<f64>,
    nodes: Vec<f64>,
    dv: f64,
    reset_index: usize,
}

impl SpatialOperator {
    pub fn new(grid: &Grid) -> Self {
        let n = grid.len();
        SpatialOperator {
            plus: vec![0.0; n + 2 * GHOSTS],
            minus: vec![0.0; n + 2 * GHOSTS],
            flux: vec![0.0; n],
            nodes: grid.nodes().collect(),
            dv: grid.dv(),
            reset_index: grid.reset_index(),
        }
    }

    /// Lax-Friedrichs speed `max_v |V_0 - v|`, attained at an end of the mesh.
    pub fn max_speed(&self, v0: f64) -> f64 {
        let lo = self.nodes[0];
        let hi = self.nodes[self.nodes.len() - 1];
        (v0 - lo).abs().max((v0 - hi).abs())
    }

    /// Writes `-d/dv (h rho)` into `out` (interior nodes; ends set to 0).
    pub fn advection(&mut self, rho: &[f64], v0: f64, out: &mut [f64]) {
        let n = rho.len();
        let alpha = self.max_speed(v0);
        for j in 0..n {
            let f = (v0 - self.nodes[j]) * rho[j];
            self.plus[j + GHOSTS] = 0.5 * (f + alpha * rho[j]);
            self.minus[j + GHOSTS] = 0.5 * (f - alpha * rho[j]);
        }
        // With outgoing drift, odd reflection keeps the zero at the threshold
        // smooth for the reconstruction. With incoming drift the ghosts are
        // upwind and would feed negative mass in, so they are zero.
        let v_f = self.nodes[n - 1];
        let odd = v0 > v_f;
        for k in 1..=GHOSTS {
            let r = if odd { -rho[n - 1 - k] } else { 0.0 };
            let f = (v0 - (v_f + k as f64 * self.dv)) * r;
            self.plus[n - 1 + k + GHOSTS] = 0.5 * (f + alpha * r);
            self.minus[n - 1 + k + GHOSTS] = 0.5 * (f - alpha * r);
        }
        weno5_fluxes(&self.plus, &self.minus, n - 1, &mut self.flux);
        let inv_dv = 1.0 / self.dv;
        out[0] = 0.0;
        out[n - 1] = 0.0;
        for j in 1..n - 1 {
            out[j] = -(self.flux[j] - self.flux[j - 1]) * inv_dv;
        }
    }

    /// Rate at which mass leaves through the threshold, from the fluxes of
    /// the last [`advection`](Self::advection) or [`rhs`](Self::rhs) call on `rho`.
    pub fn threshold_outflow(&self, rho: &[f64], a: f64) -> f64 {
        let n = rho.len();
        self.flux[n - 2] + a * (rho[n - 2] - rho[n - 1]) / self.dv
    }

    pub fn reset_index(&self) -> usize {
        self.reset_index
    }

    /// Full right-hand side with Dirichlet ends and the reset inflow `m`.
    pub fn rhs(&mut self, rho: &[f64], v0: f64, a: f64, m: f64, out: &mut [f64]) {
        self.advection(rho, v0, out);
        let n = rho.len();
        let k = a / (self.dv * self.dv);
        for j in 1..n - 1 {
            out[j] += k * (rho[j - 1] - 2.0 * rho[j] + rho[j + 1]);
        }
        out[self.reset_index] += m / self.dv;
        out[0] = 0.0;
        out[n - 1] = 0.0;
    }
}

/// Per-node time derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct RhsField(pub Vec<f64>);

impl RhsField {
    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

fn check_finite(field: &DensityField) -> Result<()> {
    if field.values().iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteInput)
    }
}

/// `-d/dv (h rho)` by WENO5 on Lax-Friedrichs split fluxes.
pub fn weno5_advection(
    field: &DensityField,
    n_e_d: f64,
    n_i_d: f64,
    model: &Model,
    pop: Population,
    grid: &Grid,
) -> Result<RhsField> {
    check_finite(field)?;
    let mut op = SpatialOperator::new(grid);
    let mut out = vec![0.0; grid.len()];
    op.advection(field.values(), model.mean_drive(pop, n_e_d, n_i_d), &mut out);
    Ok(RhsField(out))
}

/// `a (rho_{j-1} - 2 rho_j + rho_{j+1}) / dv^2` on interior nodes.
pub fn diffusion_term(field: &DensityField, a: f64, grid: &Grid) -> RhsField {
    let rho = field.values();
    let n = rho.len();
    let k = a / (grid.dv() * grid.dv());
    let mut out = vec![0.0; n];
    for j in 1..n - 1 {
        out[j] = k * (rho[j - 1] - 2.0 * rho[j] + rho[j + 1]);
    }
    RhsField(out)
}

/// Adds the reset inflow `m` as a discrete delta on the `V_R` node.
pub fn deposit_reset(mut rhs: RhsField, m: f64, grid: &Grid) -> RhsField {
    rhs.0[grid.reset_index()] += m / grid.dv();
    rhs
}

/// Firing rate `N = -a d rho/dv (V_F)` from the one-sided second-order
/// difference. The second value is `true` when a negative result was
/// clamped to zero.
pub fn extract_firing_rate(field: &DensityField, a: f64, grid: &Grid) -> (f64, bool) {
    let rho = field.values();
    let n = rho.len();
    let slope = (3.0 * rho[n - 1] - 4.0 * rho[n - 2] + rho[n - 3]) / (2.0 * grid.dv());
    let rate = -a * slope;
    if rate < 0.0 {
        (0.0, true)
    } else {
        (rate, false)
    }
}

/// Arguments of one right-hand-side evaluation.
#[derive(Debug, Clone)]
pub struct SpatialOperatorInput<'a> {
    pub field: &'a DensityField,
    pub n_e_delayed: f64,
    pub n_i_delayed: f64,
    pub reset_inflow: f64,
    pub population: Population,
    pub model: &'a Model,
    pub grid: &'a Grid,
}

pub fn assemble_rhs(inp: &SpatialOperatorInput<'_>) -> Result<RhsField> {
    check_finite(inp.field)?;
    let mut op = SpatialOperator::new(inp.grid);
    let mut out = vec![0.0; inp.grid.len()];
    let v0 = inp.model.mean_drive(inp.population, inp.n_e_delayed, inp.n_i_delayed);
    let a = inp.model.diffusion(inp.population, inp.n_e_delayed, inp.n_i_delayed);
    op.rhs(inp.field.values(), v0, a, inp.reset_inflow, &mut out);
    Ok(RhsField(out))
}

/// `-d/dx (c u)` for constant speed `c` on a periodic mesh of spacing `dx`,
/// with the same splitting and reconstruction as [`SpatialOperator`]. Used
/// to measure the order of the reconstruction away from boundaries.
pub fn weno5_periodic_advection(u: &[f64], speed: f64, dx: f64) -> Vec<f64> {
    let n = u.len();
    let alpha = speed.abs();
    let wrap = |k: isize| u[k.rem_euclid(n as isize) as usize];
    let mut plus = vec![0.0; n + 2 * GHOSTS];
    let mut minus = vec![0.0; n + 2 * GHOSTS];
    for k in 0..n + 2 * GHOSTS {
        let v = wrap(k as isize - GHOSTS as isize);
        plus[k] = 0.5 * (speed + alpha) * v;
        minus[k] = 0.5 * (speed - alpha) * v;
    }
    // Interfaces -1/2 .. n-1/2, i.e. n + 1 of them starting one node left.
    let mut flux = vec![0.0; n + 1];
    for (i, out) in flux.iter_mut().enumerate() {
        let k = i + GHOSTS - 1;
        let fp = weno5(plus[k - 2], plus[k - 1], plus[k], plus[k + 1], plus[k + 2]);
        let fm = weno5(minus[k + 3], minus[k + 2], minus[k + 1], minus[k], minus[k - 1]);
        *out = fp + fm;
    }
    (0..n).map(|j| -(flux[j + 1] - flux[j]) / dx).collect()
}
