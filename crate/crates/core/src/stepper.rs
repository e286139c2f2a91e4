//! Time stepping of one population: TVD-RK3 under a CFL limit, with the
//! delayed input rates and the reset inflow frozen over each step.

use crate::delay::DelayBuffer;
use crate::error::{Error, Result};
use crate::grid::{DensityField, Grid};
use crate::params::{Model, Population, RefractoryMode};
use crate::refractory::RefractoryState;
use crate::spatial::SpatialOperator;

pub const DEFAULT_CFL_SAFETY: f64 = 0.9;
/// Negative density values below `-NEGATIVE_TOLERANCE` are counted before
/// being floored at zero.
pub const NEGATIVE_TOLERANCE: f64 = 1e-10;

/// `safety / (h_max / dv + 2 a / dv^2)`.
///
/// The two rates are added rather than bounded separately: when the drift
/// and diffusion limits are comparable, taking only the smaller one puts the
/// combined spectrum outside the RK3 stability region.
pub fn cfl_timestep(h_max: f64, a: f64, dv: f64, safety: f64) -> f64 {
    safety / (h_max.abs() / dv + 2.0 * a / (dv * dv))
}

/// Stage buffers for [`tvd_rk3_step`].
#[derive(Debug, Clone, Default)]
pub struct Rk3Workspace {
    u1: Vec<f64>,
    u2: Vec<f64>,
    k: Vec<f64>,
}

impl Rk3Workspace {
    pub fn new(len: usize) -> Self {
        Rk3Workspace { u1: vec![0.0; len], u2: vec![0.0; len], k: vec![0.0; len] }
    }
}

/// One Shu-Osher TVD-RK3 step of `u' = L(u)` in place. `rhs(stage, u, out)`
/// is called on `u^n`, `u^1` and `u^2` with `stage = 0, 1, 2`.
pub fn tvd_rk3_step<F>(u: &mut [f64], dt: f64, ws: &mut Rk3Workspace, mut rhs: F)
where
    F: FnMut(usize, &[f64], &mut [f64]),
{
    let n = u.len();
    ws.u1.resize(n, 0.0);
    ws.u2.resize(n, 0.0);
    ws.k.resize(n, 0.0);

    rhs(0, u, &mut ws.k);
    for i in 0..n {
        ws.u1[i] = u[i] + dt * ws.k[i];
    }
    rhs(1, &ws.u1, &mut ws.k);
    for i in 0..n {
        ws.u2[i] = 0.75 * u[i] + 0.25 * (ws.u1[i] + dt * ws.k[i]);
    }
    rhs(2, &ws.u2, &mut ws.k);
    for i in 0..n {
        u[i] = u[i] / 3.0 + 2.0 / 3.0 * (ws.u2[i] + dt * ws.k[i]);
    }
}

/// Effective weights of the three stage evaluations in one TVD-RK3 step.
pub const RK3_STAGE_WEIGHTS: [f64; 3] = [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0];

/// `-a d rho/dv` at the last node from the one-sided second-order stencil,
/// clamped at zero; the flag reports clamping.
pub fn boundary_rate(rho: &[f64], a: f64, dv: f64) -> (f64, bool) {
    let n = rho.len();
    let rate = -a * (3.0 * rho[n - 1] - 4.0 * rho[n - 2] + rho[n - 3]) / (2.0 * dv);
    if rate < 0.0 {
        (0.0, true)
    } else {
        (rate, false)
    }
}

/// Frozen per-step coefficients of one population.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInputs {
    pub v0: f64,
    pub a: f64,
    pub m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub rate: f64,
    /// Threshold flux of the scheme averaged over the step with the RK3 stage weights.
    pub mean_outflow: f64,
    pub finite: bool,
}

/// Single-writer state of one population: density, refractory fraction,
/// current rate and the histories of its own rate seen by each target.
#[derive(Debug, Clone)]
pub struct PopulationStepper {
    population: Population,
    grid: Grid,
    rho: Vec<f64>,
    ws: Rk3Workspace,
    op: SpatialOperator,
    refractory: RefractoryState,
    rate: f64,
    time: f64,
    outgoing: Vec<DelayBuffer>,
    negative_floors: u64,
    rate_clamps: u64,
}

impl PopulationStepper {
    /// The rate history kept for each target uses the delay towards it in `model`.
    pub fn new(
        model: &Model,
        grid: &Grid,
        population: Population,
        density: DensityField,
        r0: f64,
        dt_bar: Option<f64>,
    ) -> Result<Self> {
        if density.len() != grid.len() {
            return Err(Error::InvalidInitialData(format!(
                "density has {} values for a grid of {} nodes",
                density.len(),
                grid.len()
            )));
        }
        if density.values().iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::InvalidInitialData("density must be finite and >= 0".into()));
        }
        if !(0.0..=1.0).contains(&r0) {
            return Err(Error::InvalidInitialData(format!("R(0) must lie in [0, 1] (got {r0})")));
        }
        let mut rho = density.0;
        let last = rho.len() - 1;
        rho[last] = 0.0;
        let refractory = RefractoryState::new(model.refractory_mode(), r0, model.tau(population), dt_bar)?;
        let outgoing = model
            .populations()
            .iter()
            .map(|&target| DelayBuffer::new(model.delay(population, target), dt_bar))
            .collect::<Result<Vec<_>>>()?;
        let a0 = model.diffusion(population, 0.0, 0.0);
        let (rate, _) = boundary_rate(&rho, a0, grid.dv());
        let mut st = PopulationStepper {
            population,
            grid: grid.clone(),
            ws: Rk3Workspace::new(rho.len()),
            op: SpatialOperator::new(grid),
            rho,
            refractory,
            rate,
            time: 0.0,
            outgoing,
            negative_floors: 0,
            rate_clamps: 0,
        };
        st.record_initial()?;
        Ok(st)
    }

    pub fn population(&self) -> Population {
        self.population
    }

    pub fn density(&self) -> &[f64] {
        &self.rho
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn refractory(&self) -> f64 {
        self.refractory.value()
    }

    pub fn refractory_state(&self) -> &RefractoryState {
        &self.refractory
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn mass(&self) -> f64 {
        self.grid.integrate(&self.rho)
    }

    pub fn negative_floors(&self) -> u64 {
        self.negative_floors
    }

    pub fn rate_clamps(&self) -> u64 {
        self.rate_clamps
    }

    pub fn refractory_clamps(&self) -> u64 {
        self.refractory.clamp_count()
    }

    /// Own rate as seen by `target` at time `t`, i.e. `N(t - D)`.
    pub fn delayed_rate(&self, target: Population, t: f64) -> Result<f64> {
        let idx = target.index().min(self.outgoing.len() - 1);
        self.outgoing[idx].lookback(t)
    }

    /// Smallest sampling interval among the histories this population keeps.
    pub fn min_dt_bar(&self) -> f64 {
        let own = self.outgoing.iter().filter(|b| b.delay() > 0.0).map(|b| b.dt_bar());
        let refr = self.refractory.history().map(|h| h.dt_bar());
        own.chain(refr).fold(f64::INFINITY, f64::min)
    }

    /// Coefficients for the step starting at `t`, given the delayed input rates.
    pub fn inputs(&self, model: &Model, t: f64, n_e_delayed: f64, n_i_delayed: f64) -> Result<StepInputs> {
        Ok(StepInputs {
            v0: model.mean_drive(self.population, n_e_delayed, n_i_delayed),
            a: model.diffusion(self.population, n_e_delayed, n_i_delayed),
            m: self.refractory.reset_inflow(t, self.rate)?,
        })
    }

    pub fn max_timestep(&self, inp: &StepInputs, safety: f64) -> f64 {
        cfl_timestep(self.op.max_speed(inp.v0), inp.a, self.grid.dv(), safety)
    }

    /// Advances to `t_new = time + dt`. In the instant-reset mode the inflow
    /// equals the threshold outflow of each stage; otherwise `inp.m` is used
    /// throughout.
    pub fn advance(&mut self, inp: &StepInputs, dt: f64, t_new: f64) -> Result<StepReport> {
        let dv = self.grid.dv();
        let instant = self.refractory.mode() == RefractoryMode::None;
        // Never release more than the refractory compartment holds.
        let m = if instant { 0.0 } else { inp.m.min(self.refractory.value() / dt).max(0.0) };
        let mut stage_outflow = [0.0; 3];
        let op = &mut self.op;
        tvd_rk3_step(&mut self.rho, dt, &mut self.ws, |stage, u, out| {
            if instant {
                op.rhs(u, inp.v0, inp.a, 0.0, out);
                let q = op.threshold_outflow(u, inp.a);
                out[op.reset_index()] += q / dv;
                stage_outflow[stage] = q;
            } else {
                op.rhs(u, inp.v0, inp.a, m, out);
                stage_outflow[stage] = op.threshold_outflow(u, inp.a);
            }
        });
        // The refractory fraction receives exactly the mass that crossed the
        // threshold during the step.
        let mean_outflow: f64 = stage_outflow.iter().zip(RK3_STAGE_WEIGHTS).map(|(q, w)| q * w).sum();

        let last = self.rho.len() - 1;
        self.rho[last] = 0.0;
        let mut finite = true;
        for x in self.rho.iter_mut() {
            if !x.is_finite() {
                finite = false;
            } else if *x < 0.0 {
                if *x < -NEGATIVE_TOLERANCE {
                    self.negative_floors += 1;
                }
                *x = 0.0;
            }
        }
        // The firing rate is the mass flux the scheme actually pushes through
        // the threshold. The gradient stencil misses most of it once the
        // boundary layer `a / h` is thinner than a cell.
        let (rate, clamped) = if mean_outflow < 0.0 { (0.0, true) } else { (mean_outflow, false) };
        if clamped {
            self.rate_clamps += 1;
        }
        self.rate = rate;
        self.refractory.advance(dt, mean_outflow, m);
        self.time = t_new;
        if finite && rate.is_finite() {
            for b in self.outgoing.iter_mut() {
                b.record(t_new, rate)?;
            }
            // Neurons leave the refractory state `tau` after crossing, so the
            // history behind `M` holds the mass that actually crossed.
            self.refractory.record(t_new, mean_outflow)?;
        }
        Ok(StepReport { rate, mean_outflow, finite: finite && rate.is_finite() })
    }

    fn record_initial(&mut self) -> Result<()> {
        for b in self.outgoing.iter_mut() {
            b.record(0.0, self.rate)?;
        }
        self.refractory.record(0.0, self.rate)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{gaussian_initial, DEFAULT_N_CELLS, DEFAULT_V_LEFT};
    use crate::params::OnePopParameters;

    #[test]
    fn cfl_diffusive_bound() {
        assert!((cfl_timestep(0.0, 1.0, 0.01, 0.5) - 2.5e-5).abs() < 1e-20);
    }

    #[test]
    fn cfl_is_monotone_in_diffusion_and_linear_in_advection() {
        assert!(cfl_timestep(0.0, 2.0, 0.01, 1.0) < cfl_timestep(0.0, 1.0, 0.01, 1.0));
        let a = cfl_timestep(1e6, 1e-12, 0.01, 1.0);
        let b = cfl_timestep(1e6, 1e-12, 0.02, 1.0);
        assert!((b / a - 2.0).abs() < 1e-12);
        let both = cfl_timestep(200.0, 1.0, 0.01, 1.0);
        assert!((both - 1.0 / (2e4 + 2e4)).abs() < 1e-18);
    }

    #[test]
    fn rk3_is_third_order_on_linear_ode() {
        let lambda = -1.3;
        let err = |dt: f64| {
            let mut u = [1.0];
            let mut ws = Rk3Workspace::new(1);
            tvd_rk3_step(&mut u, dt, &mut ws, |_, x, out| out[0] = lambda * x[0]);
            (u[0] - (lambda * dt).exp()).abs()
        };
        let order = (err(0.1) / err(0.05)).log2();
        assert!(order > 3.8, "{order}");
    }

    #[test]
    fn zero_state_stays_zero() {
        let mut u = vec![0.0; 20];
        let mut ws = Rk3Workspace::new(20);
        tvd_rk3_step(&mut u, 0.1, &mut ws, |_, x, out| out.copy_from_slice(x));
        assert!(u.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn step_budget_closes_with_ratio_refractory() {
        let p = OnePopParameters { b: 0.0, tau: 0.025, refractory: RefractoryMode::Ratio, ..Default::default() };
        let model = Model::One(p);
        let grid = Grid::for_model(&model, DEFAULT_V_LEFT, DEFAULT_N_CELLS).unwrap();
        let rho = gaussian_initial(&grid, 0.0, 0.5, 0.8).unwrap();
        let mut st = PopulationStepper::new(&model, &grid, Population::Excitatory, rho, 0.2, None).unwrap();
        let start = st.mass() + st.refractory();
        let mut t = 0.0;
        for _ in 0..2000 {
            let n = st.delayed_rate(Population::Excitatory, t).unwrap();
            let inp = st.inputs(&model, t, n, 0.0).unwrap();
            let dt = st.max_timestep(&inp, DEFAULT_CFL_SAFETY);
            st.advance(&inp, dt, t + dt).unwrap();
            t += dt;
        }
        let drift = (st.mass() + st.refractory() - start).abs();
        assert!(drift < 1e-6 * t.max(1.0), "drift {drift} over t = {t}");
        assert_eq!(st.negative_floors(), 0);
    }
}
