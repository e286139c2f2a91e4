//! Uniform voltage mesh, density fields on it, and the two families of
//! initial data (Gaussian bumps and stationary profiles).

use crate::error::{Error, Result};
use crate::params::{Model, Population};
use crate::quadrature::gauss_kronrod;

pub const DEFAULT_V_LEFT: f64 = 6.0;
pub const DEFAULT_N_CELLS: usize = 1000;

/// Uniform mesh on `[-v_left, v_f]` with `v_r` and `v_f` on nodes.
///
/// The requested left truncation is adjusted by less than one cell so that
/// the reset potential falls exactly on a node while the node count is kept.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    v_left: f64,
    v_f: f64,
    dv: f64,
    n: usize,
    reset_index: usize,
}

impl Grid {
    pub fn new(v_left: f64, v_f: f64, v_r: f64, n_cells: usize) -> Result<Grid> {
        if n_cells < 8 {
            return Err(Error::InvalidGrid(format!("n_cells must be >= 8 (got {n_cells})")));
        }
        if !(v_r < v_f) {
            return Err(Error::InvalidGrid(format!("V_R = {v_r} must be < V_F = {v_f}")));
        }
        if !(v_left > -v_r) {
            return Err(Error::InvalidGrid(format!(
                "left end -v_left = {} must lie below V_R = {v_r}",
                -v_left
            )));
        }
        let intervals = n_cells - 1;
        let span = v_f + v_left;
        let reset_cells = (((v_f - v_r) / span) * intervals as f64).round().max(1.0) as usize;
        if reset_cells >= intervals {
            return Err(Error::InvalidGrid("grid too coarse to place V_R inside the domain".into()));
        }
        let dv = (v_f - v_r) / reset_cells as f64;
        let v_left = intervals as f64 * dv - v_f;
        Ok(Grid { v_left, v_f, dv, n: n_cells, reset_index: intervals - reset_cells })
    }

    pub fn for_model(model: &Model, v_left: f64, n_cells: usize) -> Result<Grid> {
        Grid::new(v_left, model.v_f(), model.v_r(), n_cells)
    }

    /// Effective left truncation (domain is `[-v_left, v_f]`).
    pub fn v_left(&self) -> f64 {
        self.v_left
    }

    pub fn v_f(&self) -> f64 {
        self.v_f
    }

    pub fn dv(&self) -> f64 {
        self.dv
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn reset_index(&self) -> usize {
        self.reset_index
    }

    pub fn node(&self, j: usize) -> f64 {
        // Measured from V_F so the threshold and reset nodes are exact.
        self.v_f - (self.n - 1 - j) as f64 * self.dv
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |j| self.node(j))
    }

    pub fn nearest_node(&self, v: f64) -> usize {
        let j = ((v + self.v_left) / self.dv).round();
        j.clamp(0.0, (self.n - 1) as f64) as usize
    }

    /// Composite trapezoidal rule over the whole mesh.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.n);
        let inner: f64 = values[1..self.n - 1].iter().sum();
        self.dv * (inner + 0.5 * (values[0] + values[self.n - 1]))
    }
}

/// Probability density sampled at the grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField(pub Vec<f64>);

impl DensityField {
    pub fn zeros(grid: &Grid) -> Self {
        DensityField(vec![0.0; grid.len()])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn l1_distance(&self, other: &DensityField, grid: &Grid) -> f64 {
        let diff: Vec<f64> = self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).collect();
        grid.integrate(&diff)
    }
}

/// One population's dynamic state.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationState {
    pub density: DensityField,
    /// Probability of being refractory.
    pub refractory: f64,
    /// Current firing rate.
    pub rate: f64,
    pub time: f64,
}

pub fn total_mass(field: &DensityField, grid: &Grid) -> f64 {
    grid.integrate(field.values())
}

/// Gaussian bump `exp(-(v - v0)^2 / (2 sigma0^2))` scaled so that the grid
/// quadrature equals `mass`. The node at `V_F` is set to 0.
///
/// Bumps narrower than the mesh spacing collapse onto the nearest nodes; the
/// rescaling keeps their probability exact.
pub fn gaussian_initial(grid: &Grid, v0: f64, sigma0: f64, mass: f64) -> Result<DensityField> {
    if !(sigma0 > 0.0) {
        return Err(Error::InvalidInitialData(format!("sigma0 must be > 0 (got {sigma0})")));
    }
    if !(v0 < grid.v_f()) {
        return Err(Error::InvalidInitialData(format!("v0 = {v0} must be < V_F = {}", grid.v_f())));
    }
    if !(mass > 0.0 && mass <= 1.0) {
        return Err(Error::InvalidInitialData(format!("mass must be in (0, 1] (got {mass})")));
    }
    let last = grid.len() - 1;
    let mut values: Vec<f64> = grid
        .nodes()
        .map(|v| {
            let z = (v - v0) / sigma0;
            (-0.5 * z * z).exp()
        })
        .collect();
    values[last] = 0.0;
    let raw = grid.integrate(&values);
    let carrying = values.iter().filter(|&&x| x > 0.0).count();
    if carrying == 0 || !(raw > 0.0) {
        return Err(Error::InvalidInitialData(format!(
            "Gaussian (v0 = {v0}, sigma0 = {sigma0}) carries no mass on the grid; use a finer grid \
             or move v0 inside the domain"
        )));
    }
    let k = mass / raw;
    values.iter_mut().for_each(|x| *x *= k);
    Ok(DensityField(values))
}

/// Stationary profile for drive `v0` and diffusion `a`, scaled by the rate `n`:
///
/// `rho(v) = (n / a) * exp(-(v - v0)^2 / (2a)) * int_{max(v, V_R)}^{V_F} exp((w - v0)^2 / (2a)) dw`.
///
/// The two exponentials are merged so that large drives do not overflow.
pub fn stationary_profile(grid: &Grid, v_r: f64, n: f64, v0: f64, a: f64) -> Result<DensityField> {
    if !(a > 0.0) {
        return Err(Error::InvalidInitialData(format!("diffusion must be > 0 (got {a})")));
    }
    if !(n >= 0.0) {
        return Err(Error::InvalidInitialData(format!("firing rate must be >= 0 (got {n})")));
    }
    let sqrt_a = a.sqrt();
    let w_f = (grid.v_f() - v0) / sqrt_a;
    let w_r = (v_r - v0) / sqrt_a;
    let mut values = Vec::with_capacity(grid.len());
    for (j, v) in grid.nodes().enumerate() {
        let z = (v - v0) / sqrt_a;
        let lower = z.max(w_r);
        let integral = if lower >= w_f {
            0.0
        } else {
            scaled_gaussian_tail(z, lower, w_f)
        };
        // Kept as `n * (...)` so the profile is exactly linear in `n`.
        let value = n * (integral / sqrt_a);
        if !value.is_finite() {
            return Err(Error::NonFiniteProfile { node: j, v });
        }
        values.push(value);
    }
    let last = values.len() - 1;
    values[last] = 0.0;
    Ok(DensityField(values))
}

/// `int_lower^upper exp((u^2 - z^2) / 2) du` in the variables of the
/// normalized profile.
fn scaled_gaussian_tail(z: f64, lower: f64, upper: f64) -> f64 {
    let z2 = z * z;
    let f = |u: f64| (0.5 * (u * u - z2)).exp();
    gauss_kronrod(f, lower, upper, 1e-300, 1e-12, 200).value
}

/// Stationary profile of population `pop` evaluated at rates `(n_e, n_i)`.
pub fn stationary_initial(
    grid: &Grid,
    n_e: f64,
    n_i: f64,
    model: &Model,
    pop: Population,
) -> Result<DensityField> {
    if !(n_e >= 0.0 && n_i >= 0.0) {
        return Err(Error::InvalidInitialData(format!(
            "rates must be >= 0 (N_E = {n_e}, N_I = {n_i})"
        )));
    }
    let v0 = model.mean_drive(pop, n_e, n_i);
    let a = model.diffusion(pop, n_e, n_i);
    let own = match pop {
        Population::Excitatory => n_e,
        Population::Inhibitory => n_i,
    };
    stationary_profile(grid, model.v_r(), own, v0, a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::OnePopParameters;

    fn default_grid() -> Grid {
        Grid::new(DEFAULT_V_LEFT, 2.0, 1.0, DEFAULT_N_CELLS).unwrap()
    }

    #[test]
    fn grid_places_threshold_and_reset_on_nodes() {
        let g = default_grid();
        assert_eq!(g.len(), 1000);
        assert_eq!(g.node(g.len() - 1), 2.0);
        assert_eq!(g.node(g.reset_index()), 1.0);
        assert!((g.node(0) + g.v_left()).abs() < 1e-12);
        assert!((g.v_left() - 6.0).abs() <= g.dv() + 1e-12);
        assert!(g.dv() > 0.0);
    }

    #[test]
    fn zero_field_has_zero_mass() {
        let g = default_grid();
        assert_eq!(total_mass(&DensityField::zeros(&g), &g), 0.0);
    }

    #[test]
    fn gaussian_carries_requested_mass() {
        let g = default_grid();
        let rho = gaussian_initial(&g, 1.83, 0.0003, 0.8).unwrap();
        assert!((total_mass(&rho, &g) - 0.8).abs() < 1e-12);
        let wide = gaussian_initial(&g, 0.0, 0.5, 0.35).unwrap();
        assert!((total_mass(&wide, &g) - 0.35).abs() < 1e-12 * 0.35);
    }

    #[test]
    fn gaussian_peak_sits_on_nearest_node() {
        let g = default_grid();
        let rho = gaussian_initial(&g, 1.25, 0.0003, 1.0).unwrap();
        let argmax = rho
            .values()
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(j, _)| j)
            .unwrap();
        assert_eq!(argmax, g.nearest_node(1.25));
    }

    #[test]
    fn gaussian_is_nonnegative_and_zero_at_threshold() {
        let g = default_grid();
        for (v0, s) in [(1.99, 0.2), (-3.0, 1.0), (1.5, 0.0003)] {
            let rho = gaussian_initial(&g, v0, s, 1.0).unwrap();
            assert!(rho.values().iter().all(|&x| x >= 0.0));
            assert_eq!(*rho.values().last().unwrap(), 0.0);
        }
    }

    #[test]
    fn gaussian_outside_domain_is_rejected() {
        let g = default_grid();
        assert!(gaussian_initial(&g, -40.0, 0.0003, 1.0).is_err());
        assert!(gaussian_initial(&g, 2.0, 0.1, 1.0).is_err());
        assert!(gaussian_initial(&g, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn stationary_profile_vanishes_at_threshold_and_is_nonnegative() {
        let g = default_grid();
        let rho = stationary_profile(&g, 1.0, 0.7, 0.4, 1.3).unwrap();
        assert_eq!(*rho.values().last().unwrap(), 0.0);
        assert!(rho.values().iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn stationary_profile_is_linear_in_rate() {
        let g = default_grid();
        let one = stationary_profile(&g, 1.0, 1.3, 5.3, 1.0).unwrap();
        let two = stationary_profile(&g, 1.0, 2.6, 5.3, 1.0).unwrap();
        for (a, b) in one.values().iter().zip(two.values()) {
            assert_eq!(2.0 * a, *b);
        }
    }

    #[test]
    fn stationary_initial_at_reference_rate_has_expected_mass() {
        // Inhibitory population, b = -4, nu_ext = 20, tau = 0.025, N = 3.669.
        let g = default_grid();
        let p = OnePopParameters { b: -4.0, nu_ext: 20.0, tau: 0.025, ..Default::default() };
        let model = Model::One(p);
        let rho = stationary_initial(&g, 3.669, 0.0, &model, Population::Excitatory).unwrap();
        let mass = total_mass(&rho, &g);
        assert!((mass - (1.0 - 0.025 * 3.669)).abs() < 1e-3, "mass = {mass}");
    }

    #[test]
    fn large_drive_does_not_overflow() {
        let g = default_grid();
        let rho = stationary_profile(&g, 1.0, 1.0, 40.0, 1.0).unwrap();
        assert!(rho.values().iter().all(|x| x.is_finite()));
    }
}
