//! The mass integrals of the stationary problem.
//!
//! With `w_F = (V_F - V_0)/sqrt(a)` and `w_R = (V_R - V_0)/sqrt(a)` the
//! stationary mass condition reads `1/N - tau = I(w_F, w_R)` where
//!
//! ```text
//! I = int_0^inf exp(-s^2/2) (exp(s w_F) - exp(s w_R)) / s ds
//!   = int_{-inf}^{w_F} exp(-z^2/2) int_{max(z, w_R)}^{w_F} exp(u^2/2) du dz.
//! ```
//!
//! The single-integral form is what the solver uses; the double-integral
//! form is evaluated by an unrelated rule and serves as a cross-check.

use crate::error::{Error, Result};
use crate::params::{Model, Population};
use crate::quadrature::{adaptive_simpson, gauss_kronrod, kronrod_panel};

/// Below this `s` the removable singularity is evaluated by its Taylor series.
pub const SERIES_SWITCH: f64 = 1e-3;
const ABS_TOL: f64 = 1e-10;
const REL_TOL: f64 = 1e-12;
const MAX_PANELS: usize = 2000;
/// `exp(709)` is the largest representable exponential.
const MAX_LOG: f64 = 700.0;

/// Drive and diffusion of one population at given rates, with the
/// normalized threshold and reset positions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedVariables {
    pub v0: f64,
    pub a: f64,
    pub w_f: f64,
    pub w_r: f64,
}

impl ReducedVariables {
    pub fn new(model: &Model, pop: Population, n_e: f64, n_i: f64) -> Result<Self> {
        let v0 = model.mean_drive(pop, n_e, n_i);
        let a = model.diffusion(pop, n_e, n_i);
        if !(a > 0.0) {
            return Err(Error::InvalidParameters(vec![format!(
                "diffusion a_{} = {a} must be > 0",
                pop.label()
            )]));
        }
        let sqrt_a = a.sqrt();
        Ok(ReducedVariables {
            v0,
            a,
            w_f: (model.v_f() - v0) / sqrt_a,
            w_r: (model.v_r() - v0) / sqrt_a,
        })
    }
}

/// `(exp(s w_F) - exp(s w_R)) / s` by its first five Taylor terms.
fn difference_quotient_series(s: f64, w_f: f64, w_r: f64) -> f64 {
    let mut term_f = 1.0;
    let mut term_r = 1.0;
    let mut sum = 0.0;
    let mut s_pow = 1.0;
    let mut factorial = 1.0;
    for k in 1..=5 {
        term_f *= w_f;
        term_r *= w_r;
        factorial *= k as f64;
        sum += s_pow * (term_f - term_r) / factorial;
        s_pow *= s;
    }
    sum
}

/// Integrand of the single-integral form.
fn single_form_integrand(s: f64, w_f: f64, w_r: f64) -> f64 {
    if s < SERIES_SWITCH {
        (-0.5 * s * s).exp() * difference_quotient_series(s, w_f, w_r)
    } else {
        // exp(-s^2/2 + s w_F) * (1 - exp(-s (w_F - w_R))) / s
        (s * w_f - 0.5 * s * s).exp() * -(-(s * (w_f - w_r))).exp_m1() / s
    }
}

/// Integrand of the auxiliary integral, which lacks the `1/s` factor.
fn auxiliary_integrand(s: f64, w_f: f64, w_r: f64) -> f64 {
    (s * w_f - 0.5 * s * s).exp() * -(-(s * (w_f - w_r))).exp_m1()
}

/// `int_0^inf g(s) ds` for an integrand whose envelope is
/// `exp(-s^2/2 + s w_F)`. The upper limit is extended panel by panel until a
/// panel contributes less than `1e-16` of the running total.
fn half_line<G: FnMut(f64) -> f64>(mut g: G, w_f: f64, w_r: f64) -> Result<f64> {
    let peak = w_f.max(0.0);
    if 0.5 * peak * peak > MAX_LOG {
        return Ok(f64::INFINITY);
    }
    let fail = || Error::Quadrature { w_f, w_r };
    let (head, _) = kronrod_panel(&mut g, 0.0, SERIES_SWITCH);
    let body_end = peak + 8.0;
    let body = gauss_kronrod(&mut g, SERIES_SWITCH, body_end, ABS_TOL, REL_TOL, MAX_PANELS);
    if !body.converged {
        return Err(fail());
    }
    let mut total = head + body.value;
    let mut lo = body_end;
    loop {
        let hi = lo + 4.0;
        let tail = gauss_kronrod(&mut g, lo, hi, ABS_TOL * 1e-3, REL_TOL, MAX_PANELS);
        if !tail.converged {
            return Err(fail());
        }
        total += tail.value;
        if tail.value.abs() <= 1e-16 * total.abs() || lo > peak + 80.0 {
            break;
        }
        lo = hi;
    }
    if !total.is_finite() {
        return Err(fail());
    }
    Ok(total)
}

/// `I(w_F, w_R)` via the single-integral form. Returns `+inf` when the
/// integral exceeds the floating-point range (very large `w_F`).
pub fn reduced_integral(w_f: f64, w_r: f64) -> Result<f64> {
    if w_f == w_r {
        return Ok(0.0);
    }
    half_line(|s| single_form_integrand(s, w_f, w_r), w_f, w_r)
}

/// `int_0^inf exp(-s^2/2) (exp(s w_F) - exp(s w_R)) ds`, the integral that
/// enters the derivative of the inner rate `N_I(N_E)`.
pub fn auxiliary_integral(w_f: f64, w_r: f64) -> Result<f64> {
    if w_f == w_r {
        return Ok(0.0);
    }
    half_line(|s| auxiliary_integrand(s, w_f, w_r), w_f, w_r)
}

/// `I` for population `pop` at rates `(n_e, n_i)`.
pub fn integral_i(n_e: f64, n_i: f64, model: &Model, pop: Population) -> Result<f64> {
    let r = ReducedVariables::new(model, pop, n_e, n_i)?;
    reduced_integral(r.w_f, r.w_r)
}

/// Double-integral form of `I` by nested adaptive Simpson quadrature.
pub fn reduced_integral_bruteforce(w_f: f64, w_r: f64) -> Result<f64> {
    if w_f == w_r {
        return Ok(0.0);
    }
    let fail = || Error::Quadrature { w_f, w_r };
    let tol = 1e-13;
    let depth = 50;
    let lower = w_f.min(0.0) - 40.0;
    // (u^2 - z^2)/2 never exceeds max(w_F, 0)^2 / 2 on the integration
    // region; factoring it out keeps the integrand of order one.
    let log_scale = 0.5 * w_f.max(0.0).powi(2);
    if log_scale > MAX_LOG {
        return Ok(f64::INFINITY);
    }
    let inner = |z: f64| -> Option<f64> {
        let lo = z.max(w_r);
        let shift = z * z + 2.0 * log_scale;
        adaptive_simpson(|u| (0.5 * (u * u - shift)).exp(), lo, w_f, tol, depth)
    };
    let mut failed = false;
    let mut outer_panel = |a: f64, b: f64| -> f64 {
        let v = adaptive_simpson(
            |z| match inner(z) {
                Some(x) => x,
                None => {
                    failed = true;
                    0.0
                }
            },
            a,
            b,
            tol,
            depth,
        );
        match v {
            Some(x) => x,
            None => {
                failed = true;
                0.0
            }
        }
    };
    // Uniform pre-partition so the initial Simpson samples resolve the
    // bump next to w_R; the kink at z = w_R is a panel edge.
    let mut total = 0.0;
    let below = 32;
    for k in 0..below {
        let a = lower + (w_r - lower) * k as f64 / below as f64;
        let b = lower + (w_r - lower) * (k + 1) as f64 / below as f64;
        total += outer_panel(a, b);
    }
    let above = 8;
    for k in 0..above {
        let a = w_r + (w_f - w_r) * k as f64 / above as f64;
        let b = w_r + (w_f - w_r) * (k + 1) as f64 / above as f64;
        total += outer_panel(a, b);
    }
    if failed || !total.is_finite() {
        return Err(fail());
    }
    Ok(total * log_scale.exp())
}

pub fn integral_i_bruteforce(n_e: f64, n_i: f64, model: &Model, pop: Population) -> Result<f64> {
    let r = ReducedVariables::new(model, pop, n_e, n_i)?;
    reduced_integral_bruteforce(r.w_f, r.w_r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::OnePopParameters;

    #[test]
    fn coincident_limits_give_zero() {
        assert_eq!(reduced_integral(0.7, 0.7).unwrap(), 0.0);
        assert_eq!(reduced_integral_bruteforce(0.7, 0.7).unwrap(), 0.0);
    }

    #[test]
    fn series_matches_direct_form_at_switch() {
        let (wf, wr) = (1.7, -0.4);
        let s = SERIES_SWITCH;
        let direct = ((s * wf).exp() - (s * wr).exp()) / s;
        assert!((difference_quotient_series(s, wf, wr) - direct).abs() < 1e-13);
    }

    #[test]
    fn zero_rates_match_double_form() {
        let model = Model::One(OnePopParameters::default());
        let single = integral_i(0.0, 0.0, &model, Population::Excitatory).unwrap();
        let double = integral_i_bruteforce(0.0, 0.0, &model, Population::Excitatory).unwrap();
        assert!((single - double).abs() <= 1e-8 * double, "{single} vs {double}");
    }

    #[test]
    fn increasing_in_excitatory_rate_for_inhibited_population() {
        // For pop E the drive rises with N_E, so I falls; with b < 0 in the
        // one-population model the drive falls and I rises.
        let model = Model::One(OnePopParameters { b: -2.0, ..Default::default() });
        let mut prev = 0.0;
        for k in 0..10 {
            let n = 0.5 * k as f64;
            let v = integral_i(n, 0.0, &model, Population::Excitatory).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn huge_threshold_distance_saturates_to_infinity() {
        assert_eq!(reduced_integral(60.0, 59.0).unwrap(), f64::INFINITY);
    }
}
