//! Run diagnostics: relative entropy, blow-up proxies and outcome classification.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::steady::SteadyStateSolution;

/// Reference density values below this are excluded from the entropy.
pub const ENTROPY_CUTOFF: f64 = 1e-14;

/// `sum_alpha int (rho - rho_inf)^2 / rho_inf dv + (R - R_inf)^2 / R_inf`,
/// i.e. the relative entropy with `G(x) = (x - 1)^2`. `densities[k]` and
/// `refractory[k]` belong to the `k`-th population of `reference`. Pass
/// `include_refractory = false` for models without a refractory state.
pub fn relative_entropy(
    densities: &[&[f64]],
    refractory: &[f64],
    reference: &SteadyStateSolution,
    grid: &Grid,
    include_refractory: bool,
) -> Result<f64> {
    if densities.len() != reference.populations.len() || refractory.len() != densities.len() {
        return Err(Error::InvalidReference(format!(
            "reference has {} populations, state has {}",
            reference.populations.len(),
            densities.len()
        )));
    }
    let mut total = 0.0;
    let mut integrand = vec![0.0; grid.len()];
    for ((rho, &r), pop) in densities.iter().zip(refractory).zip(&reference.populations) {
        let rho_inf = pop.profile.values();
        if rho.len() != rho_inf.len() {
            return Err(Error::InvalidReference("profile and state lengths differ".into()));
        }
        for ((w, &x), &x_inf) in integrand.iter_mut().zip(rho.iter()).zip(rho_inf) {
            *w = if x_inf < ENTROPY_CUTOFF { 0.0 } else { (x - x_inf).powi(2) / x_inf };
        }
        total += grid.integrate(&integrand);
        if include_refractory {
            if !(pop.refractory > 0.0) {
                return Err(Error::InvalidReference(format!(
                    "stationary refractory fraction of {} is {}",
                    pop.population.label(),
                    pop.refractory
                )));
            }
            total += (r - pop.refractory).powi(2) / pop.refractory;
        }
    }
    Ok(total)
}

/// Thresholds of the blow-up proxy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowupThresholds {
    pub n_cap: f64,
    pub dt_floor: f64,
}

impl Default for BlowupThresholds {
    fn default() -> Self {
        BlowupThresholds { n_cap: 1e4, dt_floor: 1e-10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlowupTrigger {
    RateCap,
    TimestepFloor,
    NonFinite,
}

impl BlowupTrigger {
    pub fn name(self) -> &'static str {
        match self {
            BlowupTrigger::RateCap => "rate_cap",
            BlowupTrigger::TimestepFloor => "timestep_floor",
            BlowupTrigger::NonFinite => "non_finite",
        }
    }
}

/// Checks the proxies in the order non-finite state, rate cap, time-step floor.
pub fn detect_blowup(
    rates: &[f64],
    dt: f64,
    finite: bool,
    thresholds: &BlowupThresholds,
) -> Option<BlowupTrigger> {
    if !finite || rates.iter().any(|n| !n.is_finite()) {
        Some(BlowupTrigger::NonFinite)
    } else if rates.iter().any(|&n| n > thresholds.n_cap) {
        Some(BlowupTrigger::RateCap)
    } else if dt < thresholds.dt_floor {
        Some(BlowupTrigger::TimestepFloor)
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum OutcomeKind {
    Steady,
    Periodic,
    Blowup,
    Undetermined,
}

impl OutcomeKind {
    pub fn name(self) -> &'static str {
        match self {
            OutcomeKind::Steady => "STEADY",
            OutcomeKind::Periodic => "PERIODIC",
            OutcomeKind::Blowup => "BLOWUP",
            OutcomeKind::Undetermined => "UNDETERMINED",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyOptions {
    /// Trailing fraction of the run that is examined.
    pub window: f64,
    /// Maximal `(max - min) / mean` of a steady rate.
    pub flatness: f64,
    pub min_peaks: usize,
    /// Maximal coefficient of variation of the peak spacing.
    pub spacing_cv: f64,
    /// Maximal relative loss of peak height across the window.
    pub amplitude_decay: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { window: 0.3, flatness: 1e-3, min_peaks: 4, spacing_cv: 0.05, amplitude_decay: 0.10 }
    }
}

/// Verdict on a single rate signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalClass {
    pub kind: OutcomeKind,
    pub period: Option<f64>,
    /// `max - min` over the window.
    pub amplitude: f64,
    /// Time average over the window.
    pub mean: f64,
    pub peaks: usize,
}

/// Time average of `y` over `[t[0], t[last]]` by the trapezoid rule.
pub fn time_average(t: &[f64], y: &[f64]) -> f64 {
    if t.len() < 2 {
        return y.first().copied().unwrap_or(0.0);
    }
    let span = t[t.len() - 1] - t[0];
    if span <= 0.0 {
        return y[y.len() - 1];
    }
    let mut acc = 0.0;
    for k in 1..t.len() {
        acc += 0.5 * (y[k] + y[k - 1]) * (t[k] - t[k - 1]);
    }
    acc / span
}

/// Maxima of the excursions of `y` above `level`: one peak per maximal run
/// of consecutive samples above it, so small wiggles near a crest count once.
fn excursion_peaks(t: &[f64], y: &[f64], level: f64) -> Vec<(f64, f64)> {
    let mut peaks = Vec::new();
    let mut current: Option<(f64, f64)> = None;
    // An excursion already in progress at the window start is incomplete.
    let mut armed = y.first().is_none_or(|&v| v <= level);
    for (&tk, &yk) in t.iter().zip(y) {
        if yk > level {
            if armed {
                current = match current {
                    Some((_, best)) if best >= yk => current,
                    _ => Some((tk, yk)),
                };
            }
        } else {
            if let Some(p) = current.take() {
                peaks.push(p);
            }
            armed = true;
        }
    }
    peaks
}

/// Classifies the rate signal `(t, y)` from its trailing window.
pub fn classify_signal(t: &[f64], y: &[f64], opts: &ClassifyOptions) -> SignalClass {
    let undetermined = SignalClass { kind: OutcomeKind::Undetermined, period: None, amplitude: 0.0, mean: 0.0, peaks: 0 };
    if t.is_empty() || t.len() != y.len() {
        return undetermined;
    }
    let t_end = t[t.len() - 1];
    let t_start = t_end - opts.window * (t_end - t[0]);
    let first = t.partition_point(|&s| s < t_start);
    let (tw, yw) = (&t[first..], &y[first..]);
    let max = yw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = yw.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = time_average(tw, yw);
    let amplitude = max - min;
    let mut class = SignalClass { mean, amplitude, ..undetermined };
    if amplitude / mean.max(1e-12) < opts.flatness {
        class.kind = OutcomeKind::Steady;
        return class;
    }
    let peaks = excursion_peaks(tw, yw, mean);
    class.peaks = peaks.len();
    if peaks.len() < opts.min_peaks {
        return class;
    }
    let spacings: Vec<f64> = peaks.windows(2).map(|w| w[1].0 - w[0].0).collect();
    let m = spacings.iter().sum::<f64>() / spacings.len() as f64;
    let var = spacings.iter().map(|s| (s - m).powi(2)).sum::<f64>() / spacings.len() as f64;
    let cv = var.sqrt() / m;
    let first_height = peaks[0].1 - min;
    let last_height = peaks[peaks.len() - 1].1 - min;
    if cv < opts.spacing_cv && last_height >= (1.0 - opts.amplitude_decay) * first_height {
        class.kind = OutcomeKind::Periodic;
        class.period = Some(m);
    }
    class
}

/// Combined verdict over populations: periodic if any population oscillates,
/// steady if all are steady, undetermined otherwise.
pub fn combine_classes(classes: &[SignalClass]) -> OutcomeKind {
    if classes.iter().any(|c| c.kind == OutcomeKind::Periodic) {
        OutcomeKind::Periodic
    } else if !classes.is_empty() && classes.iter().all(|c| c.kind == OutcomeKind::Steady) {
        OutcomeKind::Steady
    } else {
        OutcomeKind::Undetermined
    }
}
