//! Firing-rate history for delayed lookups.
//!
//! The rate is sampled on the fixed instants `k * dt_bar`; a sample is
//! produced by linear interpolation in time whenever a recorded step crosses
//! one of those instants. Only the samples still needed to interpolate at
//! `t - delay` are retained.

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Slots per delay when `dt_bar` is not given.
pub const DEFAULT_SLOTS: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct DelayBuffer {
    delay: f64,
    dt_bar: f64,
    slots: usize,
    samples: VecDeque<(f64, f64)>,
    next_instant: u64,
    last: Option<(f64, f64)>,
    prehistory: f64,
}

impl DelayBuffer {
    /// Buffer for `delay` with sample spacing `dt_bar` (default `delay / 64`).
    pub fn new(delay: f64, dt_bar: Option<f64>) -> Result<Self> {
        if !(delay >= 0.0 && delay.is_finite()) {
            return Err(Error::InvalidConfig(format!("delay must be >= 0 (got {delay})")));
        }
        let dt_bar = match dt_bar {
            Some(d) if !(d > 0.0) => {
                return Err(Error::InvalidConfig(format!("dt_bar must be > 0 (got {d})")));
            }
            Some(d) => d,
            None if delay > 0.0 => delay / DEFAULT_SLOTS as f64,
            None => f64::INFINITY,
        };
        let slots = if delay > 0.0 { ((delay / dt_bar).round() as usize).max(1) } else { 0 };
        Ok(DelayBuffer {
            delay,
            dt_bar,
            slots,
            samples: VecDeque::with_capacity(slots + 3),
            next_instant: 0,
            last: None,
            prehistory: 0.0,
        })
    }

    /// Value returned for lookups at `t <= 0` (zero unless set).
    pub fn with_prehistory(mut self, value: f64) -> Self {
        self.prehistory = value;
        self
    }

    pub fn delay(&self) -> f64 {
        self.delay
    }

    pub fn dt_bar(&self) -> f64 {
        self.dt_bar
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn stored(&self) -> usize {
        self.samples.len()
    }

    /// Records the rate `n` at time `t`.
    pub fn record(&mut self, t: f64, n: f64) -> Result<()> {
        if let Some((last_t, _)) = self.last {
            if t < last_t {
                return Err(Error::TimeReversal { last: last_t, new: t });
            }
        }
        if self.delay > 0.0 {
            loop {
                let instant = self.next_instant as f64 * self.dt_bar;
                if instant > t {
                    break;
                }
                let value = match self.last {
                    Some((t0, n0)) if t > t0 && instant > t0 => n0 + (n - n0) * (instant - t0) / (t - t0),
                    Some((t0, n0)) if instant <= t0 => n0,
                    _ => n,
                };
                self.samples.push_back((instant, value));
                self.next_instant += 1;
            }
            while self.samples.len() > self.slots + 2 {
                self.samples.pop_front();
            }
        }
        self.last = Some((t, n));
        Ok(())
    }

    /// Rate at `t_now - delay`.
    pub fn lookback(&self, t_now: f64) -> Result<f64> {
        if self.delay == 0.0 {
            return Ok(self.last.map_or(self.prehistory, |(_, n)| n));
        }
        self.query(t_now - self.delay)
    }

    /// Rate at `t_query` by linear interpolation of the stored samples.
    pub fn query(&self, t_query: f64) -> Result<f64> {
        if t_query <= 0.0 {
            return Ok(self.prehistory);
        }
        let Some((last_t, last_n)) = self.last else {
            return Ok(self.prehistory);
        };
        if t_query >= last_t {
            return Ok(last_n);
        }
        let Some(&(oldest, _)) = self.samples.front() else {
            return Ok(self.prehistory);
        };
        if t_query < oldest {
            return Err(Error::DelayWindowExceeded { query: t_query, oldest });
        }
        let (newest_t, newest_n) = *self.samples.back().expect("non-empty");
        if t_query >= newest_t {
            return Ok(interpolate((newest_t, newest_n), (last_t, last_n), t_query));
        }
        // Samples are uniform in time, so the bracket is found by index.
        let idx = ((t_query - oldest) / self.dt_bar).floor() as usize;
        let idx = idx.min(self.samples.len() - 2);
        let lo = self.samples[idx];
        let hi = self.samples[idx + 1];
        Ok(interpolate(lo, hi, t_query))
    }
}

fn interpolate((t0, n0): (f64, f64), (t1, n1): (f64, f64), t: f64) -> f64 {
    if t1 <= t0 {
        return n1;
    }
    n0 + (n1 - n0) * (t - t0) / (t1 - t0)
}
