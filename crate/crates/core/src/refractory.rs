use crate::delay::DelayBuffer;
use crate::error::Result;
use crate::params::RefractoryMode;

/// Excursions of `R` beyond `[0, 1]` larger than this are counted.
pub const R_TOLERANCE: f64 = 1e-6;

/// Refractory fraction of one population and the history needed to compute
/// the rate `M` at which neurons return to the reset potential.
#[derive(Debug, Clone, PartialEq)]
pub struct RefractoryState {
    mode: RefractoryMode,
    value: f64,
    tau: f64,
    history: Option<DelayBuffer>,
    clamp_count: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefractoryUpdate {
    pub r: f64,
    pub m: f64,
}

impl RefractoryState {
    /// In the delayed mode the rate history before `t = 0` is taken constant
    /// and equal to `r0 / tau`, so that the initially refractory neurons
    /// return during `[0, tau]`.
    pub fn new(mode: RefractoryMode, r0: f64, tau: f64, dt_bar: Option<f64>) -> Result<Self> {
        let history = match mode {
            RefractoryMode::Delayed => Some(DelayBuffer::new(tau, dt_bar)?.with_prehistory(r0 / tau)),
            _ => None,
        };
        let value = if mode == RefractoryMode::None { 0.0 } else { r0 };
        Ok(RefractoryState { mode, value, tau, history, clamp_count: 0 })
    }

    pub fn mode(&self) -> RefractoryMode {
        self.mode
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn clamp_count(&self) -> u64 {
        self.clamp_count
    }

    pub fn history(&self) -> Option<&DelayBuffer> {
        self.history.as_ref()
    }

    /// Return rate `M(t)`; `n_now` is the current firing rate, used only when
    /// there is no refractory state.
    pub fn reset_inflow(&self, t: f64, n_now: f64) -> Result<f64> {
        match self.mode {
            RefractoryMode::Ratio => Ok(self.value / self.tau),
            RefractoryMode::Delayed => {
                self.history.as_ref().expect("delayed mode keeps a history").lookback(t)
            }
            RefractoryMode::None => Ok(n_now),
        }
    }

    /// Explicit Euler step `R += dt (N - M)` with clamping to `[0, 1]`.
    pub fn advance(&mut self, dt: f64, n_now: f64, m: f64) {
        if self.mode == RefractoryMode::None {
            return;
        }
        let mut r = self.value + dt * (n_now - m);
        if r < -R_TOLERANCE || r > 1.0 + R_TOLERANCE {
            self.clamp_count += 1;
        }
        r = r.clamp(0.0, 1.0);
        self.value = r;
    }

    /// Stores the firing rate for later `N(t - tau)` lookups.
    pub fn record(&mut self, t: f64, n: f64) -> Result<()> {
        if let Some(h) = self.history.as_mut() {
            h.record(t, n)?;
        }
        Ok(())
    }

    /// `M` at time `t`, then `R` advanced over `[t, t + dt]` with rate `n_now`.
    pub fn update(&mut self, n_now: f64, dt: f64, t: f64) -> Result<RefractoryUpdate> {
        let m = self.reset_inflow(t, n_now)?;
        self.advance(dt, n_now, m);
        Ok(RefractoryUpdate { r: self.value, m })
    }
}
