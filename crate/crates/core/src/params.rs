//! Model constants for the one- and two-population networks.
//!
//! Connectivities, delays and diffusion coefficients follow the
//! `<source><target>` naming: `b_ie` is the strength of spikes emitted by
//! the inhibitory population and received by the excitatory one, and
//! `delay_ei` is the transmission delay from E to I.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How neurons leave the refractory state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RefractoryMode {
    /// `M = R / tau`.
    Ratio,
    /// `M(t) = N(t - tau)`.
    Delayed,
    /// No refractory state: neurons are reset as soon as they fire
    /// (`M = N`, `R` stays at 0).
    None,
}

impl RefractoryMode {
    pub fn name(self) -> &'static str {
        match self {
            RefractoryMode::Ratio => "ratio",
            RefractoryMode::Delayed => "delayed",
            RefractoryMode::None => "none",
        }
    }
}

impl std::str::FromStr for RefractoryMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "ratio" => Ok(RefractoryMode::Ratio),
            "delayed" => Ok(RefractoryMode::Delayed),
            "none" => Ok(RefractoryMode::None),
            other => Err(format!("unknown refractory mode '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Population {
    Excitatory,
    Inhibitory,
}

impl Population {
    pub fn label(self) -> &'static str {
        match self {
            Population::Excitatory => "E",
            Population::Inhibitory => "I",
        }
    }

    pub fn index(self) -> usize {
        match self {
            Population::Excitatory => 0,
            Population::Inhibitory => 1,
        }
    }
}

/// Constants of the coupled excitatory/inhibitory network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParameters {
    pub b_ee: f64,
    pub b_ie: f64,
    pub b_ii: f64,
    pub b_ei: f64,
    pub d_e: f64,
    pub d_i: f64,
    pub dcoef_ee: f64,
    pub dcoef_ie: f64,
    pub dcoef_ii: f64,
    pub dcoef_ei: f64,
    pub nu_e_ext: f64,
    pub delay_ee: f64,
    pub delay_ie: f64,
    pub delay_ii: f64,
    pub delay_ei: f64,
    pub tau_e: f64,
    pub tau_i: f64,
    pub v_f: f64,
    pub v_r: f64,
    pub refractory: RefractoryMode,
}

impl Default for ModelParameters {
    fn default() -> Self {
        ModelParameters {
            b_ee: 0.5,
            b_ie: 0.75,
            b_ii: 0.25,
            b_ei: 0.5,
            d_e: 1.0,
            d_i: 1.0,
            dcoef_ee: 0.0,
            dcoef_ie: 0.0,
            dcoef_ii: 0.0,
            dcoef_ei: 0.0,
            nu_e_ext: 0.0,
            delay_ee: 0.0,
            delay_ie: 0.0,
            delay_ii: 0.0,
            delay_ei: 0.0,
            tau_e: 0.025,
            tau_i: 0.025,
            v_f: 2.0,
            v_r: 1.0,
            refractory: RefractoryMode::Delayed,
        }
    }
}

impl ModelParameters {
    pub fn validate(self) -> Result<Self> {
        let mut errs = Vec::new();
        check_reset(self.v_r, self.v_f, &mut errs);
        for (name, v) in [
            ("b_EE", self.b_ee),
            ("b_IE", self.b_ie),
            ("b_II", self.b_ii),
            ("b_EI", self.b_ei),
            ("d_E", self.d_e),
            ("d_I", self.d_i),
            ("tau_E", self.tau_e),
            ("tau_I", self.tau_i),
        ] {
            positive(name, v, &mut errs);
        }
        for (name, v) in [
            ("dcoef_EE", self.dcoef_ee),
            ("dcoef_IE", self.dcoef_ie),
            ("dcoef_II", self.dcoef_ii),
            ("dcoef_EI", self.dcoef_ei),
            ("nu_E_ext", self.nu_e_ext),
            ("D_EE", self.delay_ee),
            ("D_IE", self.delay_ie),
            ("D_II", self.delay_ii),
            ("D_EI", self.delay_ei),
        ] {
            non_negative(name, v, &mut errs);
        }
        if errs.is_empty() {
            Ok(self)
        } else {
            Err(Error::InvalidParameters(errs))
        }
    }
}

/// Constants of the single-population network. The sign of `b` selects an
/// average-excitatory (`b > 0`) or average-inhibitory (`b < 0`) population.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OnePopParameters {
    pub b: f64,
    pub d0: f64,
    pub d1: f64,
    pub nu_ext: f64,
    pub tau: f64,
    pub delay: f64,
    pub v_f: f64,
    pub v_r: f64,
    pub refractory: RefractoryMode,
}

impl Default for OnePopParameters {
    fn default() -> Self {
        OnePopParameters {
            b: 0.0,
            d0: 1.0,
            d1: 0.0,
            nu_ext: 0.0,
            tau: 0.025,
            delay: 0.0,
            v_f: 2.0,
            v_r: 1.0,
            refractory: RefractoryMode::Ratio,
        }
    }
}

impl OnePopParameters {
    pub fn validate(self) -> Result<Self> {
        let mut errs = Vec::new();
        check_reset(self.v_r, self.v_f, &mut errs);
        positive("d0", self.d0, &mut errs);
        positive("tau", self.tau, &mut errs);
        non_negative("d1", self.d1, &mut errs);
        non_negative("D", self.delay, &mut errs);
        if !self.b.is_finite() {
            errs.push("b must be finite".to_string());
        }
        if !self.nu_ext.is_finite() {
            errs.push("nu_ext must be finite".to_string());
        }
        if errs.is_empty() {
            Ok(self)
        } else {
            Err(Error::InvalidParameters(errs))
        }
    }
}

fn check_reset(v_r: f64, v_f: f64, errs: &mut Vec<String>) {
    if !(v_r.is_finite() && v_f.is_finite()) {
        errs.push("V_R and V_F must be finite".to_string());
    } else if v_r >= v_f {
        errs.push(format!("V_R must be < V_F (V_R = {v_r}, V_F = {v_f})"));
    }
}

fn positive(name: &str, v: f64, errs: &mut Vec<String>) {
    if !(v > 0.0 && v.is_finite()) {
        errs.push(format!("{name} must be > 0 (got {v})"));
    }
}

fn non_negative(name: &str, v: f64, errs: &mut Vec<String>) {
    if !(v >= 0.0 && v.is_finite()) {
        errs.push(format!("{name} must be >= 0 (got {v})"));
    }
}

/// Either network, with the per-population coefficient evaluations shared
/// by the steady-state analysis and the time stepper.
///
/// For the one-population model only [`Population::Excitatory`] exists and
/// its rate is passed in the `n_e` slot; `n_i` is ignored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    One(OnePopParameters),
    Two(ModelParameters),
}

impl Model {
    pub fn validate(self) -> Result<Self> {
        match self {
            Model::One(p) => p.validate().map(Model::One),
            Model::Two(p) => p.validate().map(Model::Two),
        }
    }

    pub fn populations(&self) -> &'static [Population] {
        match self {
            Model::One(_) => &[Population::Excitatory],
            Model::Two(_) => &[Population::Excitatory, Population::Inhibitory],
        }
    }

    pub fn is_two_population(&self) -> bool {
        matches!(self, Model::Two(_))
    }

    pub fn v_f(&self) -> f64 {
        match self {
            Model::One(p) => p.v_f,
            Model::Two(p) => p.v_f,
        }
    }

    pub fn v_r(&self) -> f64 {
        match self {
            Model::One(p) => p.v_r,
            Model::Two(p) => p.v_r,
        }
    }

    pub fn refractory_mode(&self) -> RefractoryMode {
        match self {
            Model::One(p) => p.refractory,
            Model::Two(p) => p.refractory,
        }
    }

    pub fn tau(&self, pop: Population) -> f64 {
        match (self, pop) {
            (Model::One(p), _) => p.tau,
            (Model::Two(p), Population::Excitatory) => p.tau_e,
            (Model::Two(p), Population::Inhibitory) => p.tau_i,
        }
    }

    /// Transmission delay of spikes emitted by `source` and received by `target`.
    pub fn delay(&self, source: Population, target: Population) -> f64 {
        use Population::*;
        match self {
            Model::One(p) => p.delay,
            Model::Two(p) => match (source, target) {
                (Excitatory, Excitatory) => p.delay_ee,
                (Excitatory, Inhibitory) => p.delay_ei,
                (Inhibitory, Excitatory) => p.delay_ie,
                (Inhibitory, Inhibitory) => p.delay_ii,
            },
        }
    }

    /// Effective mean drive `V_0`, so that the drift is `h = V_0 - v`.
    pub fn mean_drive(&self, pop: Population, n_e: f64, n_i: f64) -> f64 {
        match (self, pop) {
            (Model::One(p), _) => p.b * n_e + p.nu_ext,
            (Model::Two(p), Population::Excitatory) => p.b_ee * n_e - p.b_ie * n_i,
            (Model::Two(p), Population::Inhibitory) => {
                p.b_ei * n_e - p.b_ii * n_i + (p.b_ei - p.b_ee) * p.nu_e_ext
            }
        }
    }

    pub fn diffusion(&self, pop: Population, n_e: f64, n_i: f64) -> f64 {
        match (self, pop) {
            (Model::One(p), _) => p.d0 + p.d1 * n_e,
            (Model::Two(p), Population::Excitatory) => {
                p.d_e + p.dcoef_ee * n_e + p.dcoef_ie * n_i
            }
            (Model::Two(p), Population::Inhibitory) => {
                p.d_i + p.dcoef_ei * n_e + p.dcoef_ii * n_i
            }
        }
    }

    /// Whether the diffusion coefficients are independent of the rates.
    pub fn has_constant_diffusion(&self) -> bool {
        match self {
            Model::One(p) => p.d1 == 0.0,
            Model::Two(p) => {
                p.dcoef_ee == 0.0 && p.dcoef_ie == 0.0 && p.dcoef_ii == 0.0 && p.dcoef_ei == 0.0
            }
        }
    }

    pub fn with_refractory(mut self, mode: RefractoryMode) -> Self {
        match &mut self {
            Model::One(p) => p.refractory = mode,
            Model::Two(p) => p.refractory = mode,
        }
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let p = OnePopParameters::default();
        assert_eq!(p.v_f, 2.0);
        assert_eq!(p.v_r, 1.0);
        assert_eq!(p.d0, 1.0);
        assert!(p.validate().is_ok());
        assert!(ModelParameters::default().validate().is_ok());
    }

    #[test]
    fn reset_at_threshold_is_rejected() {
        let p = OnePopParameters { v_r: 2.0, v_f: 2.0, ..Default::default() };
        let err = p.validate().unwrap_err();
        assert!(err.to_string().contains("V_R must be < V_F"), "{err}");
    }

    #[test]
    fn negative_tau_is_named() {
        let p = ModelParameters { tau_e: -0.1, ..Default::default() };
        match p.validate().unwrap_err() {
            Error::InvalidParameters(errs) => {
                assert_eq!(errs.len(), 1);
                assert!(errs[0].starts_with("tau_E"));
            }
            e => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn every_violation_is_reported() {
        let p = ModelParameters { tau_e: 0.0, delay_ii: -1.0, b_ee: -2.0, ..Default::default() };
        match p.validate().unwrap_err() {
            Error::InvalidParameters(errs) => assert_eq!(errs.len(), 3),
            e => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn excitatory_drive_has_no_external_term() {
        let p = ModelParameters { nu_e_ext: 20.0, b_ee: 3.0, b_ie: 7.0, ..Default::default() };
        let m = Model::Two(p);
        assert_eq!(m.mean_drive(Population::Excitatory, 1.0, 0.5), 3.0 - 3.5);
        let expected_i = p.b_ei * 1.0 - p.b_ii * 0.5 + (p.b_ei - p.b_ee) * 20.0;
        assert_eq!(m.mean_drive(Population::Inhibitory, 1.0, 0.5), expected_i);
    }

    #[test]
    fn delays_follow_source_target_naming() {
        let p = ModelParameters { delay_ee: 1.0, delay_ei: 2.0, delay_ie: 3.0, delay_ii: 4.0, ..Default::default() };
        let m = Model::Two(p);
        use Population::*;
        assert_eq!(m.delay(Excitatory, Inhibitory), 2.0);
        assert_eq!(m.delay(Inhibitory, Excitatory), 3.0);
    }
}
