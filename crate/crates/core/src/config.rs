//! JSON experiment configuration.
//!
//! Every field is optional. Powers are given in dBm, the Rician factor as a
//! scalar or one value per antenna, and the jammer either by reference case
//! name or by an explicit alphabet:
//!
//! ```json
//! {
//!   "scenario": { "k": 12, "n_d": 2048, "power_per_lu_dbm": -2, "rician_factor": 10 },
//!   "dirs": { "case": "c2", "mode": "temporal" },
//!   "experiment": { "sweep": "tx_power_per_lu=-14:-2:4", "drops": 100, "realizations": 20 }
//! }
//! ```

use std::path::Path;

use serde::Deserialize;

use crate::cplx::dbm_to_watts;
use crate::dirs::{DirsCase, DirsProfile, JammerMode};
use crate::error::{Error, Result};
use crate::harness::{parse_benchmarks, parse_sweep, ExperimentSpec};
use crate::scenario::{noise_variance, ScenarioConfig};

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ScalarOrVec {
    Scalar(f64),
    Vec(Vec<f64>),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub k: Option<usize>,
    pub n_a: Option<usize>,
    pub n_d: Option<usize>,
    pub d_ad: Option<f64>,
    pub wavelength: Option<f64>,
    pub spacing: Option<f64>,
    pub bandwidth_hz: Option<f64>,
    pub power_per_lu_dbm: Option<f64>,
    pub frame_ratio: Option<usize>,
    pub rician_factor: Option<ScalarOrVec>,
    /// Overrides the bandwidth-derived noise floor.
    pub noise_dbm: Option<f64>,
    pub lu_center: Option<[f64; 3]>,
    pub lu_radius: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirsSection {
    pub case: Option<String>,
    pub mode: Option<String>,
    pub b: Option<u32>,
    pub theta: Option<Vec<f64>>,
    pub gains: Option<Vec<f64>>,
    pub probs: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub benchmarks: Option<Vec<String>>,
    pub sweep: Option<String>,
    pub drops: Option<usize>,
    pub realizations: Option<usize>,
    pub seed: Option<u64>,
    pub realized_sjnr: Option<bool>,
    pub aj_power_dbm: Option<f64>,
    pub aj_position: Option<[f64; 3]>,
    pub feedback_noise: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub scenario: ScenarioSection,
    #[serde(default)]
    pub dirs: DirsSection,
    #[serde(default)]
    pub experiment: ExperimentSection,
}

impl ConfigFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn scenario(&self) -> Result<ScenarioConfig> {
        let s = &self.scenario;
        let mut cfg = ScenarioConfig::default();
        if let Some(v) = s.k {
            cfg.k = v;
        }
        if let Some(v) = s.n_a {
            cfg.n_a = v;
        }
        if let Some(v) = s.n_d {
            cfg.n_d = v;
        }
        if let Some(v) = s.d_ad {
            cfg.d_ad = v;
        }
        if let Some(v) = s.wavelength {
            cfg.wavelength = v;
            cfg.spacing = v / 2.0;
        }
        if let Some(v) = s.spacing {
            cfg.spacing = v;
        }
        if let Some(v) = s.bandwidth_hz {
            cfg.bandwidth_hz = v;
            cfg.noise_variance_w = noise_variance(v)?;
        }
        if let Some(v) = s.noise_dbm {
            cfg.noise_variance_w = dbm_to_watts(v);
        }
        cfg.set_power_per_lu_dbm(s.power_per_lu_dbm.unwrap_or(-2.0));
        if let Some(v) = s.frame_ratio {
            cfg.frame_ratio = v;
        }
        cfg.rician_factors = match &s.rician_factor {
            None => vec![10.0; cfg.n_a],
            Some(ScalarOrVec::Scalar(e)) => vec![*e; cfg.n_a],
            Some(ScalarOrVec::Vec(v)) => v.clone(),
        };
        if let Some(v) = s.lu_center {
            cfg.lu_center = v;
        }
        if let Some(v) = s.lu_radius {
            cfg.lu_radius = v;
        }
        if let Some(v) = s.seed {
            cfg.seed = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Profile and the label for the `case` column.
    pub fn profile(&self) -> Result<(DirsProfile, String)> {
        let d = &self.dirs;
        let mode: JammerMode = d.mode.as_deref().unwrap_or("persistent").parse()?;
        if let (Some(theta), Some(gains), Some(probs)) = (&d.theta, &d.gains, &d.probs) {
            if d.case.is_some() {
                return Err(Error::InvalidConfig("give either a DIRS case or an explicit alphabet, not both".into()));
            }
            let p = DirsProfile::new(theta.clone(), gains.clone(), probs.clone(), mode)?;
            if let Some(b) = d.b {
                if p.bits() != b {
                    return Err(Error::InvalidConfig(format!("b = {b} but the phase set has {} entries", theta.len())));
                }
            }
            return Ok((p, "custom".into()));
        }
        if d.theta.is_some() || d.gains.is_some() || d.probs.is_some() {
            return Err(Error::InvalidConfig("explicit alphabet needs theta, gains and probs".into()));
        }
        let case: DirsCase = d.case.as_deref().unwrap_or("c1").parse()?;
        Ok((DirsProfile::one_bit(case, mode), case.as_str().into()))
    }

    pub fn experiment(&self) -> Result<ExperimentSpec> {
        let (profile, case_label) = self.profile()?;
        let e = &self.experiment;
        let mut spec = ExperimentSpec { scenario: self.scenario()?, profile, case_label, ..Default::default() };
        if let Some(list) = &e.benchmarks {
            spec.benchmarks = parse_benchmarks(&list.join(","))?;
        }
        if let Some(s) = &e.sweep {
            spec.sweep = parse_sweep(s)?;
        }
        if let Some(v) = e.drops {
            spec.drops = v;
        }
        if let Some(v) = e.realizations {
            spec.realizations = v;
        }
        if let Some(v) = e.seed {
            spec.seed = v;
        }
        if let Some(v) = e.realized_sjnr {
            spec.realized_sjnr = v;
        }
        if let Some(v) = e.aj_power_dbm {
            spec.aj_power_w = dbm_to_watts(v);
        }
        if let Some(v) = e.aj_position {
            spec.aj_position = v;
        }
        if let Some(v) = e.feedback_noise {
            spec.feedback_noise = v;
        }
        spec.validate()?;
        Ok(spec)
    }
}
