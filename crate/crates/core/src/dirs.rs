//! Disco IRS model: the random discrete reflection process, the two jammer
//! timing modes, and the channel algebra built on a reflection state.
//!
//! Every element independently picks phase index `i` with probability `P_i`
//! and then reflects with `mu_i * exp(j theta_i)`. A frame is one RPT state
//! followed by `C` DT sub-slot states, all drawn independently. In temporal
//! mode the RPT state is exactly zero (the surface absorbs everything).

use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelSet;
use crate::cplx::{CMat, C64, ZERO};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JammerMode {
    /// Reflection changes in both the RPT and the DT phase.
    Persistent,
    /// Silent during RPT, random during DT.
    Temporal,
}

impl JammerMode {
    pub fn as_str(self) -> &'static str {
        match self {
            JammerMode::Persistent => "persistent",
            JammerMode::Temporal => "temporal",
        }
    }
}

impl std::str::FromStr for JammerMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "persistent" => Ok(JammerMode::Persistent),
            "temporal" => Ok(JammerMode::Temporal),
            other => Err(Error::InvalidConfig(format!("unknown jammer mode '{other}'"))),
        }
    }
}

/// The two one-bit phase distributions used throughout the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DirsCase {
    /// P = (0.25, 0.75)
    C1,
    /// P = (0.5, 0.5)
    C2,
}

impl DirsCase {
    pub fn as_str(self) -> &'static str {
        match self {
            DirsCase::C1 => "c1",
            DirsCase::C2 => "c2",
        }
    }

    pub fn probs(self) -> [f64; 2] {
        match self {
            DirsCase::C1 => [0.25, 0.75],
            DirsCase::C2 => [0.5, 0.5],
        }
    }
}

impl std::str::FromStr for DirsCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "c1" | "C1" => Ok(DirsCase::C1),
            "c2" | "C2" => Ok(DirsCase::C2),
            other => Err(Error::InvalidConfig(format!("unknown DIRS case '{other}'"))),
        }
    }
}

/// Phase alphabet, phase-dependent gains and selection probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirsProfile {
    /// Phase set (rad), `2^b` entries.
    pub theta: Vec<f64>,
    /// Amplitude paired with each phase.
    pub gains: Vec<f64>,
    /// Selection probability of each phase.
    pub probs: Vec<f64>,
    pub mode: JammerMode,
}

impl DirsProfile {
    pub fn new(theta: Vec<f64>, gains: Vec<f64>, probs: Vec<f64>, mode: JammerMode) -> Result<Self> {
        let p = Self { theta, gains, probs, mode };
        p.validate()?;
        Ok(p)
    }

    /// One-bit surface with `Theta = {pi/9, 7pi/6}` and `Omega = {0.8, 1}`.
    pub fn one_bit(case: DirsCase, mode: JammerMode) -> Self {
        use std::f64::consts::PI;
        Self {
            theta: vec![PI / 9.0, 7.0 * PI / 6.0],
            gains: vec![0.8, 1.0],
            probs: case.probs().to_vec(),
            mode,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.theta.len();
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::InvalidConfig(format!("phase set has {n} entries, expected 2^b")));
        }
        if self.gains.len() != n || self.probs.len() != n {
            return Err(Error::InvalidConfig(format!(
                "theta/gains/probs lengths differ: {}/{}/{}",
                n,
                self.gains.len(),
                self.probs.len()
            )));
        }
        if self.probs.iter().any(|p| !(*p >= 0.0)) {
            return Err(Error::InvalidConfig("negative phase probability".into()));
        }
        let total: f64 = self.probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!("probabilities sum to {total}")));
        }
        if self.gains.iter().any(|g| !(*g > 0.0 && *g <= 1.0)) {
            return Err(Error::InvalidConfig("gains must lie in (0, 1]".into()));
        }
        Ok(())
    }

    /// Quantization bits `b`.
    pub fn bits(&self) -> u32 {
        self.theta.len().trailing_zeros()
    }

    /// Reflection coefficient for phase index `i`.
    pub fn coefficient(&self, i: usize) -> C64 {
        C64::from_polar(self.gains[i], self.theta[i])
    }

    pub fn alphabet(&self) -> Vec<C64> {
        (0..self.theta.len()).map(|i| self.coefficient(i)).collect()
    }
}

/// `phi(t)` for every element, plus the phase index each element picked.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectionState {
    pub coeffs: Vec<C64>,
    /// `None` for the silent (all-zero) state.
    pub indices: Option<Vec<usize>>,
}

impl ReflectionState {
    pub fn silent(n_d: usize) -> Self {
        Self { coeffs: vec![ZERO; n_d], indices: None }
    }

    pub fn is_silent(&self) -> bool {
        self.indices.is_none()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }
}

/// One channel coherence interval: the RPT state and `C` DT sub-slot states.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceFrame {
    pub rpt: ReflectionState,
    pub dt: Vec<ReflectionState>,
}

pub fn sample_reflection<R: Rng + ?Sized>(profile: &DirsProfile, n_d: usize, rng: &mut R) -> ReflectionState {
    let picker = WeightedIndex::new(&profile.probs).expect("validated profile");
    let alphabet = profile.alphabet();
    let indices: Vec<usize> = (0..n_d).map(|_| picker.sample(rng)).collect();
    let coeffs = indices.iter().map(|&i| alphabet[i]).collect();
    ReflectionState { coeffs, indices: Some(indices) }
}

/// RPT state first (skipped in temporal mode), then `frame_ratio` DT states.
pub fn sample_frame<R: Rng + ?Sized>(
    profile: &DirsProfile,
    n_d: usize,
    frame_ratio: usize,
    rng: &mut R,
) -> CoherenceFrame {
    let rpt = match profile.mode {
        JammerMode::Persistent => sample_reflection(profile, n_d, rng),
        JammerMode::Temporal => ReflectionState::silent(n_d),
    };
    let dt = (0..frame_ratio).map(|_| sample_reflection(profile, n_d, rng)).collect();
    CoherenceFrame { rpt, dt }
}

fn check_state(channels: &ChannelSet, coeffs: &[C64]) -> Result<()> {
    if coeffs.len() != channels.n_d() || channels.h_i.ncols() != channels.n_d() {
        return Err(Error::DimensionMismatch(format!(
            "reflection of length {} against N_D = {} (H_I has {} columns)",
            coeffs.len(),
            channels.n_d(),
            channels.h_i.ncols()
        )));
    }
    if channels.h_i.nrows() != channels.h_d.nrows() || channels.g.ncols() != channels.h_d.ncols() {
        return Err(Error::DimensionMismatch("H_I, G and H_d disagree".into()));
    }
    Ok(())
}

/// `H_I diag(phi) G` as a `K x N_A` matrix (row k is the IRS path of user k).
pub fn reflected_rows(channels: &ChannelSet, coeffs: &[C64]) -> Result<CMat> {
    check_state(channels, coeffs)?;
    let mut scaled = channels.h_i.clone();
    for (r, &phi) in coeffs.iter().enumerate() {
        for z in scaled.column_mut(r).iter_mut() {
            *z *= phi;
        }
    }
    Ok(scaled * &channels.g)
}

/// `N_A x K` matrix whose column k is `(h_{I,k} diag(phi) G + h_{d,k})^H`.
pub fn combined_channel(channels: &ChannelSet, state: &ReflectionState) -> Result<CMat> {
    check_state(channels, &state.coeffs)?;
    if state.is_silent() {
        return Ok(channels.h_d.adjoint());
    }
    let rows = reflected_rows(channels, &state.coeffs)? + &channels.h_d;
    Ok(rows.adjoint())
}

/// `H_ACA = H_DT - H_RPT`.
pub fn aca_channel(h_dt: &CMat, h_rpt: &CMat) -> Result<CMat> {
    if h_dt.shape() != h_rpt.shape() {
        return Err(Error::DimensionMismatch(format!(
            "H_DT is {:?} but H_RPT is {:?}",
            h_dt.shape(),
            h_rpt.shape()
        )));
    }
    Ok(h_dt - h_rpt)
}
