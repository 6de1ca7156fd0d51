//! System geometry, propagation constants and large-scale fading.
//!
//! The AP is a uniform linear array starting at `(0, 0, 5)` and growing along
//! `+x`; the disco IRS is a uniform linear array starting at `(-d_AD, 0, 5)`
//! and growing along `-x`. Users are dropped uniformly over a horizontal disk
//! at height 0. The first antenna and the first reflecting element are the
//! deployment points used for every large-scale distance.
//!
//! Everything is linear scale internally. dB/dBm only appear in the config
//! file and in the `*_dbm` accessors.

use nalgebra::Point3;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cplx::dbm_to_watts;
use crate::error::{Error, Result};

/// Deployment point of the AP (first antenna).
pub const AP_ORIGIN: [f64; 3] = [0.0, 0.0, 5.0];
/// Height shared by the AP and the disco IRS.
pub const ARRAY_HEIGHT: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    /// Number of single-antenna users.
    pub k: usize,
    /// AP antennas.
    pub n_a: usize,
    /// Disco IRS reflecting elements.
    pub n_d: usize,
    /// AP to IRS distance (m).
    pub d_ad: f64,
    /// Carrier wavelength (m).
    pub wavelength: f64,
    /// Inter-element spacing for both arrays (m).
    pub spacing: f64,
    /// Transmission bandwidth (Hz).
    pub bandwidth_hz: f64,
    /// Total AP transmit power P0 (W), split evenly over the users.
    pub total_power_w: f64,
    /// DT phase length in units of the RPT phase (T_D = C * T_R).
    pub frame_ratio: usize,
    /// Rician factor of the AP-IRS link, one per AP antenna (linear).
    pub rician_factors: Vec<f64>,
    /// Receiver noise variance (W).
    pub noise_variance_w: f64,
    pub lu_center: [f64; 3],
    pub lu_radius: f64,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let k = 12;
        let n_a = 16;
        let wavelength = 0.05;
        let bandwidth_hz = 180e3;
        Self {
            k,
            n_a,
            n_d: 2048,
            d_ad: 2.0,
            wavelength,
            spacing: wavelength / 2.0,
            bandwidth_hz,
            total_power_w: k as f64 * dbm_to_watts(-2.0),
            frame_ratio: 6,
            rician_factors: vec![10.0; n_a],
            noise_variance_w: noise_variance(bandwidth_hz).expect("positive bandwidth"),
            lu_center: [0.0, 180.0, 0.0],
            lu_radius: 20.0,
            seed: 0,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.k == 0 {
            return bad("K must be at least 1".into());
        }
        if self.n_a < self.k {
            return bad(format!("N_A = {} < K = {} makes zero-forcing infeasible", self.n_a, self.k));
        }
        if self.n_d == 0 {
            return bad("N_D must be at least 1".into());
        }
        if self.frame_ratio == 0 {
            return bad("frame ratio C must be at least 1".into());
        }
        if !(self.d_ad > 0.0) {
            return Err(Error::NonPositiveDistance(self.d_ad));
        }
        if !(self.lu_radius > 0.0) {
            return Err(Error::NonPositiveDistance(self.lu_radius));
        }
        if !(self.wavelength > 0.0) || !(self.spacing > 0.0) {
            return bad("wavelength and spacing must be positive".into());
        }
        if !(self.total_power_w > 0.0) {
            return bad(format!("P0 must be positive, got {}", self.total_power_w));
        }
        if !(self.noise_variance_w > 0.0) {
            return bad(format!("noise variance must be positive, got {}", self.noise_variance_w));
        }
        if self.rician_factors.len() != self.n_a {
            return bad(format!(
                "{} Rician factors for {} antennas",
                self.rician_factors.len(),
                self.n_a
            ));
        }
        if let Some(&eps) = self.rician_factors.iter().find(|e| !(**e >= 0.0)) {
            return Err(Error::NegativeRicianFactor(eps));
        }
        Ok(())
    }

    /// Per-user transmit power p_k = P0 / K.
    pub fn power_per_lu(&self) -> f64 {
        self.total_power_w / self.k as f64
    }

    /// Set P0 from a per-user power in dBm.
    pub fn set_power_per_lu_dbm(&mut self, dbm: f64) {
        self.total_power_w = self.k as f64 * dbm_to_watts(dbm);
    }

    /// Deployment point of the disco IRS (first element).
    pub fn dirs_origin(&self) -> [f64; 3] {
        [-self.d_ad, 0.0, ARRAY_HEIGHT]
    }

    /// Resize the per-antenna Rician vector after `n_a` changed, keeping the
    /// first factor.
    pub fn resize_rician(&mut self) {
        let eps = self.rician_factors.first().copied().unwrap_or(10.0);
        self.rician_factors.resize(self.n_a, eps);
    }
}

/// Positions of every radiating element in the scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    pub ap_antennas: Vec<Point3<f64>>,
    pub dirs_elements: Vec<Point3<f64>>,
    pub lu_positions: Vec<Point3<f64>>,
}

impl Placement {
    pub fn ap_origin(&self) -> Point3<f64> {
        self.ap_antennas[0]
    }

    pub fn dirs_origin(&self) -> Point3<f64> {
        self.dirs_elements[0]
    }
}

/// Large-scale gains (linear).
#[derive(Debug, Clone, PartialEq)]
pub struct LargeScale {
    /// AP to IRS.
    pub l_g: f64,
    /// IRS to each user.
    pub l_i: Vec<f64>,
    /// AP to each user.
    pub l_d: Vec<f64>,
}

/// Place both arrays and drop `K` users uniformly over the configured disk.
pub fn build_scenario<R: Rng + ?Sized>(config: &ScenarioConfig, rng: &mut R) -> Result<Placement> {
    config.validate()?;
    let [ax, ay, az] = AP_ORIGIN;
    let ap_antennas = (0..config.n_a)
        .map(|n| Point3::new(ax + n as f64 * config.spacing, ay, az))
        .collect();
    let [dx, dy, dz] = config.dirs_origin();
    let dirs_elements = (0..config.n_d)
        .map(|r| Point3::new(dx - r as f64 * config.spacing, dy, dz))
        .collect();
    let [cx, cy, _] = config.lu_center;
    let lu_positions = (0..config.k)
        .map(|_| {
            // sqrt of a uniform radius gives a uniform density over the disk
            let rho = config.lu_radius * rng.random::<f64>().sqrt();
            let phi = std::f64::consts::TAU * rng.random::<f64>();
            Point3::new(cx + rho * phi.cos(), cy + rho * phi.sin(), 0.0)
        })
        .collect();
    Ok(Placement { ap_antennas, dirs_elements, lu_positions })
}

fn check_distance(d_p: f64) -> Result<()> {
    if d_p > 0.0 && d_p.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveDistance(d_p))
    }
}

/// LOS large-scale gain, 35.6 + 22 log10(d) dB of loss.
pub fn pathloss_los(d_p: f64) -> Result<f64> {
    check_distance(d_p)?;
    Ok(10f64.powf(-(35.6 + 22.0 * d_p.log10()) / 10.0))
}

/// NLOS large-scale gain, 32.6 + 36.7 log10(d) dB of loss.
pub fn pathloss_nlos(d_p: f64) -> Result<f64> {
    check_distance(d_p)?;
    Ok(10f64.powf(-(32.6 + 36.7 * d_p.log10()) / 10.0))
}

/// Thermal noise floor in dBm: -170 + 10 log10(BW).
pub fn noise_dbm(bandwidth_hz: f64) -> Result<f64> {
    if !(bandwidth_hz > 0.0) {
        return Err(Error::NonPositiveBandwidth(bandwidth_hz));
    }
    Ok(-170.0 + 10.0 * bandwidth_hz.log10())
}

/// Noise variance in watts.
pub fn noise_variance(bandwidth_hz: f64) -> Result<f64> {
    noise_dbm(bandwidth_hz).map(dbm_to_watts)
}

/// AP-IRS uses the LOS law; both user links use the NLOS law.
pub fn large_scale(placement: &Placement) -> Result<LargeScale> {
    let ap = placement.ap_origin();
    let irs = placement.dirs_origin();
    let l_g = pathloss_los(nalgebra::distance(&ap, &irs))?;
    let l_i = placement
        .lu_positions
        .iter()
        .map(|lu| pathloss_nlos(nalgebra::distance(&irs, lu)))
        .collect::<Result<_>>()?;
    let l_d = placement
        .lu_positions
        .iter()
        .map(|lu| pathloss_nlos(nalgebra::distance(&ap, lu)))
        .collect::<Result<_>>()?;
    Ok(LargeScale { l_g, l_i, l_d })
}
