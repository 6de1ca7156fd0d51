//! SJNR and rate metrics, plus the active-jammer baseline penalty.
//!
//! The active jammer is a single-antenna node with an NLOS Rayleigh link to
//! every user, using the same NLOS pathloss as the IRS-user links.

use nalgebra::Point3;
use rand::Rng;
use serde::Serialize;

use crate::cplx::{circular_gaussian, CMat};
use crate::error::{Error, Result};
use crate::scenario::{pathloss_nlos, Placement};

/// Default active-jammer location (m).
pub const AJ_POSITION: [f64; 3] = [-2.0, 0.0, 5.0];
/// Default active-jammer power (dBm).
pub const AJ_POWER_DBM: f64 = -4.0;

fn check(h: &CMat, w: &CMat) -> Result<()> {
    if h.shape() != w.shape() {
        return Err(Error::DimensionMismatch(format!("H is {:?}, W is {:?}", h.shape(), w.shape())));
    }
    Ok(())
}

/// Statistical SJNR of every user:
/// `w_k^H (h_k h_k^H + v_k I) w_k / (sum_{u != k} w_k^H (h_u h_u^H + v_u I) w_k + sigma^2 + extra_k)`.
///
/// `extra` is additional interference power per user (empty for none).
pub fn sjnr_statistical(h: &CMat, w: &CMat, variances: &[f64], noise: f64, extra: &[f64]) -> Result<Vec<f64>> {
    check(h, w)?;
    let users = h.ncols();
    if variances.len() != users || !(extra.is_empty() || extra.len() == users) {
        return Err(Error::DimensionMismatch(format!(
            "{users} users, {} variances, {} extra terms",
            variances.len(),
            extra.len()
        )));
    }
    // gains[(u, k)] = |h_u^H w_k|^2
    let cross = h.adjoint() * w;
    let total_v: f64 = variances.iter().sum();
    Ok((0..users)
        .map(|k| {
            let wk2 = w.column(k).norm_squared();
            let signal = cross[(k, k)].norm_sqr() + variances[k] * wk2;
            let leak: f64 = (0..users).filter(|&u| u != k).map(|u| cross[(u, k)].norm_sqr()).sum::<f64>()
                + (total_v - variances[k]) * wk2;
            let e = extra.get(k).copied().unwrap_or(0.0);
            signal / (leak + noise + e)
        })
        .collect())
}

/// Realized SJNR over DT sub-slots, ratio of means:
/// `avg_t |h_{t,k}^H w_k|^2 / (avg_t sum_{u != k} |h_{t,u}^H w_k|^2 + sigma^2)`.
/// Like the statistical form, interference is the leakage of `w_k`.
pub fn sjnr_realized(slots: &[CMat], w: &CMat, noise: f64) -> Result<Vec<f64>> {
    let first = slots.first().ok_or_else(|| Error::InvalidConfig("need at least one sub-slot".into()))?;
    let users = first.ncols();
    let mut num = vec![0.0; users];
    let mut den = vec![0.0; users];
    for h in slots {
        check(h, w)?;
        let cross = h.adjoint() * w;
        for k in 0..users {
            for u in 0..users {
                if u == k {
                    num[k] += cross[(k, k)].norm_sqr();
                } else {
                    den[k] += cross[(u, k)].norm_sqr();
                }
            }
        }
    }
    let t = slots.len() as f64;
    Ok(num.iter().zip(&den).map(|(n, d)| (n / t) / (d / t + noise)).collect())
}

pub fn sum_rate(sjnr: &[f64]) -> f64 {
    sjnr.iter().map(|e| (1.0 + e).log2()).sum()
}

/// `(1/K) sum_k log2(1 + eta_k)`.
pub fn rate_per_lu(sjnr: &[f64]) -> f64 {
    if sjnr.is_empty() {
        return 0.0;
    }
    sum_rate(sjnr) / sjnr.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub benchmark: String,
    pub sjnr: Vec<f64>,
    pub sum_rate: f64,
    pub rate_per_lu: f64,
}

impl RateReport {
    pub fn new(benchmark: impl Into<String>, sjnr: Vec<f64>) -> Self {
        let sum_rate = sum_rate(&sjnr);
        let rate_per_lu = rate_per_lu(&sjnr);
        Self { benchmark: benchmark.into(), sjnr, sum_rate, rate_per_lu }
    }
}

/// `P_J L_NLOS(d_{AJ,k}) |g_k|^2` per user with `g_k ~ CN(0, 1)`.
pub fn active_jammer_penalty<R: Rng + ?Sized>(
    position: Point3<f64>,
    power_w: f64,
    placement: &Placement,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if !(power_w >= 0.0) {
        return Err(Error::InvalidConfig(format!("jammer power must be non-negative, got {power_w}")));
    }
    placement
        .lu_positions
        .iter()
        .map(|lu| {
            let g = circular_gaussian(rng);
            Ok(power_w * pathloss_nlos(nalgebra::distance(&position, lu))? * g.norm_sqr())
        })
        .collect()
}
