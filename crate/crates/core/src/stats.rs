//! Closed-form statistics of the active-channel-aging (ACA) channel and a
//! Monte-Carlo oracle that checks them.
//!
//! Every ACA entry is a sum of `N_D` i.i.d. zero-mean per-element terms, so
//! it tends to `CN(0, L_G L_{I,k} N_D alpha_bar)`. The variance factor
//! `alpha_bar` depends only on the phase/gain alphabet and the jammer mode:
//!
//! * persistent: `sum_{i,j} P_i P_j (mu_i^2 + mu_j^2 - 2 mu_i mu_j cos(theta_i - theta_j))`,
//!   i.e. `E|phi_DT - phi_RPT|^2` for independent draws;
//! * temporal: `sum_i P_i mu_i^2`, i.e. `E|phi_DT|^2` against a silent RPT.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::channel::{los_matrix, sample_channels};
use crate::cplx::C64;
use crate::dirs::{reflected_rows, sample_frame, DirsProfile, JammerMode};
use crate::error::{Error, Result};
use crate::scenario::{build_scenario, large_scale, LargeScale, ScenarioConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum StatSource {
    ClosedFormPersistent,
    ClosedFormTemporal,
    /// Running estimate after `s` feedback reports.
    Estimated(usize),
}

/// Per-user ACA variance `v_k = L_G L_{I,k} N_D alpha_bar`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcaStatistics {
    pub alpha_bar: f64,
    pub per_lu_variance: Vec<f64>,
    pub source: StatSource,
}

impl AcaStatistics {
    /// No aging at all (unjammed link).
    pub fn zero(k: usize) -> Self {
        Self { alpha_bar: 0.0, per_lu_variance: vec![0.0; k], source: StatSource::ClosedFormTemporal }
    }

    pub fn from_estimates(estimates: Vec<f64>, s: usize) -> Self {
        Self { alpha_bar: f64::NAN, per_lu_variance: estimates, source: StatSource::Estimated(s) }
    }

    pub fn total(&self) -> f64 {
        self.per_lu_variance.iter().sum()
    }
}

pub fn alpha_bar_persistent(profile: &DirsProfile) -> f64 {
    let n = profile.theta.len();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let (mi, mj) = (profile.gains[i], profile.gains[j]);
            let d = mi * mi + mj * mj - 2.0 * mi * mj * (profile.theta[i] - profile.theta[j]).cos();
            acc += profile.probs[i] * profile.probs[j] * d;
        }
    }
    acc
}

pub fn alpha_bar_temporal(profile: &DirsProfile) -> f64 {
    profile.probs.iter().zip(&profile.gains).map(|(p, mu)| p * mu * mu).sum()
}

/// `alpha_bar` for the profile's own mode.
pub fn alpha_bar(profile: &DirsProfile) -> f64 {
    match profile.mode {
        JammerMode::Persistent => alpha_bar_persistent(profile),
        JammerMode::Temporal => alpha_bar_temporal(profile),
    }
}

pub fn aca_variances(config: &ScenarioConfig, profile: &DirsProfile, ls: &LargeScale) -> AcaStatistics {
    let (alpha_bar, source) = match profile.mode {
        JammerMode::Persistent => (alpha_bar_persistent(profile), StatSource::ClosedFormPersistent),
        JammerMode::Temporal => (alpha_bar_temporal(profile), StatSource::ClosedFormTemporal),
    };
    let scale = ls.l_g * config.n_d as f64 * alpha_bar;
    AcaStatistics {
        alpha_bar,
        per_lu_variance: ls.l_i.iter().map(|l_i| scale * l_i).collect(),
        source,
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &KahanSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct EntryAcc {
    re: KahanSum,
    im: KahanSum,
    sq: KahanSum,
}

impl EntryAcc {
    fn push(&mut self, z: C64) {
        self.re.add(z.re);
        self.im.add(z.im);
        self.sq.add(z.norm_sqr());
    }

    fn merge(&mut self, o: &EntryAcc) {
        self.re.merge(&o.re);
        self.im.merge(&o.im);
        self.sq.merge(&o.sq);
    }
}

#[derive(Debug, Clone)]
pub struct MomentOptions {
    pub frames: usize,
    /// How many (RPT, DT sub-slot) pairs of each frame contribute. Pairs in
    /// one frame share channels and RPT state, so only the first pair is an
    /// independent draw.
    pub pairs_per_frame: usize,
    /// Entry `(k, n)` whose raw samples (first pair of each frame) are kept.
    pub track: Option<(usize, usize)>,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EntryMoment {
    pub k: usize,
    pub n: usize,
    pub mean: (f64, f64),
    pub var_emp: f64,
    pub var_closed: f64,
    /// Standard error of the mean modulus, `sqrt(var / samples)`.
    pub mean_se: f64,
}

impl EntryMoment {
    pub fn ratio(&self) -> f64 {
        self.var_emp / self.var_closed
    }

    pub fn mean_norm(&self) -> f64 {
        C64::new(self.mean.0, self.mean.1).norm()
    }
}

#[derive(Debug, Clone)]
pub struct MomentReport {
    pub entries: Vec<EntryMoment>,
    pub samples_per_entry: usize,
    pub closed_form: AcaStatistics,
    pub tracked: Vec<C64>,
}

impl MomentReport {
    pub fn entry(&self, k: usize, n: usize) -> &EntryMoment {
        self.entries.iter().find(|e| e.k == k && e.n == n).expect("entry in range")
    }

    /// Largest `|var_emp / var_closed - 1|` over all entries.
    pub fn worst_variance_error(&self) -> f64 {
        self.entries.iter().map(|e| (e.ratio() - 1.0).abs()).fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "k,n,mean_re,mean_im,var_emp,var_closed,ratio")?;
        for e in &self.entries {
            writeln!(
                out,
                "{},{},{:e},{:e},{:e},{:e},{:.6}",
                e.k,
                e.n,
                e.mean.0,
                e.mean.1,
                e.var_emp,
                e.var_closed,
                e.ratio()
            )?;
        }
        Ok(())
    }
}

struct Block {
    acc: Vec<EntryAcc>,
    tracked: Vec<C64>,
}

/// Brute-force ACA moments: the user drop is fixed by `config.seed`; every
/// frame redraws all small-scale channels and a full jammer frame, then
/// forms `H_ACA = H_I (Phi_DT - Phi_RPT) G` for the requested pairs.
pub fn empirical_aca_moments(
    config: &ScenarioConfig,
    profile: &DirsProfile,
    opts: &MomentOptions,
) -> Result<MomentReport> {
    if opts.frames == 0 {
        return Err(Error::InvalidConfig("need at least one frame".into()));
    }
    let pairs = opts.pairs_per_frame.clamp(1, config.frame_ratio);
    let placement = build_scenario(config, &mut ChaCha8Rng::seed_from_u64(config.seed))?;
    let ls = large_scale(&placement)?;
    let los = los_matrix(&placement, config.wavelength);
    let (k_count, n_a) = (config.k, config.n_a);
    if let Some((k, n)) = opts.track {
        if k >= k_count || n >= n_a {
            return Err(Error::IndexOutOfRange(format!("tracked entry ({k}, {n})")));
        }
    }

    let run_block = |range: std::ops::Range<usize>| -> Result<Block> {
        let mut acc = vec![EntryAcc::default(); k_count * n_a];
        let mut tracked = Vec::new();
        for frame in range {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(frame as u64));
            let ch = sample_channels(&placement, &ls, &los, &config.rician_factors, &mut rng)?;
            let f = sample_frame(profile, config.n_d, config.frame_ratio, &mut rng);
            for (p, dt) in f.dt.iter().take(pairs).enumerate() {
                let delta: Vec<C64> = dt.coeffs.iter().zip(&f.rpt.coeffs).map(|(d, r)| d - r).collect();
                // rows are users, columns antennas; conjugation does not change moments
                let aca = reflected_rows(&ch, &delta)?;
                for k in 0..k_count {
                    for n in 0..n_a {
                        acc[k * n_a + n].push(aca[(k, n)]);
                    }
                }
                if p == 0 {
                    if let Some((k, n)) = opts.track {
                        tracked.push(aca[(k, n)]);
                    }
                }
            }
        }
        Ok(Block { acc, tracked })
    };

    const BLOCK: usize = 64;
    let ranges: Vec<_> = (0..opts.frames).step_by(BLOCK).map(|s| s..(s + BLOCK).min(opts.frames)).collect();
    #[cfg(feature = "parallel")]
    let blocks: Vec<Result<Block>> = {
        use rayon::prelude::*;
        ranges.into_par_iter().map(run_block).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let blocks: Vec<Result<Block>> = ranges.into_iter().map(run_block).collect();

    let mut total = vec![EntryAcc::default(); k_count * n_a];
    let mut tracked = Vec::new();
    for b in blocks {
        let b = b?;
        for (t, a) in total.iter_mut().zip(&b.acc) {
            t.merge(a);
        }
        tracked.extend(b.tracked);
    }

    let closed = aca_variances(config, profile, &ls);
    let samples = opts.frames * pairs;
    let n = samples as f64;
    let entries = (0..k_count)
        .flat_map(|k| (0..n_a).map(move |a| (k, a)))
        .map(|(k, a)| {
            let e = &total[k * n_a + a];
            let mean = C64::new(e.re.value() / n, e.im.value() / n);
            let var_emp = if samples > 1 { (e.sq.value() - n * mean.norm_sqr()) / (n - 1.0) } else { 0.0 };
            EntryMoment {
                k,
                n: a,
                mean: (mean.re, mean.im),
                var_emp,
                var_closed: closed.per_lu_variance[k],
                mean_se: (var_emp / n).sqrt(),
            }
        })
        .collect();
    Ok(MomentReport { entries, samples_per_entry: samples, closed_form: closed, tracked })
}

/// One-sample Kolmogorov-Smirnov result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Asymptotic Kolmogorov survival function with the Stephens small-sample
/// correction on the argument.
pub fn kolmogorov_pvalue(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=200 {
        let term = (-2.0 * (j * j) as f64 * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// KS test of `samples` against `N(0, 1)`. Sorts in place.
pub fn ks_standard_normal(samples: &mut [f64]) -> KsResult {
    let normal = Normal::standard();
    samples.sort_by(f64::total_cmp);
    let n = samples.len();
    let nf = n as f64;
    let statistic = samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal.cdf(x);
            (f - i as f64 / nf).max((i + 1) as f64 / nf - f)
        })
        .fold(0.0, f64::max);
    KsResult { statistic, p_value: kolmogorov_pvalue(statistic, n), n }
}
