//! Monte-Carlo experiment driver.
//!
//! Every grid point reuses the same seeds: drop `d` places users with
//! `seed + d R` and realization `r` of that drop draws channels, jammer
//! states and the active-jammer fading from `seed + d R + r`. Benchmarks are
//! all evaluated on the same draws, so comparisons between them and across
//! the grid are paired.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use nalgebra::Point3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::channel::{los_matrix, sample_channels, ChannelSet};
use crate::cplx::{circular_gaussian, dbm_to_watts, CMat};
use crate::dirs::{combined_channel, sample_frame, CoherenceFrame, DirsCase, DirsProfile, JammerMode};
use crate::error::{Error, Result};
use crate::estimate::{estimate_characteristic, refresh_precoder, FeedbackLog};
use crate::metrics::{rate_per_lu, sjnr_realized, sjnr_statistical, AJ_POSITION, AJ_POWER_DBM};
use crate::precode::{anti_jamming_precoder, zf_precoder, PrecodingMatrix};
use crate::scenario::{build_scenario, large_scale, pathloss_nlos, LargeScale, Placement, ScenarioConfig};
use crate::stats::aca_variances;

const STREAM_PLACEMENT: u64 = 0;
const STREAM_CHANNEL: u64 = 1;
const STREAM_FEEDBACK: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Benchmark {
    /// ZF on the direct channel, no IRS present.
    NoJammingZf,
    /// ZF on the RPT channel, evaluated under aging.
    JammedZf,
    /// Anti-jamming precoder with closed-form statistics.
    Ajp,
    /// Anti-jamming precoder with statistics estimated from `s` reports.
    AjpEstimated(usize),
    /// ZF on the direct channel plus an active jammer.
    ActiveJammer,
}

impl Benchmark {
    pub fn tag(&self) -> String {
        match self {
            Benchmark::NoJammingZf => "no_jamming_zf".into(),
            Benchmark::JammedZf => "jammed_zf".into(),
            Benchmark::Ajp => "ajp".into(),
            Benchmark::AjpEstimated(s) => format!("ajp_est_s{s}"),
            Benchmark::ActiveJammer => "aj_pj".into(),
        }
    }

    pub fn all_default() -> Vec<Benchmark> {
        vec![
            Benchmark::NoJammingZf,
            Benchmark::JammedZf,
            Benchmark::Ajp,
            Benchmark::AjpEstimated(1),
            Benchmark::AjpEstimated(6),
            Benchmark::ActiveJammer,
        ]
    }
}

impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag())
    }
}

impl FromStr for Benchmark {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        Ok(match t.as_str() {
            "no_jamming_zf" => Benchmark::NoJammingZf,
            "jammed_zf" => Benchmark::JammedZf,
            "ajp" => Benchmark::Ajp,
            "aj_pj" | "aj" => Benchmark::ActiveJammer,
            _ => match t.strip_prefix("ajp_est_s").or_else(|| t.strip_prefix("ajp_est")) {
                Some(n) => {
                    let n = n.trim_start_matches('_');
                    let s = if n.is_empty() { 1 } else { n.parse().map_err(|_| bad_bench(s))? };
                    Benchmark::AjpEstimated(s)
                }
                None => return Err(bad_bench(s)),
            },
        })
    }
}

fn bad_bench(s: &str) -> Error {
    Error::InvalidConfig(format!(
        "unknown benchmark '{s}' (expected no_jamming_zf, jammed_zf, ajp, ajp_est_s<N>, aj_pj)"
    ))
}

/// Parse a comma-separated benchmark list.
pub fn parse_benchmarks(list: &str) -> Result<Vec<Benchmark>> {
    let v: Vec<Benchmark> = list.split(',').filter(|s| !s.trim().is_empty()).map(str::parse).collect::<Result<_>>()?;
    if v.is_empty() {
        return Err(Error::InvalidConfig("empty benchmark list".into()));
    }
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SweepVar {
    TxPowerPerLu,
    FeedbackCount,
    NumElements,
    NumUsers,
    ApDirsDistance,
}

impl SweepVar {
    pub fn name(self) -> &'static str {
        match self {
            SweepVar::TxPowerPerLu => "tx_power_per_lu",
            SweepVar::FeedbackCount => "feedback_count",
            SweepVar::NumElements => "N_D",
            SweepVar::NumUsers => "K",
            SweepVar::ApDirsDistance => "d_AD",
        }
    }

    /// Whether changing this variable leaves every random draw untouched.
    fn keeps_draws(self) -> bool {
        matches!(self, SweepVar::TxPowerPerLu | SweepVar::FeedbackCount)
    }
}

impl FromStr for SweepVar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "tx_power_per_lu" | "power" => SweepVar::TxPowerPerLu,
            "feedback_count" | "s" => SweepVar::FeedbackCount,
            "N_D" | "n_d" => SweepVar::NumElements,
            "K" | "k" => SweepVar::NumUsers,
            "d_AD" | "d_ad" => SweepVar::ApDirsDistance,
            other => {
                return Err(Error::InvalidConfig(format!(
                    "unknown sweep variable '{other}' (expected tx_power_per_lu, feedback_count, N_D, K, d_AD)"
                )))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub var: SweepVar,
    pub values: Vec<f64>,
}

impl Sweep {
    pub fn new(var: SweepVar, values: Vec<f64>) -> Self {
        Self { var, values }
    }
}

/// Grid as `start:stop:step` (inclusive), a comma list, or a single value.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| Error::InvalidConfig(format!("bad number '{t}' in grid '{s}'")));
    let parts: Vec<&str> = s.split(':').collect();
    let values = match parts.as_slice() {
        [start, stop, step] => {
            let (a, b, h) = (num(start)?, num(stop)?, num(step)?);
            if !(h != 0.0) || !h.is_finite() || (b - a) / h < 0.0 {
                return Err(Error::InvalidConfig(format!("grid '{s}' does not reach its end")));
            }
            let n = ((b - a) / h + 1e-9).floor() as usize;
            (0..=n).map(|i| a + i as f64 * h).collect()
        }
        [single] => single.split(',').map(num).collect::<Result<Vec<_>>>()?,
        _ => return Err(Error::InvalidConfig(format!("grid '{s}' must be start:stop:step or a list"))),
    };
    if values.is_empty() {
        return Err(Error::InvalidConfig(format!("empty grid '{s}'")));
    }
    Ok(values)
}

/// `NAME=grid`.
pub fn parse_sweep(s: &str) -> Result<Sweep> {
    let (name, grid) =
        s.split_once('=').ok_or_else(|| Error::InvalidConfig(format!("sweep '{s}' must be NAME=start:stop:step")))?;
    Ok(Sweep::new(name.parse()?, parse_grid(grid)?))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSpec {
    pub scenario: ScenarioConfig,
    pub profile: DirsProfile,
    /// Label written to the `case` column.
    pub case_label: String,
    pub benchmarks: Vec<Benchmark>,
    pub sweep: Sweep,
    pub drops: usize,
    pub realizations: usize,
    pub seed: u64,
    /// Evaluate the IRS benchmarks with the realized (sub-slot average) SJNR.
    pub realized_sjnr: bool,
    pub aj_power_w: f64,
    pub aj_position: [f64; 3],
    /// Relative deviation of multiplicative feedback noise (0 = off).
    pub feedback_noise: f64,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            scenario: ScenarioConfig::default(),
            profile: DirsProfile::one_bit(DirsCase::C1, JammerMode::Persistent),
            case_label: DirsCase::C1.as_str().into(),
            benchmarks: Benchmark::all_default(),
            sweep: Sweep::new(SweepVar::TxPowerPerLu, vec![-14.0, -10.0, -6.0, -2.0]),
            drops: 100,
            realizations: 20,
            seed: 0,
            realized_sjnr: false,
            aj_power_w: dbm_to_watts(AJ_POWER_DBM),
            aj_position: AJ_POSITION,
            feedback_noise: 0.0,
        }
    }
}

impl ExperimentSpec {
    /// Table-2 profile for `case` under `mode`.
    pub fn with_case(mut self, case: DirsCase, mode: JammerMode) -> Self {
        self.profile = DirsProfile::one_bit(case, mode);
        self.case_label = case.as_str().into();
        self
    }

    pub fn trials(&self) -> usize {
        self.drops * self.realizations
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.profile.validate()?;
        if self.benchmarks.is_empty() {
            return Err(Error::InvalidConfig("no benchmarks selected".into()));
        }
        if self.sweep.values.is_empty() {
            return Err(Error::InvalidConfig("empty sweep grid".into()));
        }
        if self.trials() == 0 {
            return Err(Error::InvalidConfig("need at least one drop and one realization".into()));
        }
        if !(self.aj_power_w >= 0.0) || !(self.feedback_noise >= 0.0) {
            return Err(Error::InvalidConfig("jammer power and feedback noise must be non-negative".into()));
        }
        for &x in &self.sweep.values {
            self.point(x)?;
        }
        Ok(())
    }

    /// Scenario and feedback count at one grid value.
    fn point(&self, x: f64) -> Result<Point> {
        let mut cfg = self.scenario.clone();
        let mut feedback = None;
        let as_count = |x: f64| -> Result<usize> {
            if x >= 1.0 && x.fract() == 0.0 {
                Ok(x as usize)
            } else {
                Err(Error::InvalidConfig(format!("{} must be a positive integer, got {x}", self.sweep.var.name())))
            }
        };
        match self.sweep.var {
            SweepVar::TxPowerPerLu => cfg.set_power_per_lu_dbm(x),
            SweepVar::FeedbackCount => feedback = Some(as_count(x)?),
            SweepVar::NumElements => cfg.n_d = as_count(x)?,
            SweepVar::NumUsers => {
                let per_lu = cfg.power_per_lu();
                cfg.k = as_count(x)?;
                cfg.total_power_w = per_lu * cfg.k as f64;
            }
            SweepVar::ApDirsDistance => cfg.d_ad = x,
        }
        cfg.validate()?;
        let benchmarks: Vec<Benchmark> = self
            .benchmarks
            .iter()
            .map(|b| match (b, feedback) {
                (Benchmark::AjpEstimated(_), Some(s)) => Benchmark::AjpEstimated(s),
                _ => *b,
            })
            .collect();
        for b in &benchmarks {
            if let Benchmark::AjpEstimated(s) = b {
                if *s == 0 || *s > cfg.frame_ratio {
                    return Err(Error::FeedbackOutOfRange { s: *s, m: cfg.frame_ratio });
                }
            }
        }
        Ok(Point { x, cfg, benchmarks })
    }
}

struct Point {
    x: f64,
    cfg: ScenarioConfig,
    benchmarks: Vec<Benchmark>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub sweep: f64,
    pub benchmark: String,
    pub mode: String,
    pub case: String,
    pub rate_per_lu: f64,
    pub stderr: f64,
    pub trials: usize,
}

/// One drop: geometry shared by all its realizations.
struct Drop {
    placement: Placement,
    ls: LargeScale,
    los: CMat,
}

fn make_drop(cfg: &ScenarioConfig, seed: u64) -> Result<Drop> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(STREAM_PLACEMENT);
    let placement = build_scenario(cfg, &mut rng)?;
    let ls = large_scale(&placement)?;
    let los = los_matrix(&placement, cfg.wavelength);
    Ok(Drop { placement, ls, los })
}

/// Everything random in one channel coherence interval.
struct Realization {
    channels: ChannelSet,
    frame: CoherenceFrame,
    h_rpt: CMat,
    h_direct: CMat,
    /// `|g_k|^2` of the active-jammer links.
    aj_fading: Vec<f64>,
    /// `H_DT` of the first sub-slots, built on demand.
    dt: Vec<CMat>,
    seed: u64,
}

fn make_realization(cfg: &ScenarioConfig, profile: &DirsProfile, drop: &Drop, seed: u64) -> Result<Realization> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(STREAM_CHANNEL);
    let channels = sample_channels(&drop.placement, &drop.ls, &drop.los, &cfg.rician_factors, &mut rng)?;
    let frame = sample_frame(profile, cfg.n_d, cfg.frame_ratio, &mut rng);
    let aj_fading = (0..cfg.k).map(|_| circular_gaussian(&mut rng).norm_sqr()).collect();
    let h_rpt = combined_channel(&channels, &frame.rpt)?;
    let h_direct = channels.h_d.adjoint();
    Ok(Realization { channels, frame, h_rpt, h_direct, aj_fading, dt: Vec::new(), seed })
}

impl Realization {
    fn ensure_dt(&mut self, n: usize) -> Result<()> {
        while self.dt.len() < n.min(self.frame.dt.len()) {
            let state = &self.frame.dt[self.dt.len()];
            self.dt.push(combined_channel(&self.channels, state)?);
        }
        Ok(())
    }
}

fn evaluate(spec: &ExperimentSpec, point: &Point, drop: &Drop, real: &mut Realization) -> Result<Vec<f64>> {
    let cfg = &point.cfg;
    let k = cfg.k;
    let p0 = cfg.total_power_w;
    let noise = cfg.noise_variance_w;
    let powers = vec![p0 / k as f64; k];
    let stats = aca_variances(cfg, &spec.profile, &drop.ls);
    let v = &stats.per_lu_variance;
    let zero = vec![0.0; k];

    let max_s = point
        .benchmarks
        .iter()
        .filter_map(|b| if let Benchmark::AjpEstimated(s) = b { Some(*s) } else { None })
        .max()
        .unwrap_or(0);
    real.ensure_dt(if spec.realized_sjnr { cfg.frame_ratio } else { max_s })?;

    let jammed = |w: &PrecodingMatrix, real: &Realization| -> Result<Vec<f64>> {
        if spec.realized_sjnr {
            sjnr_realized(&real.dt, &w.w, noise)
        } else {
            sjnr_statistical(&real.h_rpt, &w.w, v, noise, &[])
        }
    };

    let mut direct_zf = None;
    let mut rpt_zf = None;
    let mut out = Vec::with_capacity(point.benchmarks.len());
    for b in &point.benchmarks {
        let sjnr = match b {
            Benchmark::NoJammingZf => {
                let w = cached_zf(&mut direct_zf, &real.h_direct, &powers)?;
                sjnr_statistical(&real.h_direct, &w.w, &zero, noise, &[])?
            }
            Benchmark::ActiveJammer => {
                let w = cached_zf(&mut direct_zf, &real.h_direct, &powers)?;
                let aj = Point3::from(spec.aj_position);
                let penalty = drop
                    .placement
                    .lu_positions
                    .iter()
                    .zip(&real.aj_fading)
                    .map(|(lu, g2)| Ok(spec.aj_power_w * pathloss_nlos(nalgebra::distance(&aj, lu))? * g2))
                    .collect::<Result<Vec<f64>>>()?;
                sjnr_statistical(&real.h_direct, &w.w, &zero, noise, &penalty)?
            }
            Benchmark::JammedZf => {
                let w = cached_zf(&mut rpt_zf, &real.h_rpt, &powers)?;
                jammed(&w, real)?
            }
            Benchmark::Ajp => {
                let w = anti_jamming_precoder(&real.h_rpt, &stats, noise, p0)?;
                jammed(&w, real)?
            }
            Benchmark::AjpEstimated(s) => {
                let mut log = FeedbackLog::new(k, cfg.frame_ratio);
                let mut noise_rng = ChaCha8Rng::seed_from_u64(real.seed);
                noise_rng.set_stream(STREAM_FEEDBACK);
                for h_dt in real.dt.iter().take(*s) {
                    let fb_noise = (spec.feedback_noise > 0.0).then_some((&mut noise_rng as &mut dyn rand::RngCore, spec.feedback_noise));
                    log.record_slot(h_dt, p0, fb_noise)?;
                }
                let est = estimate_characteristic(&log, &real.h_rpt, p0, *s)?;
                let w = refresh_precoder(&est, *s, &real.h_rpt, noise, p0)?;
                jammed(&w, real)?
            }
        };
        out.push(rate_per_lu(&sjnr));
    }
    Ok(out)
}

fn cached_zf(slot: &mut Option<PrecodingMatrix>, h: &CMat, powers: &[f64]) -> Result<PrecodingMatrix> {
    if slot.is_none() {
        *slot = Some(zf_precoder(h, powers)?);
    }
    Ok(slot.clone().expect("just filled"))
}

/// Rates of every grid point and benchmark for one drop, indexed
/// `[point][benchmark][realization]`.
fn run_drop(spec: &ExperimentSpec, points: &[Point], d: usize) -> Result<Vec<Vec<Vec<f64>>>> {
    let r_count = spec.realizations;
    let drop_seed = spec.seed.wrapping_add((d * r_count) as u64);
    let mut out: Vec<Vec<Vec<f64>>> =
        points.iter().map(|p| vec![Vec::with_capacity(r_count); p.benchmarks.len()]).collect();

    let shared = spec.sweep.var.keeps_draws();
    let shared_drop = if shared { Some(make_drop(&points[0].cfg, drop_seed)?) } else { None };
    let per_point_drops: Vec<Drop> = if shared {
        Vec::new()
    } else {
        points.iter().map(|p| make_drop(&p.cfg, drop_seed)).collect::<Result<_>>()?
    };

    for r in 0..r_count {
        let seed = drop_seed.wrapping_add(r as u64);
        let mut shared_real = match &shared_drop {
            Some(dr) => Some(make_realization(&points[0].cfg, &spec.profile, dr, seed)?),
            None => None,
        };
        for (i, p) in points.iter().enumerate() {
            let rates = match (&shared_drop, shared_real.as_mut()) {
                (Some(dr), Some(real)) => evaluate(spec, p, dr, real)?,
                _ => {
                    let dr = &per_point_drops[i];
                    let mut real = make_realization(&p.cfg, &spec.profile, dr, seed)?;
                    evaluate(spec, p, dr, &mut real)?
                }
            };
            for (b, rate) in rates.into_iter().enumerate() {
                out[i][b].push(rate);
            }
        }
    }
    Ok(out)
}

/// Run the full sweep. Output order: grid points, then benchmarks in the
/// order given by the spec.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let points: Vec<Point> = spec.sweep.values.iter().map(|&x| spec.point(x)).collect::<Result<_>>()?;

    #[cfg(feature = "parallel")]
    let per_drop: Vec<Result<Vec<Vec<Vec<f64>>>>> = {
        use rayon::prelude::*;
        (0..spec.drops).into_par_iter().map(|d| run_drop(spec, &points, d)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let per_drop: Vec<Result<Vec<Vec<Vec<f64>>>>> = (0..spec.drops).map(|d| run_drop(spec, &points, d)).collect();

    let mut samples: Vec<Vec<Vec<f64>>> =
        points.iter().map(|p| vec![Vec::with_capacity(spec.trials()); p.benchmarks.len()]).collect();
    for d in per_drop {
        for (i, point) in d?.into_iter().enumerate() {
            for (b, rates) in point.into_iter().enumerate() {
                samples[i][b].extend(rates);
            }
        }
    }

    let mut rows = Vec::new();
    for (p, per_bench) in points.iter().zip(samples) {
        for (b, xs) in p.benchmarks.iter().zip(per_bench) {
            let (mean, stderr) = mean_stderr(&xs);
            rows.push(ResultRow {
                sweep: p.x,
                benchmark: b.tag(),
                mode: spec.profile.mode.as_str().into(),
                case: spec.case_label.clone(),
                rate_per_lu: mean,
                stderr,
                trials: xs.len(),
            });
        }
    }
    Ok(rows)
}

fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub const CSV_HEADER: &str = "sweep,benchmark,mode,case,rate_per_lu,stderr,trials";

pub fn write_csv<W: Write>(rows: &[ResultRow], mut out: W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{:.6},{:.6},{}",
            r.sweep, r.benchmark, r.mode, r.case, r.rate_per_lu, r.stderr, r.trials
        )?;
    }
    Ok(())
}

/// Find the row for `(sweep, benchmark)`.
pub fn lookup<'a>(rows: &'a [ResultRow], sweep: f64, benchmark: &str) -> Option<&'a ResultRow> {
    rows.iter().find(|r| (r.sweep - sweep).abs() < 1e-9 && r.benchmark == benchmark)
}

/// Line plot of rate per LU against the sweep variable, one polyline per
/// benchmark.
pub fn write_svg<W: Write>(rows: &[ResultRow], x_label: &str, mut out: W) -> Result<()> {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const M: f64 = 56.0;
    const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

    let mut names: Vec<&str> = Vec::new();
    for r in rows {
        if !names.contains(&r.benchmark.as_str()) {
            names.push(&r.benchmark);
        }
    }
    let (x0, x1) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| (a.min(r.sweep), b.max(r.sweep)));
    let y1 = rows.iter().map(|r| r.rate_per_lu).fold(0.0, f64::max).max(1e-9) * 1.05;
    let span = if x1 > x0 { x1 - x0 } else { 1.0 };
    let px = |x: f64| M + (x - x0) / span * (W - 2.0 * M);
    let py = |y: f64| H - M - y / y1 * (H - 2.0 * M);

    writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#)?;
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#)?;
    writeln!(
        out,
        r#"<path d="M{M},{t} V{b} H{r}" fill="none" stroke="black"/>"#,
        t = M,
        b = H - M,
        r = W - M
    )?;
    for i in 0..=4 {
        let y = y1 * i as f64 / 4.0;
        writeln!(out, r#"<text x="{}" y="{:.1}" text-anchor="end">{:.2}</text>"#, M - 6.0, py(y) + 4.0, y)?;
    }
    let mut xs: Vec<f64> = rows.iter().map(|r| r.sweep).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    for x in &xs {
        writeln!(out, r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#, px(*x), H - M + 16.0, x)?;
    }
    writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 12.0, x_label)?;
    writeln!(
        out,
        r#"<text transform="translate(14,{}) rotate(-90)" text-anchor="middle">rate per LU (bit/s/Hz)</text>"#,
        H / 2.0
    )?;
    for (i, name) in names.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = rows
            .iter()
            .filter(|r| r.benchmark == *name)
            .map(|r| format!("{:.1},{:.1}", px(r.sweep), py(r.rate_per_lu)))
            .collect();
        writeln!(out, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, pts.join(" "))?;
        let ly = M + 16.0 * i as f64;
        writeln!(out, r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, W - M - 150.0, W - M - 130.0)?;
        writeln!(out, r#"<text x="{}" y="{}">{name}</text>"#, W - M - 125.0, ly + 4.0)?;
    }
    writeln!(out, "</svg>")?;
    Ok(())
}
