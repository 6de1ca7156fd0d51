//! Browser bindings for the simulator: an `alpha_bar` explorer, a rate
//! versus power sweep and an ACA histogram. Results cross the boundary as
//! JSON strings.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use antijam_core::dirs::{DirsCase, DirsProfile, JammerMode};
use antijam_core::harness::{run_experiment, Benchmark, ExperimentSpec, Sweep, SweepVar};
use antijam_core::scenario::ScenarioConfig;
use antijam_core::stats::{alpha_bar_persistent, alpha_bar_temporal, empirical_aca_moments, MomentOptions};

#[derive(Serialize)]
struct AlphaReport {
    persistent: f64,
    temporal: f64,
}

#[derive(Serialize)]
struct CurvePoint {
    power_dbm: f64,
    benchmark: String,
    rate: f64,
    stderr: f64,
}

#[derive(Serialize)]
struct Histogram {
    edges: Vec<f64>,
    density: Vec<f64>,
    gaussian: Vec<f64>,
    samples: usize,
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Both variance factors for a 1-bit alphabet `{(theta0, g0, p), (theta1, g1, 1 - p)}`.
pub fn alpha_bar_json(theta0: f64, theta1: f64, g0: f64, g1: f64, p0: f64) -> Result<String, String> {
    let p = DirsProfile::new(vec![theta0, theta1], vec![g0, g1], vec![p0, 1.0 - p0], JammerMode::Persistent).map_err(err)?;
    serde_json::to_string(&AlphaReport { persistent: alpha_bar_persistent(&p), temporal: alpha_bar_temporal(&p) }).map_err(err)
}

fn profile(mode: &str, case: &str) -> Result<(DirsProfile, DirsCase), String> {
    let mode: JammerMode = mode.parse().map_err(err)?;
    let case: DirsCase = case.parse().map_err(err)?;
    Ok((DirsProfile::one_bit(case, mode), case))
}

/// Rate per LU of the no-jamming, jammed-ZF and anti-jamming benchmarks
/// over `-14..=-2` dBm per user.
pub fn rate_curve_json(mode: &str, case: &str, n_d: usize, drops: usize, seed: u64) -> Result<String, String> {
    let (p, c) = profile(mode, case)?;
    let mut spec = ExperimentSpec { drops, realizations: 4, seed, ..Default::default() }.with_case(c, p.mode);
    spec.scenario.n_d = n_d;
    spec.sweep = Sweep::new(SweepVar::TxPowerPerLu, vec![-14.0, -11.0, -8.0, -5.0, -2.0]);
    spec.benchmarks = vec![Benchmark::NoJammingZf, Benchmark::JammedZf, Benchmark::Ajp];
    let rows = run_experiment(&spec).map_err(err)?;
    let pts: Vec<CurvePoint> = rows
        .into_iter()
        .map(|r| CurvePoint { power_dbm: r.sweep, benchmark: r.benchmark, rate: r.rate_per_lu, stderr: r.stderr })
        .collect();
    serde_json::to_string(&pts).map_err(err)
}

/// Histogram of the normalised real part of one ACA entry against `N(0, 1)`.
pub fn aca_histogram_json(mode: &str, case: &str, n_d: usize, frames: usize, bins: usize, seed: u64) -> Result<String, String> {
    let (p, _) = profile(mode, case)?;
    let cfg = ScenarioConfig { n_d, k: 2, n_a: 2, rician_factors: vec![10.0; 2], ..Default::default() };
    let r = empirical_aca_moments(&cfg, &p, &MomentOptions { frames, pairs_per_frame: 1, track: Some((0, 0)), seed })
        .map_err(err)?;
    let v = r.closed_form.per_lu_variance[0];
    let scale = (v / 2.0).sqrt();
    let bins = bins.clamp(4, 200);
    let (lo, hi) = (-4.0, 4.0);
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for z in &r.tracked {
        let x = z.re / scale;
        if (lo..hi).contains(&x) {
            counts[((x - lo) / width) as usize] += 1;
        }
    }
    let n = r.tracked.len() as f64;
    let edges: Vec<f64> = (0..=bins).map(|i| lo + i as f64 * width).collect();
    let gaussian = (0..bins)
        .map(|i| {
            let x = lo + (i as f64 + 0.5) * width;
            (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
        })
        .collect();
    let density = counts.iter().map(|c| *c as f64 / (n * width)).collect();
    serde_json::to_string(&Histogram { edges, density, gaussian, samples: r.tracked.len() }).map_err(err)
}

#[wasm_bindgen]
pub fn alpha_bar(theta0: f64, theta1: f64, g0: f64, g1: f64, p0: f64) -> Result<String, JsError> {
    alpha_bar_json(theta0, theta1, g0, g1, p0).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn rate_curve(mode: &str, case: &str, n_d: usize, drops: usize, seed: u64) -> Result<String, JsError> {
    rate_curve_json(mode, case, n_d, drops, seed).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn aca_histogram(mode: &str, case: &str, n_d: usize, frames: usize, bins: usize, seed: u64) -> Result<String, JsError> {
    aca_histogram_json(mode, case, n_d, frames, bins, seed).map_err(|e| JsError::new(&e))
}
