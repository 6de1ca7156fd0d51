//! Quick self-check suite behind the `verify` subcommand.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cplx::{gaussian_matrix, CVec};
use crate::dirs::{DirsCase, DirsProfile, JammerMode};
use crate::error::Result;
use crate::metrics::sjnr_statistical;
use crate::precode::{anti_jamming_precoder, max_generalized_eigvec, zf_precoder, SjnrOperands};
use crate::scenario::ScenarioConfig;
use crate::stats::{alpha_bar_persistent, alpha_bar_temporal, empirical_aca_moments, ks_standard_normal, AcaStatistics, MomentOptions};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

pub fn alpha_table() -> Check {
    let want = [
        (DirsCase::C1, JammerMode::Persistent, 1.2059),
        (DirsCase::C2, JammerMode::Persistent, 1.6078),
        (DirsCase::C1, JammerMode::Temporal, 0.91),
        (DirsCase::C2, JammerMode::Temporal, 0.82),
    ];
    let mut worst: f64 = 0.0;
    for (case, mode, v) in want {
        let p = DirsProfile::one_bit(case, mode);
        let got = match mode {
            JammerMode::Persistent => alpha_bar_persistent(&p),
            JammerMode::Temporal => alpha_bar_temporal(&p),
        };
        worst = worst.max((got - v).abs());
    }
    check("alpha_bar table", worst < 1e-4, format!("max deviation {worst:.2e}"))
}

pub fn aca_moments(seed: u64) -> Result<Check> {
    let cfg = ScenarioConfig { n_d: 256, ..Default::default() };
    let p = DirsProfile::one_bit(DirsCase::C2, JammerMode::Persistent);
    let r = empirical_aca_moments(&cfg, &p, &MomentOptions { frames: 2000, pairs_per_frame: 1, track: Some((0, 0)), seed })?;
    let worst = r.worst_variance_error();
    let scale = r.entry(0, 0).var_closed.sqrt() / std::f64::consts::SQRT_2;
    let mut xs: Vec<f64> = r.tracked.iter().map(|z| z.re / scale).collect();
    let ks = ks_standard_normal(&mut xs);
    Ok(check(
        "ACA variance and normality",
        worst < 0.1 && ks.p_value > 0.001,
        format!("worst variance error {:.3}, KS p = {:.3} over {} frames", worst, ks.p_value, r.samples_per_entry),
    ))
}

pub fn precoder_optimality(seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst_gap, mut worst_lambda, mut worst_res): (f64, f64, f64) = (f64::INFINITY, 0.0, 0.0);
    for _ in 0..20 {
        let h = gaussian_matrix(8, 4, &mut rng);
        let v: Vec<f64> = (0..4).map(|i| 0.1 * (i + 1) as f64).collect();
        let stats = AcaStatistics::from_estimates(v.clone(), 0);
        let w = anti_jamming_precoder(&h, &stats, 0.1, 4.0)?;
        let eta = sjnr_statistical(&h, &w.w, &v, 0.1, &[])?;
        for k in 0..4 {
            worst_lambda = worst_lambda.max(((eta[k] - w.lambda[k]) / w.lambda[k]).abs());
            let ops = SjnrOperands::build(&h, &v, 0.1, 4.0, k)?;
            worst_res = worst_res.max(max_generalized_eigvec(&ops.a, &ops.b)?.residual);
            for _ in 0..100 {
                let x: CVec = gaussian_matrix(8, 1, &mut rng).column(0).into_owned();
                worst_gap = worst_gap.min(eta[k] - ops.quotient(&x));
            }
        }
    }
    Ok(check(
        "anti-jamming optimality",
        worst_gap >= -1e-9 && worst_lambda < 1e-8 && worst_res < 1e-8,
        format!("min margin {worst_gap:.3e}, SJNR/lambda error {worst_lambda:.1e}, residual {worst_res:.1e}"),
    ))
}

pub fn zf_contract(seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut leak, mut norm): (f64, f64) = (0.0, 0.0);
    for _ in 0..20 {
        let h = gaussian_matrix(16, 12, &mut rng);
        let w = zf_precoder(&h, &[0.25; 12])?;
        for k in 0..12 {
            let wk = w.w.column(k);
            norm = norm.max((wk.norm() - 0.5).abs() / 0.5);
            for u in (0..12).filter(|&u| u != k) {
                let hu = h.column(u);
                leak = leak.max(hu.dotc(&wk).norm() / (hu.norm() * wk.norm()));
            }
        }
    }
    Ok(check("ZF nulling and power", leak < 1e-10 && norm < 1e-10, format!("leakage {leak:.1e}, norm error {norm:.1e}")))
}

pub fn run_all(seed: u64) -> Result<Vec<Check>> {
    Ok(vec![alpha_table(), zf_contract(seed)?, precoder_optimality(seed)?, aca_moments(seed)?])
}
