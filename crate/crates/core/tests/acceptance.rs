//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fails.

use std::process::Command;
use std::time::{Duration, Instant};

use antijam_core::channel::{los_matrix, sample_channels};
use antijam_core::cplx::{circular_gaussian, CMat};
use antijam_core::dirs::{combined_channel, sample_frame, DirsCase, DirsProfile, JammerMode};
use antijam_core::estimate::{estimate_characteristic, FeedbackLog};
use antijam_core::harness::{lookup, run_experiment, Benchmark, ExperimentSpec, Sweep, SweepVar};
use antijam_core::metrics::sjnr_statistical;
use antijam_core::precode::{anti_jamming_precoder, zf_precoder, SjnrOperands};
use antijam_core::scenario::{build_scenario, large_scale, ScenarioConfig};
use antijam_core::stats::{
    aca_variances, alpha_bar_persistent, alpha_bar_temporal, empirical_aca_moments, ks_standard_normal, MomentOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PANELS: [(JammerMode, DirsCase); 4] = [
    (JammerMode::Persistent, DirsCase::C1),
    (JammerMode::Persistent, DirsCase::C2),
    (JammerMode::Temporal, DirsCase::C1),
    (JammerMode::Temporal, DirsCase::C2),
];

struct Outcome {
    passed: bool,
    details: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self { passed: true, details: Vec::new() }
    }

    fn require(&mut self, ok: bool, detail: String) {
        self.passed &= ok;
        self.details.push(format!("{} {detail}", if ok { "ok  " } else { "MISS" }));
    }
}

fn panel_name(mode: JammerMode, case: DirsCase) -> String {
    format!("{}/{}", mode.as_str(), case.as_str())
}

fn alpha_values() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    for (mode, case, want) in [
        (JammerMode::Persistent, DirsCase::C1, 1.2059),
        (JammerMode::Persistent, DirsCase::C2, 1.6078),
        (JammerMode::Temporal, DirsCase::C1, 0.91),
        (JammerMode::Temporal, DirsCase::C2, 0.82),
    ] {
        let p = DirsProfile::one_bit(case, mode);
        let got = match mode {
            JammerMode::Persistent => alpha_bar_persistent(&p),
            JammerMode::Temporal => alpha_bar_temporal(&p),
        };
        o.require((got - want).abs() <= 1e-4, format!("{}: {got:.6} vs {want}", panel_name(mode, case)));
    }
    let t = start.elapsed();
    o.require(t < Duration::from_secs(1), format!("runtime {t:?}"));
    o
}

fn aca_moments() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    for n_d in [256, 2048] {
        for mode in [JammerMode::Persistent, JammerMode::Temporal] {
            let cfg = ScenarioConfig { n_d, seed: 3, ..Default::default() };
            let profile = DirsProfile::one_bit(DirsCase::C1, mode);
            let opts = MomentOptions { frames: 10_000, pairs_per_frame: 1, track: Some((0, 0)), seed: 100 };
            let r = empirical_aca_moments(&cfg, &profile, &opts).expect("moments");
            let tag = format!("N_D={n_d} {}", mode.as_str());
            let worst = r.worst_variance_error();
            o.require(worst <= 0.05, format!("{tag}: worst per-entry variance error {:.2}% over {} entries", 100.0 * worst, r.entries.len()));
            let outside = r.entries.iter().filter(|e| e.mean_norm() > 3.0 * e.mean_se).count();
            o.require(outside == 0, format!("{tag}: {outside} entries with |mean| beyond 3 standard errors"));
            if n_d == 2048 {
                let scale = (r.entry(0, 0).var_closed / 2.0).sqrt();
                let mut xs: Vec<f64> = r.tracked.iter().map(|z| z.re / scale).collect();
                let ks = ks_standard_normal(&mut xs);
                o.require(ks.p_value > 0.01, format!("{tag}: KS D = {:.4}, p = {:.3} (n = {})", ks.statistic, ks.p_value, ks.n));
            }
        }
    }
    let t = start.elapsed();
    o.require(t < Duration::from_secs(300), format!("runtime {t:.1?}"));
    o
}

fn random_unit_columns(n_a: usize, k: usize, power: f64, rng: &mut ChaCha8Rng) -> CMat {
    let mut w = CMat::from_fn(n_a, k, |_, _| circular_gaussian(rng));
    for mut col in w.column_iter_mut() {
        let n = col.norm();
        col.unscale_mut(n);
        col.scale_mut(power.sqrt());
    }
    w
}

fn optimality() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    let (mut worst_lambda, mut worst_margin, mut worst_zf) = (0.0f64, f64::INFINITY, f64::INFINITY);
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for s in 0..100u64 {
        let (mode, case) = PANELS[(s % 4) as usize];
        let mut cfg = ScenarioConfig { seed: 500 + s, n_d: [256, 512, 1024, 2048][(s / 4 % 4) as usize], ..Default::default() };
        cfg.set_power_per_lu_dbm(rng.random_range(-14.0..-2.0));
        let profile = DirsProfile::one_bit(case, mode);
        let placement = build_scenario(&cfg, &mut ChaCha8Rng::seed_from_u64(cfg.seed)).unwrap();
        let ls = large_scale(&placement).unwrap();
        let los = los_matrix(&placement, cfg.wavelength);
        let ch = sample_channels(&placement, &ls, &los, &cfg.rician_factors, &mut rng).unwrap();
        let frame = sample_frame(&profile, cfg.n_d, cfg.frame_ratio, &mut rng);
        let h = combined_channel(&ch, &frame.rpt).unwrap();
        let stats = aca_variances(&cfg, &profile, &ls);
        let v = &stats.per_lu_variance;
        let noise = cfg.noise_variance_w;
        let p0 = cfg.total_power_w;
        let w = anti_jamming_precoder(&h, &stats, noise, p0).unwrap();
        let eta = sjnr_statistical(&h, &w.w, v, noise, &[]).unwrap();
        for k in 0..cfg.k {
            let ops = SjnrOperands::build(&h, v, noise, p0, k).unwrap();
            worst_lambda = worst_lambda.max(((eta[k] - w.lambda[k]) / w.lambda[k]).abs());
            worst_lambda = worst_lambda.max(((ops.quotient(&w.column(k)) - w.lambda[k]) / w.lambda[k]).abs());
        }
        let zf = zf_precoder(&h, &vec![cfg.power_per_lu(); cfg.k]).unwrap();
        let eta_zf = sjnr_statistical(&h, &zf.w, v, noise, &[]).unwrap();
        for k in 0..cfg.k {
            worst_zf = worst_zf.min((eta[k] - eta_zf[k]) / eta[k]);
        }
        for _ in 0..1000 {
            let cand = random_unit_columns(cfg.n_a, cfg.k, cfg.power_per_lu(), &mut rng);
            let e = sjnr_statistical(&h, &cand, v, noise, &[]).unwrap();
            for k in 0..cfg.k {
                worst_margin = worst_margin.min((eta[k] - e[k]) / eta[k]);
            }
        }
    }
    o.require(worst_lambda <= 1e-8, format!("max relative |SJNR - lambda_max| = {worst_lambda:.2e}"));
    o.require(worst_margin >= -1e-9, format!("min relative margin over 1000 random precoders x 100 scenarios = {worst_margin:.3e}"));
    o.require(worst_zf >= -1e-9, format!("min relative margin over ZF = {worst_zf:.3e}"));
    let t = start.elapsed();
    o.require(t < Duration::from_secs(120), format!("runtime {t:.1?}"));
    o
}

fn zf_contract() -> Outcome {
    let mut o = Outcome::new();
    let (mut leak, mut norm) = (0.0f64, 0.0f64);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let cfg = ScenarioConfig::default();
    let p = cfg.power_per_lu();
    for i in 0..100u64 {
        let c = ScenarioConfig { seed: i, ..cfg.clone() };
        let placement = build_scenario(&c, &mut ChaCha8Rng::seed_from_u64(i)).unwrap();
        let ls = large_scale(&placement).unwrap();
        let los = los_matrix(&placement, c.wavelength);
        let ch = sample_channels(&placement, &ls, &los, &c.rician_factors, &mut rng).unwrap();
        let profile = DirsProfile::one_bit(DirsCase::C2, JammerMode::Persistent);
        let frame = sample_frame(&profile, c.n_d, 1, &mut rng);
        let h = combined_channel(&ch, &frame.rpt).unwrap();
        assert_eq!(h.shape(), (16, 12));
        let w = zf_precoder(&h, &vec![p; 12]).unwrap();
        for k in 0..12 {
            let wk = w.w.column(k);
            norm = norm.max((wk.norm() - p.sqrt()).abs() / p.sqrt());
            for u in (0..12).filter(|&u| u != k) {
                let hu = h.column(u);
                leak = leak.max(hu.dotc(&wk).norm() / (hu.norm() * wk.norm()));
            }
        }
    }
    o.require(leak < 1e-10, format!("max relative off-diagonal |h_u^H w_k| = {leak:.2e}"));
    o.require(norm < 1e-10, format!("max relative column-norm error = {norm:.2e}"));
    o
}

fn panel_spec(mode: JammerMode, case: DirsCase) -> ExperimentSpec {
    ExperimentSpec { seed: 2024, ..Default::default() }.with_case(case, mode)
}

fn power_trend() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    for (mode, case) in PANELS {
        let mut spec = panel_spec(mode, case);
        spec.sweep = Sweep::new(SweepVar::TxPowerPerLu, vec![-14.0, -2.0]);
        spec.benchmarks = vec![Benchmark::NoJammingZf, Benchmark::JammedZf, Benchmark::Ajp];
        let rows = run_experiment(&spec).unwrap();
        let r = |x: f64, b: &str| lookup(&rows, x, b).unwrap().rate_per_lu;
        let name = panel_name(mode, case);
        let ratio = r(-14.0, "ajp") / r(-14.0, "no_jamming_zf");
        o.require(ratio >= 1.5, format!("{name} at -14 dBm: AJP / no jamming = {ratio:.3} (need >= 1.5)"));
        let (clean, jammed, ajp) = (r(-2.0, "no_jamming_zf"), r(-2.0, "jammed_zf"), r(-2.0, "ajp"));
        let drop = 1.0 - jammed / clean;
        o.require(drop >= 0.25, format!("{name} at -2 dBm: jammed ZF below no jamming by {:.1}% (need >= 25%)", 100.0 * drop));
        let recovered = (ajp - jammed) / (clean - jammed);
        o.require(
            recovered >= 0.5,
            format!("{name} at -2 dBm: AJP recovers {:.1}% of the gap (need >= 50%); rates {clean:.4} / {jammed:.4} / {ajp:.4}", 100.0 * recovered),
        );
    }
    let t = start.elapsed();
    o.require(t < Duration::from_secs(600), format!("runtime {t:.1?}"));
    o
}

fn estimated_statistics() -> Outcome {
    let mut o = Outcome::new();
    for (mode, case) in PANELS {
        let name = panel_name(mode, case);
        let mut spec = panel_spec(mode, case);
        spec.sweep = Sweep::new(SweepVar::TxPowerPerLu, vec![-2.0]);
        spec.benchmarks = vec![Benchmark::AjpEstimated(1), Benchmark::AjpEstimated(6)];
        let rows = run_experiment(&spec).unwrap();
        let (s1, s6) = (rows[0].rate_per_lu, rows[1].rate_per_lu);
        let diff = (s1 - s6).abs() / s6;
        o.require(diff < 0.02, format!("{name}: rate with s=1 vs s=6 differs by {:.3}% (need < 2%)", 100.0 * diff));

        // pooled over users and 100 frames of one drop
        let cfg = ScenarioConfig { seed: 11, ..Default::default() };
        let profile = DirsProfile::one_bit(case, mode);
        let placement = build_scenario(&cfg, &mut ChaCha8Rng::seed_from_u64(cfg.seed)).unwrap();
        let ls = large_scale(&placement).unwrap();
        let los = los_matrix(&placement, cfg.wavelength);
        let closed = aca_variances(&cfg, &profile, &ls);
        let mut ratio = 0.0;
        for f in 0..100u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(9000 + f);
            let ch = sample_channels(&placement, &ls, &los, &cfg.rician_factors, &mut rng).unwrap();
            let frame = sample_frame(&profile, cfg.n_d, cfg.frame_ratio, &mut rng);
            let h_rpt = combined_channel(&ch, &frame.rpt).unwrap();
            let mut log = FeedbackLog::new(cfg.k, cfg.frame_ratio);
            for dt in &frame.dt {
                log.record_slot(&combined_channel(&ch, dt).unwrap(), cfg.total_power_w, None).unwrap();
            }
            let est = estimate_characteristic(&log, &h_rpt, cfg.total_power_w, 6).unwrap();
            ratio += est.iter().zip(&closed.per_lu_variance).map(|(e, v)| e / v).sum::<f64>() / cfg.k as f64;
        }
        ratio /= 100.0;
        o.require(
            (ratio - 1.0).abs() <= 0.1,
            format!("{name}: mean estimate / closed form after s=6 over 100 frames = {ratio:.3} (need within 10%)"),
        );
    }
    o
}

fn distance_trend() -> Outcome {
    let mut o = Outcome::new();
    let grid = vec![3.0, 4.0, 5.0, 6.0];
    for (mode, case) in PANELS {
        let mut spec = panel_spec(mode, case);
        spec.sweep = Sweep::new(SweepVar::ApDirsDistance, grid.clone());
        spec.benchmarks = vec![Benchmark::NoJammingZf, Benchmark::Ajp];
        let rows = run_experiment(&spec).unwrap();
        let name = panel_name(mode, case);
        let ratios: Vec<f64> = grid
            .iter()
            .map(|&d| lookup(&rows, d, "ajp").unwrap().rate_per_lu / lookup(&rows, d, "no_jamming_zf").unwrap().rate_per_lu)
            .collect();
        let shown: Vec<String> = grid.iter().zip(&ratios).map(|(d, r)| format!("{d}: {r:.3}")).collect();
        o.require(
            ratios.iter().all(|r| *r >= 0.95),
            format!("{name} at -2 dBm, AJP / no jamming by d_AD (need >= 0.95): {}", shown.join(", ")),
        );
    }
    o
}

fn determinism() -> Outcome {
    let mut o = Outcome::new();
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(
        &config,
        r#"{ "scenario": { "n_d": 512 }, "dirs": { "case": "c2" }, "experiment": { "sweep": "tx_power_per_lu=-14:-2:6", "drops": 4, "realizations": 3 } }"#,
    )
    .unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_antijam"))
            .args(["run", "--seed", "7", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(out).unwrap()
    };
    let (a, b) = (run("a.csv"), run("b.csv"));
    o.require(!a.is_empty() && a == b, format!("two runs with --seed 7: {} and {} bytes, identical = {}", a.len(), b.len(), a == b));
    o
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("alpha_bar closed forms", alpha_values),
        ("ACA variance, mean and normality", aca_moments),
        ("anti-jamming precoder optimality", optimality),
        ("ZF nulling and power contract", zf_contract),
        ("rate versus transmit power trend", power_trend),
        ("estimated statistics", estimated_statistics),
        ("AP-DIRS distance trend", distance_trend),
        ("CLI determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = f();
        println!("{} criterion {}: {name} ({:.1?})", if o.passed { "PASS" } else { "FAIL" }, i + 1, start.elapsed());
        for d in &o.details {
            println!("    {d}");
        }
        if !o.passed {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
