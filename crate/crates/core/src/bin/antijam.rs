use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use antijam_core::config::ConfigFile;
use antijam_core::dirs::{DirsCase, DirsProfile, JammerMode};
use antijam_core::harness::{parse_benchmarks, parse_sweep, run_experiment, write_csv, write_svg};
use antijam_core::scenario::{build_scenario, large_scale};
use antijam_core::stats::{aca_variances, alpha_bar, empirical_aca_moments, ks_standard_normal, MomentOptions};
use antijam_core::{verify, Error};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "antijam", version, about = "Disco-IRS jamming and anti-jamming precoding simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte-Carlo sweep and write the rate table as CSV.
    Run(RunArgs),
    /// Print the ACA variance factor and optionally check it by simulation.
    Stats(StatsArgs),
    /// Run the built-in property checks.
    Verify {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Args)]
struct Selection {
    /// persistent or temporal.
    #[arg(long)]
    mode: Option<JammerMode>,
    /// c1 or c2.
    #[arg(long = "case")]
    case: Option<DirsCase>,
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment file.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV destination (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of drops, or DROPSxREALIZATIONS.
    #[arg(long)]
    trials: Option<String>,
    /// NAME=start:stop:step with NAME one of tx_power_per_lu, feedback_count, N_D, K, d_AD.
    #[arg(long)]
    sweep: Option<String>,
    /// Comma-separated benchmark tags.
    #[arg(long)]
    benchmarks: Option<String>,
    #[command(flatten)]
    select: Selection,
    /// Also write an SVG line plot.
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Use the sub-slot realized SJNR for the jammed benchmarks.
    #[arg(long)]
    realized: bool,
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    select: Selection,
    /// Scenario for the per-user variances.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Monte-Carlo frames for an empirical check (0 skips it).
    #[arg(long, default_value_t = 0)]
    frames: usize,
    /// Per-entry moment CSV when frames > 0.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig(_) | Error::Parse(_) | Error::FeedbackOutOfRange { .. } => Failure::Usage(e.to_string()),
            other => Failure::Runtime(other),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

fn open_out(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load_config(path: &PathBuf) -> Result<ConfigFile, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
    Ok(ConfigFile::from_json(&text)?)
}

fn profile_for(base: &DirsProfile, base_label: &str, sel: &Selection) -> (DirsProfile, String) {
    let mode = sel.mode.unwrap_or(base.mode);
    match sel.case {
        Some(case) => (DirsProfile::one_bit(case, mode), case.as_str().into()),
        None => (DirsProfile { mode, ..base.clone() }, base_label.into()),
    }
}

fn run(args: RunArgs) -> Result<(), Failure> {
    let mut spec = load_config(&args.config)?.experiment()?;
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    if let Some(t) = &args.trials {
        let bad = || Failure::Usage(format!("--trials expects N or DROPSxREALIZATIONS, got '{t}'"));
        match t.split_once('x') {
            Some((d, r)) => {
                spec.drops = d.parse().map_err(|_| bad())?;
                spec.realizations = r.parse().map_err(|_| bad())?;
            }
            None => spec.drops = t.parse().map_err(|_| bad())?,
        }
    }
    if let Some(s) = &args.sweep {
        spec.sweep = parse_sweep(s)?;
    }
    if let Some(b) = &args.benchmarks {
        spec.benchmarks = parse_benchmarks(b)?;
    }
    let (profile, label) = profile_for(&spec.profile, &spec.case_label, &args.select);
    spec.profile = profile;
    spec.case_label = label;
    spec.realized_sjnr |= args.realized;

    let rows = run_experiment(&spec)?;
    let mut out = open_out(&args.out)?;
    write_csv(&rows, &mut out)?;
    out.flush()?;
    if let Some(p) = &args.plot {
        write_svg(&rows, spec.sweep.var.name(), BufWriter::new(File::create(p)?))?;
    }
    Ok(())
}

fn trim(x: f64) -> String {
    let s = format!("{x:.4}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn stats(args: StatsArgs) -> Result<(), Failure> {
    let file = match &args.config {
        Some(p) => load_config(p)?,
        None => ConfigFile::default(),
    };
    let (base, base_label) = file.profile()?;
    let (profile, label) = profile_for(&base, &base_label, &args.select);
    let cfg = file.scenario()?;

    println!("alpha_bar ({}, {}) = {}", profile.mode.as_str(), label, trim(alpha_bar(&profile)));
    let placement = build_scenario(&cfg, &mut ChaCha8Rng::seed_from_u64(cfg.seed))?;
    let ls = large_scale(&placement)?;
    let closed = aca_variances(&cfg, &profile, &ls);
    for (k, v) in closed.per_lu_variance.iter().enumerate() {
        println!("v[{k}] = {v:.6e}");
    }
    if args.frames > 0 {
        let opts = MomentOptions { frames: args.frames, pairs_per_frame: 1, track: Some((0, 0)), seed: args.seed };
        let report = empirical_aca_moments(&cfg, &profile, &opts)?;
        let scale = (closed.per_lu_variance[0] / 2.0).sqrt();
        let mut xs: Vec<f64> = report.tracked.iter().map(|z| z.re / scale).collect();
        let ks = ks_standard_normal(&mut xs);
        println!("frames = {}", report.samples_per_entry);
        println!("worst relative variance error = {:.4}", report.worst_variance_error());
        println!("KS statistic = {:.4}, p = {:.4}", ks.statistic, ks.p_value);
        if let Some(p) = &args.out {
            report.write_csv(BufWriter::new(File::create(p)?))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Stats(a) => stats(a),
        Command::Verify { seed } => verify::run_all(seed).map_err(Failure::from).map(|checks| {
            let mut ok = true;
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
                ok &= c.passed;
            }
            if !ok {
                std::process::exit(1);
            }
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("Usage: antijam <run|stats|verify> [OPTIONS]  (see --help)");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
