//! Command-line front end.
//!
//! Exit codes: 0 success, 1 failed self-test or φ check, 2 configuration
//! error, 3 numerical divergence, 4 IO error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use push_asgd::config::{parse_config_file, parse_config_with_overrides};
use push_asgd::diagnostics::{build_w_tilde, empirical_contraction, l_norm_sq, log_omega, phi_backward, uniform};
use push_asgd::output::{emit_experiment, emit_quantiles, emit_rate_report};
use push_asgd::runner::{self, aggregate, run_experiment, RateProbeConfig, RunnerError};
use push_asgd::{selftest, Error, ExperimentConfig, OracleError, Variant};

const OUT_ENV: &str = "PUSH_ASGD_OUT";
const DEFAULT_OUT: &str = "push-asgd-out";

#[derive(Parser)]
#[command(name = "push-asgd", version, about = "Push-ASGD simulator for time-varying directed networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (algorithm, seed) cell and write traces plus summary.json.
    Run(RunArgs),
    /// Run, then write per-algorithm quantile curves of one metric.
    Compare {
        #[command(flatten)]
        run: RunArgs,
        /// Trace column to aggregate.
        #[arg(long, default_value = "gap")]
        metric: String,
    },
    /// Fit the decay of the averaged squared gradient norm against the horizon.
    Rate(RateArgs),
    /// Run the bundled invariant suites.
    Selftest,
    /// Pure-mixing rounds on a config's topology with the backward φ sequence.
    PhiCheck {
        #[command(flatten)]
        source: ConfigArgs,
        #[arg(long, default_value_t = 500)]
        rounds: usize,
    },
}

#[derive(Args)]
struct ConfigArgs {
    /// Config file, or a preset name.
    config: Option<String>,
    /// Start from a named preset.
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// Override a field, e.g. `--set algorithms.0.alpha=0.01`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: ConfigArgs,
    /// Output directory; falls back to the config, then $PUSH_ASGD_OUT.
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = default_workers())]
    workers: usize,
}

#[derive(Args)]
struct RateArgs {
    #[arg(long, default_value = "push-asgd")]
    variant: String,
    #[arg(long, value_delimiter = ',', default_values_t = [300, 1000, 3000, 10000])]
    horizons: Vec<usize>,
    /// Number of seeds (1..=N).
    #[arg(long, default_value_t = 10)]
    seeds: u64,
    #[arg(long, default_value_t = 0.5)]
    c_alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    c_beta: f64,
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = default_workers())]
    workers: usize,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Runner(RunnerError::Invalid(_)) | Error::Graph(_) => 2,
        Error::Io { .. } | Error::Oracle(OracleError::Data(_)) | Error::Runner(RunnerError::Oracle(OracleError::Data(_))) => 4,
        Error::Algo(push_asgd::AlgoError::Diverged { .. }) => 3,
        Error::Runner(RunnerError::Algo(push_asgd::AlgoError::Diverged { .. })) => 3,
        Error::Runner(RunnerError::Graph(_) | RunnerError::Oracle(_) | RunnerError::UnknownMetric(_)) => 2,
        _ => 1,
    }
}

fn load(source: &ConfigArgs) -> Result<ExperimentConfig, Error> {
    match (&source.config, &source.preset) {
        (Some(c), None) if !Path::new(c).exists() && runner::PRESET_NAMES.contains(&c.as_str()) => {
            Ok(parse_config_with_overrides(c, &source.overrides)?)
        }
        (Some(c), None) => parse_config_file(Path::new(c), &source.overrides),
        (None, Some(p)) => Ok(parse_config_with_overrides(&format!("preset = {p:?}"), &source.overrides)?),
        _ => Ok(parse_config_with_overrides("", &source.overrides)?),
    }
}

fn out_dir(flag: &Option<PathBuf>, config: Option<&ExperimentConfig>) -> PathBuf {
    flag.clone()
        .or_else(|| config.and_then(|c| c.output_dir.clone()))
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

/// Runs the experiment; returns 3 when any cell diverged.
fn run(args: &RunArgs, metric: Option<&str>) -> Result<u8, Error> {
    let config = load(&args.source)?;
    if let Some(m) = metric {
        if !push_asgd::ProbeRow::COLUMNS.contains(&m) {
            return Err(RunnerError::UnknownMetric(m.to_string()).into());
        }
    }
    let dir = out_dir(&args.out, Some(&config));
    let traces = run_experiment(&config, args.workers)?;
    let files = emit_experiment(&config, &traces, &dir)?;
    println!("fingerprint {:016x}", config.fingerprint());
    for t in &traces {
        let last = t.final_row();
        println!(
            "{:<10} seed {:<6} t {:<7} grad_norm_sq {:<12} gap {}{}",
            t.variant.name(),
            t.seed,
            last.map_or(0, |r| r.t),
            last.map_or("-".into(), |r| format!("{:.4e}", r.grad_norm_sq)),
            last.and_then(|r| r.gap).map_or("-".into(), |g| format!("{g:.4e}")),
            t.divergence.as_ref().map_or(String::new(), |d| format!("  DIVERGED: {d}")),
        );
    }
    if let Some(m) = metric {
        let curves = aggregate(&traces, m)?;
        let path = emit_quantiles(&curves, m, &dir)?;
        for c in &curves {
            if let Some(p) = c.points.last() {
                println!(
                    "{:<10} final median {m} {:.4e} [q25 {:.4e}, q75 {:.4e}] over {} seeds",
                    c.variant.name(),
                    p.median,
                    p.q25,
                    p.q75,
                    p.count
                );
            }
        }
        println!("wrote {}", path.display());
    }
    println!("wrote {} files to {}", files.len(), dir.display());
    Ok(if traces.iter().any(|t| t.divergence.is_some()) { 3 } else { 0 })
}

fn rate(args: &RateArgs) -> Result<u8, Error> {
    let variant = Variant::from_name(&args.variant).ok_or_else(|| {
        Error::Runner(RunnerError::Invalid(vec![(
            "variant".into(),
            format!("unknown variant {:?}", args.variant),
        )]))
    })?;
    let mut config = RateProbeConfig::pl_sine(args.horizons.clone(), (1..=args.seeds).collect());
    config.variant = variant;
    config.c_alpha = args.c_alpha;
    config.c_beta = args.c_beta;
    let report = runner::rate_probe(&config, args.workers)?;
    println!("{:>8} {:>11} {:>11} {:>5} {:>12}", "T", "alpha", "beta", "b", "median");
    for p in &report.points {
        println!("{:>8} {:>11.4e} {:>11.4e} {:>5} {:>12.4e}", p.horizon, p.alpha, p.beta, p.batch, p.median);
    }
    println!("slope {:.4}", report.slope);
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let path = emit_rate_report(&report, &out_dir(&args.out, None))?;
    println!("wrote {}", path.display());
    Ok(0)
}

fn phi_check(source: &ConfigArgs, rounds: usize) -> Result<u8, Error> {
    let config = load(source)?;
    let schedule = config.topology.build()?;
    let n = config.topology.n;
    let mut y = vec![1.0; n];
    let mut x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin()).collect();
    let mut tildes = Vec::with_capacity(rounds);
    let mut zs = Vec::with_capacity(rounds + 1);
    zs.push(x.clone());
    for t in 0..rounds {
        let w = schedule.mixing_at(t);
        let mut ny = vec![0.0; n];
        let mut nx = vec![0.0; n];
        w.apply(&y, 1, &mut ny);
        w.apply(&x, 1, &mut nx);
        tildes.push(build_w_tilde(&w, &y, &ny)?);
        y = ny;
        x = nx;
        zs.push(x.iter().zip(&y).map(|(a, b)| a / b).collect());
    }
    let phis = phi_backward(&tildes, uniform(n));
    let sum_err = phis.iter().map(|p| (p.iter().sum::<f64>() - 1.0).abs()).fold(0.0, f64::max);
    let residual = phis.max_residual(&tildes);
    let mut max_lambda = 0.0f64;
    for t in 0..rounds {
        if l_norm_sq(&zs[t], 1, phis.get(t)).sqrt() > 1e-10 {
            max_lambda = max_lambda.max(empirical_contraction(&zs[t], &zs[t + 1], 1, phis.get(t), phis.get(t + 1)));
        }
    }
    let ok = sum_err <= 1e-10 && residual <= 1e-9 && max_lambda < 1.0;
    println!("rounds            {rounds}");
    println!("max |sum phi - 1| {sum_err:.3e} (tolerance 1e-10)");
    println!("max residual      {residual:.3e} (tolerance 1e-9)");
    println!("max lambda        {max_lambda:.6} (must be < 1)");
    println!("min phi           {:.3e}", phis.min_entry());
    println!("ln omega          {:.3}", log_omega(n));
    println!("{}", if ok { "PASS" } else { "FAIL" });
    Ok(if ok { 0 } else { 1 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => run(args, None),
        Command::Compare { run: args, metric } => run(args, Some(metric)),
        Command::Rate(args) => rate(args),
        Command::Selftest => {
            let report = selftest::run_selftest();
            println!("{report}");
            Ok(if report.all_passed() { 0 } else { 1 })
        }
        Command::PhiCheck { source, rounds } => phi_check(source, *rounds),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
