use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use multikrum_cli::commands::{self, CmdOutcome, RuleArg};
use multikrum_cli::config::ConfigFile;
use multikrum_cli::runlog::{append_run, RunRecord, RunStatus, DEFAULT_LOG_PATH};
use multikrum_cli::CliError;

use multikrum_core::adversarial::SearchConfig;
use multikrum_core::aggregators::{AggregationParams, DEFAULT_GEOMEDIAN_MAX_ITER, DEFAULT_GEOMEDIAN_TOL};
use multikrum_core::bounds::DEFAULT_TRANSITION_TOL;

/// Robust-aggregation bound tables, transition points, adversarial search,
/// numeric verification, and point-file aggregation.
#[derive(Parser)]
#[command(name = "multikrum", version)]
struct Cli {
    /// RNG seed for seeded commands (search, verify)
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Write the primary result to this file (atomic replace); most
    /// commands print it to stdout when omitted
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Append-only run log, one JSON object per line
    #[arg(long, global = true)]
    log: Option<PathBuf>,

    /// Omit the timestamp from the run-log line, making reruns byte-stable
    #[arg(long, global = true)]
    no_timestamp: bool,

    /// key=value file supplying defaults; explicit flags win
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit the per-m table of upper and lower bounds for one (n, f) as CSV
    Bounds {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        f: Option<usize>,
        /// First m in the table (default 1)
        #[arg(long)]
        m_min: Option<usize>,
        /// Last m in the table (default n-f)
        #[arg(long)]
        m_max: Option<usize>,
    },
    /// Locate the transition point where the upper bound starts decreasing:
    /// single (n, f) as JSON, or a (ratio x n) sweep as CSV
    Transition {
        /// Single-pair mode: cohort size
        #[arg(long)]
        n: Option<usize>,
        /// Single-pair mode: outlier budget
        #[arg(long)]
        f: Option<usize>,
        /// Sweep mode: comma-separated f/n ratios (default 0.1,0.01,0.001)
        #[arg(long, value_delimiter = ',')]
        ratios: Option<Vec<f64>>,
        /// Sweep mode: comma-separated n values (default 1000,10000,100000)
        #[arg(long, value_delimiter = ',')]
        n_list: Option<Vec<usize>>,
        /// Bisection tolerance on the real transition point
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Random-restart hill-climb for worst-case configurations, with a
    /// replayable certificate and a soundness check against the upper bound
    Search {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        f: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
        /// Point dimension (default 1)
        #[arg(long)]
        dim: Option<usize>,
        /// Independent restarts (default 64)
        #[arg(long)]
        restarts: Option<usize>,
        /// Hill-climb iterations per restart (default 500)
        #[arg(long)]
        iterations: Option<usize>,
        /// Initial perturbation step (default 1.0)
        #[arg(long)]
        step: Option<f64>,
        /// Clip radius multiplier around the honest mean (default 10.0)
        #[arg(long)]
        clip: Option<f64>,
    },
    /// Run all numeric self-checks: lemma suites, construction fidelity,
    /// bound ordering, and closed-form collapse
    Verify {
        /// Random instances per lemma suite (default 1000)
        #[arg(long)]
        trials: Option<usize>,
        /// Largest random cohort size (default 30)
        #[arg(long)]
        max_n: Option<usize>,
        /// Largest random dimension (default 5)
        #[arg(long)]
        max_d: Option<usize>,
    },
    /// Apply an aggregation rule to a JSON point file and print the result
    Aggregate {
        /// Input file: {"points": [[...], ...]}
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, value_enum)]
        rule: Option<RuleArg>,
        /// Outlier budget (default 0)
        #[arg(long)]
        f: Option<usize>,
        /// Selection size for multikrum (default 1)
        #[arg(long)]
        m: Option<usize>,
        /// Convergence tolerance for geometric-median
        #[arg(long)]
        tol: Option<f64>,
        /// Iteration cap for geometric-median
        #[arg(long)]
        max_iter: Option<usize>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Bounds { .. } => "bounds",
            Command::Transition { .. } => "transition",
            Command::Search { .. } => "search",
            Command::Verify { .. } => "verify",
            Command::Aggregate { .. } => "aggregate",
        }
    }
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let kind = err.kind();
            let _ = err.print();
            return match kind {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };

    let cfg = match &cli.config {
        Some(path) => match ConfigFile::load(path) {
            Ok(cfg) => cfg,
            Err(err) => {
                eprintln!("{err}");
                return err.exit_code();
            }
        },
        None => ConfigFile::empty(),
    };

    // Global settings; the run log records every executed command.
    let globals = (|| -> Result<(Option<PathBuf>, PathBuf, bool), CliError> {
        let out = cfg.resolve_optional(cli.out.clone(), "out")?;
        let log = cfg.resolve(cli.log.clone(), "log", PathBuf::from(DEFAULT_LOG_PATH))?;
        let no_timestamp = cfg.resolve_switch(cli.no_timestamp, "no-timestamp")?;
        Ok((out, log, no_timestamp))
    })();
    let (out, log, no_timestamp) = match globals {
        Ok(g) => g,
        Err(err) => {
            eprintln!("{err}");
            return err.exit_code();
        }
    };

    let mut params: BTreeMap<String, String> = BTreeMap::new();
    let mut seed_used: Option<u64> = None;
    let result =
        dispatch(&cli.command, &cfg, cli.seed, out.as_deref(), &mut params, &mut seed_used);

    let (status, exit_code) = match &result {
        Ok(outcome) if outcome.verification_passed => (RunStatus::Ok, 0),
        Ok(_) => (RunStatus::VerificationFailure, 2),
        Err(CliError::Verification(_)) => (RunStatus::VerificationFailure, 2),
        Err(CliError::Usage(_)) => (RunStatus::Error, 1),
    };

    match &result {
        Ok(outcome) => print!("{}", outcome.stdout),
        Err(err) => eprintln!("{err}"),
    }

    let mut record = RunRecord::new(cli.command.name(), params, seed_used);
    if let Ok(outcome) = &result {
        record.outputs = outcome.outputs.clone();
    }
    record.status = status;
    record.stamp(no_timestamp);
    if let Err(err) = append_run(&log, &record) {
        eprintln!("{err}");
        return err.exit_code();
    }

    exit_code
}

/// Resolves each setting (flag > config > default), recording the effective
/// values in `params` as it goes so the run-log line reflects what actually
/// ran, then executes the command.
fn dispatch(
    command: &Command,
    cfg: &ConfigFile,
    seed_flag: Option<u64>,
    out: Option<&std::path::Path>,
    params: &mut BTreeMap<String, String>,
    seed_used: &mut Option<u64>,
) -> Result<CmdOutcome, CliError> {
    match command {
        Command::Bounds { n, f, m_min, m_max } => {
            let n = cfg.resolve_required(*n, "n")?;
            params.insert("n".into(), n.to_string());
            let f = cfg.resolve_required(*f, "f")?;
            params.insert("f".into(), f.to_string());
            let m_min = cfg.resolve(*m_min, "m-min", 1)?;
            params.insert("m-min".into(), m_min.to_string());
            let m_max = cfg.resolve_optional(*m_max, "m-max")?;
            if let Some(v) = m_max {
                params.insert("m-max".into(), v.to_string());
            }
            commands::cmd_bounds(n, f, m_min, m_max, out)
        }
        Command::Transition { n, f, ratios, n_list, tol } => {
            let tol = cfg.resolve(*tol, "tol", DEFAULT_TRANSITION_TOL)?;
            params.insert("tol".into(), tol.to_string());
            if n.is_some() || f.is_some() {
                if ratios.is_some() || n_list.is_some() {
                    return Err(CliError::usage(
                        "pass either --n/--f (single pair) or --ratios/--n-list (sweep), not both"
                            .to_string(),
                    ));
                }
                let n = cfg.resolve_required(*n, "n")?;
                params.insert("n".into(), n.to_string());
                let f = cfg.resolve_required(*f, "f")?;
                params.insert("f".into(), f.to_string());
                commands::cmd_transition_single(n, f, tol, out)
            } else {
                let ratios =
                    cfg.resolve_list(ratios.clone(), "ratios", vec![0.1, 0.01, 0.001])?;
                params.insert(
                    "ratios".into(),
                    ratios.iter().map(f64::to_string).collect::<Vec<_>>().join(","),
                );
                let n_list =
                    cfg.resolve_list(n_list.clone(), "n-list", vec![1000, 10000, 100000])?;
                params.insert(
                    "n-list".into(),
                    n_list.iter().map(usize::to_string).collect::<Vec<_>>().join(","),
                );
                commands::cmd_transition_sweep(&ratios, &n_list, tol, out)
            }
        }
        Command::Search { n, f, m, dim, restarts, iterations, step, clip } => {
            let n = cfg.resolve_required(*n, "n")?;
            params.insert("n".into(), n.to_string());
            let f = cfg.resolve_required(*f, "f")?;
            params.insert("f".into(), f.to_string());
            let m = cfg.resolve_required(*m, "m")?;
            params.insert("m".into(), m.to_string());
            let seed = *seed_used.insert(cfg.resolve(seed_flag, "seed", 0)?);
            let mut config = SearchConfig::new(AggregationParams::new(n, f, m)?, seed);
            config.dim = cfg.resolve(*dim, "dim", config.dim)?;
            params.insert("dim".into(), config.dim.to_string());
            config.restarts = cfg.resolve(*restarts, "restarts", config.restarts)?;
            params.insert("restarts".into(), config.restarts.to_string());
            config.iterations = cfg.resolve(*iterations, "iterations", config.iterations)?;
            params.insert("iterations".into(), config.iterations.to_string());
            config.initial_step = cfg.resolve(*step, "step", config.initial_step)?;
            params.insert("step".into(), config.initial_step.to_string());
            config.clip_multiplier = cfg.resolve(*clip, "clip", config.clip_multiplier)?;
            params.insert("clip".into(), config.clip_multiplier.to_string());
            commands::cmd_search(&config, out)
        }
        Command::Verify { trials, max_n, max_d } => {
            let trials = cfg.resolve(*trials, "trials", 1000)?;
            params.insert("trials".into(), trials.to_string());
            let seed = *seed_used.insert(cfg.resolve(seed_flag, "seed", 0)?);
            let max_n = cfg.resolve(*max_n, "max-n", 30)?;
            params.insert("max-n".into(), max_n.to_string());
            let max_d = cfg.resolve(*max_d, "max-d", 5)?;
            params.insert("max-d".into(), max_d.to_string());
            commands::cmd_verify(trials, seed, max_n, max_d)
        }
        Command::Aggregate { input, rule, f, m, tol, max_iter } => {
            let input: PathBuf = cfg.resolve_required(input.clone(), "input")?;
            params.insert("input".into(), input.display().to_string());
            let rule = cfg.resolve_required(*rule, "rule")?;
            params.insert("rule".into(), rule.name());
            let f = cfg.resolve(*f, "f", 0)?;
            params.insert("f".into(), f.to_string());
            let m = cfg.resolve(*m, "m", 1)?;
            params.insert("m".into(), m.to_string());
            let tol = cfg.resolve(*tol, "tol", DEFAULT_GEOMEDIAN_TOL)?;
            params.insert("tol".into(), tol.to_string());
            let max_iter = cfg.resolve(*max_iter, "max-iter", DEFAULT_GEOMEDIAN_MAX_ITER)?;
            params.insert("max-iter".into(), max_iter.to_string());
            commands::cmd_aggregate(&input, rule, f, m, tol, max_iter, out)
        }
    }
}
