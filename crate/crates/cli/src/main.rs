use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use cfrecon::experiment::{self, ExperimentSpec};
use cfrecon::log::{save_log, variants_to_string};
use cfrecon::metrics::{evaluate, EfOptions, EvalOptions, MetricError, DEFAULT_EMD_CAP};
use cfrecon::ptree::language::{enumerate_language_capped, LanguageError, DEFAULT_LANGUAGE_CAP};
use cfrecon::replay::verify_annotation_for_log;
use cfrecon::{
    annotate, length_histogram, load_log, parse_tree, run_experiment, verify_annotation, EventLog,
    LogError, LogFormat, ProcessTree, Strategy, StrategyConfig, StrategyKind,
};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_CAP: u8 = 3;

/// Control-flow reconstruction from frequency-annotated process trees.
#[derive(Parser)]
#[command(name = "cfrecon", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Annotate a tree with visit frequencies by replaying a log.
    Annotate {
        #[arg(long)]
        tree: PathBuf,
        #[command(flatten)]
        log: LogArgs,
        /// Output file; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reconstruct logs from a tree.
    Playout {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        strategy: StrategyKind,
        /// Variance of the loop-count distribution (strategy D).
        #[arg(long)]
        variance: Option<f64>,
        /// Traces per play-out (strategies A and B).
        #[arg(long)]
        traces: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        playouts: usize,
        /// Directory receiving playout_NNN.variants files.
        #[arg(long)]
        out: PathBuf,
    },
    /// Score play-out logs against an original log.
    Evaluate {
        #[command(flatten)]
        log: LogArgs,
        /// Play-out logs in variants or CSV format.
        #[arg(long, num_args = 1.., required = true)]
        playouts: Vec<PathBuf>,
        /// Tree whose activities complete the alphabet.
        #[arg(long)]
        tree: Option<PathBuf>,
        #[command(flatten)]
        scoring: ScoringArgs,
        /// Write the full per-play-out report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Write the pooled play-out length histogram as CSV.
        #[arg(long)]
        hist: Option<PathBuf>,
    },
    /// Run an experiment spec (annotate, play out, evaluate).
    Experiment {
        spec: PathBuf,
        /// Override the spec's variant-pair cap for EMD.
        #[arg(long)]
        emd_cap: Option<usize>,
    },
    /// Enumerate the language of a tree with bounded loop unrolling.
    Lang {
        #[arg(long)]
        tree: PathBuf,
        /// Maximum redo repetitions per loop activation.
        #[arg(long, default_value_t = 1)]
        unroll: usize,
        #[arg(long, default_value_t = DEFAULT_LANGUAGE_CAP)]
        cap: usize,
    },
    /// Check the frequency consistency of an annotated tree.
    Check {
        #[arg(long)]
        tree: PathBuf,
        /// Expected root weight (size of the annotating log).
        #[arg(long)]
        log_size: Option<u64>,
    },
}

#[derive(Args)]
struct LogArgs {
    #[arg(long)]
    log: PathBuf,
    /// csv or variants; guessed from the extension if omitted.
    #[arg(long)]
    log_format: Option<LogFormat>,
}

#[derive(Args)]
struct ScoringArgs {
    #[arg(long, default_value_t = DEFAULT_EMD_CAP)]
    emd_cap: usize,
    /// Quantify always-follows over all traces, not just those containing the first activity.
    #[arg(long)]
    ef_strict: bool,
    /// Leave pairs with an absent first activity unscored.
    #[arg(long)]
    ef_exclude_absent: bool,
}

/// Failure with the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        let error = e.into();
        let code = if is_cap(&error) { EXIT_CAP } else { EXIT_DATA };
        Failure { code, error }
    }
}

fn is_cap(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        matches!(c.downcast_ref(), Some(MetricError::SolverCap { .. }))
            || matches!(c.downcast_ref(), Some(LanguageError::TooLarge { .. }))
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn dispatch(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Annotate { tree, log, out } => cmd_annotate(&tree, &log, out.as_deref()),
        Command::Playout {
            tree,
            strategy,
            variance,
            traces,
            seed,
            playouts,
            out,
        } => {
            let strategy =
                Strategy::from_parts(strategy, variance, traces).map_err(|e| Failure {
                    code: EXIT_USAGE,
                    error: e.into(),
                })?;
            let config = StrategyConfig::new(strategy, seed).with_playouts(playouts);
            cmd_playout(&tree, &config, &out)
        }
        Command::Evaluate {
            log,
            playouts,
            tree,
            scoring,
            json,
            hist,
        } => cmd_evaluate(
            &log,
            &playouts,
            tree.as_deref(),
            &scoring,
            json.as_deref(),
            hist.as_deref(),
        ),
        Command::Experiment { spec, emd_cap } => cmd_experiment(&spec, emd_cap),
        Command::Lang { tree, unroll, cap } => {
            let tree = read_tree(&tree)?;
            let traces = enumerate_language_capped(&tree, unroll, cap)?;
            let log: EventLog = traces.into_iter().collect();
            print!("{}", variants_to_string(&log)?);
            Ok(0)
        }
        Command::Check { tree, log_size } => {
            let tree = read_tree(&tree)?;
            let violations = match log_size {
                Some(n) => verify_annotation_for_log(&tree, n),
                None => verify_annotation(&tree),
            };
            if violations.is_empty() {
                println!("ok");
                return Ok(0);
            }
            for v in &violations {
                println!("{v}");
            }
            Ok(EXIT_DATA)
        }
    }
}

fn cmd_annotate(tree: &Path, log: &LogArgs, out: Option<&Path>) -> Result<u8, Failure> {
    let tree = read_tree(tree)?;
    let log = match read_log(log) {
        Err(e) if matches!(e.downcast_ref(), Some(LogError::Empty)) => {
            log::warn!("log is empty; all weights will be zero");
            EventLog::new()
        }
        other => other?,
    };
    let annotated = annotate(&tree.without_weights(), &log)?;
    let text = format!("{annotated}\n");
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(0)
}

fn cmd_playout(tree: &Path, config: &StrategyConfig, out: &Path) -> Result<u8, Failure> {
    let tree = read_tree(tree)?;
    let logs = run_experiment(&tree, config)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    for (i, l) in logs.iter().enumerate() {
        let path = out.join(format!("playout_{i:03}.variants"));
        save_log(l, &path).with_context(|| format!("writing {}", path.display()))?;
    }
    eprintln!(
        "{} play-outs of {} traces written to {}",
        logs.len(),
        logs.first().map_or(0, EventLog::len),
        out.display()
    );
    Ok(0)
}

fn cmd_evaluate(
    log: &LogArgs,
    playouts: &[PathBuf],
    tree: Option<&Path>,
    scoring: &ScoringArgs,
    json: Option<&Path>,
    hist: Option<&Path>,
) -> Result<u8, Failure> {
    let original = read_log(log)?;
    let logs = playouts
        .iter()
        .map(|p| {
            load_log(p, LogFormat::from_path(p)).with_context(|| format!("reading {}", p.display()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut alphabet: BTreeSet<String> = original.activities();
    for l in &logs {
        alphabet.extend(l.activities());
    }
    if let Some(t) = tree {
        alphabet.extend(read_tree(t)?.activities());
    }
    let options = EvalOptions {
        ef: EfOptions {
            strict: scoring.ef_strict,
            exclude_absent: scoring.ef_exclude_absent,
        },
        emd_cap: scoring.emd_cap,
    };
    let report = evaluate(&original, &logs, &alphabet, options)?;
    let m = &report.mean;
    println!("{}", experiment::SUMMARY_COLUMNS);
    println!(
        "playouts,{},{},{},{},{},{},{}",
        logs.len(),
        fmt(Some(m.nhi)),
        fmt(m.emd),
        fmt(Some(m.nmi)),
        fmt(m.af_f1),
        fmt(m.sf_f1),
        fmt(m.nf_f1)
    );
    if let Some(p) = json {
        let text = serde_json::to_string_pretty(&report)?;
        fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display()))?;
    }
    if let Some(p) = hist {
        let mut pooled = cfrecon::LengthHistogram::default();
        for l in &logs {
            if let Ok(h) = length_histogram(l) {
                pooled.merge(&h);
            }
        }
        fs::write(p, experiment::histogram_csv(&pooled))
            .with_context(|| format!("writing {}", p.display()))?;
    }
    if m.emd.is_none() {
        eprintln!(
            "EMD not computed: variant pairs exceed --emd-cap {}",
            scoring.emd_cap
        );
        return Ok(EXIT_CAP);
    }
    Ok(0)
}

fn cmd_experiment(spec: &Path, emd_cap: Option<usize>) -> Result<u8, Failure> {
    let mut spec = ExperimentSpec::load(spec)?;
    if let Some(cap) = emd_cap {
        spec.emd_cap = cap;
    }
    let result = experiment::run(&spec)?;
    print!("{}", experiment::summary_csv(&result));
    eprintln!("results written to {}", spec.out.display());
    Ok(0)
}

fn fmt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".into(), |v| format!("{v:.6}"))
}

fn read_tree(path: &Path) -> Result<ProcessTree> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_tree(text.trim()).with_context(|| format!("parsing {}", path.display()))
}

fn read_log(args: &LogArgs) -> Result<EventLog> {
    let format = args
        .log_format
        .unwrap_or_else(|| LogFormat::from_path(&args.log));
    load_log(&args.log, format).with_context(|| format!("reading {}", args.log.display()))
}
