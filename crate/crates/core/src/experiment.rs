//! Annotate, play out and evaluate, driven by a small spec file.
//!
//! A spec is TOML:
//!
//! ```toml
//! tree = "patients.ptree"
//! log = "patients.csv"
//! annotate = true        # replay the log onto a plain tree first
//! playouts = 100
//! seed = 7
//! out = "results"
//!
//! [[strategy]]
//! kind = "A"             # A and B default to the original log size
//!
//! [[strategy]]
//! kind = "D"
//! variance = 0.5
//! ```
//!
//! Relative paths are resolved against the directory of the spec file.
//! Output files: `tree.ptree`, `summary.csv`, `report.json`,
//! `hist_original.csv` and one `hist_<strategy>.csv` per strategy.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::log::{length_histogram, load_log, EventLog, LengthHistogram, LogError, LogFormat};
use crate::metrics::{
    evaluate, EfOptions, EvalOptions, EvaluationReport, MetricError, DEFAULT_EMD_CAP,
};
use crate::playout::{run_experiment, PlayoutError, Strategy, StrategyConfig, StrategyKind};
use crate::ptree::{parse_tree, ParseError, ProcessTree};
use crate::replay::{annotate, ReplayError};

/// Column header of `summary.csv`.
pub const SUMMARY_COLUMNS: &str = "strategy,playouts,nhi,emd,nmi,af_f1,sf_f1,nf_f1";

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("spec: {0}")]
    Spec(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("tree {path}: {source}")]
    Tree { path: PathBuf, source: ParseError },
    #[error("log {path}: {source}")]
    Log { path: PathBuf, source: LogError },
    #[error("annotation: {0}")]
    Replay(#[from] ReplayError),
    #[error("strategy {name}: {source}")]
    Playout { name: String, source: PlayoutError },
    #[error("strategy {name}: {source}")]
    Metric { name: String, source: MetricError },
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    tree: PathBuf,
    log: PathBuf,
    log_format: Option<String>,
    #[serde(default)]
    annotate: bool,
    #[serde(default = "default_playouts")]
    playouts: usize,
    #[serde(default)]
    seed: u64,
    out: PathBuf,
    emd_cap: Option<usize>,
    #[serde(default)]
    ef_strict: bool,
    #[serde(default)]
    ef_exclude_absent: bool,
    #[serde(default)]
    strategy: Vec<RawStrategy>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
struct RawStrategy {
    kind: String,
    variance: Option<f64>,
    traces: Option<u64>,
    name: Option<String>,
}

fn default_playouts() -> usize {
    100
}

/// One strategy row of an experiment. `traces` is `None` for A and B when
/// the count should follow the original log size.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategySpec {
    pub name: String,
    pub kind: StrategyKind,
    pub variance: Option<f64>,
    pub traces: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub tree: PathBuf,
    pub log: PathBuf,
    pub log_format: LogFormat,
    pub annotate: bool,
    pub playouts: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub emd_cap: usize,
    pub ef: EfOptions,
    pub strategies: Vec<StrategySpec>,
}

impl ExperimentSpec {
    /// Parses spec text; relative paths are joined onto `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, ExperimentError> {
        let raw: RawSpec =
            toml::from_str(text).map_err(|e| ExperimentError::Spec(e.to_string()))?;
        if raw.strategy.is_empty() {
            return Err(ExperimentError::Spec("no [[strategy]] sections".into()));
        }
        if raw.playouts == 0 {
            return Err(ExperimentError::Spec("playouts must be positive".into()));
        }
        let log_format = match &raw.log_format {
            Some(f) => f
                .parse()
                .map_err(|e: LogError| ExperimentError::Spec(e.to_string()))?,
            None => LogFormat::from_path(&raw.log),
        };
        let mut strategies: Vec<StrategySpec> = Vec::new();
        for s in &raw.strategy {
            let kind: StrategyKind = s
                .kind
                .parse()
                .map_err(|e: PlayoutError| ExperimentError::Spec(e.to_string()))?;
            let name = match &s.name {
                Some(n) => n.clone(),
                None => match s.variance {
                    Some(v) if kind == StrategyKind::D => format!("D({v})"),
                    _ => kind.to_string(),
                },
            };
            if strategies.iter().any(|o| o.name == name) {
                return Err(ExperimentError::Spec(format!(
                    "duplicate strategy name '{name}'"
                )));
            }
            strategies.push(StrategySpec {
                name,
                kind,
                variance: s.variance,
                traces: s.traces,
            });
        }
        Ok(ExperimentSpec {
            tree: base.join(&raw.tree),
            log: base.join(&raw.log),
            log_format,
            annotate: raw.annotate,
            playouts: raw.playouts,
            seed: raw.seed,
            out: base.join(&raw.out),
            emd_cap: raw.emd_cap.unwrap_or(DEFAULT_EMD_CAP),
            ef: EfOptions {
                strict: raw.ef_strict,
                exclude_absent: raw.ef_exclude_absent,
            },
            strategies,
        })
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = read(path)?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }
}

/// Result row for one strategy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategyResult {
    pub name: String,
    pub strategy: String,
    pub playouts: usize,
    pub traces_per_playout: u64,
    pub report: EvaluationReport,
    /// Trace lengths pooled over all play-outs.
    #[serde(skip)]
    pub lengths: LengthHistogram,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub tree: String,
    pub original_traces: u64,
    pub seed: u64,
    #[serde(skip)]
    pub original_lengths: LengthHistogram,
    pub strategies: Vec<StrategyResult>,
}

/// Play-out generator used by [`run_with`]; [`run_experiment`] in production.
pub type Generator<'a> =
    dyn Fn(&ProcessTree, &StrategyConfig) -> Result<Vec<EventLog>, PlayoutError> + Sync + 'a;

/// Runs the spec and writes all output files.
pub fn run(spec: &ExperimentSpec) -> Result<ExperimentResult, ExperimentError> {
    run_with(spec, &run_experiment)
}

pub fn run_with(
    spec: &ExperimentSpec,
    generate: &Generator<'_>,
) -> Result<ExperimentResult, ExperimentError> {
    let result = compute(spec, generate)?;
    write_outputs(&spec.out, &result)?;
    Ok(result)
}

fn compute(
    spec: &ExperimentSpec,
    generate: &Generator<'_>,
) -> Result<ExperimentResult, ExperimentError> {
    let text = read(&spec.tree)?;
    let mut tree = parse_tree(text.trim()).map_err(|source| ExperimentError::Tree {
        path: spec.tree.clone(),
        source,
    })?;
    let original = load_log(&spec.log, spec.log_format).map_err(|source| ExperimentError::Log {
        path: spec.log.clone(),
        source,
    })?;
    if spec.annotate {
        tree = annotate(&tree.without_weights(), &original)?;
    }
    let original_lengths = length_histogram(&original).map_err(|source| ExperimentError::Log {
        path: spec.log.clone(),
        source,
    })?;
    let mut alphabet: BTreeSet<String> = tree.activities();
    alphabet.extend(original.activities());
    let options = EvalOptions {
        ef: spec.ef,
        emd_cap: spec.emd_cap,
    };

    let mut strategies = Vec::with_capacity(spec.strategies.len());
    for s in &spec.strategies {
        let playout_err = |source| ExperimentError::Playout {
            name: s.name.clone(),
            source,
        };
        let traces = match s.kind {
            StrategyKind::A | StrategyKind::B => Some(s.traces.unwrap_or(original.len())),
            _ => s.traces,
        };
        let strategy = Strategy::from_parts(s.kind, s.variance, traces).map_err(playout_err)?;
        let config = StrategyConfig::new(strategy, spec.seed).with_playouts(spec.playouts);
        log::info!("{}: {} play-outs", s.name, spec.playouts);
        let logs = generate(&tree, &config).map_err(playout_err)?;
        let report = evaluate(&original, &logs, &alphabet, options).map_err(|source| {
            ExperimentError::Metric {
                name: s.name.clone(),
                source,
            }
        })?;
        let mut lengths = LengthHistogram::default();
        for l in &logs {
            if let Ok(h) = length_histogram(l) {
                lengths.merge(&h);
            }
        }
        strategies.push(StrategyResult {
            name: s.name.clone(),
            strategy: strategy.to_string(),
            playouts: logs.len(),
            traces_per_playout: logs.first().map_or(0, EventLog::len),
            report,
            lengths,
        });
    }
    Ok(ExperimentResult {
        tree: tree.to_string(),
        original_traces: original.len(),
        seed: spec.seed,
        original_lengths,
        strategies,
    })
}

/// `summary.csv` contents.
pub fn summary_csv(result: &ExperimentResult) -> String {
    let mut out = format!("{SUMMARY_COLUMNS}\n");
    for s in &result.strategies {
        let m = &s.report.mean;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            csv_field(&s.name),
            s.playouts,
            num(Some(m.nhi)),
            num(m.emd),
            num(Some(m.nmi)),
            num(m.af_f1),
            num(m.sf_f1),
            num(m.nf_f1),
        );
    }
    out
}

/// `length,count` rows for a histogram.
pub fn histogram_csv(h: &LengthHistogram) -> String {
    let mut out = String::from("length,count\n");
    for (len, count) in h.bins() {
        let _ = writeln!(out, "{len},{count}");
    }
    out
}

/// File-name friendly form of a strategy name: `D(0.5)` becomes `d_0_5`.
pub fn slug(name: &str) -> String {
    let mut s = String::new();
    for c in name.chars() {
        if c.is_ascii_alphanumeric() {
            s.push(c.to_ascii_lowercase());
        } else if !s.ends_with('_') {
            s.push('_');
        }
    }
    s.trim_matches('_').to_string()
}

fn write_outputs(dir: &Path, result: &ExperimentResult) -> Result<(), ExperimentError> {
    fs::create_dir_all(dir).map_err(|source| ExperimentError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    write(&dir.join("tree.ptree"), &format!("{}\n", result.tree))?;
    write(&dir.join("summary.csv"), &summary_csv(result))?;
    write(
        &dir.join("hist_original.csv"),
        &histogram_csv(&result.original_lengths),
    )?;
    for s in &result.strategies {
        let file = format!("hist_{}.csv", slug(&s.name));
        write(&dir.join(file), &histogram_csv(&s.lengths))?;
    }
    let json = serde_json::to_string_pretty(result).expect("report serializes");
    write(&dir.join("report.json"), &(json + "\n"))
}

fn num(x: Option<f64>) -> String {
    match x {
        Some(v) => format!("{v:.6}"),
        None => "NA".into(),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn read(path: &Path) -> Result<String, ExperimentError> {
    fs::read_to_string(path).map_err(|source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), ExperimentError> {
    fs::write(path, text).map_err(|source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPEC: &str = r#"
tree = "t.ptree"
log = "l.variants"
seed = 3

out = "res"
[[strategy]]
kind = "A"
[[strategy]]
kind = "d"
variance = 0.5
"#;

    #[test]
    fn parses_spec_with_defaults() {
        let s = ExperimentSpec::parse(SPEC, Path::new("/base")).unwrap();
        assert_eq!(s.tree, Path::new("/base/t.ptree"));
        assert_eq!(s.log_format, LogFormat::Variants);
        assert_eq!(s.playouts, 100);
        assert_eq!(s.emd_cap, DEFAULT_EMD_CAP);
        assert!(!s.annotate);
        let names: Vec<_> = s.strategies.iter().map(|x| x.name.as_str()).collect();
        assert_eq!(names, ["A", "D(0.5)"]);
    }

    #[test]
    fn rejects_bad_specs() {
        let base = Path::new(".");
        assert!(ExperimentSpec::parse("tree='a'\nlog='b'\nout='c'\n", base).is_err());
        let unknown = format!("{SPEC}\ncolour = 1\n");
        assert!(ExperimentSpec::parse(&unknown, base).is_err());
        let dup = format!("{SPEC}[[strategy]]\nkind = \"A\"\n");
        assert!(ExperimentSpec::parse(&dup, base).is_err());
        let bad_kind = SPEC.replace("kind = \"A\"", "kind = \"Q\"");
        assert!(ExperimentSpec::parse(&bad_kind, base).is_err());
    }

    #[test]
    fn slugs() {
        assert_eq!(slug("D(0.5)"), "d_0_5");
        assert_eq!(slug("SOTA"), "sota");
    }
}
