//! Scores comparing a reconstructed log to the original.

mod ef;
mod emd;
mod levenshtein;
mod transport;

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::log::{length_histogram, EventLog, LengthHistogram};

pub use ef::{ef_f1, ef_relations, EfClass, EfF1, EfOptions, EfRelationMap};
pub use emd::{emd, emd_with_plan, TransportPlan, DEFAULT_EMD_CAP};
pub use levenshtein::{levenshtein, normalized_levenshtein};

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("reference histogram is empty")]
    EmptyHistogram,
    #[error("log is empty")]
    EmptyLog,
    #[error("no play-out logs to evaluate")]
    NoPlayouts,
    #[error("EMD needs {pairs} variant pairs, above the cap of {cap}")]
    SolverCap { pairs: usize, cap: usize },
    #[error("relation maps are over different alphabets")]
    AlphabetMismatch,
    #[error("activity '{0}' is not in the alphabet")]
    UnknownActivity(String),
    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),
}

/// Normalized histogram intersection of a reconstructed histogram `i`
/// against the original `m`.
pub fn nhi(i: &LengthHistogram, m: &LengthHistogram) -> Result<f64, MetricError> {
    let total = m.total();
    if total == 0 {
        return Err(MetricError::EmptyHistogram);
    }
    let common: u64 = m.bins().map(|(len, c)| c.min(i.count(len))).sum();
    Ok(common as f64 / total as f64)
}

/// Normalized multiset intersection: shared traces (with multiplicity) over
/// the size of the original log `l1`.
pub fn nmi(l1: &EventLog, l2: &EventLog) -> Result<f64, MetricError> {
    if l1.is_empty() {
        return Err(MetricError::EmptyLog);
    }
    let common: u64 = l1.variants().map(|(t, c)| c.min(l2.multiplicity(t))).sum();
    Ok(common as f64 / l1.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalOptions {
    pub ef: EfOptions,
    pub emd_cap: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            ef: EfOptions::default(),
            emd_cap: DEFAULT_EMD_CAP,
        }
    }
}

/// Scores of one play-out log. `emd` is `None` when the solver cap was hit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scores {
    pub nhi: f64,
    pub emd: Option<f64>,
    pub nmi: f64,
    pub f1: EfF1,
}

/// Means over play-outs. F1 means skip play-outs where the class is NA;
/// the EMD mean is `None` if any play-out hit the cap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanScores {
    pub nhi: f64,
    pub emd: Option<f64>,
    pub nmi: f64,
    pub af_f1: Option<f64>,
    pub sf_f1: Option<f64>,
    pub nf_f1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub per_playout: Vec<Scores>,
    pub mean: MeanScores,
}

pub fn evaluate(
    original: &EventLog,
    playouts: &[EventLog],
    alphabet: &BTreeSet<String>,
    options: EvalOptions,
) -> Result<EvaluationReport, MetricError> {
    if playouts.is_empty() {
        return Err(MetricError::NoPlayouts);
    }
    let hist = length_histogram(original).map_err(|_| MetricError::EmptyLog)?;
    let reference = ef_relations(original, alphabet, options.ef)?;
    let per_playout = playouts
        .par_iter()
        .map(|p| {
            let ph = length_histogram(p).unwrap_or_default();
            let emd = match emd(p, original, options.emd_cap) {
                Ok(d) => Some(d),
                Err(MetricError::SolverCap { .. }) => None,
                Err(e) => return Err(e),
            };
            let map = ef_relations(p, alphabet, options.ef)?;
            Ok(Scores {
                nhi: nhi(&ph, &hist)?,
                emd,
                nmi: nmi(original, p)?,
                f1: ef_f1(&reference, &map)?,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mean = MeanScores {
        nhi: mean(per_playout.iter().map(|s| Some(s.nhi))).unwrap_or(0.0),
        emd: per_playout
            .iter()
            .map(|s| s.emd)
            .collect::<Option<Vec<_>>>()
            .and_then(|v| mean(v.into_iter().map(Some))),
        nmi: mean(per_playout.iter().map(|s| Some(s.nmi))).unwrap_or(0.0),
        af_f1: mean(per_playout.iter().map(|s| s.f1.af)),
        sf_f1: mean(per_playout.iter().map(|s| s.f1.sf)),
        nf_f1: mean(per_playout.iter().map(|s| s.f1.nf)),
    };
    Ok(EvaluationReport { per_playout, mean })
}

fn mean(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let (sum, n) = values
        .flatten()
        .fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}
