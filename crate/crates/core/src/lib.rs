//! Control-flow reconstruction attacks on process trees.
//!
//! The crate covers the whole attack pipeline:
//!
//! * [`ptree`]: process trees, their text format and bounded language enumeration,
//! * [`log`]: event logs, variant distributions and length histograms,
//! * [`replay`]: membership checks and replay-based frequency annotation,
//! * [`playout`]: the five play-out strategies that reconstruct a log from a tree,
//! * [`metrics`]: NHI, EMD, NMI and eventually-follows F1 scores,
//! * [`experiment`]: the annotate, play-out and evaluate protocol driven by a spec file.

pub mod experiment;
mod flat;
pub mod log;
pub mod metrics;
pub mod ptree;
pub mod replay;
mod trace;

pub use crate::log::{
    length_histogram, load_log, variant_distribution, EventLog, LengthHistogram, LogError,
    LogFormat, VariantDistribution,
};
pub use metrics::{
    ef_f1, ef_relations, emd, evaluate, nhi, nmi, normalized_levenshtein, EfClass, EfOptions,
    EfRelationMap, EvalOptions, EvaluationReport, MetricError, TransportPlan,
};
pub use ptree::language::{enumerate_language, TraceSet};
pub use ptree::{parse_tree, serialize_tree, Operator, ProcessTree};
pub use replay::{annotate, fits, verify_annotation, ReplayError};
pub use trace::Trace;
pub mod playout;
pub use playout::{playout, run_experiment, Player, Strategy, StrategyConfig, StrategyKind};
