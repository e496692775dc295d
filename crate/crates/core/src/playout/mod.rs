//! Reconstruction attacks: strategies that play out a process tree into a log.
//!
//! Every strategy builds one trace per traversal of the tree. Leaves append
//! their activity (silent leaves append nothing), sequences run their
//! children in order, and the strategies differ in how they resolve
//! exclusive choices, loop repetitions and parallel interleavings:
//!
//! | strategy | choice                         | loop                                  | parallel    |
//! |----------|--------------------------------|---------------------------------------|-------------|
//! | A        | uniform                        | repeat with probability 1/2           | interleaved |
//! | B        | original weights               | exit with probability `w / w_do`       | interleaved |
//! | C        | leftover weights               | leftover-driven, see [`Strategy::C`]   | interleaved |
//! | D(v)     | leftover weights               | normal-sampled repetition count        | interleaved |
//! | SOTA     | first child with leftover > 0  | as C                                  | sequential  |
//!
//! C, D and SOTA consume the annotation as a ledger: every node entered has
//! its leftover weight decreased by one, and the number of traces equals the
//! root weight. A and B generate a caller-chosen number of traces.
//!
//! Randomness comes from ChaCha8 seeded with `seed` for a single play-out;
//! play-out `i` of an experiment uses `seed + i` (wrapping).

mod walker;

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::flat::FlatTree;
use crate::log::EventLog;
use crate::ptree::{ProcessTree, TreeError};
use walker::Walker;

pub use walker::LedgerReport;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlayoutError {
    #[error("strategy {0} needs an annotated tree")]
    NotAnnotated(StrategyKind),
    #[error("strategy {0} derives the trace count from the root weight, which is zero")]
    ZeroRootWeight(StrategyKind),
    #[error("invalid strategy configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    InvalidTree(#[from] TreeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StrategyKind {
    A,
    B,
    C,
    D,
    Sota,
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StrategyKind::A => "A",
            StrategyKind::B => "B",
            StrategyKind::C => "C",
            StrategyKind::D => "D",
            StrategyKind::Sota => "SOTA",
        })
    }
}

impl FromStr for StrategyKind {
    type Err = PlayoutError;

    fn from_str(s: &str) -> Result<Self, PlayoutError> {
        match s.to_ascii_uppercase().as_str() {
            "A" => Ok(StrategyKind::A),
            "B" => Ok(StrategyKind::B),
            "C" => Ok(StrategyKind::C),
            "D" => Ok(StrategyKind::D),
            "SOTA" => Ok(StrategyKind::Sota),
            _ => Err(PlayoutError::InvalidConfig(format!(
                "unknown strategy '{s}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Strategy {
    /// Uniform choices, fair-coin loop repetition. Ignores weights.
    A { traces: u64 },
    /// Fixed branching probabilities derived once from the annotation.
    B { traces: u64 },
    /// Leftover frequencies. After the do part of a loop: exit when the do
    /// weight is used up, repeat until it is used up when it equals the
    /// redo weight, otherwise repeat with probability `1 - w / w_do` on the
    /// current leftovers.
    C,
    /// As C, but the number of repetitions for a loop activation is
    /// `min(floor(|x|), w_redo)` with `x ~ N(w_redo / w, variance)`.
    D { variance: f64 },
    /// Leftover frequencies, first positive choice branch, sequential parallel blocks.
    Sota,
}

impl Strategy {
    /// Builds a strategy from loose parts, checking that the variance is
    /// given exactly for D and the trace count exactly for A and B.
    pub fn from_parts(
        kind: StrategyKind,
        variance: Option<f64>,
        traces: Option<u64>,
    ) -> Result<Self, PlayoutError> {
        let bad = |m: &str| Err(PlayoutError::InvalidConfig(m.to_string()));
        match kind {
            StrategyKind::D => {}
            _ if variance.is_some() => return bad("variance only applies to strategy D"),
            _ => {}
        }
        match kind {
            StrategyKind::A | StrategyKind::B => {}
            _ if traces.is_some() => {
                return bad(
                    "trace count only applies to strategies A and B (others use the root weight)",
                )
            }
            _ => {}
        }
        let strategy = match kind {
            StrategyKind::A | StrategyKind::B => {
                let Some(traces) = traces else {
                    return bad("strategies A and B need a trace count");
                };
                if kind == StrategyKind::A {
                    Strategy::A { traces }
                } else {
                    Strategy::B { traces }
                }
            }
            StrategyKind::C => Strategy::C,
            StrategyKind::D => match variance {
                Some(variance) => Strategy::D { variance },
                None => return bad("strategy D needs a variance"),
            },
            StrategyKind::Sota => Strategy::Sota,
        };
        strategy.validate()?;
        Ok(strategy)
    }

    pub fn kind(&self) -> StrategyKind {
        match self {
            Strategy::A { .. } => StrategyKind::A,
            Strategy::B { .. } => StrategyKind::B,
            Strategy::C => StrategyKind::C,
            Strategy::D { .. } => StrategyKind::D,
            Strategy::Sota => StrategyKind::Sota,
        }
    }

    pub fn variance(&self) -> Option<f64> {
        match self {
            Strategy::D { variance } => Some(*variance),
            _ => None,
        }
    }

    pub fn needs_annotation(&self) -> bool {
        !matches!(self, Strategy::A { .. })
    }

    /// True for strategies that decrement leftover weights.
    pub fn uses_ledger(&self) -> bool {
        matches!(self, Strategy::C | Strategy::D { .. } | Strategy::Sota)
    }

    pub fn validate(&self) -> Result<(), PlayoutError> {
        match *self {
            Strategy::A { traces: 0 } | Strategy::B { traces: 0 } => Err(
                PlayoutError::InvalidConfig("trace count must be positive".into()),
            ),
            Strategy::D { variance } if !(variance.is_finite() && variance > 0.0) => Err(
                PlayoutError::InvalidConfig(format!("variance must be positive, got {variance}")),
            ),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::D { variance } => write!(f, "D({variance})"),
            other => write!(f, "{}", other.kind()),
        }
    }
}

/// A strategy plus the seed and number of independent play-outs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategyConfig {
    pub strategy: Strategy,
    pub seed: u64,
    pub playouts: usize,
}

impl StrategyConfig {
    pub fn new(strategy: Strategy, seed: u64) -> Self {
        StrategyConfig {
            strategy,
            seed,
            playouts: 1,
        }
    }

    pub fn with_playouts(mut self, playouts: usize) -> Self {
        self.playouts = playouts;
        self
    }

    /// Seed of play-out `i`.
    pub fn seed_for(&self, i: usize) -> u64 {
        self.seed.wrapping_add(i as u64)
    }
}

/// A tree prepared for repeated play-outs under one strategy.
#[derive(Debug, Clone)]
pub struct Player {
    flat: FlatTree,
    strategy: Strategy,
    traces: u64,
}

impl Player {
    /// Multi-redo loops are normalized first, so any valid tree is accepted.
    pub fn new(tree: &ProcessTree, strategy: Strategy) -> Result<Self, PlayoutError> {
        tree.validate()?;
        strategy.validate()?;
        if strategy.needs_annotation() && !tree.is_annotated() {
            return Err(PlayoutError::NotAnnotated(strategy.kind()));
        }
        let traces = match strategy {
            Strategy::A { traces } | Strategy::B { traces } => traces,
            _ => match tree.weight() {
                Some(0) | None => return Err(PlayoutError::ZeroRootWeight(strategy.kind())),
                Some(w) => w,
            },
        };
        Ok(Player {
            flat: FlatTree::new(&tree.normalize_loops()),
            strategy,
            traces,
        })
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    /// Number of traces each play-out produces.
    pub fn trace_count(&self) -> u64 {
        self.traces
    }

    pub fn play(&self, seed: u64) -> EventLog {
        self.play_with_ledger(seed).0
    }

    /// Play-out plus the final state of the weight ledger.
    pub fn play_with_ledger(&self, seed: u64) -> (EventLog, LedgerReport) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut walker = Walker::new(&self.flat, self.strategy);
        let mut log = EventLog::new();
        for _ in 0..self.traces {
            log.push(walker.trace(&mut rng));
        }
        (log, walker.into_report())
    }
}

/// One play-out with `config.seed`.
pub fn playout(tree: &ProcessTree, config: &StrategyConfig) -> Result<EventLog, PlayoutError> {
    Ok(Player::new(tree, config.strategy)?.play(config.seed))
}

/// `config.playouts` independent play-outs; play-out `i` uses seed `seed + i`
/// and a fresh ledger.
pub fn run_experiment(
    tree: &ProcessTree,
    config: &StrategyConfig,
) -> Result<Vec<EventLog>, PlayoutError> {
    if config.playouts == 0 {
        return Err(PlayoutError::InvalidConfig(
            "playouts must be positive".into(),
        ));
    }
    let player = Player::new(tree, config.strategy)?;
    Ok((0..config.playouts)
        .into_par_iter()
        .map(|i| player.play(config.seed_for(i)))
        .collect())
}
