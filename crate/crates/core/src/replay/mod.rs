//! Trace membership and replay-based frequency annotation.
//!
//! Membership is decided by a breadth-first search over
//! `(execution state, trace position)` pairs; revisited pairs are pruned, so
//! trees with silent loop bodies still terminate. Annotation replays each
//! distinct trace once along a deterministic accepting run (fewest loop
//! repetitions, then leftmost choices) and scales the visit counts by the
//! trace's multiplicity.

mod exec;

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::flat::{FlatTree, Kind};
use crate::log::EventLog;
use crate::ptree::{Operator, ProcessTree};
use crate::trace::Trace;
use exec::{ExecutionState, Executor, Move};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("trace {trace} does not fit the tree (no run consumes more than {position} events)")]
    NonFitting { trace: Trace, position: usize },
}

/// Reusable replayer for one tree.
pub struct Replayer {
    flat: FlatTree,
}

impl Replayer {
    pub fn new(tree: &ProcessTree) -> Self {
        Replayer {
            flat: FlatTree::new(tree),
        }
    }

    pub fn fits(&self, trace: &Trace) -> bool {
        self.longest_prefix(trace).1
    }

    /// Longest consumable prefix and whether the full trace is accepted.
    fn longest_prefix(&self, trace: &Trace) -> (usize, bool) {
        let ex = Executor::new(&self.flat);
        let mut layer = vec![ex.initial(&mut None)];
        let mut moves = Vec::new();
        for pos in 0..=trace.len() {
            let closure = self.silent_closure(&ex, layer, &mut moves);
            if pos == trace.len() {
                return (pos, closure.iter().any(|s| ex.is_final(s)));
            }
            let mut next = HashSet::new();
            for s in &closure {
                ex.moves(s, &mut moves);
                for &m in moves.iter() {
                    if ex.label(m) == Some(trace[pos].as_str()) {
                        next.insert(ex.apply(s, m, &mut None));
                    }
                }
            }
            if next.is_empty() {
                return (pos, false);
            }
            layer = next.into_iter().collect();
        }
        unreachable!()
    }

    fn silent_closure(
        &self,
        ex: &Executor<'_>,
        seed: Vec<ExecutionState>,
        moves: &mut Vec<Move>,
    ) -> Vec<ExecutionState> {
        let mut seen: HashSet<ExecutionState> = seed.iter().cloned().collect();
        let mut stack = seed;
        let mut out = Vec::new();
        while let Some(s) = stack.pop() {
            ex.moves(&s, moves);
            for &m in moves.iter() {
                if ex.label(m).is_none() {
                    let t = ex.apply(&s, m, &mut None);
                    if seen.insert(t.clone()) {
                        stack.push(t);
                    }
                }
            }
            out.push(s);
        }
        out
    }

    /// Pre-order visit counts of the selected accepting run for one trace.
    pub fn visits(&self, trace: &Trace) -> Result<Vec<u64>, ReplayError> {
        let ex = Executor::new(&self.flat);
        let Some(budget) = self.min_redos(&ex, trace) else {
            let (position, _) = self.longest_prefix(trace);
            return Err(ReplayError::NonFitting {
                trace: trace.clone(),
                position,
            });
        };
        let start = ex.initial(&mut None);
        let mut failed = HashSet::new();
        let mut path = Vec::new();
        let found = self.search(&ex, trace, start, 0, budget, &mut failed, &mut path);
        assert!(found, "a run within the minimal redo budget must exist");

        let mut counts = vec![0u64; self.flat.len()];
        let mut s = ex.initial(&mut Some(&mut counts));
        for m in path {
            s = ex.apply(&s, m, &mut Some(&mut counts));
        }
        debug_assert!(ex.is_final(&s));
        Ok(counts)
    }

    /// Fewest loop repetitions over all accepting runs (0-1 BFS).
    fn min_redos(&self, ex: &Executor<'_>, trace: &Trace) -> Option<u32> {
        let start = (ex.initial(&mut None), 0usize);
        let mut dist: HashMap<(ExecutionState, usize), u32> = HashMap::new();
        let mut queue = VecDeque::new();
        dist.insert(start.clone(), 0);
        queue.push_back((start, 0u32));
        let mut moves = Vec::new();
        while let Some(((s, pos), d)) = queue.pop_front() {
            if dist.get(&(s.clone(), pos)).is_some_and(|&best| best < d) {
                continue;
            }
            if pos == trace.len() && ex.is_final(&s) {
                return Some(d);
            }
            ex.moves(&s, &mut moves);
            for &m in moves.iter() {
                let npos = match ex.label(m) {
                    Some(l) if pos < trace.len() && l == trace[pos] => pos + 1,
                    Some(_) => continue,
                    None => pos,
                };
                let cost = u32::from(m.is_redo());
                let key = (ex.apply(&s, m, &mut None), npos);
                let nd = d + cost;
                if dist.get(&key).is_none_or(|&old| nd < old) {
                    dist.insert(key.clone(), nd);
                    if cost == 0 {
                        queue.push_front((key, nd));
                    } else {
                        queue.push_back((key, nd));
                    }
                }
            }
        }
        None
    }

    /// Depth-first search in canonical move order for a run using at most
    /// `budget` redos. Failed `(state, position, budget)` triples are memoized.
    #[allow(clippy::too_many_arguments)]
    fn search(
        &self,
        ex: &Executor<'_>,
        trace: &Trace,
        s: ExecutionState,
        pos: usize,
        budget: u32,
        failed: &mut HashSet<(ExecutionState, usize, u32)>,
        path: &mut Vec<Move>,
    ) -> bool {
        if pos == trace.len() && ex.is_final(&s) {
            return true;
        }
        let key = (s, pos, budget);
        if failed.contains(&key) {
            return false;
        }
        let mut moves = Vec::new();
        ex.moves(&key.0, &mut moves);
        for m in moves {
            let npos = match ex.label(m) {
                Some(l) if pos < trace.len() && l == trace[pos] => pos + 1,
                Some(_) => continue,
                None => pos,
            };
            let nbudget = if m.is_redo() {
                match budget.checked_sub(1) {
                    Some(b) => b,
                    None => continue,
                }
            } else {
                budget
            };
            let next = ex.apply(&key.0, m, &mut None);
            path.push(m);
            if self.search(ex, trace, next, npos, nbudget, failed, path) {
                return true;
            }
            path.pop();
        }
        failed.insert(key);
        false
    }
}

/// True iff the trace belongs to the language of the tree.
pub fn fits(tree: &ProcessTree, trace: &Trace) -> bool {
    Replayer::new(tree).fits(trace)
}

/// Annotates every node with the number of times it is visited while
/// replaying the log. Existing weights are ignored.
pub fn annotate(tree: &ProcessTree, log: &EventLog) -> Result<ProcessTree, ReplayError> {
    let replayer = Replayer::new(tree);
    let variants: Vec<(&Trace, u64)> = log.variants().collect();
    let per_variant = variants
        .par_iter()
        .map(|(t, n)| replayer.visits(t).map(|v| (v, *n)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut totals = vec![0u64; replayer.flat.len()];
    for (visits, n) in per_variant {
        for (acc, v) in totals.iter_mut().zip(visits) {
            *acc += v * n;
        }
    }
    Ok(tree.with_weights(&totals))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    NotAnnotated,
    RootWeight {
        expected: u64,
        found: u64,
    },
    /// Do-part weight must equal loop weight plus the redo weights.
    LoopBalance {
        do_weight: u64,
        loop_weight: u64,
        redo_weight: u64,
    },
    /// Choice children must sum to the parent weight.
    ChoiceSum {
        parent: u64,
        children: u64,
    },
    /// Sequence and parallel children must carry the parent weight.
    ChildWeight {
        parent: u64,
        child_index: usize,
        child: u64,
    },
}

/// A failed consistency check at the node with the given pre-order index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub node: usize,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "node {}: ", self.node)?;
        match &self.kind {
            ViolationKind::NotAnnotated => write!(f, "tree is not annotated"),
            ViolationKind::RootWeight { expected, found } => {
                write!(f, "root weight {found}, expected {expected}")
            }
            ViolationKind::LoopBalance {
                do_weight,
                loop_weight,
                redo_weight,
            } => write!(
                f,
                "loop do-part weight {do_weight} != loop weight {loop_weight} + redo weight {redo_weight}"
            ),
            ViolationKind::ChoiceSum { parent, children } => {
                write!(f, "choice children sum to {children}, parent weight is {parent}")
            }
            ViolationKind::ChildWeight {
                parent,
                child_index,
                child,
            } => write!(
                f,
                "child {child_index} has weight {child}, parent weight is {parent}"
            ),
        }
    }
}

/// Structural consistency checks for a replay-annotated tree.
pub fn verify_annotation(tree: &ProcessTree) -> Vec<Violation> {
    let flat = FlatTree::new(tree);
    if flat.nodes.iter().any(|n| n.weight.is_none()) {
        return vec![Violation {
            node: 0,
            kind: ViolationKind::NotAnnotated,
        }];
    }
    let w = |i: usize| flat.nodes[i].weight.unwrap_or(0);
    let mut out = Vec::new();
    for (id, node) in flat.nodes.iter().enumerate() {
        let Kind::Op(op) = node.kind else { continue };
        let parent = w(id);
        match op {
            Operator::Loop => {
                let do_weight = w(node.children[0]);
                let redo_weight: u64 = node.children[1..].iter().map(|&c| w(c)).sum();
                if do_weight != parent + redo_weight {
                    out.push(Violation {
                        node: id,
                        kind: ViolationKind::LoopBalance {
                            do_weight,
                            loop_weight: parent,
                            redo_weight,
                        },
                    });
                }
            }
            Operator::Xor => {
                let children: u64 = node.children.iter().map(|&c| w(c)).sum();
                if children != parent {
                    out.push(Violation {
                        node: id,
                        kind: ViolationKind::ChoiceSum { parent, children },
                    });
                }
            }
            Operator::Sequence | Operator::Parallel => {
                for (child_index, &c) in node.children.iter().enumerate() {
                    if w(c) != parent {
                        out.push(Violation {
                            node: id,
                            kind: ViolationKind::ChildWeight {
                                parent,
                                child_index,
                                child: w(c),
                            },
                        });
                    }
                }
            }
        }
    }
    out
}

/// [`verify_annotation`] plus the check that the root weight equals the log size.
pub fn verify_annotation_for_log(tree: &ProcessTree, log_size: u64) -> Vec<Violation> {
    let mut out = verify_annotation(tree);
    if let Some(found) = tree.weight() {
        if found != log_size {
            out.insert(
                0,
                Violation {
                    node: 0,
                    kind: ViolationKind::RootWeight {
                        expected: log_size,
                        found,
                    },
                },
            );
        }
    }
    out
}
