use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::Strategy;
use crate::flat::{FlatTree, Kind};
use crate::ptree::Operator;
use crate::trace::Trace;

/// Leftover weights after a play-out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LedgerReport {
    /// Pre-order leftover weights. Unchanged from the annotation for A and B.
    pub leftover: Vec<u64>,
    /// Nodes entered while their leftover weight was already zero; the
    /// weight stays at zero in that case.
    pub blocked_decrements: u64,
}

impl LedgerReport {
    pub fn drained(&self) -> bool {
        self.leftover.iter().all(|&w| w == 0)
    }
}

/// Outcome of the leftover-driven loop rule after a do part.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LoopDecision {
    Exit,
    /// Do and redo leftovers are equal: repeat until the do leftover is used up.
    Collect,
    /// Repeat with probability `1 - w / w_do`.
    Sample {
        w: u64,
        w_do: u64,
    },
}

/// Traverses the tree once per trace, carrying the ledger across traces.
pub(crate) struct Walker<'t> {
    tree: &'t FlatTree,
    strategy: Strategy,
    original: Vec<u64>,
    ledger: Vec<u64>,
    blocked: u64,
}

impl<'t> Walker<'t> {
    pub fn new(tree: &'t FlatTree, strategy: Strategy) -> Self {
        let original: Vec<u64> = tree.nodes.iter().map(|n| n.weight.unwrap_or(0)).collect();
        Walker {
            tree,
            strategy,
            ledger: original.clone(),
            original,
            blocked: 0,
        }
    }

    pub fn into_report(self) -> LedgerReport {
        LedgerReport {
            leftover: self.ledger,
            blocked_decrements: self.blocked,
        }
    }

    pub fn trace<R: Rng>(&mut self, rng: &mut R) -> Trace {
        let mut events = Vec::new();
        self.walk(self.tree.root(), rng, &mut events);
        events
            .into_iter()
            .map(|n| match &self.tree.nodes[n].kind {
                Kind::Activity(a) => a.clone(),
                _ => unreachable!("only activity leaves emit events"),
            })
            .collect()
    }

    /// Decrements the leftover weight of `n` and returns the value before.
    fn enter(&mut self, n: usize) -> u64 {
        let before = self.ledger[n];
        if self.strategy.uses_ledger() {
            match before.checked_sub(1) {
                Some(w) => self.ledger[n] = w,
                None => self.blocked += 1,
            }
        }
        before
    }

    fn walk<R: Rng>(&mut self, n: usize, rng: &mut R, out: &mut Vec<usize>) {
        let entry_weight = self.enter(n);
        let tree = self.tree;
        let node = &tree.nodes[n];
        match node.kind {
            Kind::Activity(_) => out.push(n),
            Kind::Silent => {}
            Kind::Op(Operator::Sequence) => {
                for &c in &node.children {
                    self.walk(c, rng, out);
                }
            }
            Kind::Op(Operator::Xor) => {
                let i = self.step_xor(n, rng);
                self.walk(node.children[i], rng, out);
            }
            Kind::Op(Operator::Parallel) => self.step_parallel(n, rng, out),
            Kind::Op(Operator::Loop) => self.step_loop(n, entry_weight, rng, out),
        }
    }

    fn step_xor<R: Rng>(&mut self, n: usize, rng: &mut R) -> usize {
        let children = &self.tree.nodes[n].children;
        let picked = match self.strategy {
            Strategy::A { .. } => None,
            Strategy::B { .. } => weighted(children.iter().map(|&c| self.original[c]), rng),
            Strategy::C | Strategy::D { .. } => {
                weighted(children.iter().map(|&c| self.ledger[c]), rng)
            }
            Strategy::Sota => children.iter().position(|&c| self.ledger[c] > 0),
        };
        // uniform fallback when no child has weight left
        picked.unwrap_or_else(|| rng.random_range(0..children.len()))
    }

    fn step_loop<R: Rng>(
        &mut self,
        n: usize,
        entry_weight: u64,
        rng: &mut R,
        out: &mut Vec<usize>,
    ) {
        let tree = self.tree;
        let children = &tree.nodes[n].children;
        let (body, redo) = (children[0], children[1]);
        self.walk(body, rng, out);
        match self.strategy {
            Strategy::A { .. } => {
                while rng.random_bool(0.5) {
                    self.iterate(body, redo, rng, out);
                }
            }
            Strategy::B { .. } => {
                let (w, w_do) = (self.original[n], self.original[body]);
                // never observed repeating: w = 0 or w_do = 0 exits at once
                if w == 0 {
                    return;
                }
                while w_do > 0 && rng.random_range(0..w_do) >= w {
                    self.iterate(body, redo, rng, out);
                }
            }
            Strategy::C | Strategy::Sota => loop {
                match self.leftover_decision(n, body, redo) {
                    LoopDecision::Exit => break,
                    LoopDecision::Collect => self.iterate(body, redo, rng, out),
                    LoopDecision::Sample { w, w_do } => {
                        if rng.random_range(0..w_do) < w {
                            break;
                        }
                        self.iterate(body, redo, rng, out);
                    }
                }
            },
            Strategy::D { variance } => match self.leftover_decision(n, body, redo) {
                LoopDecision::Exit => {}
                LoopDecision::Collect => {
                    while self.ledger[body] > 0 {
                        self.iterate(body, redo, rng, out);
                    }
                }
                LoopDecision::Sample { .. } => {
                    let w_redo = self.ledger[redo];
                    // activations still expected, including this one
                    let activations = entry_weight.max(1);
                    let mean = w_redo as f64 / activations as f64;
                    let x = Normal::new(mean, variance.sqrt())
                        .expect("variance is validated positive")
                        .sample(rng);
                    let repeats = (x.abs().floor() as u64).min(w_redo);
                    for _ in 0..repeats {
                        if self.ledger[body] == 0 {
                            break;
                        }
                        self.iterate(body, redo, rng, out);
                    }
                }
            },
        }
    }

    fn leftover_decision(&self, n: usize, body: usize, redo: usize) -> LoopDecision {
        let (w, w_do, w_redo) = (self.ledger[n], self.ledger[body], self.ledger[redo]);
        if w_do == 0 {
            LoopDecision::Exit
        } else if w_do == w_redo {
            LoopDecision::Collect
        } else {
            LoopDecision::Sample { w, w_do }
        }
    }

    fn iterate<R: Rng>(&mut self, body: usize, redo: usize, rng: &mut R, out: &mut Vec<usize>) {
        self.walk(redo, rng, out);
        self.walk(body, rng, out);
    }

    fn step_parallel<R: Rng>(&mut self, n: usize, rng: &mut R, out: &mut Vec<usize>) {
        let tree = self.tree;
        let children = &tree.nodes[n].children;
        if matches!(self.strategy, Strategy::Sota) {
            for &c in children {
                self.walk(c, rng, out);
            }
            return;
        }
        let branches: Vec<Vec<usize>> = children
            .iter()
            .map(|&c| {
                let mut sub = Vec::new();
                self.walk(c, rng, &mut sub);
                sub
            })
            .collect();
        interleave(&branches, rng, out);
    }
}

/// Merges the branches by repeatedly emitting the next event of a branch
/// chosen uniformly among those with events left.
fn interleave<R: Rng>(branches: &[Vec<usize>], rng: &mut R, out: &mut Vec<usize>) {
    let mut cursor = vec![0usize; branches.len()];
    let mut ready: Vec<usize> = (0..branches.len())
        .filter(|&i| !branches[i].is_empty())
        .collect();
    while !ready.is_empty() {
        let j = rng.random_range(0..ready.len());
        let b = ready[j];
        out.push(branches[b][cursor[b]]);
        cursor[b] += 1;
        if cursor[b] == branches[b].len() {
            ready.remove(j);
        }
    }
}

/// Index drawn with probability proportional to its weight; `None` when all are zero.
fn weighted<R: Rng, I: Iterator<Item = u64> + Clone>(weights: I, rng: &mut R) -> Option<usize> {
    let total: u64 = weights.clone().sum();
    if total == 0 {
        return None;
    }
    let mut r = rng.random_range(0..total);
    for (i, w) in weights.enumerate() {
        if r < w {
            return Some(i);
        }
        r -= w;
    }
    unreachable!("r < total")
}
