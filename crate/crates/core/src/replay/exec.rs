//! Step-wise executor over a process tree.
//!
//! An [`ExecutionState`] stores one status word per node. Structural
//! bookkeeping (starting children, advancing sequences, finishing blocks) is
//! applied eagerly, so the only remaining moves are the genuine choices:
//! firing an enabled leaf, picking a choice branch, and exiting or repeating
//! a loop.

use crate::flat::{FlatTree, Kind};
use crate::ptree::Operator;

const IDLE: u16 = 0;
/// Leaf ready to fire, or choice node waiting for a branch.
const ENABLED: u16 = 1;
/// Loop whose do part just finished.
const DECIDE: u16 = 2;
/// `ACTIVE + i`: executing child `i` (parallel nodes use `ACTIVE` for "running").
const ACTIVE: u16 = 3;
const DONE: u16 = u16::MAX;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) struct ExecutionState(Vec<u16>);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Move {
    Fire(usize),
    Choose(usize, usize),
    Exit(usize),
    Redo(usize, usize),
}

impl Move {
    pub fn is_redo(self) -> bool {
        matches!(self, Move::Redo(..))
    }
}

pub(crate) struct Executor<'t> {
    pub tree: &'t FlatTree,
}

impl<'t> Executor<'t> {
    pub fn new(tree: &'t FlatTree) -> Self {
        assert!(
            tree.nodes
                .iter()
                .all(|n| n.children.len() < (DONE - ACTIVE) as usize),
            "operator fan-out too large"
        );
        Executor { tree }
    }

    pub fn initial(&self, visits: &mut Option<&mut Vec<u64>>) -> ExecutionState {
        let mut s = ExecutionState(vec![IDLE; self.tree.len()]);
        self.start(&mut s, self.tree.root(), visits);
        s
    }

    pub fn is_final(&self, s: &ExecutionState) -> bool {
        s.0[self.tree.root()] == DONE
    }

    /// Label emitted by a move, if any.
    pub fn label(&self, m: Move) -> Option<&'t str> {
        match m {
            Move::Fire(n) => match &self.tree.nodes[n].kind {
                Kind::Activity(a) => Some(a.as_str()),
                _ => None,
            },
            _ => None,
        }
    }

    /// Enabled moves in canonical order: pre-order over the tree, lower
    /// child indices first, loop exit before redo.
    pub fn moves(&self, s: &ExecutionState, out: &mut Vec<Move>) {
        out.clear();
        self.collect(s, self.tree.root(), out);
    }

    fn collect(&self, s: &ExecutionState, n: usize, out: &mut Vec<Move>) {
        let node = &self.tree.nodes[n];
        let st = s.0[n];
        match node.kind {
            Kind::Activity(_) | Kind::Silent => {
                if st == ENABLED {
                    out.push(Move::Fire(n));
                }
            }
            Kind::Op(op) => match (op, st) {
                (_, IDLE) | (_, DONE) => {}
                (Operator::Xor, ENABLED) => {
                    out.extend((0..node.children.len()).map(|i| Move::Choose(n, i)));
                }
                (Operator::Loop, DECIDE) => {
                    out.push(Move::Exit(n));
                    out.extend((1..node.children.len()).map(|i| Move::Redo(n, i)));
                }
                (Operator::Parallel, _) => {
                    for &c in &node.children {
                        self.collect(s, c, out);
                    }
                }
                (_, st) => self.collect(s, node.children[(st - ACTIVE) as usize], out),
            },
        }
    }

    pub fn apply(
        &self,
        s: &ExecutionState,
        m: Move,
        visits: &mut Option<&mut Vec<u64>>,
    ) -> ExecutionState {
        let mut s = s.clone();
        match m {
            Move::Fire(n) => {
                bump(visits, n);
                self.complete(&mut s, n, visits);
            }
            Move::Choose(n, i) | Move::Redo(n, i) => {
                s.0[n] = ACTIVE + i as u16;
                self.start(&mut s, self.tree.nodes[n].children[i], visits);
            }
            Move::Exit(n) => self.complete(&mut s, n, visits),
        }
        s
    }

    fn start(&self, s: &mut ExecutionState, n: usize, visits: &mut Option<&mut Vec<u64>>) {
        let node = &self.tree.nodes[n];
        s.0[n..node.end].fill(IDLE);
        match node.kind {
            Kind::Activity(_) | Kind::Silent => s.0[n] = ENABLED,
            Kind::Op(op) => {
                bump(visits, n);
                match op {
                    Operator::Xor => s.0[n] = ENABLED,
                    Operator::Sequence | Operator::Loop => {
                        s.0[n] = ACTIVE;
                        self.start(s, node.children[0], visits);
                    }
                    Operator::Parallel => {
                        s.0[n] = ACTIVE;
                        for &c in &node.children {
                            self.start(s, c, visits);
                        }
                    }
                }
            }
        }
    }

    fn complete(&self, s: &mut ExecutionState, n: usize, visits: &mut Option<&mut Vec<u64>>) {
        s.0[n] = DONE;
        let node = &self.tree.nodes[n];
        let Some(p) = node.parent else { return };
        let parent = &self.tree.nodes[p];
        let slot = node.slot;
        match parent.kind {
            Kind::Op(Operator::Sequence) => {
                if slot + 1 < parent.children.len() {
                    s.0[p] = ACTIVE + (slot + 1) as u16;
                    self.start(s, parent.children[slot + 1], visits);
                } else {
                    self.complete(s, p, visits);
                }
            }
            Kind::Op(Operator::Xor) => self.complete(s, p, visits),
            Kind::Op(Operator::Parallel) => {
                if parent.children.iter().all(|&c| s.0[c] == DONE) {
                    self.complete(s, p, visits);
                }
            }
            Kind::Op(Operator::Loop) => {
                if slot == 0 {
                    s.0[p] = DECIDE;
                } else {
                    s.0[p] = ACTIVE;
                    self.start(s, parent.children[0], visits);
                }
            }
            Kind::Activity(_) | Kind::Silent => unreachable!("leaves have no children"),
        }
    }
}

fn bump(visits: &mut Option<&mut Vec<u64>>, n: usize) {
    if let Some(v) = visits.as_deref_mut() {
        v[n] += 1;
    }
}
