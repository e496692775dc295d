//! Block-structured process trees.
//!
//! A tree is either a leaf (an observable activity or the silent step) or an
//! operator node with an ordered list of children. Any node may carry a
//! non-negative integer weight; a tree is either fully annotated or plain.
//!
//! The textual form used throughout the crate is documented in [`text`]:
//!
//! ```text
//! ->( +( 'a', X( 'b', 'c' ) ), *( 'd', tau ) )
//! *( 'a':10000, tau:9000 ):1000
//! ```

pub mod language;
pub mod text;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

pub use text::{parse_tree, ParseError, ParseErrorKind};

/// Token reserved for the silent leaf. No activity may use this label.
pub const SILENT_TOKEN: &str = "tau";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Operator {
    Sequence,
    Xor,
    Parallel,
    Loop,
}

impl Operator {
    pub fn token(self) -> &'static str {
        match self {
            Operator::Sequence => "->",
            Operator::Xor => "X",
            Operator::Parallel => "+",
            Operator::Loop => "*",
        }
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    Activity(String),
    Silent,
    Operator(Operator, Vec<ProcessTree>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProcessTree {
    node: Node,
    weight: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("activity label must not be empty")]
    EmptyLabel,
    #[error("activity label '{0}' collides with the silent token")]
    ReservedLabel(String),
    #[error("{0} operator needs at least one child")]
    NoChildren(Operator),
    #[error("loop operator needs at least two children, found {0}")]
    LoopArity(usize),
    #[error("tree mixes annotated and plain nodes")]
    MixedAnnotation,
}

impl ProcessTree {
    pub fn activity(label: impl Into<String>) -> Self {
        ProcessTree {
            node: Node::Activity(label.into()),
            weight: None,
        }
    }

    pub fn silent() -> Self {
        ProcessTree {
            node: Node::Silent,
            weight: None,
        }
    }

    pub fn operator(op: Operator, children: Vec<ProcessTree>) -> Self {
        ProcessTree {
            node: Node::Operator(op, children),
            weight: None,
        }
    }

    pub fn sequence(children: Vec<ProcessTree>) -> Self {
        Self::operator(Operator::Sequence, children)
    }

    pub fn xor(children: Vec<ProcessTree>) -> Self {
        Self::operator(Operator::Xor, children)
    }

    pub fn parallel(children: Vec<ProcessTree>) -> Self {
        Self::operator(Operator::Parallel, children)
    }

    /// Loop whose first child is the "do" part and the remaining children are "redo" parts.
    pub fn looped(children: Vec<ProcessTree>) -> Self {
        Self::operator(Operator::Loop, children)
    }

    pub fn with_weight(mut self, weight: u64) -> Self {
        self.weight = Some(weight);
        self
    }

    pub fn node(&self) -> &Node {
        &self.node
    }

    pub fn weight(&self) -> Option<u64> {
        self.weight
    }

    pub fn operator_kind(&self) -> Option<Operator> {
        match &self.node {
            Node::Operator(op, _) => Some(*op),
            _ => None,
        }
    }

    pub fn children(&self) -> &[ProcessTree] {
        match &self.node {
            Node::Operator(_, children) => children,
            _ => &[],
        }
    }

    pub fn is_leaf(&self) -> bool {
        !matches!(self.node, Node::Operator(..))
    }

    /// True when the root carries a weight. For a valid tree this implies every node does.
    pub fn is_annotated(&self) -> bool {
        self.weight.is_some()
    }

    pub fn node_count(&self) -> usize {
        1 + self
            .children()
            .iter()
            .map(ProcessTree::node_count)
            .sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self
            .children()
            .iter()
            .map(ProcessTree::depth)
            .max()
            .unwrap_or(0)
    }

    /// Nodes in pre-order (parent before children, children left to right).
    pub fn preorder(&self) -> Vec<&ProcessTree> {
        let mut out = Vec::with_capacity(self.node_count());
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            out.push(t);
            stack.extend(t.children().iter().rev());
        }
        out
    }

    /// Labels of all activity leaves.
    pub fn activities(&self) -> BTreeSet<String> {
        self.preorder()
            .into_iter()
            .filter_map(|t| match &t.node {
                Node::Activity(a) => Some(a.clone()),
                _ => None,
            })
            .collect()
    }

    /// Weights in pre-order, or `None` for a plain tree.
    pub fn weights(&self) -> Option<Vec<u64>> {
        self.preorder().into_iter().map(|t| t.weight).collect()
    }

    /// Replaces all weights with the given pre-order sequence.
    ///
    /// Panics if the slice length differs from the node count.
    pub fn with_weights(&self, weights: &[u64]) -> ProcessTree {
        assert_eq!(weights.len(), self.node_count(), "weight vector length");
        let mut it = weights.iter().copied();
        self.rebuild_weights(&mut |_| it.next())
    }

    pub fn without_weights(&self) -> ProcessTree {
        self.rebuild_weights(&mut |_| None)
    }

    fn rebuild_weights(&self, next: &mut dyn FnMut(&ProcessTree) -> Option<u64>) -> ProcessTree {
        let weight = next(self);
        let node = match &self.node {
            Node::Operator(op, children) => Node::Operator(
                *op,
                children.iter().map(|c| c.rebuild_weights(next)).collect(),
            ),
            other => other.clone(),
        };
        ProcessTree { node, weight }
    }

    pub fn validate(&self) -> Result<(), TreeError> {
        self.validate_node(self.weight.is_some())
    }

    fn validate_node(&self, annotated: bool) -> Result<(), TreeError> {
        if self.weight.is_some() != annotated {
            return Err(TreeError::MixedAnnotation);
        }
        match &self.node {
            Node::Activity(a) if a.is_empty() => Err(TreeError::EmptyLabel),
            Node::Activity(a) if a == SILENT_TOKEN => Err(TreeError::ReservedLabel(a.clone())),
            Node::Activity(_) | Node::Silent => Ok(()),
            Node::Operator(op, children) => {
                if children.is_empty() {
                    return Err(TreeError::NoChildren(*op));
                }
                if *op == Operator::Loop && children.len() < 2 {
                    return Err(TreeError::LoopArity(children.len()));
                }
                children.iter().try_for_each(|c| c.validate_node(annotated))
            }
        }
    }

    /// True when every loop has exactly one redo child.
    pub fn is_normalized(&self) -> bool {
        match &self.node {
            Node::Operator(Operator::Loop, c) if c.len() != 2 => false,
            _ => self.children().iter().all(ProcessTree::is_normalized),
        }
    }

    /// Rewrites every `*(Q1, Q2, ..., Qn)` with `n > 2` into `*(Q1, X(Q2, ..., Qn))`.
    ///
    /// The inserted choice node carries the sum of the redo weights when the
    /// tree is annotated.
    pub fn normalize_loops(&self) -> ProcessTree {
        match &self.node {
            Node::Operator(op, children) => {
                let mut children: Vec<ProcessTree> =
                    children.iter().map(ProcessTree::normalize_loops).collect();
                if *op == Operator::Loop && children.len() > 2 {
                    let redo: Vec<ProcessTree> = children.split_off(1);
                    let weight = self
                        .weight
                        .map(|_| redo.iter().filter_map(|r| r.weight).sum::<u64>());
                    children.push(ProcessTree {
                        node: Node::Operator(Operator::Xor, redo),
                        weight,
                    });
                }
                ProcessTree {
                    node: Node::Operator(*op, children),
                    weight: self.weight,
                }
            }
            _ => self.clone(),
        }
    }
}

impl fmt::Display for ProcessTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.node {
            Node::Activity(a) => text::write_label(f, a)?,
            Node::Silent => f.write_str(SILENT_TOKEN)?,
            Node::Operator(op, children) => {
                write!(f, "{}(", op.token())?;
                for (i, c) in children.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str(")")?;
            }
        }
        if let Some(w) = self.weight {
            write!(f, ":{w}")?;
        }
        Ok(())
    }
}

/// Canonical text form; inverse of [`parse_tree`].
pub fn serialize_tree(tree: &ProcessTree) -> String {
    tree.to_string()
}
