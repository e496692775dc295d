//! Pre-order arena view of a [`ProcessTree`], indexed by node id.

use crate::ptree::{Node, Operator, ProcessTree};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Kind {
    Activity(String),
    Silent,
    Op(Operator),
}

#[derive(Debug, Clone)]
pub(crate) struct FlatNode {
    pub kind: Kind,
    pub children: Vec<usize>,
    pub parent: Option<usize>,
    /// Position among the parent's children.
    pub slot: usize,
    /// One past the last node of this subtree.
    pub end: usize,
    pub weight: Option<u64>,
}

#[derive(Debug, Clone)]
pub(crate) struct FlatTree {
    pub nodes: Vec<FlatNode>,
}

impl FlatTree {
    pub fn new(tree: &ProcessTree) -> Self {
        let mut nodes = Vec::with_capacity(tree.node_count());
        push(tree, None, 0, &mut nodes);
        FlatTree { nodes }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn root(&self) -> usize {
        0
    }
}

fn push(
    tree: &ProcessTree,
    parent: Option<usize>,
    slot: usize,
    nodes: &mut Vec<FlatNode>,
) -> usize {
    let id = nodes.len();
    let kind = match tree.node() {
        Node::Activity(a) => Kind::Activity(a.clone()),
        Node::Silent => Kind::Silent,
        Node::Operator(op, _) => Kind::Op(*op),
    };
    nodes.push(FlatNode {
        kind,
        children: Vec::new(),
        parent,
        slot,
        end: id + 1,
        weight: tree.weight(),
    });
    let children: Vec<usize> = tree
        .children()
        .iter()
        .enumerate()
        .map(|(i, c)| push(c, Some(id), i, nodes))
        .collect();
    nodes[id].children = children;
    nodes[id].end = nodes.len();
    id
}
