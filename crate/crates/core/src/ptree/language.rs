//! Set operations on traces and bounded enumeration of a tree's language.

use std::collections::BTreeSet;

use thiserror::Error;

use super::{Node, Operator, ProcessTree};
use crate::trace::Trace;

pub type TraceSet = BTreeSet<Trace>;

/// Default bound on the size of any intermediate trace set during enumeration.
pub const DEFAULT_LANGUAGE_CAP: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LanguageError {
    #[error("language enumeration exceeded {cap} traces")]
    TooLarge { cap: usize },
}

/// `S1 · S2`: every trace of `s1` followed by every trace of `s2`.
pub fn concat(s1: &TraceSet, s2: &TraceSet) -> TraceSet {
    s1.iter()
        .flat_map(|a| s2.iter().map(move |b| a.concat(b)))
        .collect()
}

fn concat_capped(s1: &TraceSet, s2: &TraceSet, cap: usize) -> Result<TraceSet, LanguageError> {
    let mut out = TraceSet::new();
    for a in s1 {
        for b in s2 {
            out.insert(a.concat(b));
            if out.len() > cap {
                return Err(LanguageError::TooLarge { cap });
            }
        }
    }
    Ok(out)
}

/// N-ary concatenation in the given order. The empty product is `{<>}`.
pub fn concat_sets(sets: &[TraceSet]) -> TraceSet {
    sets.iter().fold(unit(), |acc, s| concat(&acc, s))
}

/// All interleavings of two traces that keep the relative order within each.
pub fn shuffle(a: &[String], b: &[String]) -> TraceSet {
    let mut out = TraceSet::new();
    let mut buf = Vec::with_capacity(a.len() + b.len());
    let _ = interleave(a, b, &mut buf, &mut out, usize::MAX);
    out
}

/// Adds every interleaving of `a` and `b` to `out`, failing once `out`
/// holds more than `cap` traces.
fn interleave(
    a: &[String],
    b: &[String],
    buf: &mut Vec<String>,
    out: &mut TraceSet,
    cap: usize,
) -> Result<(), LanguageError> {
    if a.is_empty() || b.is_empty() {
        let mut t = buf.clone();
        t.extend_from_slice(a);
        t.extend_from_slice(b);
        out.insert(Trace::new(t));
        return if out.len() > cap {
            Err(LanguageError::TooLarge { cap })
        } else {
            Ok(())
        };
    }
    buf.push(a[0].clone());
    let left = interleave(&a[1..], b, buf, out, cap);
    buf.pop();
    left?;
    buf.push(b[0].clone());
    let right = interleave(a, &b[1..], buf, out, cap);
    buf.pop();
    right
}

/// `S1 ⋄ S2`, lifted pointwise to sets.
pub fn shuffle_pair(s1: &TraceSet, s2: &TraceSet) -> TraceSet {
    shuffle_pair_capped(s1, s2, usize::MAX).expect("uncapped")
}

fn shuffle_pair_capped(
    s1: &TraceSet,
    s2: &TraceSet,
    cap: usize,
) -> Result<TraceSet, LanguageError> {
    let mut out = TraceSet::new();
    let mut buf = Vec::new();
    for a in s1 {
        for b in s2 {
            interleave(a, b, &mut buf, &mut out, cap)?;
        }
    }
    Ok(out)
}

/// N-ary shuffle: all interleavings of one trace drawn from each set.
pub fn shuffle_sets(sets: &[TraceSet]) -> TraceSet {
    sets.iter().fold(unit(), |acc, s| shuffle_pair(&acc, s))
}

fn unit() -> TraceSet {
    std::iter::once(Trace::empty()).collect()
}

/// Traces of the tree's language in which each loop activation takes its
/// redo part at most `max_loop_unrolls` times. Weights are ignored.
pub fn enumerate_language(
    tree: &ProcessTree,
    max_loop_unrolls: usize,
) -> Result<TraceSet, LanguageError> {
    enumerate_language_capped(tree, max_loop_unrolls, DEFAULT_LANGUAGE_CAP)
}

pub fn enumerate_language_capped(
    tree: &ProcessTree,
    max_loop_unrolls: usize,
    cap: usize,
) -> Result<TraceSet, LanguageError> {
    let check = |s: TraceSet| {
        if s.len() > cap {
            Err(LanguageError::TooLarge { cap })
        } else {
            Ok(s)
        }
    };
    match tree.node() {
        Node::Activity(a) => Ok(std::iter::once(Trace::new(vec![a.clone()])).collect()),
        Node::Silent => Ok(unit()),
        Node::Operator(op, children) => {
            let langs = children
                .iter()
                .map(|c| enumerate_language_capped(c, max_loop_unrolls, cap))
                .collect::<Result<Vec<_>, _>>()?;
            match op {
                Operator::Sequence => {
                    let mut acc = unit();
                    for l in &langs {
                        acc = concat_capped(&acc, l, cap)?;
                    }
                    Ok(acc)
                }
                Operator::Xor => check(langs.into_iter().flatten().collect()),
                Operator::Parallel => {
                    let mut acc = unit();
                    for l in &langs {
                        acc = shuffle_pair_capped(&acc, l, cap)?;
                    }
                    Ok(acc)
                }
                Operator::Loop => {
                    let (body, redo) = langs.split_first().expect("loop has children");
                    let redo: TraceSet = redo.iter().flatten().cloned().collect();
                    let redo_body = concat_capped(&redo, body, cap)?;
                    let mut all = body.clone();
                    let mut frontier = body.clone();
                    for _ in 0..max_loop_unrolls {
                        let next = concat_capped(&frontier, &redo_body, cap)?;
                        if next == frontier {
                            // only silent iterations: every later unroll is identical
                            break;
                        }
                        all.extend(next.iter().cloned());
                        all = check(all)?;
                        frontier = next;
                    }
                    Ok(all)
                }
            }
        }
    }
}
