#![allow(dead_code)]

use cfrecon::{EventLog, Operator, ProcessTree, Trace};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LABELS: [&str; 6] = ["a", "b", "c", "d", "e", "f"];

/// Random tree of depth at most 4 with at most 8 leaves.
pub fn random_tree(rng: &mut impl Rng) -> ProcessTree {
    let mut budget = 8;
    grow(rng, 1, &mut budget)
}

fn grow(rng: &mut impl Rng, depth: usize, budget: &mut usize) -> ProcessTree {
    if depth >= 4 || *budget < 2 || rng.random_bool(0.3) {
        *budget -= 1;
        return if rng.random_bool(0.15) {
            ProcessTree::silent()
        } else {
            ProcessTree::activity(LABELS[rng.random_range(0..LABELS.len())])
        };
    }
    let op = [
        Operator::Sequence,
        Operator::Xor,
        Operator::Parallel,
        Operator::Loop,
    ][rng.random_range(0..4)];
    let arity = rng.random_range(2..=3).min(*budget);
    let mut children = Vec::with_capacity(arity);
    for k in 0..arity {
        // keep one leaf in reserve for every sibling still to come
        let reserve = arity - k - 1;
        let mut own = *budget - reserve;
        let before = own;
        children.push(grow(rng, depth + 1, &mut own));
        *budget -= before - own;
    }
    ProcessTree::operator(op, children)
}

/// Proptest wrapper around [`random_tree`].
pub fn arb_tree() -> impl Strategy<Value = ProcessTree> {
    any::<u64>().prop_map(|seed| random_tree(&mut ChaCha8Rng::seed_from_u64(seed)))
}

/// Random run through the tree, with loops repeating at most 3 times.
pub fn sample_trace(tree: &ProcessTree, rng: &mut impl Rng) -> Trace {
    Trace::new(sample(tree, rng))
}

fn sample(tree: &ProcessTree, rng: &mut impl Rng) -> Vec<String> {
    use cfrecon::ptree::Node;
    match tree.node() {
        Node::Activity(a) => vec![a.clone()],
        Node::Silent => vec![],
        Node::Operator(op, ch) => match op {
            Operator::Sequence => ch.iter().flat_map(|c| sample(c, rng)).collect(),
            Operator::Xor => sample(&ch[rng.random_range(0..ch.len())], rng),
            Operator::Loop => {
                let mut out = sample(&ch[0], rng);
                let mut reps = 0;
                while reps < 3 && rng.random_bool(0.4) {
                    out.extend(sample(&ch[rng.random_range(1..ch.len())], rng));
                    out.extend(sample(&ch[0], rng));
                    reps += 1;
                }
                out
            }
            Operator::Parallel => {
                let mut parts: Vec<std::collections::VecDeque<String>> =
                    ch.iter().map(|c| sample(c, rng).into()).collect();
                let mut out = Vec::new();
                loop {
                    let live: Vec<usize> =
                        (0..parts.len()).filter(|&i| !parts[i].is_empty()).collect();
                    if live.is_empty() {
                        break out;
                    }
                    let i = live[rng.random_range(0..live.len())];
                    out.push(parts[i].pop_front().unwrap());
                }
            }
        },
    }
}

/// Log of 1 to 20 random fitting traces.
pub fn random_log(tree: &ProcessTree, rng: &mut impl Rng) -> EventLog {
    let n = rng.random_range(1..=20);
    (0..n).map(|_| sample_trace(tree, rng)).collect()
}

pub fn log_of(entries: &[(&[&str], u64)]) -> EventLog {
    EventLog::from_variants(entries.iter().map(|(t, c)| (Trace::from(*t), *c)))
}

/// Brute-force EMD: minimum cost over the vertices of the transportation
/// polytope, i.e. over all spanning-tree bases of the bipartite graph.
pub fn emd_oracle(l1: &EventLog, l2: &EventLog) -> f64 {
    let (a, p): (Vec<Trace>, Vec<f64>) = l1
        .variants()
        .map(|(t, c)| (t.clone(), c as f64 / l1.len() as f64))
        .unzip();
    let (b, q): (Vec<Trace>, Vec<f64>) = l2
        .variants()
        .map(|(t, c)| (t.clone(), c as f64 / l2.len() as f64))
        .unzip();
    let (n, m) = (a.len(), b.len());
    let cost: Vec<f64> = a
        .iter()
        .flat_map(|x| b.iter().map(move |y| lev_norm(x, y)))
        .collect();

    let cells = n * m;
    let k = n + m - 1;
    let mut best = f64::INFINITY;
    for mask in 0u32..(1u32 << cells) {
        if mask.count_ones() as usize != k {
            continue;
        }
        if let Some(flow) = basis_flow(mask, n, m, &p, &q) {
            let c: f64 = flow.iter().zip(&cost).map(|(f, c)| f * c).sum();
            best = best.min(c);
        }
    }
    best
}

/// Solves the basis `mask` by peeling rows and columns with one open cell.
/// Returns `None` for cyclic or infeasible bases.
fn basis_flow(mask: u32, n: usize, m: usize, p: &[f64], q: &[f64]) -> Option<Vec<f64>> {
    let mut open: Vec<bool> = (0..n * m).map(|c| mask >> c & 1 == 1).collect();
    let mut row = p.to_vec();
    let mut col = q.to_vec();
    let mut row_done = vec![false; n];
    let mut col_done = vec![false; m];
    let mut flow = vec![0.0; n * m];
    for _ in 0..n + m {
        let mut progressed = false;
        for i in 0..n {
            if row_done[i] {
                continue;
            }
            let cells: Vec<usize> = (0..m).filter(|&j| open[i * m + j]).collect();
            if cells.len() == 1 {
                let j = cells[0];
                flow[i * m + j] = row[i];
                col[j] -= row[i];
                open[i * m + j] = false;
                row_done[i] = true;
                progressed = true;
            } else if cells.is_empty() {
                row_done[i] = true;
                if row[i].abs() > 1e-12 {
                    return None;
                }
            }
        }
        for j in 0..m {
            if col_done[j] {
                continue;
            }
            let cells: Vec<usize> = (0..n).filter(|&i| open[i * m + j]).collect();
            if cells.len() == 1 {
                let i = cells[0];
                flow[i * m + j] = col[j];
                row[i] -= col[j];
                open[i * m + j] = false;
                col_done[j] = true;
                progressed = true;
            } else if cells.is_empty() {
                col_done[j] = true;
                if col[j].abs() > 1e-12 {
                    return None;
                }
            }
        }
        if !progressed {
            break;
        }
    }
    if open.iter().any(|&o| o) || flow.iter().any(|&f| f < -1e-12) {
        return None;
    }
    // marginals must hold
    for i in 0..n {
        let s: f64 = (0..m).map(|j| flow[i * m + j]).sum();
        if (s - p[i]).abs() > 1e-9 {
            return None;
        }
    }
    for j in 0..m {
        let s: f64 = (0..n).map(|i| flow[i * m + j]).sum();
        if (s - q[j]).abs() > 1e-9 {
            return None;
        }
    }
    Some(flow)
}

/// Independent edit distance (full table), normalized by the longer length.
pub fn lev_norm(x: &[String], y: &[String]) -> f64 {
    let (n, m) = (x.len(), y.len());
    if n.max(m) == 0 {
        return 0.0;
    }
    let mut d = vec![vec![0usize; m + 1]; n + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in d[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=n {
        for j in 1..=m {
            let sub = d[i - 1][j - 1] + usize::from(x[i - 1] != y[j - 1]);
            d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    d[n][m] as f64 / n.max(m) as f64
}
