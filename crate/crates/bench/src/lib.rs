//! Fixtures shared by the criterion benchmarks.

use cfrecon::{parse_tree, EventLog, ProcessTree, Trace};

/// `*('a', tau)` together with `n` copies of a trace of `len` a's.
pub fn repeated_loop(n: u64, len: usize) -> (ProcessTree, EventLog) {
    let tree = parse_tree("*('a', tau)").expect("valid tree");
    let log = EventLog::from_variants([(Trace::from(vec!["a".to_string(); len]), n)]);
    (tree, log)
}

/// Two logs of `n` distinct variants each, spelled over `{a, b, c}` with
/// lengths 3 to 9 and uneven counts.
pub fn variant_logs(n: usize) -> (EventLog, EventLog) {
    let spell = |mut k: usize, shift: usize| -> Trace {
        let len = 3 + (k + shift) % 7;
        (0..len)
            .map(|_| {
                let c = ["a", "b", "c"][k % 3];
                k = k / 3 + shift;
                c
            })
            .collect()
    };
    let l1 = EventLog::from_variants((0..n).map(|k| (spell(k, 0), 1 + (k % 5) as u64)));
    let l2 = EventLog::from_variants((0..n).map(|k| (spell(k, 1), 1 + (k % 3) as u64)));
    (l1, l2)
}
