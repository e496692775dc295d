mod common;

use std::collections::BTreeSet;

use cfrecon::log::{read_variants, write_variants};
use cfrecon::ptree::language::enumerate_language_capped;
use cfrecon::ptree::Node;
use cfrecon::replay::{verify_annotation_for_log, Replayer};
use cfrecon::{
    annotate, fits, parse_tree, playout, verify_annotation, EventLog, Operator, ProcessTree,
    Strategy, StrategyConfig, Trace,
};
use common::{arb_tree, random_log};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const CAP: usize = 20_000;

type Lang = BTreeSet<Vec<String>>;

/// Language by plain list manipulation: interleavings built head by head.
fn naive_language(tree: &ProcessTree, k: usize) -> Lang {
    fn cat(a: &Lang, b: &Lang) -> Lang {
        a.iter()
            .flat_map(|x| {
                b.iter().map(move |y| {
                    let mut v = x.clone();
                    v.extend(y.iter().cloned());
                    v
                })
            })
            .collect()
    }
    fn interleave(x: &[String], y: &[String], out: &mut Lang, acc: &mut Vec<String>) {
        if x.is_empty() || y.is_empty() {
            let mut v = acc.clone();
            v.extend_from_slice(x);
            v.extend_from_slice(y);
            out.insert(v);
            return;
        }
        acc.push(x[0].clone());
        interleave(&x[1..], y, out, acc);
        acc.pop();
        acc.push(y[0].clone());
        interleave(x, &y[1..], out, acc);
        acc.pop();
    }
    let unit: Lang = [vec![]].into_iter().collect();
    match tree.node() {
        Node::Activity(a) => [vec![a.clone()]].into_iter().collect(),
        Node::Silent => unit,
        Node::Operator(op, ch) => {
            let langs: Vec<Lang> = ch.iter().map(|c| naive_language(c, k)).collect();
            match op {
                Operator::Sequence => langs.iter().fold(unit, |acc, l| cat(&acc, l)),
                Operator::Xor => langs.into_iter().flatten().collect(),
                Operator::Parallel => langs.iter().fold(unit, |acc, l| {
                    let mut out = Lang::new();
                    for x in &acc {
                        for y in l {
                            interleave(x, y, &mut out, &mut Vec::new());
                        }
                    }
                    out
                }),
                Operator::Loop => {
                    let redo: Lang = langs[1..].iter().flatten().cloned().collect();
                    let mut level = langs[0].clone();
                    let mut all = level.clone();
                    for _ in 0..k {
                        level = cat(&cat(&level, &redo), &langs[0]);
                        all.extend(level.iter().cloned());
                    }
                    all
                }
            }
        }
    }
}

fn as_lang(s: &BTreeSet<Trace>) -> Lang {
    s.iter().map(|t| t.to_vec()).collect()
}

fn small_language(t: &ProcessTree, k: usize) -> Option<BTreeSet<Trace>> {
    enumerate_language_capped(t, k, CAP).ok()
}

fn weighted(tree: &ProcessTree, seed: u64) -> ProcessTree {
    let n = tree.node_count();
    let ws: Vec<u64> = (0..n as u64)
        .map(|i| seed.wrapping_mul(i + 7) % 1000)
        .collect();
    tree.with_weights(&ws)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn text_round_trip(t in arb_tree(), seed: u64) {
        prop_assert_eq!(&parse_tree(&t.to_string()).unwrap(), &t);
        let w = weighted(&t, seed);
        prop_assert_eq!(parse_tree(&w.to_string()).unwrap(), w);
    }

    #[test]
    fn enumeration_matches_naive_set_construction(t in arb_tree()) {
        if let Some(lang) = small_language(&t, 1) {
            prop_assert_eq!(as_lang(&lang), naive_language(&t, 1));
        }
    }

    #[test]
    fn loop_normalization_keeps_language(t in arb_tree()) {
        let n = t.normalize_loops();
        prop_assert!(n.is_normalized());
        prop_assert_eq!(small_language(&t, 1), small_language(&n, 1));
    }

    #[test]
    fn enumerated_traces_fit(t in arb_tree()) {
        if let Some(lang) = small_language(&t, 1) {
            let r = Replayer::new(&t);
            for trace in lang.iter().take(300) {
                prop_assert!(r.fits(trace), "{} does not fit {}", trace, t);
            }
        }
    }

    #[test]
    fn fits_agrees_with_enumeration_on_mutants(t in arb_tree(), seed: u64, edit in 0usize..3, pos: usize, sym in 0usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = common::sample_trace(&t, &mut rng);
        let mut v = base.to_vec();
        let label = ["a", "b", "c", "d", "e", "f"][sym].to_string();
        match edit {
            0 => v.insert(pos % (v.len() + 1), label),
            1 if !v.is_empty() => { v.remove(pos % v.len()); }
            _ if v.len() >= 2 => { let i = pos % (v.len() - 1); v.swap(i, i + 1); }
            _ => {}
        }
        prop_assume!(v.len() <= 6);
        let mutant = Trace::new(v);
        if let Some(lang) = small_language(&t, mutant.len()) {
            prop_assert_eq!(fits(&t, &mutant), lang.contains(&mutant), "{} on {}", mutant, t);
        }
    }

    #[test]
    fn annotation_is_consistent(t in arb_tree(), seed: u64) {
        let log = random_log(&t, &mut ChaCha8Rng::seed_from_u64(seed));
        let a = annotate(&t, &log).unwrap();
        prop_assert_eq!(a.without_weights(), t.clone());
        prop_assert_eq!(a.weight(), Some(log.len()));
        prop_assert!(verify_annotation(&a).is_empty(), "{}", a);
        prop_assert!(verify_annotation_for_log(&a, log.len()).is_empty());
    }

    #[test]
    fn annotation_is_additive(t in arb_tree(), s1: u64, s2: u64) {
        let l1 = random_log(&t, &mut ChaCha8Rng::seed_from_u64(s1));
        let l2 = random_log(&t, &mut ChaCha8Rng::seed_from_u64(s2));
        let mut both = l1.clone();
        both.extend_from(&l2);
        let w1 = annotate(&t, &l1).unwrap().weights().unwrap();
        let w2 = annotate(&t, &l2).unwrap().weights().unwrap();
        let w = annotate(&t, &both).unwrap().weights().unwrap();
        let sum: Vec<u64> = w1.iter().zip(&w2).map(|(a, b)| a + b).collect();
        prop_assert_eq!(w, sum);
    }

    #[test]
    fn variants_format_round_trips(t in arb_tree(), seed: u64) {
        let log = random_log(&t, &mut ChaCha8Rng::seed_from_u64(seed));
        let mut buf = Vec::new();
        write_variants(&log, &mut buf).unwrap();
        let back: EventLog = read_variants(&buf[..]).unwrap();
        prop_assert_eq!(back, log);
    }

    #[test]
    fn every_strategy_stays_in_the_language(t in arb_tree(), seed: u64) {
        let log = random_log(&t, &mut ChaCha8Rng::seed_from_u64(seed));
        let a = annotate(&t, &log).unwrap();
        let r = Replayer::new(&t);
        let n = log.len();
        for s in [
            Strategy::A { traces: n },
            Strategy::B { traces: n },
            Strategy::C,
            Strategy::D { variance: 1.0 },
            Strategy::Sota,
        ] {
            let out = playout(&a, &StrategyConfig::new(s, seed)).unwrap();
            for trace in out.traces() {
                prop_assert!(r.fits(trace), "{} from {} on {}", trace, s, a);
            }
        }
    }
}
