mod common;

use cfrecon::metrics::{emd_with_plan, nhi, nmi, DEFAULT_EMD_CAP};
use cfrecon::{emd, length_histogram, normalized_levenshtein, EventLog, Trace};
use common::{emd_oracle, lev_norm};
use num_rational::Ratio;
use proptest::prelude::*;

fn arb_trace() -> impl Strategy<Value = Trace> {
    prop::collection::vec(prop::sample::select(vec!["a", "b", "c"]), 0..5)
        .prop_map(|v| v.into_iter().collect())
}

/// Logs with 1 to 4 variants.
fn arb_log() -> impl Strategy<Value = EventLog> {
    prop::collection::btree_map(arb_trace(), 1u64..6, 1..5).prop_map(EventLog::from_variants)
}

fn scaled(log: &EventLog, k: u64) -> EventLog {
    EventLog::from_variants(log.variants().map(|(t, c)| (t.clone(), c * k)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn emd_matches_vertex_enumeration(l1 in arb_log(), l2 in arb_log()) {
        let d = emd(&l1, &l2, DEFAULT_EMD_CAP).unwrap();
        let oracle = emd_oracle(&l1, &l2);
        prop_assert!((d - oracle).abs() <= 1e-9, "solver {d} oracle {oracle}");
        prop_assert!((0.0..=1.0).contains(&d));
    }

    #[test]
    fn emd_is_symmetric(l1 in arb_log(), l2 in arb_log()) {
        let a = emd(&l1, &l2, DEFAULT_EMD_CAP).unwrap();
        let b = emd(&l2, &l1, DEFAULT_EMD_CAP).unwrap();
        prop_assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
    }

    #[test]
    fn emd_zero_exactly_on_equal_distributions(l1 in arb_log(), l2 in arb_log(), k in 1u64..4) {
        prop_assert_eq!(emd(&l1, &l1, DEFAULT_EMD_CAP).unwrap(), 0.0);
        prop_assert_eq!(emd(&l1, &scaled(&l1, k), DEFAULT_EMD_CAP).unwrap(), 0.0);
        let same = cfrecon::variant_distribution(&l1).unwrap() == cfrecon::variant_distribution(&l2).unwrap();
        prop_assert_eq!(emd(&l1, &l2, DEFAULT_EMD_CAP).unwrap() == 0.0, same);
    }

    #[test]
    fn plan_marginals_are_the_variant_distributions(l1 in arb_log(), l2 in arb_log()) {
        let (_, plan) = emd_with_plan(&l1, &l2, DEFAULT_EMD_CAP).unwrap();
        let p = cfrecon::variant_distribution(&l1).unwrap();
        let q = cfrecon::variant_distribution(&l2).unwrap();
        for (i, s) in plan.sources().iter().enumerate() {
            let row: Ratio<u64> = (0..plan.targets().len()).map(|j| plan.flow(i, j)).sum();
            prop_assert_eq!(row, p.get(s));
        }
        for (j, t) in plan.targets().iter().enumerate() {
            let col: Ratio<u64> = (0..plan.sources().len()).map(|i| plan.flow(i, j)).sum();
            prop_assert_eq!(col, q.get(t));
        }
    }

    #[test]
    fn levenshtein_matches_full_table(a in arb_trace(), b in arb_trace()) {
        prop_assert_eq!(normalized_levenshtein(&a, &b), lev_norm(&a, &b));
    }

    #[test]
    fn nmi_bounds_and_monotonicity(l1 in arb_log(), l2 in arb_log(), drop in any::<prop::sample::Index>()) {
        prop_assert_eq!(nmi(&l1, &l1).unwrap(), 1.0);
        let full = nmi(&l1, &l2).unwrap();
        prop_assert!((0.0..=1.0).contains(&full));
        let victim = drop.get(&l2.traces().cloned().collect::<Vec<_>>()).clone();
        let smaller = EventLog::from_variants(l2.variants().map(|(t, c)| {
            (t.clone(), if *t == victim { c - 1 } else { c })
        }).filter(|&(_, c)| c > 0));
        prop_assert!(nmi(&l1, &smaller).unwrap() <= full);
    }

    #[test]
    fn nhi_in_unit_interval_for_equal_sizes(l1 in arb_log(), l2 in arb_log()) {
        let m = length_histogram(&l1).unwrap();
        prop_assert_eq!(nhi(&m, &m).unwrap(), 1.0);
        // trim or pad the reconstruction to the original size
        let mut traces: Vec<Trace> = l2.variants()
            .flat_map(|(t, c)| std::iter::repeat_n(t.clone(), c as usize))
            .collect();
        traces.resize(l1.len() as usize, Trace::empty());
        let i = length_histogram(&traces.into_iter().collect()).unwrap();
        let v = nhi(&i, &m).unwrap();
        prop_assert!((0.0..=1.0).contains(&v));
    }
}

#[test]
fn worked_emd_examples() {
    use common::log_of;
    let l = log_of(&[(&["a", "b"], 2), (&["c"], 1)]);
    assert_eq!(emd(&l, &l, DEFAULT_EMD_CAP).unwrap(), 0.0);
    assert_eq!(
        emd(
            &log_of(&[(&["a"], 1)]),
            &log_of(&[(&["b"], 1)]),
            DEFAULT_EMD_CAP
        )
        .unwrap(),
        1.0
    );
    let d = emd(
        &log_of(&[(&["a", "b"], 2)]),
        &log_of(&[(&["a", "b"], 1), (&["a", "c"], 1)]),
        DEFAULT_EMD_CAP,
    )
    .unwrap();
    assert!((d - 0.25).abs() < 1e-12);
    assert!(
        (emd_oracle(
            &log_of(&[(&["a", "b"], 2)]),
            &log_of(&[(&["a", "b"], 1), (&["a", "c"], 1)])
        ) - 0.25)
            .abs()
            < 1e-12
    );
}
