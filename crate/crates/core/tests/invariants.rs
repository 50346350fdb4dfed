use proptest::prelude::*;

use subsum_core::group::{abelian_groups_in_range, abelian_groups_of_order};
use subsum_core::num;
use subsum_core::par::ExecMode;
use subsum_core::report::{parse_jsonl_line, to_jsonl_line, AnalysisReport};
use subsum_core::structure::{
    critical_number, is_nice, max_incomplete_set, max_non_nice_incomplete_set, SearchConfig,
    DEFAULT_DELTA,
};
use subsum_core::subgroup::{all_subgroups, maximal_subgroup_count, maximal_subgroups};
use subsum_core::sumset::{iterated_sumset, subset_sums, subset_sums_of_set, sumset};
use subsum_core::{make_group, ElementSet, GroupSpec, MultisetSequence};

/// c(G) for every group of order 4..24, from a separate brute-force
/// program over all subsets of G \ {0}.
const CRITICAL_TABLE: &[(&[u64], u64)] = &[
    (&[2, 2], 3),
    (&[4], 3),
    (&[5], 3),
    (&[6], 4),
    (&[7], 4),
    (&[2, 2, 2], 4),
    (&[2, 4], 5),
    (&[8], 5),
    (&[3, 3], 5),
    (&[9], 5),
    (&[10], 5),
    (&[11], 6),
    (&[2, 2, 3], 6),
    (&[12], 6),
    (&[13], 6),
    (&[14], 7),
    (&[15], 7),
    (&[2, 2, 2, 2], 8),
    (&[2, 2, 4], 8),
    (&[2, 8], 8),
    (&[4, 4], 8),
    (&[16], 8),
    (&[17], 7),
    (&[2, 3, 3], 9),
    (&[2, 9], 9),
    (&[19], 8),
    (&[2, 2, 5], 10),
    (&[4, 5], 10),
    (&[21], 8),
    (&[22], 11),
    (&[23], 9),
    (&[2, 2, 2, 3], 12),
    (&[2, 3, 4], 12),
    (&[3, 8], 12),
];

fn group_strategy() -> impl Strategy<Value = GroupSpec> {
    prop::collection::vec(2u64..6, 1..4).prop_map(|f| make_group(&f).unwrap())
}

fn group_and_set(max_order: usize) -> impl Strategy<Value = (GroupSpec, Vec<usize>)> {
    group_strategy()
        .prop_filter("small order", move |g| g.order() <= max_order)
        .prop_flat_map(|g| {
            let n = g.order();
            (Just(g), prop::collection::vec(0..n, 0..10))
        })
}

fn naive_sums(g: &GroupSpec, items: &[usize]) -> ElementSet {
    let mut out = g.empty_set();
    for mask in 1u32..1 << items.len() {
        let mut x = g.zero();
        for (i, &a) in items.iter().enumerate() {
            if mask >> i & 1 == 1 {
                x = g.add(x, a);
            }
        }
        out.insert(x);
    }
    out
}

#[test]
fn critical_numbers_match_frozen_table() {
    let cfg = SearchConfig::default();
    let groups = abelian_groups_in_range(4, 24);
    assert_eq!(groups.len(), CRITICAL_TABLE.len());
    for &(factors, c) in CRITICAL_TABLE {
        let g = make_group(factors).unwrap();
        let r = critical_number(&g, &cfg);
        assert_eq!(r.exact, Some(c), "{g}");
        assert_eq!(r.witness_incomplete.count() as u64, c - 1);
        assert!(!subset_sums_of_set(&g, &r.witness_incomplete).is_full());
    }
}

#[test]
fn maximal_subgroup_count_formula() {
    for n in 2..=200u64 {
        for f in abelian_groups_of_order(n) {
            let g = make_group(&f).unwrap();
            let mut primes = g.prime_factors().to_vec();
            primes.dedup();
            let expected: usize = primes
                .iter()
                .map(|&p| {
                    let r = g.p_rank(p) as u32;
                    ((p.pow(r) - 1) / (p - 1)) as usize
                })
                .sum();
            assert_eq!(maximal_subgroup_count(&g), expected, "{g}");
        }
    }
}

#[test]
fn maximal_subgroups_have_prime_index() {
    for g in abelian_groups_in_range(2, 60) {
        for h in maximal_subgroups(&g).iter() {
            assert!(num::is_prime(h.index() as u64), "{g}");
            assert!(h.contains(g.zero()));
            for x in h.members().iter() {
                for y in h.members().iter() {
                    assert!(h.contains(g.add(x, y)));
                }
            }
        }
    }
}

#[test]
fn lattice_is_closed_under_intersection_and_sum() {
    for g in abelian_groups_in_range(2, 36) {
        let all = all_subgroups(&g).unwrap();
        let members: Vec<&ElementSet> = all.iter().map(|h| h.members()).collect();
        for a in &members {
            for b in &members {
                assert!(members.contains(&&a.intersection(b)), "{g}");
                assert!(members.contains(&&sumset(&g, a, b)), "{g}");
            }
        }
    }
}

#[test]
fn isomorphic_encodings_agree() {
    for (a, b) in [(&[6][..], &[2, 3][..]), (&[12], &[4, 3]), (&[2, 6], &[2, 2, 3]), (&[45], &[9, 5])] {
        let (ga, gb) = (make_group(a).unwrap(), make_group(b).unwrap());
        assert_eq!(ga.canonical_key(), gb.canonical_key());
        assert_eq!(maximal_subgroup_count(&ga), maximal_subgroup_count(&gb));
        assert_eq!(
            all_subgroups(&ga).unwrap().len(),
            all_subgroups(&gb).unwrap().len()
        );
        if ga.order() <= 24 {
            let cfg = SearchConfig::default();
            assert_eq!(critical_number(&ga, &cfg).exact, critical_number(&gb, &cfg).exact);
        }
    }
}

#[test]
fn non_nice_never_exceeds_incomplete() {
    let cfg = SearchConfig::default();
    for g in abelian_groups_in_range(4, 16) {
        if g.prime_factors().len() < 2 {
            continue;
        }
        let nn = max_non_nice_incomplete_set(&g, DEFAULT_DELTA, &cfg).unwrap();
        let inc = max_incomplete_set(&g, true, &cfg);
        assert!(nn.size <= inc.size, "{g}");
        assert!(!is_nice(&g, &nn.witness).nice);
    }
}

#[test]
fn sequential_and_parallel_searches_agree() {
    let par = SearchConfig::default();
    let seq = SearchConfig {
        mode: ExecMode::Sequential,
        ..par
    };
    for g in abelian_groups_in_range(4, 18) {
        let a = critical_number(&g, &par);
        let b = critical_number(&g, &seq);
        assert_eq!(
            (a.exact, a.witness_incomplete.to_vec(), a.nodes),
            (b.exact, b.witness_incomplete.to_vec(), b.nodes),
            "{g}"
        );
    }
}

#[test]
fn report_lines_round_trip() {
    let g = make_group(&[9, 5]).unwrap();
    let r = AnalysisReport::new(
        "critical",
        serde_json::json!({ "group": [9, 5] }),
        Some(&g),
        serde_json::json!({ "x": 1.0 / 3.0 }),
    )
    .summary("s");
    let back = parse_jsonl_line(&to_jsonl_line(&r)).unwrap();
    assert_eq!(back, r);
}

proptest! {
    #[test]
    fn encode_decode_round_trip(g in group_strategy(), k in 0usize..10_000) {
        let x = k % g.order();
        let coords = g.decode(x);
        prop_assert_eq!(g.encode(&coords).unwrap(), x);
        prop_assert_eq!(g.add(x, g.neg(x)), g.zero());
    }

    #[test]
    fn subset_sums_match_enumeration((g, items) in group_and_set(64)) {
        let seq = MultisetSequence::from_items(g.order(), &items).unwrap();
        prop_assert_eq!(subset_sums(&g, &seq).unwrap(), naive_sums(&g, &items));
    }

    #[test]
    fn subset_sums_grow_with_the_set((g, items) in group_and_set(64), extra in 0usize..64) {
        let a = g.set_of(&items).unwrap();
        let mut b = a.clone();
        b.insert(extra % g.order());
        prop_assert!(subset_sums_of_set(&g, &a).is_subset_of(&subset_sums_of_set(&g, &b)));
    }

    #[test]
    fn iterated_sumset_recurrence((g, items) in group_and_set(64), l in 1i64..5) {
        prop_assume!(!items.is_empty());
        let a = g.set_of(&items).unwrap();
        prop_assert_eq!(iterated_sumset(&g, &a, 1).unwrap(), a.clone());
        let next = iterated_sumset(&g, &a, l + 1).unwrap();
        prop_assert_eq!(next, sumset(&g, &iterated_sumset(&g, &a, l).unwrap(), &a));
    }

    #[test]
    fn sets_at_the_critical_size_are_complete(n in 4u64..13, seed in any::<u64>()) {
        use rand::{seq::index::sample, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for f in abelian_groups_of_order(n) {
            let g = make_group(&f).unwrap();
            let c = critical_number(&g, &SearchConfig::default()).exact.unwrap() as usize;
            let picks: Vec<usize> = sample(&mut rng, g.order() - 1, c).into_iter().map(|i| i + 1).collect();
            let a = g.set_of(&picks).unwrap();
            prop_assert!(subset_sums_of_set(&g, &a).is_full(), "{} {:?}", g, picks);
        }
    }
}
