mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use qgame::arena::{Arena, ExplicitArena};
use qgame::engine::{explore_consistent, koenig_bound, KoenigOutcome};
use qgame::format::{parse_arena, parse_strategy, write_arena, write_strategy};
use qgame::objective::{LimitMode, Objective, PayoffKind, Relation};
use qgame::synthesis::{check_domination, check_region, sc_from_strategy, sigma_safe, solve_values, ValueFamily};
use qgame::{Edge, Extended, Lasso, OpenSub, Player, PrefixOrder, Weight};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{brute_force_values, random_arena};

fn arena_from(seed: u64, max_vertices: usize) -> ExplicitArena {
    random_arena(&mut ChaCha8Rng::seed_from_u64(seed), max_vertices)
}

fn small_word(max_len: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-3i64..=3, 1..=max_len)
}

fn weights(xs: &[i64]) -> Vec<Weight> {
    xs.iter().map(|&x| Weight::from_int(x)).collect()
}

fn open_sub() -> impl Strategy<Value = OpenSub> {
    prop_oneof![
        (1u64..4, 1u64..5).prop_map(|(m, i)| OpenSub::MpSupGe0 { m, i }),
        (1u64..4, 1u64..5).prop_map(|(m, i)| OpenSub::TpInf { m, i }),
        (1u64..5).prop_map(|m| OpenSub::TpSupGe0 { m }),
        (-1i64..3, 1u64..5).prop_map(|(c, i)| OpenSub::BuchiColour { c, i }),
    ]
}

fn le(o: PrefixOrder) -> bool {
    matches!(o, PrefixOrder::Le | PrefixOrder::Both)
}

/// A memoryless Player 1 strategy picking edges by `picks`.
fn memoryless_from(arena: &ExplicitArena, picks: &[usize]) -> qgame::Strategy {
    let mut table = BTreeMap::new();
    for (n, (v, owner)) in arena.vertices().enumerate() {
        if owner == Player::One {
            let edges = arena.edges_of(v);
            table.insert(v.clone(), edges[picks[n % picks.len()] % edges.len()].clone());
        }
    }
    qgame::Strategy::memoryless("picked", table)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn weight_text_round_trip(n in -1000i64..1000, d in 1i64..1000) {
        let w = Weight::ratio(n, d);
        prop_assert_eq!(w.to_string().parse::<Weight>().unwrap(), w);
    }

    #[test]
    fn comparator_is_a_total_preorder(sub in open_sub(), len in 1usize..8, seed in any::<[i64; 3]>()) {
        let word = |s: i64| -> Vec<Weight> {
            (0..len).map(|k| Weight::from_int((s.wrapping_mul(k as i64 + 7)).rem_euclid(5) - 2)).collect()
        };
        let (a, b, c) = (word(seed[0]), word(seed[1]), word(seed[2]));
        let ab = sub.prefix_compare(&a, &b).unwrap();
        let ba = sub.prefix_compare(&b, &a).unwrap();
        prop_assert!(le(ab) || le(ba));
        prop_assert_eq!(le(ab), matches!(ba, PrefixOrder::Ge | PrefixOrder::Both));
        if le(ab) && le(sub.prefix_compare(&b, &c).unwrap()) {
            prop_assert!(le(sub.prefix_compare(&a, &c).unwrap()));
        }
        prop_assert!(le(sub.prefix_compare(&a, &a).unwrap()));
    }

    #[test]
    fn comparator_is_a_congruence(sub in open_sub(), a in small_word(6), b in small_word(6), ext in small_word(4)) {
        let len = a.len().min(b.len());
        let (a, b) = (weights(&a[..len]), weights(&b[..len]));
        let order = sub.prefix_compare(&a, &b).unwrap();
        let mut a2 = a.clone();
        let mut b2 = b.clone();
        a2.extend(weights(&ext));
        b2.extend(weights(&ext));
        if le(order) {
            prop_assert!(le(sub.prefix_compare(&a2, &b2).unwrap()));
        }
    }

    #[test]
    fn satisfaction_survives_extension(sub in open_sub(), a in small_word(8), ext in small_word(8)) {
        let a = weights(&a);
        let mut longer = a.clone();
        longer.extend(weights(&ext));
        if sub.already_satisfies(&a) {
            prop_assert!(sub.already_satisfies(&longer));
        }
    }

    #[test]
    fn lasso_evaluation_ignores_unrolling(prefix in prop::collection::vec(-3i64..=3, 0..5), cycle in small_word(5), t in -2i64..=2) {
        let (prefix, cycle) = (weights(&prefix), weights(&cycle));
        let base = Lasso::new(prefix.clone(), cycle.clone()).unwrap();
        // One letter of the cycle moved into the prefix, and the cycle doubled.
        let mut p2 = prefix.clone();
        p2.push(cycle[0].clone());
        let mut c2: Vec<Weight> = cycle[1..].to_vec();
        c2.push(cycle[0].clone());
        let rotated = Lasso::new(p2, c2).unwrap();
        let doubled = Lasso::new(prefix, [cycle.clone(), cycle].concat()).unwrap();
        for kind in [PayoffKind::Mean, PayoffKind::Total] {
            for mode in [LimitMode::Limsup, LimitMode::Liminf] {
                for relation in [Relation::GreaterEq, Relation::Greater] {
                    let obj = Objective::new(kind, mode, relation, Extended::Finite(Weight::from_int(t))).unwrap();
                    let want = obj.eval_on_lasso(&base);
                    prop_assert_eq!(obj.eval_on_lasso(&rotated), want);
                    prop_assert_eq!(obj.eval_on_lasso(&doubled), want);
                }
            }
        }
    }

    #[test]
    fn arena_text_round_trip(seed in any::<u64>()) {
        let a = arena_from(seed, 6);
        let text = write_arena(&a);
        let back = parse_arena(&text).unwrap();
        prop_assert_eq!(write_arena(&back), text);
    }

    #[test]
    fn strategy_text_round_trip(seed in any::<u64>(), picks in prop::collection::vec(0usize..2, 1..6)) {
        let a = arena_from(seed, 6);
        let sigma = memoryless_from(&a, &picks);
        let text = write_strategy(&sigma, None).unwrap();
        let back = parse_strategy(&text).unwrap();
        prop_assert_eq!(write_strategy(&back, None).unwrap(), text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn values_match_brute_force(seed in any::<u64>()) {
        let a = arena_from(seed, 5);
        for (family, kind) in [(ValueFamily::MeanPayoff, PayoffKind::Mean), (ValueFamily::TotalPayoffSup, PayoffKind::Total)] {
            let got = solve_values(&a, family).unwrap();
            prop_assert_eq!(&got.values, &brute_force_values(&a, kind));
        }
    }

    #[test]
    fn values_are_locally_optimal(seed in any::<u64>()) {
        let a = arena_from(seed, 6);
        for family in [ValueFamily::MeanPayoff, ValueFamily::TotalPayoffSup] {
            let vals = solve_values(&a, family).unwrap();
            for (v, owner) in a.vertices() {
                let options = a.edges_of(v).iter().map(|e| {
                    let next = vals.get(&e.to).unwrap().clone();
                    match family {
                        ValueFamily::MeanPayoff => next,
                        ValueFamily::TotalPayoffSup => next.add_finite(&e.weight),
                    }
                });
                let best = match owner {
                    Player::One => options.max(),
                    Player::Two => options.min(),
                }.unwrap();
                prop_assert_eq!(vals.get(v).unwrap(), &best);
            }
        }
    }

    #[test]
    fn witness_attains_the_value(seed in any::<u64>()) {
        let a = arena_from(seed, 5);
        let vals = solve_values(&a, ValueFamily::MeanPayoff).unwrap();
        let witness = vals.witness.clone().expect("small arenas always get a witness");
        // Fixing the witness leaves a one-player arena; its values must not drop.
        let mut b = ExplicitArena::builder("fixed");
        for (v, owner) in a.vertices() {
            b.vertex(v.clone(), owner);
            if owner == Player::One {
                let e = witness.choose(&a, v, &witness.initial_memory(v)).unwrap();
                b.edge(e.from, e.weight, e.to);
            } else {
                for e in a.edges_of(v) {
                    b.edge(e.from.clone(), e.weight.clone(), e.to.clone());
                }
            }
        }
        b.start(a.start().clone());
        let fixed = b.build().unwrap();
        prop_assert_eq!(&solve_values(&fixed, ValueFamily::MeanPayoff).unwrap().values, &vals.values);
    }

    #[test]
    fn safe_strategy_is_scale_invariant(seed in any::<u64>(), num in 1i64..7, den in 1i64..7) {
        let a = arena_from(seed, 6);
        let factor = Weight::ratio(num, den);
        let scaled = a.map_weights(|w| w * &factor);
        let vals = solve_values(&a, ValueFamily::TotalPayoffSup).unwrap();
        let vals2 = solve_values(&scaled, ValueFamily::TotalPayoffSup).unwrap();
        for (v, x) in &vals.values {
            let want = match x {
                Extended::Finite(w) => Extended::Finite(w * &factor),
                other => other.clone(),
            };
            prop_assert_eq!(vals2.get(v).unwrap(), &want);
        }
        let (s1, _) = sigma_safe(&a, &vals).unwrap();
        let (s2, _) = sigma_safe(&scaled, &vals2).unwrap();
        for (v, owner) in a.vertices() {
            if owner == Player::One {
                let e1 = s1.choose(&a, v, &s1.initial_memory(v)).unwrap();
                let e2 = s2.choose(&scaled, v, &s2.initial_memory(v)).unwrap();
                prop_assert_eq!((&e1.to, &e1.weight * &factor), (&e2.to, e2.weight.clone()));
            }
        }
    }

    #[test]
    fn safe_strategy_keeps_the_region(seed in any::<u64>()) {
        let a = arena_from(seed, 6);
        let vals = solve_values(&a, ValueFamily::TotalPayoffSup).unwrap();
        let (safe, region) = sigma_safe(&a, &vals).unwrap();
        for (v, _) in a.vertices() {
            if let Some(Extended::Finite(val)) = vals.get(v) {
                let check = check_region(&a, v, &-val, &safe, &region, 12, 200_000).unwrap();
                prop_assert!(check.ok(), "{:?}", check.violation);
            }
        }
    }

    #[test]
    fn koenig_bound_matches_enumeration(seed in any::<u64>(), picks in prop::collection::vec(0usize..2, 1..6), sub in open_sub()) {
        let a = arena_from(seed, 6);
        let sigma = memoryless_from(&a, &picks);
        let v0 = a.start().clone();
        match koenig_bound(&a, &v0, &sigma, Player::One, &sub, 40, 200_000).unwrap() {
            KoenigOutcome::Bound(level) => {
                let tree = explore_consistent(&a, &v0, &sigma, Player::One, level as usize, 500_000).unwrap();
                prop_assume!(!tree.partial);
                let all = |l: usize| tree.histories(l).iter().all(|h| sub.already_satisfies(&h.colours()));
                prop_assert!(all(level as usize));
                if level > 0 {
                    prop_assert!(!all(level as usize - 1));
                }
            }
            KoenigOutcome::Refuted { prefix, cycle, .. } => {
                // Repeating the cycle never satisfies.
                let mut word: Vec<Weight> = prefix.iter().map(|e: &Edge| e.weight.clone()).collect();
                for _ in 0..8 {
                    word.extend(cycle.iter().map(|e| e.weight.clone()));
                }
                prop_assert!(!sub.already_satisfies(&word));
            }
            KoenigOutcome::Inconclusive { .. } => {}
        }
    }

    #[test]
    fn conversion_dominates(seed in any::<u64>(), picks in prop::collection::vec(0usize..2, 1..6), sub in open_sub()) {
        let a = arena_from(seed, 6);
        let sigma = memoryless_from(&a, &picks);
        let conv = sc_from_strategy(&a, a.start(), &sigma, &sub, 9, 200_000).unwrap();
        let report = check_domination(&a, a.start(), &conv, &sub, 8, 200_000).unwrap();
        prop_assert!(report.violation.is_none(), "{:?}", report.violation);
    }
}
