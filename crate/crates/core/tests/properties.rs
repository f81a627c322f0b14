use std::cmp::Ordering;
use std::collections::BTreeSet;

use dmgraph::builders::{
    dtm_rips_filtration, lower_star_filtration, rips_2skeleton, sparse_dtm_rips, sparse_dtm_rips_truncated,
    weighted_edge_value,
};
use dmgraph::cloud::dtm_weights;
use dmgraph::oracle::{lex_compare, persistent_cycles, random_instance, CycleSet};
use dmgraph::persistence::reduce_plain;
use dmgraph::{datagen, reduce, BuildOptions, Filtration, GeneratorConfig, Metric, Role, WeightedPointCloud};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Minimal α by bisection on the defining predicate.
fn edge_value_bisect(wp: f64, wq: f64, d: f64) -> f64 {
    let ok = |a: f64| {
        a >= wp && a >= wq && (a * a - wp * wp).max(0.0).sqrt() + (a * a - wq * wq).max(0.0).sqrt() >= d
    };
    let mut lo = wp.max(wq);
    if ok(lo) {
        return lo;
    }
    let mut hi = lo + d;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn assert_valid(f: &Filtration) {
    let rebuilt = Filtration::from_ordered(f.simplices().to_vec(), f.values().to_vec());
    assert!(rebuilt.is_ok(), "{:?}", rebuilt.err());
}

fn cloud_strategy(max_n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::btree_set((-1000i32..1000, -1000i32..1000), 4..max_n).prop_map(|s| {
        s.into_iter()
            .map(|(x, y)| vec![x as f64 / 100.0, y as f64 / 100.0])
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn edge_value_matches_bisection(wp in 0.0f64..5.0, wq in 0.0f64..5.0, d in 1e-3f64..10.0) {
        let v = weighted_edge_value(wp, wq, d).unwrap();
        let b = edge_value_bisect(wp, wq, d);
        prop_assert!((v - b).abs() <= 1e-9 * (1.0 + b), "{wp} {wq} {d}: {v} vs {b}");
    }
}

proptest! {
    #[test]
    fn edge_value_monotone_in_distance(w in 0.0f64..3.0, d1 in 1e-3f64..10.0, d2 in 1e-3f64..10.0) {
        let (a, b) = if d1 < d2 { (d1, d2) } else { (d2, d1) };
        prop_assume!(b - a > 1e-9);
        prop_assert!(weighted_edge_value(w, w, a).unwrap() < weighted_edge_value(w, w, b).unwrap());
    }

    #[test]
    fn zero_weights_halve_distance(d in 1e-6f64..1e6) {
        prop_assert_eq!(weighted_edge_value(0.0, 0.0, d).unwrap(), d / 2.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn builders_emit_valid_filtrations(rows in cloud_strategy(28), r in 0.5f64..8.0, eps in 0.05f64..0.95) {
        let opts = BuildOptions::default();
        let c = WeightedPointCloud::from_points(&rows, Metric::L2).unwrap();
        let rips = rips_2skeleton(&c, r, &opts).unwrap();
        assert_valid(&rips);
        let f: Vec<f64> = (0..rows.len()).map(|i| ((i * 7919) % 13) as f64).collect();
        assert_valid(&lower_star_filtration(rips.simplices(), &f).unwrap());
        let w = dtm_weights(&c, 3).unwrap();
        assert_valid(&dtm_rips_filtration(&w, f64::INFINITY, &opts).unwrap());
        assert_valid(&dtm_rips_filtration(&w, r, &opts).unwrap());
        assert_valid(&sparse_dtm_rips(&w, eps, &opts).unwrap().0);
        assert_valid(&sparse_dtm_rips_truncated(&w, eps, &opts).unwrap().0);
    }

    #[test]
    fn truncated_sparse_shrinks_with_epsilon(rows in cloud_strategy(28), e1 in 0.05f64..0.95, e2 in 0.05f64..0.95) {
        let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
        let opts = BuildOptions::default();
        let w = dtm_weights(&WeightedPointCloud::from_points(&rows, Metric::L2).unwrap(), 3).unwrap();
        let small: BTreeSet<_> = sparse_dtm_rips_truncated(&w, lo, &opts).unwrap().0.simplices().iter().copied().collect();
        let large: BTreeSet<_> = sparse_dtm_rips_truncated(&w, hi, &opts).unwrap().0.simplices().iter().copied().collect();
        prop_assert!(large.is_subset(&small));
    }

    #[test]
    fn sparse_filtration_ends_contractible(rows in cloud_strategy(28), eps in 0.05f64..0.95) {
        let w = dtm_weights(&WeightedPointCloud::from_points(&rows, Metric::L2).unwrap(), 3).unwrap();
        let (f, _) = sparse_dtm_rips(&w, eps, &BuildOptions::default()).unwrap();
        prop_assert_eq!(dmgraph::persistence::betti(&reduce(&f)), (1, 0));
    }

    #[test]
    fn datagen_is_deterministic(seed in any::<u64>(), n in 1usize..200) {
        let cfg = GeneratorConfig { seed, n_points: n, ..Default::default() };
        prop_assert_eq!(datagen::gen_circle(&cfg).unwrap(), datagen::gen_circle(&cfg).unwrap());
        prop_assert_eq!(datagen::gen_two_circles(&cfg).unwrap(), datagen::gen_two_circles(&cfg).unwrap());
    }
}

#[test]
fn twist_matches_plain_reduction() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..300 {
        let (f, _) = random_instance(&mut rng, 10);
        let a = reduce(&f);
        let b = reduce_plain(&f);
        assert_eq!(a.pairs(), b.pairs());
        assert_eq!(a.unpaired(), b.unpaired());
    }
}

#[test]
fn lex_order_is_total() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0;
    while checked < 200 {
        let (f, _) = random_instance(&mut rng, 8);
        let d = reduce(&f);
        // all persistent cycles of all creators form the pool
        let mut pool: Vec<CycleSet> = Vec::new();
        for r in d.creators(1) {
            pool.extend(persistent_cycles(&f, r).unwrap());
        }
        if pool.len() < 3 {
            continue;
        }
        checked += 1;
        for a in &pool {
            for b in &pool {
                let ab = lex_compare(a, b, &f).unwrap();
                assert_eq!(ab, lex_compare(b, a, &f).unwrap().reverse());
                assert_eq!(ab == Ordering::Equal, a == b);
            }
        }
        for a in pool.iter().take(6) {
            for b in pool.iter().take(6) {
                for c in pool.iter().take(6) {
                    if lex_compare(a, b, &f).unwrap() == Ordering::Less
                        && lex_compare(b, c, &f).unwrap() == Ordering::Less
                    {
                        assert_eq!(lex_compare(a, c, &f).unwrap(), Ordering::Less);
                    }
                }
            }
        }
    }
}

#[test]
fn persistent_cycles_contain_creator() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..200 {
        let (f, _) = random_instance(&mut rng, 10);
        let d = reduce(&f);
        for r in d.records().iter().filter(|r| r.dim() == 1 && r.role == Role::Positive) {
            let cycles = persistent_cycles(&f, r).unwrap();
            assert!(!cycles.is_empty());
            assert!(cycles.iter().all(|c| c.contains(&r.simplex)));
        }
    }
}
