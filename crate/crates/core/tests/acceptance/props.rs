//! Invariant suites, each run for a fixed number of deterministic random cases.

use std::collections::{BTreeMap, BTreeSet};

use graph_rerank::corpus_io::{
    load_ground_truth, load_name_map, load_rank_table, save_ground_truth, save_name_map, save_rank_table,
    NameMap,
};
use graph_rerank::features::{
    build_rank_table, hsv_histogram, load_feature_matrix, normalize_histogram_with, save_feature_matrix, RawImage,
};
use graph_rerank::*;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

use crate::common::*;

const CASES: u32 = 128;

fn run<S>(name: &str, strat: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String>
where
    S: Strategy,
    S::Value: std::fmt::Debug,
{
    let mut runner = TestRunner::new_with_rng(
        Config {
            cases: CASES,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    );
    runner.run(&strat, test).map_err(|e| format!("{name}: {e}"))
}

fn self_match() -> impl Strategy<Value = SelfMatch> {
    prop_oneof![Just(SelfMatch::Included), Just(SelfMatch::Excluded)]
}

/// Table plus a self-match convention and two distinct ids.
fn table_pair() -> impl Strategy<Value = (RankTable, SelfMatch, usize, usize)> {
    (arb_table(3, 14), self_match()).prop_flat_map(|(t, sm)| {
        let n = t.len();
        (Just(t), Just(sm), 0..n, 1..n).prop_map(move |(t, sm, i, off)| (t, sm, i, (i + off) % n))
    })
}

fn k_stability() -> Result<(), String> {
    run("k-stability", table_pair(), |(t, sm, i, j)| {
        let max_k = KnnView::max_k(t.len(), sm);
        let (a, b) = (ImageId(i as u32), ImageId(j as u32));
        let exact = 1.0 / (ref_rank(&t, i, j, sm) + ref_rank(&t, j, i, sm)) as f64;
        for k in 1..=max_k {
            let v = KnnView::new(&t, k, sm).unwrap();
            let w = v.rank_weight(a, b, 1.0).unwrap();
            if v.contains(a, b) {
                // once j enters N_k(i) the weight no longer depends on k
                prop_assert_eq!(w, exact);
            } else {
                prop_assert_eq!(w, 0.0);
            }
        }
        Ok(())
    })
}

fn jaccard_symmetry() -> Result<(), String> {
    let strat = table_pair().prop_flat_map(|(t, sm, i, j)| {
        let max_k = KnnView::max_k(t.len(), sm);
        (Just((t, sm, i, j)), 1..=max_k, 0.0..=1.0f64)
    });
    run("jaccard symmetry", strat, |((t, sm, i, j), k, d)| {
        let v = KnnView::new(&t, k, sm).unwrap();
        let (a, b) = (ImageId(i as u32), ImageId(j as u32));
        let ab = v.jaccard_weight(a, b, d).unwrap();
        prop_assert_eq!(ab, v.jaccard_weight(b, a, d).unwrap());
        let mutual = v.contains(a, b) && v.contains(b, a);
        let want = if mutual { d * ref_jaccard(&t, i, j, k, sm) } else { 0.0 };
        prop_assert!((ab - want).abs() <= 1e-12);
        Ok(())
    })
}

/// Random graph for query 0 over ids below 10; duplicate keys are dropped.
fn arb_graph(directed: bool) -> impl Strategy<Value = ImageGraph> {
    (
        prop::collection::vec((0u32..10, 0u32..10, 0.01..1.0f64), 0..25),
        prop::collection::vec(0u32..10, 0..4),
    )
        .prop_map(move |(raw, extra)| {
            let mut seen = BTreeSet::new();
            let edges: Vec<_> = raw
                .into_iter()
                .filter(|&(a, b, _)| a != b)
                .filter(|&(a, b, _)| seen.insert(if directed || a < b { (a, b) } else { (b, a) }))
                .map(|(a, b, w)| (id(a), id(b), w))
                .collect();
            ImageGraph::from_parts(id(0), directed, ids(&extra), edges).unwrap()
        })
}

fn graph_triple() -> impl Strategy<Value = (ImageGraph, ImageGraph, ImageGraph)> {
    any::<bool>().prop_flat_map(|d| (arb_graph(d), arb_graph(d), arb_graph(d)))
}

fn same_graph(x: &ImageGraph, y: &ImageGraph) -> Result<(), TestCaseError> {
    prop_assert_eq!(x.nodes(), y.nodes());
    prop_assert_eq!(x.edge_count(), y.edge_count());
    for ((a1, b1, w1), (a2, b2, w2)) in x.edges().zip(y.edges()) {
        prop_assert_eq!((a1, b1), (a2, b2));
        prop_assert!((w1 - w2).abs() <= 1e-12 * w1.max(1.0), "{} vs {}", w1, w2);
    }
    Ok(())
}

fn fuse_laws() -> Result<(), String> {
    run("fuse commutativity", graph_triple(), |(a, b, _)| {
        let ab = fuse(&[("a", &a), ("b", &b)]).unwrap();
        let ba = fuse(&[("b", &b), ("a", &a)]).unwrap();
        prop_assert_eq!(ab.graph(), ba.graph());
        Ok(())
    })?;
    run("fuse associativity", graph_triple(), |(a, b, c)| {
        let ab = fuse(&[("a", &a), ("b", &b)]).unwrap();
        let bc = fuse(&[("b", &b), ("c", &c)]).unwrap();
        let left = fuse(&[("ab", &ab), ("c", &c)]).unwrap();
        let right = fuse(&[("a", &a), ("bc", &bc)]).unwrap();
        let flat = fuse(&[("a", &a), ("b", &b), ("c", &c)]).unwrap();
        same_graph(&left, &right)?;
        same_graph(&left, &flat)
    })?;
    run("fuse monotonicity", graph_triple(), |(a, b, c)| {
        let f = fuse(&[("a", &a), ("b", &b), ("c", &c)]).unwrap();
        prop_assert!(f.edge_count() <= a.edge_count() + b.edge_count() + c.edge_count());
        for g in [&a, &b, &c] {
            prop_assert!(g.nodes().is_subset(f.nodes()));
            for (x, y, w) in g.edges() {
                prop_assert!(f.weight(x, y) >= w);
            }
        }
        Ok(())
    })
}

fn scaling_invariance() -> Result<(), String> {
    let strat = (arb_table(3, 14), any::<bool>(), 0.01..100.0f64).prop_flat_map(|(t, d, c)| {
        let n = t.len();
        (Just(t), Just(d), Just(c), 0..n, 1..n)
    });
    run("greedy scaling invariance", strat, |(t, directed, c, q, k)| {
        let params = GraphParams::default().with_k(k);
        let build = if directed { build_directed_graph } else { build_undirected_graph };
        let g = build(&t, ImageId(q as u32), &params).unwrap();
        let init = t.list(ImageId(q as u32));
        let len = init.len();
        for mode in [ScoreMode::Max, ScoreMode::Sum] {
            let base = greedy_rank(&g, init, len, mode).unwrap();
            let scaled = greedy_rank(g.scaled(c), init, len, mode).unwrap();
            if mode == ScoreMode::Max {
                prop_assert_eq!(&base.order, &scaled.order);
            }
            // powers of two scale exactly, so sums keep their order too
            let exact = greedy_rank(g.scaled(4.0), init, len, mode).unwrap();
            prop_assert_eq!(&base.order, &exact.order);
        }
        Ok(())
    })
}

fn permutation_validity() -> Result<(), String> {
    let strat = (2usize..=20, 1usize..=5).prop_flat_map(|(n, d)| {
        prop::collection::vec(prop::collection::vec((-4i32..=4).prop_map(f64::from), d), n)
    });
    run("rank-table permutation validity", strat, |rows| {
        let n = rows.len();
        let t = build_rank_table(&FeatureMatrix::new(rows.clone()).unwrap()).unwrap();
        let want = brute_force_ranks(&rows);
        for (i, expected) in want.iter().enumerate() {
            let list: Vec<usize> = t.list(ImageId(i as u32)).iter().map(|x| x.index()).collect();
            let mut sorted = list.clone();
            sorted.sort_unstable();
            let others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            prop_assert_eq!(sorted, others);
            prop_assert_eq!(&list, expected);
        }
        Ok(())
    })
}

fn histogram_mass() -> Result<(), String> {
    let strat = (1usize..=8, 1usize..=8, 1usize..=12).prop_flat_map(|(w, h, b)| {
        (
            Just((w, h, b)),
            prop::collection::vec(any::<[u8; 3]>(), w * h),
            0.1..=2.0f64,
        )
    });
    run("histogram mass conservation", strat, |((w, h, b), px, exponent)| {
        let img = RawImage::new(w, h, px).unwrap();
        let hist = hsv_histogram(&img, b);
        prop_assert_eq!(hist.len(), b * b * b);
        prop_assert!(hist.iter().all(|&c| c >= 0.0 && c.fract() == 0.0));
        prop_assert_eq!(hist.iter().sum::<f64>(), (w * h) as f64);
        let l1 = normalize_histogram_with(&hist, 1.0).unwrap();
        prop_assert!((l1.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        // after the power, the (1/exponent)-norm is still one
        let powered = normalize_histogram_with(&hist, exponent).unwrap();
        let mass: f64 = powered.iter().map(|v| v.powf(1.0 / exponent)).sum();
        prop_assert!((mass - 1.0).abs() <= 1e-9, "mass {}", mass);
        Ok(())
    })
}

fn round_trips() -> Result<(), String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("x");
    run("rank table round-trip", arb_table(2, 20), |t| {
        prop_assert_eq!(&RankTable::from_text(&t.to_text()).unwrap(), &t);
        save_rank_table(&t, &path).unwrap();
        prop_assert_eq!(&load_rank_table(&path).unwrap(), &t);
        Ok(())
    })?;
    let truth = (1usize..30).prop_flat_map(|n| {
        let set = prop::collection::btree_set((0..n as u32).prop_map(ImageId), 1..=n.min(5));
        (Just(n), prop::collection::btree_map((0..n as u32).prop_map(ImageId), set, 0..=n))
    });
    run("ground truth round-trip", truth, |(n, map): (usize, BTreeMap<_, _>)| {
        let g = GroundTruth::new(n, map).unwrap();
        prop_assert_eq!(&GroundTruth::from_text(&g.to_text(), n).unwrap(), &g);
        save_ground_truth(&g, &path).unwrap();
        prop_assert_eq!(&load_ground_truth(&path, n).unwrap(), &g);
        Ok(())
    })?;
    let rows = (1usize..10, 1usize..6).prop_flat_map(|(n, d)| {
        prop::collection::vec(prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::ZERO, d), n)
    });
    run("feature matrix round-trip", rows, |rows| {
        let m = FeatureMatrix::new(rows).unwrap();
        prop_assert_eq!(&FeatureMatrix::from_text(&m.to_text()).unwrap(), &m);
        save_feature_matrix(&m, &path).unwrap();
        prop_assert_eq!(&load_feature_matrix(&path).unwrap(), &m);
        Ok(())
    })?;
    let names = prop::collection::vec("[a-zA-Z0-9_./-][a-zA-Z0-9_. /-]{0,11}[a-zA-Z0-9_./-]", 0..10);
    run("name map round-trip", names, |names| {
        let m = NameMap::from_names(names.iter());
        prop_assert_eq!(&NameMap::from_text(&m.to_text()).unwrap(), &m);
        save_name_map(&m, &path).unwrap();
        prop_assert_eq!(&load_name_map(&path).unwrap(), &m);
        Ok(())
    })
}

pub fn run_all() -> Result<String, String> {
    k_stability()?;
    jaccard_symmetry()?;
    fuse_laws()?;
    scaling_invariance()?;
    permutation_validity()?;
    histogram_mass()?;
    round_trips()?;
    Ok(format!("12 properties x {CASES} cases"))
}
