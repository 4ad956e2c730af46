//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails.

#[path = "../common/mod.rs"]
mod common;
mod props;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use common::*;
use graph_rerank::corpus_io::{load_rank_table, synth_generate, SynthSpec};
use graph_rerank::eval::{average_precision, evaluate, ns_score, Metric};
use graph_rerank::features::build_rank_table;
use graph_rerank::ranking::Provenance;
use graph_rerank::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12
}

fn neighborhood_weights() -> Outcome {
    let t = load_rank_table(fixture("weights.ranks")).map_err(|e| e.to_string())?;
    let w = |k: usize, j: u32, jaccard: bool| -> Result<f64, String> {
        let v = KnnView::new(&t, k, SelfMatch::Included).map_err(|e| e.to_string())?;
        let r = if jaccard {
            v.jaccard_weight(id(1), id(j), 1.0)
        } else {
            v.rank_weight(id(1), id(j), 1.0)
        };
        r.map_err(|e| e.to_string())
    };
    let expected = [
        ("jaccard k=3 w(1,2)", w(3, 2, true)?, 1.0),
        ("jaccard k=3 w(1,3)", w(3, 3, true)?, 0.0),
        ("jaccard k=5 w(1,2)", w(5, 2, true)?, 2.0 / 3.0),
        ("jaccard k=5 w(1,3)", w(5, 3, true)?, 1.0),
        ("rank k=3 w(1,2)", w(3, 2, false)?, 0.25),
        ("rank k=5 w(1,2)", w(5, 2, false)?, 0.25),
        ("rank k=5 w(1,3)", w(5, 3, false)?, 0.125),
    ];
    for (name, got, want) in expected {
        ensure(close(got, want), || format!("{name} = {got}, expected {want}"))?;
    }
    Ok("7 weights exact to 1e-12".into())
}

fn graph_structure() -> Outcome {
    let t = load_rank_table(fixture("reach.ranks")).map_err(|e| e.to_string())?;
    let params = GraphParams {
        k: 5,
        ..GraphParams::default()
    };
    let und = build_undirected_graph(&t, id(1), &params).map_err(|e| e.to_string())?;
    let dir = build_directed_graph(&t, id(1), &params).map_err(|e| e.to_string())?;
    let und_nodes: Vec<_> = und.nodes().iter().copied().collect();
    ensure(und_nodes == ids(&[1, 2]), || format!("undirected nodes {und_nodes:?}"))?;
    ensure(und.weight(id(1), id(2)) > 0.0, || "undirected 1-2 not connected".into())?;
    ensure(dir.contains_node(id(3)), || "directed graph lacks node 3".into())?;
    ensure(dir.weight(id(2), id(3)) > 0.0, || "directed graph lacks edge 2->3".into())?;
    ensure(dir.weight(id(1), id(3)) == 0.0, || "unexpected direct edge 1->3".into())?;
    Ok(format!(
        "undirected {{1,2}}; directed reaches 3 via 2->3 ({} nodes)",
        dir.node_count()
    ))
}

fn greedy_oracle() -> Outcome {
    let mut total = 0;
    for directed in [true, false] {
        let mut runner = TestRunner::new_with_rng(
            Config {
                cases: 1000,
                failure_persistence: None,
                ..Config::default()
            },
            TestRng::deterministic_rng(RngAlgorithm::ChaCha),
        );
        let strat = (arb_distinct_graph(12, directed), 0usize..=11);
        runner
            .run(&strat, |((n, edges, initial), len)| {
                let target = len.min(n - 1);
                let g = to_image_graph(directed, n, &edges);
                let init: Vec<ImageId> = initial.iter().map(|&i| ImageId(i as u32)).collect();
                let got = greedy_rank(&g, &init, target, ScoreMode::Max).unwrap();
                let want = ref_greedy(0, directed, &edges, &initial, target);
                let got: Vec<usize> = got.order.iter().map(|x| x.index()).collect();
                proptest::prop_assert_eq!(got, want);
                Ok(())
            })
            .map_err(|e| format!("directed={directed}: {e}"))?;
        total += 1000;
    }
    Ok(format!("{total} random graphs (<=12 nodes) match the step simulator"))
}

fn metric_oracles() -> Outcome {
    for &(q, rel, list, num, den) in AP_CASES {
        let ranked = RankedList {
            query: id(q),
            order: ids(list),
            provenance: Provenance::Initial,
        };
        let relevant: BTreeSet<ImageId> = ids(rel).into_iter().collect();
        let got = average_precision(&ranked, &relevant).map_err(|e| e.to_string())?;
        let want = num as f64 / den as f64;
        ensure(close(got, want), || format!("AP {rel:?} in {list:?} = {got}, expected {num}/{den}"))?;
    }
    let mut checks = 0usize;
    for q in 0..6u32 {
        let others: Vec<u32> = (0..6).filter(|&x| x != q).collect();
        let perms = permutations(&others);
        for mask in 0u32..64 {
            let relevant: BTreeSet<ImageId> = (0..6).filter(|b| mask >> b & 1 == 1).map(id).collect();
            for perm in &perms {
                let ranked = RankedList {
                    query: id(q),
                    order: ids(perm),
                    provenance: Provenance::Initial,
                };
                let want = (mask >> q & 1) as usize
                    + perm.iter().take(3).filter(|&&x| mask >> x & 1 == 1).count();
                ensure(ns_score(&ranked, &relevant) == want as f64, || {
                    format!("N-S q={q} mask={mask:06b} perm={perm:?}")
                })?;
                checks += 1;
            }
        }
    }
    Ok(format!("{} AP cases; {checks} exhaustive N-S checks", AP_CASES.len()))
}

const SEEDS: std::ops::Range<u64> = 0..5;

fn synth_tables(seed: u64) -> Result<Vec<RankTable>, String> {
    let corpus = synth_generate(&SynthSpec {
        seed,
        ..SynthSpec::default()
    })
    .map_err(|e| e.to_string())?;
    corpus.spaces.iter().map(|f| build_rank_table(f).map_err(|e| e.to_string())).collect()
}

fn synth_truth(seed: u64) -> Result<GroundTruth, String> {
    synth_generate(&SynthSpec {
        seed,
        ..SynthSpec::default()
    })
    .map(|c| c.ground_truth)
    .map_err(|e| e.to_string())
}

fn fusion_improves() -> Outcome {
    let config = RerankConfig::default();
    let mut lines = Vec::new();
    for seed in SEEDS {
        let tables = synth_tables(seed)?;
        let truth = synth_truth(seed)?;
        let a = FeatureSource::new("a", &tables[0]);
        let b = FeatureSource::new("b", &tables[1]);
        let run = |s: &[FeatureSource]| evaluate(s, &truth, &config, Metric::NsScore).map_err(|e| e.to_string());
        let ea = run(&[a])?;
        let eb = run(&[b])?;
        let fused = run(&[a, b])?.reranked.aggregate;
        let (base_a, single_a) = (ea.baseline.aggregate, ea.reranked.aggregate);
        let (base_b, single_b) = (eb.baseline.aggregate, eb.reranked.aggregate);
        let summary = format!(
            "seed {seed}: base {base_a:.3}/{base_b:.3} single {single_a:.3}/{single_b:.3} fused {fused:.3}"
        );
        ensure(fused >= single_a && fused >= single_b, || format!("{summary}: fused below a single feature"))?;
        ensure(single_a >= base_a && single_b >= base_b, || format!("{summary}: single rerank below baseline"))?;
        lines.push(summary);
    }
    Ok(lines.join("; "))
}

fn robust_to_k() -> Outcome {
    let mut lines = Vec::new();
    for seed in SEEDS {
        let tables = synth_tables(seed)?;
        let truth = synth_truth(seed)?;
        let sources = [FeatureSource::new("a", &tables[0]), FeatureSource::new("b", &tables[1])];
        let mean = |method: Method, k: usize| -> Result<f64, String> {
            let config = RerankConfig {
                method,
                ..RerankConfig::default()
            }
            .with_k(k);
            evaluate(&sources, &truth, &config, Metric::NsScore)
                .map(|e| e.reranked.aggregate)
                .map_err(|e| e.to_string())
        };
        let (d10, d60) = (mean(Method::Directed, 10)?, mean(Method::Directed, 60)?);
        let (u10, u60) = (mean(Method::Undirected, 10)?, mean(Method::Undirected, 60)?);
        let d_change = (d60 - d10).abs() / d10;
        let d_drop = (d10 - d60) / d10;
        let u_drop = (u10 - u60) / u10;
        let summary = format!(
            "seed {seed}: directed {d10:.3}->{d60:.3} ({:+.1}%), undirected {u10:.3}->{u60:.3} ({:+.1}%)",
            -100.0 * d_drop,
            -100.0 * u_drop
        );
        ensure(d_change <= 0.05, || format!("{summary}: directed moved more than 5%"))?;
        ensure(u_drop > d_drop, || format!("{summary}: undirected did not degrade more"))?;
        lines.push(summary);
    }
    Ok(lines.join("; "))
}

fn storage_accounting() -> Outcome {
    let mut lines = Vec::new();
    // 50 and 200 images
    for (n_groups, group_size) in [(25, 2), (50, 4)] {
        let spec = SynthSpec {
            n_groups,
            group_size,
            ..SynthSpec::default()
        };
        let n = spec.corpus_size();
        let corpus = synth_generate(&spec).map_err(|e| e.to_string())?;
        let table = build_rank_table(&corpus.spaces[0]).map_err(|e| e.to_string())?;
        for k in [5usize, 10] {
            let truncated = table.truncate(k).map_err(|e| e.to_string())?;
            ensure(truncated.stored_ids() == n * k, || {
                format!("n={n} k={k}: {} ids stored", truncated.stored_ids())
            })?;
            for owner in table.ids() {
                ensure(truncated.neighbors(owner) == &table.list(owner)[..k], || {
                    format!("n={n} k={k}: neighbors of {owner} differ from list prefix")
                })?;
            }
            lines.push(format!("n={n} k={k}: {} ids", n * k));
        }
    }
    Ok(lines.join("; "))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("neighborhood weights on the committed fixture", neighborhood_weights),
        ("undirected vs directed graph structure", graph_structure),
        ("greedy ranking vs reference simulation", greedy_oracle),
        ("metric oracles", metric_oracles),
        ("fusion improves over single features", fusion_improves),
        ("directed method robust to large k", robust_to_k),
        ("invariant property suites", props::run_all),
        ("truncated k-NN storage is n*k ids", storage_accounting),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} PASS  {name} [{secs:.1}s] {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} FAIL  {name} [{secs:.1}s] {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}
