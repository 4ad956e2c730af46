//! Baseline vs single-feature vs fused reranking on a synthetic corpus.
//!
//! cargo run --release -p graph-rerank --example fusion_demo -- [seed]

use graph_rerank::corpus_io::{synth_generate, SynthSpec};
use graph_rerank::eval::{evaluate, Metric};
use graph_rerank::features::build_rank_table;
use graph_rerank::{FeatureSource, Method, RerankConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(0);
    let corpus = synth_generate(&SynthSpec { seed, ..SynthSpec::default() })?;
    let a = build_rank_table(&corpus.spaces[0])?;
    let b = build_rank_table(&corpus.spaces[1])?;
    let truth = &corpus.ground_truth;

    for method in [Method::Directed, Method::Undirected] {
        for k in [10, 60] {
            let config = RerankConfig { method, ..RerankConfig::default() }.with_k(k);
            let single = evaluate(&[FeatureSource::new("a", &a)], truth, &config, Metric::NsScore)?;
            let fused = evaluate(
                &[FeatureSource::new("a", &a), FeatureSource::new("b", &b)],
                truth,
                &config,
                Metric::NsScore,
            )?;
            println!(
                "{method:>10} k={k:<3} baseline {:.3}  single {:.3}  fused {:.3}",
                single.baseline.aggregate, single.reranked.aggregate, fused.reranked.aggregate
            );
        }
    }
    Ok(())
}
