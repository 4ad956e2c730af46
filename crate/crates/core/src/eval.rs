//! Retrieval metrics and experiment drivers.
//!
//! Average precision follows the Holidays protocol: the query is dropped
//! from both its ranked list and its relevant set. The N-S score follows
//! the UKBench protocol: the query counts as its own first result, so the
//! score is the number of relevant images among the query plus the top
//! three of the list.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use rayon::prelude::*;

use crate::corpus_io::{GroundTruth, ImageId};
use crate::error::{Error, Result};
use crate::ranking::{corpus_size, rerank, FeatureSource, RankedList, RerankConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    /// Mean average precision.
    Map,
    /// Mean N-S score.
    NsScore,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Map => "map",
            Metric::NsScore => "ns",
        })
    }
}

/// Average precision of `ranked` against `relevant`, ignoring the query.
pub fn average_precision(ranked: &RankedList, relevant: &BTreeSet<ImageId>) -> Result<f64> {
    let total = relevant.iter().filter(|&&r| r != ranked.query).count();
    if total == 0 {
        return Err(Error::EmptyRelevant {
            query: ranked.query,
        });
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (p, id) in ranked.order.iter().filter(|&&id| id != ranked.query).enumerate() {
        if relevant.contains(id) {
            hits += 1;
            sum += hits as f64 / (p + 1) as f64;
        }
    }
    Ok(sum / total as f64)
}

/// Number of relevant images among the query and the first three results.
pub fn ns_score(ranked: &RankedList, relevant: &BTreeSet<ImageId>) -> f64 {
    let head = std::iter::once(&ranked.query).chain(ranked.order.iter().take(3));
    head.filter(|id| relevant.contains(id)).count() as f64
}

fn score(metric: Metric, ranked: &RankedList, relevant: &BTreeSet<ImageId>) -> Result<f64> {
    match metric {
        Metric::Map => average_precision(ranked, relevant),
        Metric::NsScore => Ok(ns_score(ranked, relevant)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub metric: Metric,
    pub method: String,
    pub k: usize,
    pub alpha0: f64,
    pub depth: usize,
    /// Per-query values in ascending query order.
    pub per_query: Vec<(ImageId, f64)>,
    /// Arithmetic mean of `per_query`.
    pub aggregate: f64,
}

impl MetricReport {
    fn new(metric: Metric, method: String, config: &RerankConfig, per_query: Vec<(ImageId, f64)>) -> Self {
        let aggregate = per_query.iter().map(|(_, v)| v).sum::<f64>() / per_query.len() as f64;
        Self {
            metric,
            method,
            k: config.graph.k,
            alpha0: config.graph.alpha0,
            depth: config.graph.depth,
            per_query,
            aggregate,
        }
    }
}

/// Baseline and reranked reports for one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    /// The first source's own retrieval lists, unchanged.
    pub baseline: MetricReport,
    pub reranked: MetricReport,
}

fn method_label(sources: &[FeatureSource<'_>], config: &RerankConfig) -> String {
    let labels: Vec<_> = sources.iter().map(|s| s.label).collect();
    format!("{}:{}", config.method, labels.join("+"))
}

/// Scores the initial lists of `sources[0]` and the reranked lists for
/// every ground-truth query.
pub fn evaluate(
    sources: &[FeatureSource<'_>],
    truth: &GroundTruth,
    config: &RerankConfig,
    metric: Metric,
) -> Result<Evaluation> {
    let n = corpus_size(sources)?;
    let queries: Vec<ImageId> = truth.queries().collect();
    if queries.is_empty() {
        return Err(Error::param("ground truth lists no queries"));
    }
    let target_len = config.target_len.unwrap_or(n - 1);
    let rows = queries
        .par_iter()
        .map(|&q| {
            let relevant = truth.relevant(q).expect("query taken from ground truth");
            let initial = RankedList::initial(sources[0].table, q, target_len)?;
            let reranked = rerank(sources, q, config)?;
            Ok(((q, score(metric, &initial, relevant)?), (q, score(metric, &reranked, relevant)?)))
        })
        .collect::<Result<Vec<_>>>()?;
    let (baseline, reranked): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    Ok(Evaluation {
        baseline: MetricReport::new(metric, format!("baseline:{}", sources[0].label), config, baseline),
        reranked: MetricReport::new(metric, method_label(sources, config), config, reranked),
    })
}

/// Reranked report for every `k` in `k_values`, in the given order.
pub fn sweep_k(
    sources: &[FeatureSource<'_>],
    truth: &GroundTruth,
    config: &RerankConfig,
    k_values: &[usize],
    metric: Metric,
) -> Result<Vec<MetricReport>> {
    let n = corpus_size(sources)?;
    if let Some(&bad) = k_values.iter().find(|&&k| k == 0 || k >= n) {
        return Err(Error::param(format!("k = {bad} outside [1, {}]", n.saturating_sub(1))));
    }
    k_values
        .iter()
        .map(|&k| evaluate(sources, truth, &config.with_k(k), metric).map(|e| e.reranked))
        .collect()
}

pub const REPORT_HEADER: &str = "metric\tmethod\tk\talpha0\tdepth\tvalue";

/// One TSV row per report under [`REPORT_HEADER`].
pub fn reports_to_tsv<'a>(reports: impl IntoIterator<Item = &'a MetricReport>) -> String {
    let mut out = format!("{REPORT_HEADER}\n");
    for r in reports {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            r.metric, r.method, r.k, r.alpha0, r.depth, r.aggregate
        );
    }
    out
}

/// Per-query values: `metric  method  k  query  value`.
pub fn per_query_tsv<'a>(reports: impl IntoIterator<Item = &'a MetricReport>) -> String {
    let mut out = String::from("metric\tmethod\tk\tquery\tvalue\n");
    for r in reports {
        for (q, v) in &r.per_query {
            let _ = writeln!(out, "{}\t{}\t{}\t{q}\t{v}", r.metric, r.method, r.k);
        }
    }
    out
}
