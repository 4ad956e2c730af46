//! Greedy expansion ranking over a query graph.
//!
//! Starting from `S = {q}`, the candidate with the heaviest edge from `S`
//! joins `S` next; images are ranked by insertion order. When the graph runs
//! out of reachable candidates the list is completed from the query's
//! initial retrieval order.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::corpus_io::{ImageId, RankTable};
use crate::error::{Error, Result};
use crate::fusion::{fuse_scaled, FusionInput};
use crate::graph::{build_directed_graph, build_undirected_graph, GraphParams, ImageGraph, SelfMatch};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    Initial,
    RerankSingle,
    RerankFused,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Initial => "initial",
            Provenance::RerankSingle => "rerank-single",
            Provenance::RerankFused => "rerank-fused",
        })
    }
}

/// Output ordering for one query; the query itself never appears.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedList {
    pub query: ImageId,
    pub order: Vec<ImageId>,
    pub provenance: Provenance,
}

impl RankedList {
    /// The first `target_len` entries of the query's own retrieval list.
    pub fn initial(table: &RankTable, query: ImageId, target_len: usize) -> Result<Self> {
        check_query(table, query)?;
        let list = table.list(query);
        if target_len > list.len() {
            return Err(Error::param(format!(
                "target length {target_len} exceeds {}",
                list.len()
            )));
        }
        Ok(Self {
            query,
            order: list[..target_len].to_vec(),
            provenance: Provenance::Initial,
        })
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

/// How a candidate's score aggregates the edges reaching it from `S`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum ScoreMode {
    /// Heaviest single edge.
    #[default]
    Max,
    /// Total weight of all edges.
    Sum,
}

impl fmt::Display for ScoreMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScoreMode::Max => "max",
            ScoreMode::Sum => "sum",
        })
    }
}

/// Greedy expansion. `initial` is the query's full retrieval list; it breaks
/// score ties (earlier wins, then lower id) and pads the output when the
/// graph is exhausted before `target_len` images are placed.
pub fn greedy_rank<G: AsRef<ImageGraph>>(
    graph: G,
    initial: &[ImageId],
    target_len: usize,
    mode: ScoreMode,
) -> Result<RankedList> {
    let graph = graph.as_ref();
    let query = graph.query();
    if !graph.contains_node(query) {
        return Err(Error::QueryNotInGraph(query));
    }
    if initial.contains(&query) {
        return Err(Error::param(format!("initial list of {query} contains the query")));
    }
    if target_len > initial.len() {
        return Err(Error::param(format!(
            "target length {target_len} exceeds initial list length {}",
            initial.len()
        )));
    }

    // dense local indices over the graph's nodes
    let nodes: Vec<ImageId> = graph.nodes().iter().copied().collect();
    let local: HashMap<ImageId, usize> = nodes.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let initial_pos: HashMap<ImageId, usize> =
        initial.iter().enumerate().map(|(p, &id)| (id, p)).collect();
    let tie_pos: Vec<usize> = nodes
        .iter()
        .map(|id| initial_pos.get(id).copied().unwrap_or(usize::MAX))
        .collect();
    let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nodes.len()];
    for (a, b, w) in graph.edges() {
        let (a, b) = (local[&a], local[&b]);
        adjacency[a].push((b, w));
        if !graph.is_directed() {
            adjacency[b].push((a, w));
        }
    }

    let mut placed = vec![false; nodes.len()];
    // None: not yet a candidate
    let mut score: Vec<Option<f64>> = vec![None; nodes.len()];
    let mut candidates: Vec<usize> = Vec::new();
    let mut order = Vec::with_capacity(target_len);

    let relax = |u: usize, placed: &[bool], score: &mut [Option<f64>], candidates: &mut Vec<usize>| {
        for &(v, w) in &adjacency[u] {
            if placed[v] {
                continue;
            }
            score[v] = Some(match (score[v], mode) {
                (None, _) => {
                    candidates.push(v);
                    w
                }
                (Some(s), ScoreMode::Max) => s.max(w),
                (Some(s), ScoreMode::Sum) => s + w,
            });
        }
    };
    let q = local[&query];
    placed[q] = true;
    relax(q, &placed, &mut score, &mut candidates);

    while order.len() < target_len && !candidates.is_empty() {
        let (slot, &next) = candidates
            .iter()
            .enumerate()
            .max_by(|(_, &a), (_, &b)| {
                let (sa, sb) = (score[a].unwrap_or(0.0), score[b].unwrap_or(0.0));
                sa.total_cmp(&sb)
                    .then_with(|| tie_pos[b].cmp(&tie_pos[a]))
                    .then_with(|| nodes[b].cmp(&nodes[a]))
            })
            .expect("candidates is non-empty");
        candidates.swap_remove(slot);
        placed[next] = true;
        order.push(nodes[next]);
        relax(next, &placed, &mut score, &mut candidates);
    }
    let mut placed: BTreeSet<ImageId> = order.iter().copied().collect();
    placed.insert(query);

    for &id in initial {
        if order.len() == target_len {
            break;
        }
        if placed.insert(id) {
            order.push(id);
        }
    }

    Ok(RankedList {
        query,
        order,
        provenance: Provenance::RerankSingle,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum Method {
    /// Directed top-k graph with reciprocal-rank weights.
    #[default]
    Directed,
    /// Reciprocal-neighbor graph with Jaccard weights.
    Undirected,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Directed => "directed",
            Method::Undirected => "undirected",
        })
    }
}

/// Everything that shapes a rerank besides its inputs.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RerankConfig {
    pub graph: GraphParams,
    pub method: Method,
    pub score: ScoreMode,
    /// Output length; `None` means the full `n - 1`.
    pub target_len: Option<usize>,
}

impl RerankConfig {
    pub fn with_k(self, k: usize) -> Self {
        Self {
            graph: self.graph.with_k(k),
            ..self
        }
    }

    /// One-line `key=value` summary used in output headers.
    pub fn describe(&self) -> String {
        let self_match = match self.graph.self_match {
            SelfMatch::Included => "included",
            SelfMatch::Excluded => "excluded",
        };
        let max_nodes = self
            .graph
            .max_nodes
            .map_or_else(|| "none".to_string(), |m| m.to_string());
        format!(
            "method={} k={} alpha0={} depth={} max_nodes={} score={} self={}",
            self.method, self.graph.k, self.graph.alpha0, self.graph.depth, max_nodes, self.score, self_match
        )
    }
}

/// A rank table produced by one feature, with its fusion multiplier.
#[derive(Debug, Clone, Copy)]
pub struct FeatureSource<'a> {
    pub label: &'a str,
    pub table: &'a RankTable,
    pub scale: f64,
}

impl<'a> FeatureSource<'a> {
    pub fn new(label: &'a str, table: &'a RankTable) -> Self {
        Self {
            label,
            table,
            scale: 1.0,
        }
    }

    pub fn scaled(self, scale: f64) -> Self {
        Self { scale, ..self }
    }
}

/// Common corpus size of all sources.
pub fn corpus_size(sources: &[FeatureSource<'_>]) -> Result<usize> {
    let first = sources
        .first()
        .ok_or_else(|| Error::param("at least one rank table is required"))?;
    let n = first.table.len();
    for s in &sources[1..] {
        if s.table.len() != n {
            return Err(Error::CorpusSizeMismatch(n, s.table.len()));
        }
    }
    Ok(n)
}

fn check_query(table: &RankTable, query: ImageId) -> Result<()> {
    if query.index() >= table.len() {
        return Err(Error::IdOutOfRange {
            id: query.0 as u64,
            n: table.len(),
        });
    }
    Ok(())
}

/// Builds the query graph of every source, fuses them when there are several,
/// and ranks greedily. Ties and padding follow the first source's list.
pub fn rerank(sources: &[FeatureSource<'_>], query: ImageId, config: &RerankConfig) -> Result<RankedList> {
    let n = corpus_size(sources)?;
    check_query(sources[0].table, query)?;
    let target_len = config.target_len.unwrap_or(n - 1);
    let build = match config.method {
        Method::Directed => build_directed_graph,
        Method::Undirected => build_undirected_graph,
    };
    let graphs = sources
        .iter()
        .map(|s| build(s.table, query, &config.graph))
        .collect::<Result<Vec<_>>>()?;
    let initial = sources[0].table.list(query);

    if let [single] = &graphs[..] {
        let graph = if sources[0].scale == 1.0 {
            single.clone()
        } else {
            single.scaled(sources[0].scale)
        };
        return greedy_rank(&graph, initial, target_len, config.score);
    }
    let inputs: Vec<_> = sources
        .iter()
        .zip(&graphs)
        .map(|(s, g)| FusionInput::new(s.label, g).scaled(s.scale))
        .collect();
    let fused = fuse_scaled(&inputs)?;
    let mut ranked = greedy_rank(&fused, initial, target_len, config.score)?;
    ranked.provenance = Provenance::RerankFused;
    Ok(ranked)
}

/// Ranked-list output: a `# ...` header line, then `<query>: <id> ...` per list.
pub fn format_ranked_lists(header: &str, lists: &[RankedList]) -> String {
    let mut out = format!("# {header}\n");
    for list in lists {
        out.push_str(&list.query.to_string());
        out.push(':');
        for id in &list.order {
            out.push(' ');
            out.push_str(&id.to_string());
        }
        out.push('\n');
    }
    out
}
