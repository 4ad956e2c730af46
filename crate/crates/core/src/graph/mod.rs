//! Per-query image graphs built from a rank table.
//!
//! Two constructions are provided. The directed graph links every node to its
//! top-`k` neighbors and weighs each edge by the inverse sum of the two mutual
//! ranks. The undirected graph keeps only reciprocal neighbor pairs and weighs
//! them by the Jaccard overlap of their neighborhoods; it serves as the
//! comparison baseline. Both discount edges by `alpha0` raised to the larger
//! hop distance of the endpoints from the query.

mod bfs;
mod knn;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::corpus_io::{ImageId, RankTable};
use crate::error::{Error, Result};

pub use bfs::{bfs_depths, decay};
use bfs::dense_depths;
pub use knn::{KnnView, SelfMatch};

pub const DEFAULT_K: usize = 10;
pub const DEFAULT_ALPHA0: f64 = 0.8;
pub const DEFAULT_DEPTH: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphParams {
    /// Neighborhood size.
    pub k: usize,
    /// Decay base in `(0, 1]`.
    pub alpha0: f64,
    /// Hops explored from the query when collecting nodes.
    pub depth: usize,
    /// Cap on node count, filled in breadth-first order.
    pub max_nodes: Option<usize>,
    pub self_match: SelfMatch,
}

impl Default for GraphParams {
    fn default() -> Self {
        Self {
            k: DEFAULT_K,
            alpha0: DEFAULT_ALPHA0,
            depth: DEFAULT_DEPTH,
            max_nodes: None,
            self_match: SelfMatch::default(),
        }
    }
}

impl GraphParams {
    pub fn with_k(self, k: usize) -> Self {
        Self { k, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha0 > 0.0 && self.alpha0 <= 1.0) {
            return Err(Error::param(format!("alpha0 = {} outside (0, 1]", self.alpha0)));
        }
        if self.depth == 0 {
            return Err(Error::param("depth must be at least 1"));
        }
        if self.max_nodes == Some(0) {
            return Err(Error::param("max_nodes must be at least 1"));
        }
        Ok(())
    }

    pub fn view<'a>(&self, table: &'a RankTable) -> Result<KnnView<'a>> {
        self.validate()?;
        KnnView::new(table, self.k, self.self_match)
    }
}

/// A weighted graph around one query. Undirected edges are keyed `(min, max)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGraph {
    query: ImageId,
    directed: bool,
    nodes: BTreeSet<ImageId>,
    /// Sorted by `(src, dst)`, keys unique, weights positive.
    edges: Vec<(ImageId, ImageId, f64)>,
}

impl ImageGraph {
    /// A graph holding only the query.
    pub fn empty(query: ImageId, directed: bool) -> Self {
        Self {
            query,
            directed,
            nodes: BTreeSet::from([query]),
            edges: Vec::new(),
        }
    }

    /// Assembles a graph from explicit parts. Endpoints are added to the node
    /// set; zero-weight edges are dropped; undirected edges are canonicalized.
    pub fn from_parts<N, E>(query: ImageId, directed: bool, nodes: N, edges: E) -> Result<Self>
    where
        N: IntoIterator<Item = ImageId>,
        E: IntoIterator<Item = (ImageId, ImageId, f64)>,
    {
        let mut graph = Self::empty(query, directed);
        graph.nodes.extend(nodes);
        for (a, b, w) in edges {
            if a == b {
                return Err(Error::param(format!("self-loop on {a}")));
            }
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::param(format!("edge {a}-{b} has weight {w}")));
            }
            graph.nodes.insert(a);
            graph.nodes.insert(b);
            if w > 0.0 {
                let (a, b) = graph.key(a, b);
                graph.edges.push((a, b, w));
            }
        }
        graph.edges.sort_unstable_by_key(|&(a, b, _)| (a, b));
        if let Some(dup) = graph.edges.windows(2).find(|p| (p[0].0, p[0].1) == (p[1].0, p[1].1)) {
            return Err(Error::param(format!("edge {}-{} given twice", dup[0].0, dup[0].1)));
        }
        Ok(graph)
    }

    fn key(&self, a: ImageId, b: ImageId) -> (ImageId, ImageId) {
        if self.directed || a <= b {
            (a, b)
        } else {
            (b, a)
        }
    }

    /// Bulk construction from canonical keys. Weights of repeated keys are
    /// summed; zero weights are dropped.
    pub(crate) fn assemble(
        query: ImageId,
        directed: bool,
        nodes: impl IntoIterator<Item = ImageId>,
        mut edges: Vec<(ImageId, ImageId, f64)>,
    ) -> Self {
        edges.retain(|&(_, _, w)| w > 0.0);
        edges.sort_by_key(|&(a, b, _)| (a, b));
        let mut merged: Vec<(ImageId, ImageId, f64)> = Vec::with_capacity(edges.len());
        for (a, b, w) in edges {
            match merged.last_mut() {
                Some(last) if (last.0, last.1) == (a, b) => last.2 += w,
                _ => merged.push((a, b, w)),
            }
        }
        let mut nodes: BTreeSet<ImageId> = nodes.into_iter().collect();
        nodes.insert(query);
        Self {
            query,
            directed,
            nodes,
            edges: merged,
        }
    }

    pub fn query(&self) -> ImageId {
        self.query
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn nodes(&self) -> &BTreeSet<ImageId> {
        &self.nodes
    }

    pub fn contains_node(&self, id: ImageId) -> bool {
        self.nodes.contains(&id)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Stored edges in key order.
    pub fn edges(&self) -> impl ExactSizeIterator<Item = (ImageId, ImageId, f64)> + '_ {
        self.edges.iter().copied()
    }

    /// Weight of `a → b` (orientation-free when undirected); 0 if absent.
    pub fn weight(&self, a: ImageId, b: ImageId) -> f64 {
        let key = self.key(a, b);
        self.edges
            .binary_search_by_key(&key, |&(a, b, _)| (a, b))
            .map_or(0.0, |i| self.edges[i].2)
    }

    /// Outgoing edges per node; undirected edges appear in both directions.
    pub fn out_edges(&self) -> BTreeMap<ImageId, Vec<(ImageId, f64)>> {
        let mut out: BTreeMap<ImageId, Vec<(ImageId, f64)>> = BTreeMap::new();
        for (a, b, w) in self.edges() {
            out.entry(a).or_default().push((b, w));
            if !self.directed {
                out.entry(b).or_default().push((a, w));
            }
        }
        out
    }

    /// Multiplies every edge weight by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut g = self.clone();
        for e in &mut g.edges {
            e.2 *= factor;
        }
        g
    }

    pub(crate) fn header(&self) -> String {
        format!("query {} directed {}", self.query, u8::from(self.directed))
    }

    pub(crate) fn write_edges(&self, out: &mut String) {
        for (a, b, w) in self.edges() {
            let _ = writeln!(out, "{a} {b} {w}");
        }
    }

    /// Edge-list export: a `query <id> directed <0|1>` header, then `<src> <dst> <weight>` lines.
    pub fn to_edge_list(&self) -> String {
        let mut out = self.header();
        out.push('\n');
        self.write_edges(&mut out);
        out
    }
}

/// Breadth-first node discovery from `query` up to `depth` hops along
/// `successors`, stopping once `max_nodes` nodes are collected. Returns the
/// nodes in discovery order plus a dense membership mask.
fn discover<F>(n: usize, query: ImageId, params: &GraphParams, mut successors: F) -> (Vec<ImageId>, Vec<bool>)
where
    F: FnMut(ImageId, &mut Vec<ImageId>),
{
    let cap = params.max_nodes.unwrap_or(usize::MAX);
    let mut member = vec![false; n];
    member[query.index()] = true;
    let mut order = vec![query];
    let mut head = 0;
    let mut level = vec![0usize];
    let mut buf = Vec::new();
    while head < order.len() {
        let (u, d) = (order[head], level[head]);
        head += 1;
        if d == params.depth {
            continue;
        }
        buf.clear();
        successors(u, &mut buf);
        for &v in &buf {
            if order.len() >= cap {
                return (order, member);
            }
            if !member[v.index()] {
                member[v.index()] = true;
                order.push(v);
                level.push(d + 1);
            }
        }
    }
    (order, member)
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

/// Directed graph with reciprocal-rank edge weights.
pub fn build_directed_graph(
    table: &RankTable,
    query: ImageId,
    params: &GraphParams,
) -> Result<ImageGraph> {
    check_query(table, query)?;
    let view = params.view(table)?;
    let n = table.len();
    let (nodes, member) = discover(n, query, params, |u, out| out.extend_from_slice(view.others(u)));
    let induced = |u: ImageId, out: &mut Vec<ImageId>| {
        out.extend(view.others(u).iter().copied().filter(|v| member[v.index()]));
    };
    let depths = dense_depths(n, query, induced);

    let mut edges = Vec::new();
    let mut buf = Vec::new();
    for &u in &nodes {
        buf.clear();
        induced(u, &mut buf);
        for &v in &buf {
            let alpha = decay(params.alpha0, depths[u.index()], depths[v.index()]);
            edges.push((u, v, alpha / view.rank_sum(u, v) as f64));
        }
    }
    Ok(ImageGraph::assemble(query, true, nodes, edges))
}

/// Undirected reciprocal-neighbor graph with Jaccard edge weights.
///
/// Nodes are collected breadth-first along reciprocal pairs only, so every
/// node is connected to the query.
pub fn build_undirected_graph(
    table: &RankTable,
    query: ImageId,
    params: &GraphParams,
) -> Result<ImageGraph> {
    check_query(table, query)?;
    let view = params.view(table)?;
    let n = table.len();
    let mutual = |u: ImageId, out: &mut Vec<ImageId>| {
        out.extend(view.others(u).iter().copied().filter(|&v| view.contains(v, u)));
    };
    let (nodes, member) = discover(n, query, params, mutual);
    let induced = |u: ImageId, out: &mut Vec<ImageId>| {
        mutual(u, out);
        out.retain(|v| member[v.index()]);
    };
    let depths = dense_depths(n, query, induced);

    let mut edges = Vec::new();
    let mut buf = Vec::new();
    for &u in &nodes {
        buf.clear();
        induced(u, &mut buf);
        for &v in buf.iter().filter(|&&v| u < v) {
            let alpha = decay(params.alpha0, depths[u.index()], depths[v.index()]);
            edges.push((u, v, alpha * view.jaccard(u, v)));
        }
    }
    Ok(ImageGraph::assemble(query, false, nodes, edges))
}
