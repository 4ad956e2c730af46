//! Rank-level feature fusion: union of per-feature graphs with summed weights.

use std::ops::Deref;

use crate::graph::ImageGraph;
use crate::error::{Error, Result};

/// A graph merged from several per-feature graphs of the same query.
#[derive(Debug, Clone, PartialEq)]
pub struct FusedGraph {
    graph: ImageGraph,
    sources: Vec<String>,
}

impl FusedGraph {
    pub fn graph(&self) -> &ImageGraph {
        &self.graph
    }

    pub fn into_graph(self) -> ImageGraph {
        self.graph
    }

    /// Feature labels in input order.
    pub fn sources(&self) -> &[String] {
        &self.sources
    }

    /// Edge-list export with a `sources <label,...>` suffix on the header line.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{} sources {}\n", self.graph.header(), self.sources.join(","));
        self.graph.write_edges(&mut out);
        out
    }
}

impl Deref for FusedGraph {
    type Target = ImageGraph;

    fn deref(&self) -> &ImageGraph {
        &self.graph
    }
}

impl AsRef<ImageGraph> for FusedGraph {
    fn as_ref(&self) -> &ImageGraph {
        &self.graph
    }
}

impl AsRef<ImageGraph> for ImageGraph {
    fn as_ref(&self) -> &ImageGraph {
        self
    }
}

/// One fusion input: a labeled graph with a scalar multiplier on its weights.
#[derive(Debug, Clone, Copy)]
pub struct FusionInput<'a> {
    pub label: &'a str,
    pub graph: &'a ImageGraph,
    pub scale: f64,
}

impl<'a> FusionInput<'a> {
    pub fn new(label: &'a str, graph: &'a ImageGraph) -> Self {
        Self {
            label,
            graph,
            scale: 1.0,
        }
    }

    pub fn scaled(self, scale: f64) -> Self {
        Self { scale, ..self }
    }
}

/// Fuses labeled graphs with unit multipliers.
pub fn fuse(graphs: &[(&str, &ImageGraph)]) -> Result<FusedGraph> {
    let inputs: Vec<_> = graphs
        .iter()
        .map(|&(label, graph)| FusionInput::new(label, graph))
        .collect();
    fuse_scaled(&inputs)
}

/// Node and edge sets become the unions of the inputs; each edge weight is
/// the sum of `scale · w` over the inputs holding that edge.
pub fn fuse_scaled(inputs: &[FusionInput<'_>]) -> Result<FusedGraph> {
    let first = inputs
        .first()
        .ok_or_else(|| Error::FusionMismatch("no graphs to fuse".into()))?;
    let query = first.graph.query();
    let directed = first.graph.is_directed();
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    for input in inputs {
        if input.graph.query() != query {
            return Err(Error::FusionMismatch(format!(
                "queries {query} and {} differ",
                input.graph.query()
            )));
        }
        if input.graph.is_directed() != directed {
            return Err(Error::FusionMismatch("mixed directed and undirected graphs".into()));
        }
        if !(input.scale.is_finite() && input.scale > 0.0) {
            return Err(Error::FusionMismatch(format!(
                "scale {} for {:?} must be positive",
                input.scale, input.label
            )));
        }
        nodes.extend(input.graph.nodes().iter().copied());
        edges.extend(input.graph.edges().map(|(a, b, w)| (a, b, input.scale * w)));
    }
    let fused = ImageGraph::assemble(query, directed, nodes, edges);
    Ok(FusedGraph {
        graph: fused,
        sources: inputs.iter().map(|i| i.label.to_string()).collect(),
    })
}
