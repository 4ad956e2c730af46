//! Reranking for content-based image search.
//!
//! Every image's retrieval list is kept in a [`RankTable`]. For a query, a
//! local image graph is grown from those lists ([`graph`]), graphs from
//! several features are merged by summing edge weights ([`fusion`]), and the
//! refined list is read off by greedy expansion from the query
//! ([`ranking`]). [`eval`] scores the outcome with mAP and the N-S score.

pub mod corpus_io;
pub mod error;
pub mod eval;
pub mod features;
pub mod fusion;
pub mod graph;
pub mod ranking;

pub use corpus_io::{GroundTruth, ImageId, RankTable};
pub use error::{Error, Result};
pub use features::FeatureMatrix;
pub use fusion::{fuse, fuse_scaled, FusedGraph, FusionInput};
pub use graph::{build_directed_graph, build_undirected_graph, GraphParams, ImageGraph, KnnView, SelfMatch};
pub use ranking::{greedy_rank, rerank, FeatureSource, Method, RankedList, RerankConfig, ScoreMode};
