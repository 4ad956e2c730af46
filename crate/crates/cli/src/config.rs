//! Optional TOML config. Every key mirrors a command-line flag; flags win.

use std::path::Path;

use anyhow::{anyhow, Context, Result};
use clap::ValueEnum;
use graph_rerank::eval::Metric;
use graph_rerank::{Method, ScoreMode};
use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub k: Option<usize>,
    pub k_values: Option<Vec<usize>>,
    pub alpha0: Option<f64>,
    pub depth: Option<usize>,
    pub max_nodes: Option<usize>,
    pub method: Option<MethodArg>,
    pub score: Option<ScoreArg>,
    pub exclude_self: Option<bool>,
    pub top: Option<usize>,
    pub metric: Option<MetricArg>,
    pub bins: Option<usize>,
    pub exponent: Option<f64>,
    pub seed: Option<u64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).map_err(|e| {
            // toml renders a multi-line snippet; keep diagnostics to one line
            let line = e.span().map_or(0, |s| text[..s.start].matches('\n').count() + 1);
            anyhow!("{}:{line}: {}", path.display(), e.message().trim())
        })
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Directed,
    Undirected,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Directed => Method::Directed,
            MethodArg::Undirected => Method::Undirected,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreArg {
    Max,
    Sum,
}

impl From<ScoreArg> for ScoreMode {
    fn from(s: ScoreArg) -> Self {
        match s {
            ScoreArg::Max => ScoreMode::Max,
            ScoreArg::Sum => ScoreMode::Sum,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricArg {
    Map,
    Ns,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Map => Metric::Map,
            MetricArg::Ns => Metric::NsScore,
        }
    }
}
