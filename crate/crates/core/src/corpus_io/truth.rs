use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use super::text::{format_id_line, parse_id_line, read_to_string, write_atomic};
use super::ImageId;
use crate::error::{Error, Result};

/// Relevance judgments: query id to the set of images relevant to it.
///
/// Queries missing from the map are simply not evaluated.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GroundTruth {
    relevant: BTreeMap<ImageId, BTreeSet<ImageId>>,
}

impl GroundTruth {
    /// Builds a ground truth for a corpus of `n` images.
    pub fn new(n: usize, relevant: BTreeMap<ImageId, BTreeSet<ImageId>>) -> Result<Self> {
        for (&query, set) in &relevant {
            ImageId::checked(query.0 as u64, n)?;
            if set.is_empty() {
                return Err(Error::EmptyRelevant { query });
            }
            for id in set {
                ImageId::checked(id.0 as u64, n)?;
            }
        }
        Ok(Self { relevant })
    }

    /// Queries in ascending id order.
    pub fn queries(&self) -> impl Iterator<Item = ImageId> + '_ {
        self.relevant.keys().copied()
    }

    pub fn relevant(&self, query: ImageId) -> Option<&BTreeSet<ImageId>> {
        self.relevant.get(&query)
    }

    pub fn len(&self) -> usize {
        self.relevant.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relevant.is_empty()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (query, set) in &self.relevant {
            format_id_line(&mut out, query, set);
        }
        out
    }

    pub fn from_text(text: &str, n: usize) -> Result<Self> {
        let mut relevant = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let parsed = parse_id_line(line, lineno)?;
            let query = ImageId::checked(parsed.owner, n)?;
            if parsed.ids.is_empty() {
                return Err(Error::EmptyRelevant { query });
            }
            let set = parsed
                .ids
                .into_iter()
                .map(|id| ImageId::checked(id, n))
                .collect::<Result<BTreeSet<_>>>()?;
            if relevant.insert(query, set).is_some() {
                return Err(Error::parse(lineno, format!("query {query} listed twice")));
            }
        }
        Ok(Self { relevant })
    }
}

/// Loads a ground-truth file for a corpus of `n` images.
pub fn load_ground_truth(path: impl AsRef<Path>, n: usize) -> Result<GroundTruth> {
    GroundTruth::from_text(&read_to_string(path.as_ref())?, n)
}

pub fn save_ground_truth(truth: &GroundTruth, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path, truth.to_text().as_bytes())
}

/// Sidecar mapping from dense ids to external names (usually file paths).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NameMap {
    names: BTreeMap<ImageId, String>,
}

impl NameMap {
    pub fn from_names<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            names: names
                .into_iter()
                .enumerate()
                .map(|(i, s)| (ImageId::from_index(i), s.into()))
                .collect(),
        }
    }

    pub fn get(&self, id: ImageId) -> Option<&str> {
        self.names.get(&id).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn to_text(&self) -> String {
        self.names
            .iter()
            .map(|(id, name)| format!("{id}\t{name}\n"))
            .collect()
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut names = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let (id, name) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(idx + 1, "missing tab separator"))?;
            let id = id
                .parse::<u32>()
                .map_err(|e| Error::parse(idx + 1, format!("bad id {id:?}: {e}")))?;
            names.insert(ImageId(id), name.to_string());
        }
        Ok(Self { names })
    }
}

pub fn load_name_map(path: impl AsRef<Path>) -> Result<NameMap> {
    NameMap::from_text(&read_to_string(path.as_ref())?)
}

pub fn save_name_map(names: &NameMap, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path, names.to_text().as_bytes())
}
