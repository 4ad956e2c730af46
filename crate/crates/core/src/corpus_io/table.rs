use std::path::Path;

use super::text::{format_id_line, parse_id_line, read_to_string, write_atomic};
use super::ImageId;
use crate::error::{Error, Result};

/// Full retrieval lists for every image of a corpus.
///
/// Each image owns one list holding every other image ordered from most to
/// least similar. Lists are stored untruncated so that reverse ranks beyond
/// any neighbor cutoff stay available.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankTable {
    n: usize,
    /// Row-major, `n * (n - 1)` ids.
    lists: Vec<ImageId>,
    /// Row-major `n * n`; 1-based position of column id in row's list, 0 on the diagonal.
    positions: Vec<u32>,
}

impl RankTable {
    /// Validates per-image lists; `lists[i]` is the list owned by image `i`.
    pub fn new(lists: Vec<Vec<ImageId>>) -> Result<Self> {
        let n = lists.len();
        let row = n.saturating_sub(1);
        let mut flat = Vec::with_capacity(n * row);
        let mut positions = vec![0u32; n * n];
        for (owner, list) in lists.into_iter().enumerate() {
            let owner_id = ImageId::from_index(owner);
            if list.len() != row {
                return Err(Error::ShortList {
                    owner: owner_id,
                    len: list.len(),
                    expected: row,
                });
            }
            for (pos, &id) in list.iter().enumerate() {
                if id.index() >= n {
                    return Err(Error::IdOutOfRange {
                        id: id.0 as u64,
                        n,
                    });
                }
                if id == owner_id {
                    return Err(Error::OwnerInList { owner: owner_id });
                }
                let slot = &mut positions[owner * n + id.index()];
                if *slot != 0 {
                    return Err(Error::DuplicateId { owner: owner_id, id });
                }
                *slot = (pos + 1) as u32;
            }
            flat.extend(list);
        }
        Ok(Self {
            n,
            lists: flat,
            positions,
        })
    }

    /// Number of images in the corpus.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// The ordered list owned by `owner` (self excluded, length `n - 1`).
    pub fn list(&self, owner: ImageId) -> &[ImageId] {
        let row = self.n - 1;
        let start = owner.index() * row;
        &self.lists[start..start + row]
    }

    /// 1-based position of `other` in `owner`'s list; `None` when they coincide.
    pub fn position(&self, owner: ImageId, other: ImageId) -> Option<usize> {
        match self.positions[owner.index() * self.n + other.index()] {
            0 => None,
            p => Some(p as usize),
        }
    }

    pub fn ids(&self) -> impl ExactSizeIterator<Item = ImageId> {
        (0..self.n).map(ImageId::from_index)
    }

    /// Keeps only the first `k` entries of every list.
    pub fn truncate(&self, k: usize) -> Result<TruncatedTable> {
        if self.n < 2 || k == 0 || k > self.n - 1 {
            return Err(Error::param(format!(
                "k = {k} outside [1, {}]",
                self.n.saturating_sub(1)
            )));
        }
        let ids = self
            .ids()
            .flat_map(|i| self.list(i)[..k].iter().copied())
            .collect();
        Ok(TruncatedTable { k, ids })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for owner in self.ids() {
            format_id_line(&mut out, owner, self.list(owner));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut raw = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            if line.trim().is_empty() {
                return Err(Error::parse(lineno, "blank line"));
            }
            let parsed = parse_id_line(line, lineno)?;
            if parsed.owner != idx as u64 {
                return Err(Error::parse(
                    lineno,
                    format!("expected owner {idx}, found {}", parsed.owner),
                ));
            }
            raw.push(parsed.ids);
        }
        let n = raw.len();
        let lists = raw
            .into_iter()
            .map(|ids| {
                ids.into_iter()
                    .map(|id| ImageId::checked(id, n))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(lists)
    }
}

/// A rank table cut to the top `k` entries per image; holds exactly `n * k` ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedTable {
    k: usize,
    ids: Vec<ImageId>,
}

impl TruncatedTable {
    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of stored ids.
    pub fn stored_ids(&self) -> usize {
        self.ids.len()
    }

    pub fn neighbors(&self, owner: ImageId) -> &[ImageId] {
        let start = owner.index() * self.k;
        &self.ids[start..start + self.k]
    }
}

pub fn load_rank_table(path: impl AsRef<Path>) -> Result<RankTable> {
    let path = path.as_ref();
    RankTable::from_text(&read_to_string(path)?)
}

pub fn save_rank_table(table: &RankTable, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path, table.to_text().as_bytes())
}
