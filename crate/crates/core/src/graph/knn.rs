//! Neighborhoods, ranks and edge weights read off a rank table at a fixed `k`.

use crate::corpus_io::{ImageId, RankTable};
use crate::error::{Error, Result};

/// Whether an image is taken to be its own top retrieval result.
///
/// With `Included` (the default) an image occupies rank 1 of its own list:
/// `N_k(i)` holds `i` plus the first `k - 1` entries of the stored list, and
/// the rank of any other image is its stored position plus one. With
/// `Excluded` the stored, self-free list is used as is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum SelfMatch {
    #[default]
    Included,
    Excluded,
}

/// The k-nearest-neighbor structure of a rank table.
#[derive(Debug, Clone, Copy)]
pub struct KnnView<'a> {
    table: &'a RankTable,
    k: usize,
    self_match: SelfMatch,
}

impl<'a> KnnView<'a> {
    pub fn new(table: &'a RankTable, k: usize, self_match: SelfMatch) -> Result<Self> {
        let max_k = Self::max_k(table.len(), self_match);
        if k == 0 || k > max_k {
            return Err(Error::param(format!("k = {k} outside [1, {max_k}]")));
        }
        Ok(Self {
            table,
            k,
            self_match,
        })
    }

    /// Largest admissible `k` for a corpus of `n` images.
    pub fn max_k(n: usize, self_match: SelfMatch) -> usize {
        match self_match {
            SelfMatch::Included => n,
            SelfMatch::Excluded => n.saturating_sub(1),
        }
    }

    pub fn table(&self) -> &'a RankTable {
        self.table
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn self_match(&self) -> SelfMatch {
        self.self_match
    }

    fn self_offset(&self) -> usize {
        match self.self_match {
            SelfMatch::Included => 1,
            SelfMatch::Excluded => 0,
        }
    }

    /// Members of `N_k(i)` other than `i` itself, in rank order.
    pub fn others(&self, i: ImageId) -> &'a [ImageId] {
        &self.table.list(i)[..self.k - self.self_offset()]
    }

    /// `N_k(i)` in rank order.
    pub fn neighbors(&self, i: ImageId) -> Vec<ImageId> {
        let mut out = Vec::with_capacity(self.k);
        if self.self_match == SelfMatch::Included {
            out.push(i);
        }
        out.extend_from_slice(self.others(i));
        out
    }

    /// Whether `j ∈ N_k(i)`.
    pub fn contains(&self, i: ImageId, j: ImageId) -> bool {
        if i == j {
            return self.self_match == SelfMatch::Included;
        }
        self.rank_unchecked(i, j) <= self.k
    }

    pub(crate) fn rank_unchecked(&self, i: ImageId, j: ImageId) -> usize {
        match self.table.position(i, j) {
            Some(p) => p + self.self_offset(),
            None => 1,
        }
    }

    /// 1-based rank of `j` in the retrieval list of `i`.
    pub fn rank(&self, i: ImageId, j: ImageId) -> Result<usize> {
        distinct(i, j)?;
        Ok(self.rank_unchecked(i, j))
    }

    /// Reciprocal neighbor relation: each image lies in the other's top `k`.
    pub fn reciprocal(&self, i: ImageId, j: ImageId) -> Result<bool> {
        distinct(i, j)?;
        Ok(self.reciprocal_unchecked(i, j))
    }

    pub(crate) fn reciprocal_unchecked(&self, i: ImageId, j: ImageId) -> bool {
        self.contains(i, j) && self.contains(j, i)
    }

    /// `|N_k(i) ∩ N_k(j)| / |N_k(i) ∪ N_k(j)|`.
    pub(crate) fn jaccard(&self, i: ImageId, j: ImageId) -> f64 {
        let mut shared = self.others(i).iter().filter(|&&x| self.contains(j, x)).count();
        if self.self_match == SelfMatch::Included && self.contains(j, i) {
            shared += 1;
        }
        shared as f64 / (2 * self.k - shared) as f64
    }

    /// Neighborhood-consistency weight: `decay · Jaccard(N_k(i), N_k(j))` for
    /// reciprocal pairs, 0 otherwise.
    pub fn jaccard_weight(&self, i: ImageId, j: ImageId, decay: f64) -> Result<f64> {
        distinct(i, j)?;
        check_decay(decay)?;
        if !self.reciprocal_unchecked(i, j) {
            return Ok(0.0);
        }
        Ok(decay * self.jaccard(i, j))
    }

    pub(crate) fn rank_sum(&self, i: ImageId, j: ImageId) -> usize {
        self.rank_unchecked(i, j) + self.rank_unchecked(j, i)
    }

    /// Reciprocal-rank weight: `decay / (Rank(i,j) + Rank(j,i))` when
    /// `j ∈ N_k(i)`, 0 otherwise.
    pub fn rank_weight(&self, i: ImageId, j: ImageId, decay: f64) -> Result<f64> {
        distinct(i, j)?;
        check_decay(decay)?;
        if !self.contains(i, j) {
            return Ok(0.0);
        }
        Ok(decay / self.rank_sum(i, j) as f64)
    }
}

fn distinct(i: ImageId, j: ImageId) -> Result<()> {
    if i == j {
        return Err(Error::param(format!("expected two distinct images, got {i} twice")));
    }
    Ok(())
}

fn check_decay(decay: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&decay) {
        return Err(Error::param(format!("decay {decay} outside [0, 1]")));
    }
    Ok(())
}
