//! Synthetic multi-feature corpora with known group structure.
//!
//! Images come in groups of `group_size` consecutive ids (the UKBench layout).
//! In every feature space each group independently flips a coin with bias
//! `agreement`: on heads all members scatter tightly around one shared
//! centroid, on tails every member sits near its own decoy centroid, so the
//! group is invisible in that space.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{GroundTruth, ImageId};
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub n_groups: usize,
    pub group_size: usize,
    pub dims: usize,
    pub n_spaces: usize,
    /// Standard deviation of members around their centroid.
    pub intra_spread: f64,
    /// Standard deviation of centroids around the origin.
    pub inter_spread: f64,
    /// Probability that a group is coherent in a given space.
    pub agreement: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            n_groups: 50,
            group_size: 4,
            dims: 16,
            n_spaces: 2,
            intra_spread: 0.5,
            inter_spread: 1.0,
            agreement: 0.7,
            seed: 0,
        }
    }
}

impl SynthSpec {
    pub fn corpus_size(&self) -> usize {
        self.n_groups * self.group_size
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_groups == 0 || self.group_size == 0 || self.dims == 0 || self.n_spaces == 0 {
            return Err(Error::param(
                "n_groups, group_size, dims and n_spaces must all be positive",
            ));
        }
        if !(self.intra_spread > 0.0 && self.intra_spread.is_finite()) {
            return Err(Error::param("intra_spread must be positive and finite"));
        }
        if !(self.inter_spread.is_finite() && self.intra_spread < self.inter_spread) {
            return Err(Error::param("intra_spread must be below inter_spread"));
        }
        if !(0.0..=1.0).contains(&self.agreement) {
            return Err(Error::param("agreement must lie in [0, 1]"));
        }
        if self.corpus_size() > u32::MAX as usize {
            return Err(Error::param("corpus too large"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    /// One feature matrix per space.
    pub spaces: Vec<FeatureMatrix>,
    /// Each image is relevant to every member of its group, itself included.
    pub ground_truth: GroundTruth,
    /// `coherent[space][group]`: whether the group shares a centroid in that space.
    pub coherent: Vec<Vec<bool>>,
}

pub fn synth_generate(spec: &SynthSpec) -> Result<SynthCorpus> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let centroid = Normal::new(0.0, spec.inter_spread).map_err(|e| Error::param(e.to_string()))?;
    let jitter = Normal::new(0.0, spec.intra_spread).map_err(|e| Error::param(e.to_string()))?;
    let n = spec.corpus_size();

    let mut spaces = Vec::with_capacity(spec.n_spaces);
    let mut coherent = Vec::with_capacity(spec.n_spaces);
    for _ in 0..spec.n_spaces {
        let mut rows = Vec::with_capacity(n);
        let mut flags = Vec::with_capacity(spec.n_groups);
        for _ in 0..spec.n_groups {
            let shared = rng.random_bool(spec.agreement);
            flags.push(shared);
            let group_center: Vec<f64> = (0..spec.dims).map(|_| centroid.sample(&mut rng)).collect();
            for _ in 0..spec.group_size {
                let row = if shared {
                    group_center
                        .iter()
                        .map(|c| c + jitter.sample(&mut rng))
                        .collect()
                } else {
                    (0..spec.dims)
                        .map(|_| centroid.sample(&mut rng) + jitter.sample(&mut rng))
                        .collect()
                };
                rows.push(row);
            }
        }
        spaces.push(FeatureMatrix::new(rows)?);
        coherent.push(flags);
    }

    let mut relevant = BTreeMap::new();
    for g in 0..spec.n_groups {
        let members: BTreeSet<ImageId> = (g * spec.group_size..(g + 1) * spec.group_size)
            .map(ImageId::from_index)
            .collect();
        for &m in &members {
            relevant.insert(m, members.clone());
        }
    }
    Ok(SynthCorpus {
        spaces,
        ground_truth: GroundTruth::new(n, relevant)?,
        coherent,
    })
}
