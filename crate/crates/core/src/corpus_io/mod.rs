//! Corpus data model and its text file formats.
//!
//! All formats are UTF-8 with LF line endings:
//!
//! * rank table: `<owner_id>: <id> <id> ...`, one line per image in ascending owner order
//! * ground truth: `<query_id>: <relevant_id> ...`
//! * name map: `<id>\t<name>`
//! * feature matrix: header `<n> <dims>`, then one row of decimal floats per image

mod synth;
mod table;
mod text;
mod truth;

use std::fmt;

use crate::error::{Error, Result};

pub use synth::{synth_generate, SynthCorpus, SynthSpec};
pub use table::{load_rank_table, save_rank_table, RankTable, TruncatedTable};
pub use text::write_atomic;
pub use truth::{
    load_ground_truth, load_name_map, save_ground_truth, save_name_map, GroundTruth, NameMap,
};

/// Dense image identifier in `[0, n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ImageId(pub u32);

impl ImageId {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn from_index(i: usize) -> Self {
        ImageId(u32::try_from(i).expect("image index exceeds u32"))
    }

    pub(crate) fn checked(raw: u64, n: usize) -> Result<Self> {
        if raw >= n as u64 {
            return Err(Error::IdOutOfRange { id: raw, n });
        }
        Ok(ImageId(raw as u32))
    }
}

impl fmt::Display for ImageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<u32> for ImageId {
    fn from(v: u32) -> Self {
        ImageId(v)
    }
}
