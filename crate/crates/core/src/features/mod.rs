//! Desk-scale feature backend: color histograms and exact Euclidean rank tables.

mod hsv;
mod ppm;

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::corpus_io::{write_atomic, ImageId, RankTable};
use crate::error::{Error, Result};

pub use hsv::{hsv_bin, hsv_histogram, rgb_to_hsv, DEFAULT_BINS_PER_CHANNEL};
pub use ppm::{decode_ppm, load_ppm, RawImage};

/// Exponent applied after L1 normalization; 0.5 is square-root scaling.
pub const DEFAULT_SCALING_EXPONENT: f64 = 0.5;

/// Dense per-image feature vectors, all of the same dimensionality.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    n: usize,
    dims: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let dims = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n * dims);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != dims {
                return Err(Error::param(format!(
                    "row {i} has {} entries, expected {dims}",
                    row.len()
                )));
            }
            if let Some(bad) = row.iter().find(|x| !x.is_finite()) {
                return Err(Error::param(format!("row {i} holds non-finite value {bad}")));
            }
            data.extend(row);
        }
        Ok(Self { n, dims, data })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dims..(i + 1) * self.dims]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.n).map(|i| self.row(i))
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.dims);
        for row in self.rows() {
            let mut first = true;
            for x in row {
                if !first {
                    out.push(' ');
                }
                first = false;
                let _ = write!(out, "{x}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(1, "missing `<n> <dims>` header"))?;
        let header: Vec<usize> = header
            .split_ascii_whitespace()
            .map(|t| t.parse().map_err(|e| Error::parse(1, format!("bad header field {t:?}: {e}"))))
            .collect::<Result<_>>()?;
        let [n, dims] = header[..] else {
            return Err(Error::parse(1, "header must be `<n> <dims>`"));
        };
        let mut rows = Vec::with_capacity(n);
        for (idx, line) in lines {
            let lineno = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let row: Vec<f64> = line
                .split_ascii_whitespace()
                .map(|t| t.parse().map_err(|e| Error::parse(lineno, format!("bad value {t:?}: {e}"))))
                .collect::<Result<_>>()?;
            if row.len() != dims {
                return Err(Error::parse(
                    lineno,
                    format!("{} values, expected {dims}", row.len()),
                ));
            }
            rows.push(row);
        }
        if rows.len() != n {
            return Err(Error::parse(
                text.lines().count(),
                format!("{} rows, header promised {n}", rows.len()),
            ));
        }
        if n == 0 {
            return Ok(Self { n: 0, dims, data: Vec::new() });
        }
        Self::new(rows)
    }
}

pub fn load_feature_matrix(path: impl AsRef<Path>) -> Result<FeatureMatrix> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    FeatureMatrix::from_text(&text)
}

pub fn save_feature_matrix(features: &FeatureMatrix, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path, features.to_text().as_bytes())
}

/// L1-normalizes `v` and raises every entry to `exponent`.
pub fn normalize_histogram_with(v: &[f64], exponent: f64) -> Result<Vec<f64>> {
    if v.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::param("histogram entries must be finite and non-negative"));
    }
    let sum: f64 = v.iter().sum();
    if sum <= 0.0 {
        return Err(Error::param("cannot normalize an all-zero histogram"));
    }
    Ok(v.iter().map(|x| (x / sum).powf(exponent)).collect())
}

/// L1 normalization followed by element-wise square root; the result has unit L2 norm.
pub fn normalize_histogram(v: &[f64]) -> Result<Vec<f64>> {
    normalize_histogram_with(v, DEFAULT_SCALING_EXPONENT)
}

/// Normalized HSV descriptor of one image.
pub fn image_descriptor(img: &RawImage, bins_per_channel: usize, exponent: f64) -> Result<Vec<f64>> {
    normalize_histogram_with(&hsv_histogram(img, bins_per_channel), exponent)
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Exact all-pairs Euclidean ranking. Equal distances break toward the lower id.
pub fn build_rank_table(features: &FeatureMatrix) -> Result<RankTable> {
    let n = features.len();
    if n < 2 {
        return Err(Error::param("a rank table needs at least two images"));
    }
    let lists = (0..n)
        .into_par_iter()
        .map(|i| {
            let query = features.row(i);
            let mut scored: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (squared_distance(query, features.row(j)), j))
                .collect();
            scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            scored
                .into_iter()
                .map(|(_, j)| ImageId::from_index(j))
                .collect()
        })
        .collect();
    RankTable::new(lists)
}
