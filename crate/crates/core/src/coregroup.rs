//! Core-group search: the k-nearest-neighbor neighborhood whose local
//! least-squares fit has the lowest training MSE.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::neighbors::KnnIndex;
use crate::numerics::{ols, LinearFit};
use crate::par;

/// Core group size, either absolute or as a fraction of the training set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoreSize {
    Absolute(usize),
    Fraction(f64),
}

impl CoreSize {
    /// `max(d + 1, round(p * n))` for fractions, capped at `n`.
    pub fn resolve(&self, n: usize, d: usize) -> usize {
        let k = match *self {
            CoreSize::Absolute(k) => k,
            CoreSize::Fraction(p) => ((p * n as f64).round() as usize).max(d + 1),
        };
        k.min(n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoreGroup {
    /// Training rows, ascending.
    pub members: Vec<usize>,
    /// Anchor row; `None` for a manually supplied group.
    pub anchor: Option<usize>,
    pub fit: LinearFit,
    /// Mean of the member features.
    pub center: Vec<f64>,
}

impl CoreGroup {
    /// Builds a group from an explicit member list.
    pub fn from_members(train: &Dataset, mut members: Vec<usize>, anchor: Option<usize>) -> Result<Self> {
        let d = train.d();
        members.sort_unstable();
        if members.len() <= d {
            return Err(Error::CoreTooSmall {
                k: members.len(),
                d,
            });
        }
        let (x, y) = gather(train, &members);
        let fit = ols(&x, d, &y)?;
        let mut center = vec![0.0; d];
        for row in x.chunks_exact(d) {
            for (c, v) in center.iter_mut().zip(row) {
                *c += v;
            }
        }
        let k = members.len() as f64;
        center.iter_mut().for_each(|c| *c /= k);
        Ok(Self {
            members,
            anchor,
            fit,
            center,
        })
    }

    pub fn k(&self) -> usize {
        self.members.len()
    }
}

pub(crate) fn gather(data: &Dataset, rows: &[usize]) -> (Vec<f64>, Vec<f64>) {
    let mut x = Vec::with_capacity(rows.len() * data.d());
    let mut y = Vec::with_capacity(rows.len());
    for &i in rows {
        x.extend_from_slice(data.row(i));
        y.push(data.target(i));
    }
    (x, y)
}

fn neighborhood_mse(train: &Dataset, index: &KnnIndex, anchor: usize, k: usize) -> Option<f64> {
    let mut members = index.knn_indices(train.row(anchor), k).ok()?;
    // equal sets must score identically regardless of neighbor order
    members.sort_unstable();
    let (x, y) = gather(train, &members);
    match ols(&x, train.d(), &y) {
        Ok(fit) => Some(fit.train_mse),
        Err(_) => None,
    }
}

/// Scans every training row as an anchor and returns the neighborhood with the
/// smallest local training MSE. Ties go to the smaller anchor index;
/// rank-deficient neighborhoods are skipped.
pub fn find_core_group(train: &Dataset, k: usize, index: &KnnIndex) -> Result<CoreGroup> {
    let d = train.d();
    if k <= d {
        return Err(Error::CoreTooSmall { k, d });
    }
    if k > train.n() {
        return Err(Error::TooManyNeighbors { k, n: train.n() });
    }
    if index.len() != train.n() || index.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: train.n(),
            got: index.len(),
        });
    }
    let scores = par::map_indexed(train.n(), |i| neighborhood_mse(train, index, i, k));
    let (anchor, _) = scores
        .iter()
        .enumerate()
        .filter_map(|(i, s)| s.map(|m| (i, m)))
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .ok_or(Error::NoValidNeighborhood)?;
    let members = index.knn_indices(train.row(anchor), k)?;
    CoreGroup::from_members(train, members, Some(anchor))
}
