use serde::{Deserialize, Serialize};

use crate::coregroup::{gather, CoreGroup};
use crate::dataset::Dataset;
use crate::error::Result;
use crate::numerics::{mse, ols, quantile_lower, dot, LinearFit};
use crate::region::{box_of, AxisBox, Region};

use super::HyperParams;

/// Quantile level for the residual-quantile selection rule.
pub const RESIDUAL_QUANTILE: f64 = 0.9;
/// A candidate qualifies when `q_hat <= QUANTILE_SIGMA_FACTOR * sigma_hat`.
pub const QUANTILE_SIGMA_FACTOR: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flag {
    /// No training point falls in the region; the core model is kept.
    Degenerate,
    /// Refit inside the region failed (too few or collinear points).
    RefitFailed,
    /// No candidate met the minimum validation fraction.
    Fallback,
    /// Multi-group fitting stopped before the requested number of groups.
    Exhausted,
    /// MSE values are in standardized target units.
    StandardizedUnits,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum Hyper {
    Ddgroup(HyperParams),
    Kmeans { clusters: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoreSummary {
    pub anchor: Option<usize>,
    pub k: usize,
    pub center: Vec<f64>,
    pub train_mse: f64,
}

/// A selected region with its refit model and per-split diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupReport {
    pub region: Region,
    pub interval_box: AxisBox,
    /// Volume over the non-degenerate dimensions of the training bounding box.
    pub volume: f64,
    /// Model used for scoring: the in-region refit when available.
    pub beta: Vec<f64>,
    pub core_beta: Vec<f64>,
    /// Core-group noise estimate.
    pub sigma_hat: Option<f64>,
    /// 0.9-quantile of absolute residuals of `beta` on validation points in the region.
    pub q_hat: Option<f64>,
    pub core: Option<CoreSummary>,
    pub rejected_count: usize,
    pub train_count: usize,
    pub train_fraction: f64,
    pub train_mse: Option<f64>,
    pub val_count: usize,
    pub val_fraction: f64,
    pub val_mse: Option<f64>,
    pub test_count: Option<usize>,
    pub test_fraction: Option<f64>,
    pub test_mse: Option<f64>,
    pub hyperparameters: Hyper,
    pub grid_index: usize,
    pub seed: u64,
    pub flags: Vec<Flag>,
}

impl GroupReport {
    pub fn has_flag(&self, flag: Flag) -> bool {
        self.flags.contains(&flag)
    }

    pub fn add_flag(&mut self, flag: Flag) {
        if !self.has_flag(flag) {
            self.flags.push(flag);
        }
    }

    /// No validation point falls in the region.
    pub fn is_val_degenerate(&self) -> bool {
        self.val_count == 0
    }

    /// Fills the test-split fields.
    pub fn evaluate_test(&mut self, test: &Dataset) {
        let (count, fraction, err) = split_stats(&self.interval_box, &self.beta, test);
        self.test_count = Some(count);
        self.test_fraction = Some(fraction);
        self.test_mse = err;
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.interval_box.contains_point(x)
    }
}

pub(crate) fn rows_in(region: &AxisBox, data: &Dataset) -> Vec<usize> {
    data.indices_where(|row| region.contains_point(row))
}

fn split_stats(region: &AxisBox, beta: &[f64], data: &Dataset) -> (usize, f64, Option<f64>) {
    let inside = rows_in(region, data);
    let fraction = inside.len() as f64 / data.n() as f64;
    if inside.is_empty() {
        return (0, fraction, None);
    }
    let (x, y) = gather(data, &inside);
    (inside.len(), fraction, mse(beta, &x, data.d(), &y).ok())
}

/// Scores a region on train and validation data. With `refit`, the model is
/// re-estimated on the training points inside the region.
#[allow(clippy::too_many_arguments)]
pub(crate) fn assess(
    train: &Dataset,
    val: &Dataset,
    region: Region,
    core: Option<&CoreGroup>,
    core_fit: &LinearFit,
    rejected_count: usize,
    refit: bool,
    hyperparameters: Hyper,
    grid_index: usize,
    seed: u64,
) -> Result<GroupReport> {
    let interval_box = box_of(&region)?;
    let dims = region.bounding_box.nondegenerate_dims();
    let volume = interval_box.volume_over(&dims);
    let mut flags = Vec::new();

    let train_inside = rows_in(&interval_box, train);
    let mut beta = core_fit.beta.clone();
    if train_inside.is_empty() {
        flags.push(Flag::Degenerate);
    } else if refit {
        let (x, y) = gather(train, &train_inside);
        match ols(&x, train.d(), &y) {
            Ok(f) => beta = f.beta,
            Err(_) => flags.push(Flag::RefitFailed),
        }
    }
    let (train_count, train_fraction, train_mse) = split_stats(&interval_box, &beta, train);
    let (val_count, val_fraction, val_mse) = split_stats(&interval_box, &beta, val);

    let q_hat = {
        let abs: Vec<f64> = rows_in(&interval_box, val)
            .into_iter()
            .map(|i| (val.target(i) - dot(&beta, val.row(i))).abs())
            .collect();
        if abs.is_empty() {
            None
        } else {
            quantile_lower(abs, RESIDUAL_QUANTILE).ok()
        }
    };

    Ok(GroupReport {
        region,
        interval_box,
        volume,
        beta,
        core_beta: core_fit.beta.clone(),
        sigma_hat: core_fit.sigma_hat,
        q_hat,
        core: core.map(|c| CoreSummary {
            anchor: c.anchor,
            k: c.k(),
            center: c.center.clone(),
            train_mse: c.fit.train_mse,
        }),
        rejected_count,
        train_count,
        train_fraction,
        train_mse,
        val_count,
        val_fraction,
        val_mse,
        test_count: None,
        test_fraction: None,
        test_mse: None,
        hyperparameters,
        grid_index,
        seed,
        flags,
    })
}
