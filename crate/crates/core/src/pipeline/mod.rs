//! End-to-end subgroup fitting: core group, residual rejection, growing box,
//! hyperparameter sweeps and multi-group peeling.

mod report;
mod threshold;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use report::{CoreSummary, Flag, GroupReport, Hyper, QUANTILE_SIGMA_FACTOR, RESIDUAL_QUANTILE};
pub use threshold::{reject_labels, theory_rho, ResolvedThreshold, SigmaSource, ThresholdRule, THEORY_CONSTANT};

use crate::coregroup::{find_core_group, CoreGroup, CoreSize};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::neighbors::KnnIndex;
use crate::par;
use crate::region::{axis_directions, grow_box, AxisBox, Region, SpeedPreset};

pub(crate) use report::assess;

/// One point of the hyperparameter grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub core_size: CoreSize,
    pub threshold: ThresholdRule,
    pub speeds: SpeedPreset,
    pub shrinkage: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Selection {
    /// Lowest validation MSE among regions holding at least `p_min` of the
    /// validation set.
    Valmse,
    /// Largest region whose validation residual quantile stays within
    /// `3 * sigma_hat`.
    Quantile,
}

impl std::str::FromStr for Selection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "valmse" => Ok(Selection::Valmse),
            "quantile" => Ok(Selection::Quantile),
            other => Err(Error::Config(format!("unknown selection rule '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub core_sizes: Vec<CoreSize>,
    pub thresholds: Vec<ThresholdRule>,
    pub speeds: Vec<SpeedPreset>,
    pub shrinkages: Vec<f64>,
    /// Minimum fraction of validation points a region must contain.
    pub p_min: f64,
    pub refit: bool,
    pub selection: Selection,
    pub seed: u64,
}

pub fn default_gamma1_grid() -> Vec<f64> {
    (-4..=5).map(|e| 2f64.powi(e)).collect()
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            core_sizes: [0.01, 0.05, 0.1, 0.15, 0.2].into_iter().map(CoreSize::Fraction).collect(),
            thresholds: default_gamma1_grid()
                .into_iter()
                .map(|gamma1| ThresholdRule::Affine {
                    sigma: SigmaSource::EstimateFromCore,
                    gamma1,
                    gamma2: 0.0,
                })
                .collect(),
            speeds: vec![SpeedPreset::Uniform, SpeedPreset::Bbox],
            shrinkages: vec![0.0, 0.1, 0.05, 0.025, 0.01],
            p_min: 0.05,
            refit: true,
            selection: Selection::Valmse,
            seed: 0,
        }
    }
}

impl PipelineConfig {
    /// Constant-threshold grid with shrinkage and quantile selection, used for
    /// the synthetic sample-size benchmark.
    pub fn synthetic_benchmark() -> Self {
        Self {
            core_sizes: vec![CoreSize::Fraction(0.05)],
            thresholds: [2.0, 4.0, 8.0, 16.0, 32.0, 64.0]
                .into_iter()
                .map(|rho| ThresholdRule::Constant { rho })
                .collect(),
            speeds: vec![SpeedPreset::Uniform],
            shrinkages: vec![0.1, 0.05, 0.025, 0.01],
            selection: Selection::Quantile,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.core_sizes.is_empty()
            || self.thresholds.is_empty()
            || self.speeds.is_empty()
            || self.shrinkages.is_empty()
        {
            return Err(Error::Config("hyperparameter grids must be nonempty".into()));
        }
        if !(0.0..=1.0).contains(&self.p_min) {
            return Err(Error::Config(format!("p_min must lie in [0, 1], got {}", self.p_min)));
        }
        if self.shrinkages.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
            return Err(Error::Config("shrinkage values must be nonnegative".into()));
        }
        for c in &self.core_sizes {
            match c {
                CoreSize::Fraction(p) if !(*p > 0.0 && *p <= 1.0) => {
                    return Err(Error::Config(format!("core fraction {p} outside (0, 1]")))
                }
                CoreSize::Absolute(0) => return Err(Error::Config("core size must be positive".into())),
                _ => {}
            }
        }
        self.thresholds.iter().try_for_each(ThresholdRule::validate)
    }

    /// Grid points in evaluation order: core size, threshold, speed, shrinkage.
    pub fn grid(&self) -> Vec<HyperParams> {
        let mut out = Vec::new();
        for &core_size in &self.core_sizes {
            for &threshold in &self.thresholds {
                for &speeds in &self.speeds {
                    for &shrinkage in &self.shrinkages {
                        out.push(HyperParams {
                            core_size,
                            threshold,
                            speeds,
                            shrinkage,
                        });
                    }
                }
            }
        }
        out
    }
}

/// Rejection labels and the grown region for a given core group.
#[derive(Debug, Clone, PartialEq)]
pub struct Phases {
    pub threshold: ResolvedThreshold,
    pub rejected: Vec<bool>,
    pub region: Region,
}

/// Runs rejection and box growth from an existing core group.
pub fn grow_from_core(
    train: &Dataset,
    core: &CoreGroup,
    rule: &ThresholdRule,
    speeds: SpeedPreset,
    shrinkage: f64,
) -> Result<Phases> {
    let threshold = rule.resolve(core.fit.sigma_hat, train.n())?;
    let rejected = threshold::labels_with(&core.fit.beta, train, &threshold);
    let rows: Vec<usize> = (0..train.n()).filter(|&i| rejected[i]).collect();
    let points: Vec<f64> = rows.iter().flat_map(|&i| train.row(i).iter().copied()).collect();
    let bounds = AxisBox::bounding(train.features(), train.d())?;
    let directions = axis_directions(&bounds, speeds, train.feature_names())?;
    let mut region = grow_box(&core.center, &points, &directions, shrinkage, &bounds)?;
    // supports index the rejected subset; report training rows instead
    for c in &mut region.constraints {
        c.support = c.support.map(|s| rows[s]);
    }
    Ok(Phases {
        threshold,
        rejected,
        region,
    })
}

/// Phases 2-3 plus scoring, starting from a given core group.
pub fn fit_from_core(
    train: &Dataset,
    val: &Dataset,
    core: &CoreGroup,
    params: &HyperParams,
    refit: bool,
    grid_index: usize,
    seed: u64,
) -> Result<GroupReport> {
    let phases = grow_from_core(train, core, &params.threshold, params.speeds, params.shrinkage)?;
    let rejected_count = phases.rejected.iter().filter(|r| **r).count();
    assess(
        train,
        val,
        phases.region,
        Some(core),
        &core.fit,
        rejected_count,
        refit,
        Hyper::Ddgroup(*params),
        grid_index,
        seed,
    )
}

/// Runs all three phases for one hyperparameter point.
pub fn fit_one(train: &Dataset, val: &Dataset, params: &HyperParams, refit: bool) -> Result<GroupReport> {
    params.threshold.validate()?;
    let index = KnnIndex::build(train.features(), train.d())?;
    let k = params.core_size.resolve(train.n(), train.d());
    let core = find_core_group(train, k, &index)?;
    fit_from_core(train, val, &core, params, refit, 0, 0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRecord {
    pub index: usize,
    pub hyperparameters: HyperParams,
    pub report: Option<GroupReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub best: GroupReport,
    pub log: Vec<GridRecord>,
}

/// Evaluates every grid point and selects one region with `cfg.selection`.
pub fn sweep(train: &Dataset, val: &Dataset, cfg: &PipelineConfig) -> Result<SweepResult> {
    cfg.validate()?;
    if val.d() != train.d() {
        return Err(Error::DimensionMismatch {
            expected: train.d(),
            got: val.d(),
        });
    }
    let grid = cfg.grid();
    let index = KnnIndex::build(train.features(), train.d())?;

    let mut cores: BTreeMap<usize, std::result::Result<CoreGroup, String>> = BTreeMap::new();
    for hp in &grid {
        let k = hp.core_size.resolve(train.n(), train.d());
        cores
            .entry(k)
            .or_insert_with(|| find_core_group(train, k, &index).map_err(|e| e.to_string()));
    }

    let log: Vec<GridRecord> = par::map_indexed(grid.len(), |i| {
        let hp = grid[i];
        let k = hp.core_size.resolve(train.n(), train.d());
        let outcome = match &cores[&k] {
            Ok(core) => fit_from_core(train, val, core, &hp, cfg.refit, i, cfg.seed).map_err(|e| e.to_string()),
            Err(e) => Err(e.clone()),
        };
        match outcome {
            Ok(report) => GridRecord {
                index: i,
                hyperparameters: hp,
                report: Some(report),
                error: None,
            },
            Err(error) => GridRecord {
                index: i,
                hyperparameters: hp,
                report: None,
                error: Some(error),
            },
        }
    });

    let best = select(&log, cfg)?;
    Ok(SweepResult { best, log })
}

fn select(log: &[GridRecord], cfg: &PipelineConfig) -> Result<GroupReport> {
    let candidates: Vec<&GroupReport> = log.iter().filter_map(|r| r.report.as_ref()).collect();
    if candidates.is_empty() {
        let first = log.iter().find_map(|r| r.error.clone()).unwrap_or_default();
        return Err(Error::Config(format!("no grid point produced a region: {first}")));
    }
    match cfg.selection {
        Selection::Valmse => {
            let (i, fallback) = valmse_select(&candidates, cfg.p_min);
            let mut best = candidates[i].clone();
            if fallback {
                best.add_flag(Flag::Fallback);
            }
            Ok(best)
        }
        Selection::Quantile => Ok(candidates[quantile_select(&candidates)?].clone()),
    }
}

/// Lowest validation MSE among regions holding at least `p_min` of the
/// validation points; ties prefer larger volume, then earlier grid order.
/// Returns the chosen position and whether the fallback path was taken.
pub fn valmse_select(candidates: &[&GroupReport], p_min: f64) -> (usize, bool) {
    let scored: Vec<(usize, f64)> = candidates
        .iter()
        .enumerate()
        .filter(|(_, r)| !r.is_val_degenerate())
        .filter_map(|(i, r)| r.val_mse.map(|m| (i, m)))
        .collect();
    let eligible = scored
        .iter()
        .filter(|(i, _)| candidates[*i].val_fraction + 1e-12 >= p_min)
        .min_by(|a, b| {
            a.1.total_cmp(&b.1)
                .then(candidates[b.0].volume.total_cmp(&candidates[a.0].volume))
                .then(candidates[a.0].grid_index.cmp(&candidates[b.0].grid_index))
        });
    if let Some((i, _)) = eligible {
        return (*i, false);
    }
    // closest to qualifying: largest validation share
    let closest = scored.iter().min_by(|a, b| {
        let (ra, rb) = (candidates[a.0], candidates[b.0]);
        rb.val_fraction
            .total_cmp(&ra.val_fraction)
            .then(a.1.total_cmp(&b.1))
            .then(ra.grid_index.cmp(&rb.grid_index))
    });
    match closest {
        Some((i, _)) => (*i, true),
        None => (0, true),
    }
}

/// Largest-volume candidate with `q_hat <= 3 * sigma_hat`; ties prefer
/// earlier grid order.
pub fn quantile_select(candidates: &[&GroupReport]) -> Result<usize> {
    candidates
        .iter()
        .enumerate()
        .filter(|(_, r)| match (r.q_hat, r.sigma_hat) {
            (Some(q), Some(s)) => q <= QUANTILE_SIGMA_FACTOR * s,
            _ => false,
        })
        .max_by(|a, b| {
            a.1.volume
                .total_cmp(&b.1.volume)
                .then(b.1.grid_index.cmp(&a.1.grid_index))
        })
        .map(|(i, _)| i)
        .ok_or(Error::SelectionFailed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiFit {
    pub reports: Vec<GroupReport>,
    pub logs: Vec<Vec<GridRecord>>,
    /// Fewer than the requested groups were found.
    pub exhausted: bool,
}

/// Fits up to `groups` regions in turn. After each round the training points
/// inside the selected region are removed, and validation points inside any
/// earlier region no longer count toward later selections.
pub fn fit_multi(train: &Dataset, val: &Dataset, cfg: &PipelineConfig, groups: usize) -> Result<MultiFit> {
    if groups == 0 {
        return Err(Error::Config("group count must be at least 1".into()));
    }
    let mut reports: Vec<GroupReport> = Vec::new();
    let mut logs = Vec::new();
    let mut train_left = train.clone();
    let mut val_left = Some(val.clone());
    let mut exhausted = false;

    for round in 0..groups {
        let Some(val_round) = val_left.as_ref() else {
            exhausted = true;
            break;
        };
        let result = match sweep(&train_left, val_round, cfg) {
            Ok(r) => r,
            Err(e) if round == 0 => return Err(e),
            Err(_) => {
                exhausted = true;
                break;
            }
        };
        let region = result.best.interval_box.clone();
        let keep_train = train_left.indices_where(|row| !region.contains_point(row));
        let keep_val = val_round.indices_where(|row| !region.contains_point(row));
        reports.push(result.best);
        logs.push(result.log);
        if round + 1 == groups {
            break;
        }
        if keep_train.is_empty() {
            exhausted = true;
            break;
        }
        train_left = train_left.subset(&keep_train)?;
        val_left = if keep_val.is_empty() {
            None
        } else {
            Some(val_round.subset(&keep_val)?)
        };
    }
    if exhausted {
        if let Some(last) = reports.last_mut() {
            last.add_flag(Flag::Exhausted);
        }
    }
    Ok(MultiFit {
        reports,
        logs,
        exhausted,
    })
}
