//! Sample-size benchmark on the synthetic instance: F1 of the recovered
//! region for the subgroup pipeline and the k-means baseline.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::baseline::cluster_subgroup;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::pipeline::{sweep, PipelineConfig};
use crate::synth::{generate, score_region, MeanSem, SynthConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub trials: usize,
    /// Leading share of each sample used for training; the rest is validation.
    pub train_fraction: f64,
    pub pipeline: PipelineConfig,
    /// Minimum validation share for the k-means baseline.
    pub baseline_p_min: f64,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            sizes: vec![200, 400, 800, 1600, 3200, 6400, 12800],
            trials: 20,
            train_fraction: 0.8,
            pipeline: PipelineConfig::synthetic_benchmark(),
            baseline_p_min: 0.05,
            seed: 0,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() || self.trials == 0 {
            return Err(Error::Config("benchmark needs at least one size and one trial".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config(format!(
                "train fraction must lie in (0, 1), got {}",
                self.train_fraction
            )));
        }
        self.pipeline.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n: usize,
    pub ddgroup: MeanSem,
    pub kmeans: MeanSem,
    /// Trials where a method returned no region; these score F1 = 0.
    pub ddgroup_failures: usize,
    pub kmeans_failures: usize,
}

/// F1 scores for one trial: `(ddgroup, kmeans)`, `None` on failure.
pub fn run_trial(cfg: &BenchConfig, n: usize, trial: usize) -> Result<(Option<f64>, Option<f64>)> {
    let synth = SynthConfig::sample_size_instance(n, trial_seed(cfg.seed, n, trial));
    let data = generate(&synth)?.data;
    let (train, val) = head_split(&data, cfg.train_fraction)?;
    let ours = sweep(&train, &val, &cfg.pipeline)
        .ok()
        .map(|r| score_region(&r.best.interval_box, &synth.truth))
        .transpose()?
        .map(|s| s.f1);
    let grid: Vec<usize> = (2..=2 * (train.d() - 1)).collect();
    let theirs = cluster_subgroup(&train, &val, &grid, cfg.baseline_p_min, cfg.pipeline.refit, synth.seed)
        .ok()
        .map(|r| score_region(&r.best.interval_box, &synth.truth))
        .transpose()?
        .map(|s| s.f1);
    Ok((ours, theirs))
}

fn trial_seed(seed: u64, n: usize, trial: usize) -> u64 {
    seed.wrapping_mul(1_000_003)
        .wrapping_add((n as u64).wrapping_mul(7919))
        .wrapping_add(trial as u64)
}

fn head_split(data: &Dataset, train_fraction: f64) -> Result<(Dataset, Dataset)> {
    let n_train = ((data.n() as f64) * train_fraction).round() as usize;
    if n_train == 0 || n_train >= data.n() {
        return Err(Error::InvalidSplit(format!(
            "{} rows cannot be split at {train_fraction}",
            data.n()
        )));
    }
    let train: Vec<usize> = (0..n_train).collect();
    let val: Vec<usize> = (n_train..data.n()).collect();
    Ok((data.subset(&train)?, data.subset(&val)?))
}

pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    cfg.validate()?;
    cfg.sizes
        .iter()
        .map(|&n| {
            let outcomes = crate::par::map_indexed(cfg.trials, |t| run_trial(cfg, n, t));
            let outcomes: Vec<(Option<f64>, Option<f64>)> = outcomes.into_iter().collect::<Result<_>>()?;
            let ours: Vec<f64> = outcomes.iter().map(|o| o.0.unwrap_or(0.0)).collect();
            let theirs: Vec<f64> = outcomes.iter().map(|o| o.1.unwrap_or(0.0)).collect();
            Ok(BenchRow {
                n,
                ddgroup: MeanSem::of(&ours),
                kmeans: MeanSem::of(&theirs),
                ddgroup_failures: outcomes.iter().filter(|o| o.0.is_none()).count(),
                kmeans_failures: outcomes.iter().filter(|o| o.1.is_none()).count(),
            })
        })
        .collect()
}

pub fn rows_to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("n,ddgroup_f1_mean,ddgroup_f1_sem,kmeans_f1_mean,kmeans_f1_sem,ddgroup_failures,kmeans_failures\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.n, r.ddgroup.mean, r.ddgroup.sem, r.kmeans.mean, r.kmeans.sem, r.ddgroup_failures, r.kmeans_failures
        );
    }
    out
}

pub fn rows_to_markdown(rows: &[BenchRow]) -> String {
    let mut out = String::from("| n | DDGroup F1 | k-means F1 |\n|---:|---:|---:|\n");
    for r in rows {
        let _ = writeln!(
            out,
            "| {} | {:.3} ± {:.3} | {:.3} ± {:.3} |",
            r.n, r.ddgroup.mean, r.ddgroup.sem, r.kmeans.mean, r.kmeans.sem
        );
    }
    out
}
