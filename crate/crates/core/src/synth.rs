//! Synthetic data with a planted region, region-overlap scoring and the
//! misspecified-core robustness harness.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::coregroup::CoreGroup;
use crate::dataset::{Dataset, INTERCEPT_NAME};
use crate::error::{Error, Result};
use crate::numerics::dot;
use crate::pipeline::{grow_from_core, SigmaSource, ThresholdRule};
use crate::region::{box_of, AxisBox, SpeedPreset};

/// Features uniform on `bounds`; inside `truth` the response is
/// `betaᵀx + N(0, sigma_in²)`, outside it is pure noise `N(0, sigma_out²)`.
///
/// Degenerate dimensions of `bounds` are constant columns; a trailing
/// constant 1 is treated as the intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub bounds: AxisBox,
    pub truth: AxisBox,
    pub beta: Vec<f64>,
    pub sigma_in: f64,
    pub sigma_out: f64,
    pub n: usize,
    pub seed: u64,
}

fn planted_box(x_half: f64, y_half: f64) -> AxisBox {
    AxisBox::from_intervals(&[(-x_half, x_half), (-y_half, y_half), (1.0, 1.0)]).expect("valid box")
}

pub const DEFAULT_BETA: [f64; 3] = [1.0, 1.0, 1.0];

impl SynthConfig {
    /// `B = [-1,1]² × {1}`, `R* = [-1/3,1/3] × [-2/3,2/3] × {1}`.
    pub fn demo_instance(n: usize, seed: u64) -> Self {
        Self {
            bounds: planted_box(1.0, 1.0),
            truth: planted_box(1.0 / 3.0, 2.0 / 3.0),
            beta: DEFAULT_BETA.to_vec(),
            sigma_in: 0.3,
            sigma_out: 5.0,
            n,
            seed,
        }
    }

    /// `B = [-1,1]² × {1}`, `R* = [-1/3,1/3]² × {1}`, noise 0.3 inside and 5.0 outside.
    pub fn sample_size_instance(n: usize, seed: u64) -> Self {
        Self {
            truth: planted_box(1.0 / 3.0, 1.0 / 3.0),
            ..Self::demo_instance(n, seed)
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.bounds.dim();
        if self.truth.dim() != d || self.beta.len() != d {
            return Err(Error::Config(format!(
                "bounds, truth and beta must share dimension {d}"
            )));
        }
        if self.bounds.is_empty() || !self.bounds.encloses(&self.truth) {
            return Err(Error::Config("truth region must lie inside the bounds".into()));
        }
        if self.truth.volume_over(&self.bounds.nondegenerate_dims()) <= 0.0 {
            return Err(Error::Config("truth region must have positive volume".into()));
        }
        if !(self.sigma_in >= 0.0 && self.sigma_in < self.sigma_out && self.sigma_out.is_finite()) {
            return Err(Error::Config(format!(
                "need 0 <= sigma_in < sigma_out, got {} and {}",
                self.sigma_in, self.sigma_out
            )));
        }
        if self.beta.iter().all(|b| *b == 0.0) || self.beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::Config("beta must be finite and nonzero".into()));
        }
        if self.n == 0 {
            return Err(Error::Config("n must be positive".into()));
        }
        Ok(())
    }

    /// Expected fraction of points inside the truth region.
    pub fn truth_fraction(&self) -> f64 {
        let dims = self.bounds.nondegenerate_dims();
        self.truth.volume_over(&dims) / self.bounds.volume_over(&dims)
    }
}

/// Generated data plus ground-truth region membership per row. Membership is
/// for evaluation only.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthData {
    pub data: Dataset,
    /// Index of the planted region containing each row.
    pub membership: Vec<Option<usize>>,
}

impl SynthData {
    pub fn in_truth(&self) -> Vec<bool> {
        self.membership.iter().map(Option::is_some).collect()
    }
}

fn feature_layout(bounds: &AxisBox) -> (Vec<String>, bool) {
    let d = bounds.dim();
    let intercept = bounds.side(d - 1) == 0.0 && bounds.lo()[d - 1] == 1.0;
    let names = (0..d)
        .map(|j| {
            if intercept && j == d - 1 {
                INTERCEPT_NAME.to_string()
            } else {
                format!("x{}", j + 1)
            }
        })
        .collect();
    (names, intercept)
}

fn sample_point(rng: &mut ChaCha8Rng, bounds: &AxisBox) -> Vec<f64> {
    (0..bounds.dim())
        .map(|j| {
            let (lo, hi) = (bounds.lo()[j], bounds.hi()[j]);
            if hi > lo {
                rng.random_range(lo..hi)
            } else {
                lo
            }
        })
        .collect()
}

fn normal(sigma: f64) -> Normal<f64> {
    Normal::new(0.0, sigma).expect("sigma validated nonnegative")
}

pub fn generate(cfg: &SynthConfig) -> Result<SynthData> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (names, intercept) = feature_layout(&cfg.bounds);
    let (inside, outside) = (normal(cfg.sigma_in), normal(cfg.sigma_out));
    let mut features = Vec::with_capacity(cfg.n * cfg.bounds.dim());
    let mut targets = Vec::with_capacity(cfg.n);
    let mut membership = Vec::with_capacity(cfg.n);
    for _ in 0..cfg.n {
        let x = sample_point(&mut rng, &cfg.bounds);
        if cfg.truth.contains_point(&x) {
            targets.push(dot(&cfg.beta, &x) + inside.sample(&mut rng));
            membership.push(Some(0));
        } else {
            targets.push(outside.sample(&mut rng));
            membership.push(None);
        }
        features.extend(x);
    }
    Ok(SynthData {
        data: Dataset::new(features, targets, names, "y", intercept)?,
        membership,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedRegion {
    pub truth: AxisBox,
    pub beta: Vec<f64>,
    pub sigma: f64,
}

/// Several disjoint planted regions, each with its own linear model, over a
/// shared pure-noise background.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiSynthConfig {
    pub bounds: AxisBox,
    pub regions: Vec<PlantedRegion>,
    pub sigma_out: f64,
    pub n: usize,
    pub seed: u64,
}

impl MultiSynthConfig {
    /// Two disjoint squares in opposite corners of `[-1,1]²` with distinct models.
    pub fn two_regions(n: usize, seed: u64) -> Self {
        let square = |lo: f64, hi: f64| {
            AxisBox::from_intervals(&[(lo, hi), (lo, hi), (1.0, 1.0)]).expect("valid box")
        };
        Self {
            bounds: planted_box(1.0, 1.0),
            regions: vec![
                PlantedRegion {
                    truth: square(-0.9, -0.2),
                    beta: vec![2.0, -1.0, 0.5],
                    sigma: 0.3,
                },
                PlantedRegion {
                    truth: square(0.2, 0.9),
                    beta: vec![-1.0, 2.0, -0.5],
                    sigma: 0.3,
                },
            ],
            sigma_out: 5.0,
            n,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.regions.is_empty() {
            return Err(Error::Config("at least one planted region is required".into()));
        }
        for r in &self.regions {
            SynthConfig {
                bounds: self.bounds.clone(),
                truth: r.truth.clone(),
                beta: r.beta.clone(),
                sigma_in: r.sigma,
                sigma_out: self.sigma_out,
                n: self.n,
                seed: self.seed,
            }
            .validate()?;
        }
        let dims = self.bounds.nondegenerate_dims();
        for (i, a) in self.regions.iter().enumerate() {
            for b in &self.regions[i + 1..] {
                if a.truth.intersect(&b.truth)?.volume_over(&dims) > 0.0 {
                    return Err(Error::Config("planted regions must be disjoint".into()));
                }
            }
        }
        Ok(())
    }
}

pub fn generate_multi(cfg: &MultiSynthConfig) -> Result<SynthData> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (names, intercept) = feature_layout(&cfg.bounds);
    let outside = normal(cfg.sigma_out);
    let noise: Vec<Normal<f64>> = cfg.regions.iter().map(|r| normal(r.sigma)).collect();
    let mut features = Vec::with_capacity(cfg.n * cfg.bounds.dim());
    let mut targets = Vec::with_capacity(cfg.n);
    let mut membership = Vec::with_capacity(cfg.n);
    for _ in 0..cfg.n {
        let x = sample_point(&mut rng, &cfg.bounds);
        let g = cfg.regions.iter().position(|r| r.truth.contains_point(&x));
        let y = match g {
            Some(g) => dot(&cfg.regions[g].beta, &x) + noise[g].sample(&mut rng),
            None => outside.sample(&mut rng),
        };
        targets.push(y);
        membership.push(g);
        features.extend(x);
    }
    Ok(SynthData {
        data: Dataset::new(features, targets, names, "y", intercept)?,
        membership,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl RegionScore {
    pub fn new(precision: f64, recall: f64) -> Self {
        let f1 = if precision > 0.0 && recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Self {
            precision,
            recall,
            f1,
        }
    }
}

/// Volume-overlap precision, recall and F1, measured over the dimensions in
/// which `truth` has positive extent.
pub fn score_region(estimate: &AxisBox, truth: &AxisBox) -> Result<RegionScore> {
    if estimate.dim() != truth.dim() {
        return Err(Error::DimensionMismatch {
            expected: truth.dim(),
            got: estimate.dim(),
        });
    }
    let dims = truth.nondegenerate_dims();
    let truth_volume = truth.volume_over(&dims);
    if dims.is_empty() || truth_volume <= 0.0 {
        return Err(Error::Config("truth region must have positive volume".into()));
    }
    let overlap = estimate.intersect(truth)?.volume_over(&dims);
    let est_volume = estimate.volume_over(&dims);
    let precision = if est_volume > 0.0 { overlap / est_volume } else { 0.0 };
    Ok(RegionScore::new(precision, overlap / truth_volume))
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSem {
    pub mean: f64,
    pub sem: f64,
}

impl MeanSem {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self {
                mean: f64::NAN,
                sem: f64::NAN,
            };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let sem = if n > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Self { mean, sem }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessConfig {
    /// Shift applied to every free coordinate of the truth center.
    pub offsets: Vec<f64>,
    /// Half-widths of the supplied core box per free dimension; defaults to a
    /// quarter of the truth side lengths.
    pub core_halfwidth: Option<Vec<f64>>,
    pub trials: usize,
    pub threshold: ThresholdRule,
    pub speeds: SpeedPreset,
    pub shrinkage: f64,
}

impl RobustnessConfig {
    /// Uniform speeds, no shrinkage, theory threshold with the true inside noise.
    pub fn for_config(cfg: &SynthConfig, offsets: Vec<f64>) -> Self {
        Self {
            offsets,
            core_halfwidth: None,
            trials: 50,
            threshold: ThresholdRule::Theory {
                sigma: SigmaSource::Known(cfg.sigma_in),
            },
            speeds: SpeedPreset::Uniform,
            shrinkage: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessPoint {
    pub offset: f64,
    pub precision: MeanSem,
    pub recall: MeanSem,
    pub f1: MeanSem,
    /// Share of supplied core points lying outside the truth region.
    pub core_outside: MeanSem,
}

struct TrialScore {
    score: RegionScore,
    core_outside: f64,
}

/// Replaces the core search with a hand-placed core box centered at the truth
/// center shifted by `offset` in every free dimension, then runs rejection and
/// box growth. Each trial reuses one dataset across all offsets.
pub fn robustness_sweep(cfg: &SynthConfig, rc: &RobustnessConfig) -> Result<Vec<RobustnessPoint>> {
    cfg.validate()?;
    rc.threshold.validate()?;
    if rc.trials == 0 || rc.offsets.is_empty() {
        return Err(Error::Config("need at least one trial and one offset".into()));
    }
    let dims = cfg.bounds.nondegenerate_dims();
    let halfwidth = match &rc.core_halfwidth {
        Some(h) if h.len() == dims.len() => h.clone(),
        Some(h) => {
            return Err(Error::DimensionMismatch {
                expected: dims.len(),
                got: h.len(),
            })
        }
        None => dims.iter().map(|&j| cfg.truth.side(j) / 4.0).collect(),
    };
    let truth_center = cfg.truth.center();
    for &o in &rc.offsets {
        let shifted = dims.iter().all(|&j| {
            let c = truth_center[j] + o;
            cfg.bounds.lo()[j] <= c && c <= cfg.bounds.hi()[j]
        });
        if !shifted {
            return Err(Error::Config(format!("offset {o} moves the core center outside the bounds")));
        }
    }

    let trials: Vec<Result<Vec<TrialScore>>> = crate::par::map_indexed(rc.trials, |t| {
        let synth = generate(&cfg.with_seed(cfg.seed.wrapping_add(t as u64)))?;
        let data = &synth.data;
        rc.offsets
            .iter()
            .map(|&offset| {
                let members = data.indices_where(|row| {
                    dims.iter()
                        .zip(&halfwidth)
                        .all(|(&j, h)| (row[j] - truth_center[j] - offset).abs() <= *h)
                });
                let outside = members.iter().filter(|&&i| synth.membership[i].is_none()).count();
                let core_outside = outside as f64 / members.len().max(1) as f64;
                let core = CoreGroup::from_members(data, members, None)?;
                let phases = grow_from_core(data, &core, &rc.threshold, rc.speeds, rc.shrinkage)?;
                Ok(TrialScore {
                    score: score_region(&box_of(&phases.region)?, &cfg.truth)?,
                    core_outside,
                })
            })
            .collect()
    });
    let trials: Vec<Vec<TrialScore>> = trials.into_iter().collect::<Result<_>>()?;

    Ok(rc
        .offsets
        .iter()
        .enumerate()
        .map(|(i, &offset)| {
            let pick = |f: &dyn Fn(&TrialScore) -> f64| {
                MeanSem::of(&trials.iter().map(|t| f(&t[i])).collect::<Vec<_>>())
            };
            RobustnessPoint {
                offset,
                precision: pick(&|t| t.score.precision),
                recall: pick(&|t| t.score.recall),
                f1: pick(&|t| t.score.f1),
                core_outside: pick(&|t| t.core_outside),
            }
        })
        .collect())
}
