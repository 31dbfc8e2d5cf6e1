use std::path::Path;

use ddgroup::bench::BenchConfig;
use ddgroup::pipeline::PipelineConfig;
use ddgroup::region::AxisBox;
use ddgroup::synth::{MultiSynthConfig, SynthConfig};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::args::{Baseline, Instance};
use crate::error::{io_err, CliError, Result};

pub fn load_toml<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    toml::from_str(&text).map_err(|e| CliError::ConfigFile {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn to_toml<T: Serialize>(value: &T) -> Result<String> {
    toml::to_string(value).map_err(|e| CliError::Usage(format!("cannot render config: {e}")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSpec {
    pub instance: Instance,
    pub n: usize,
    pub seed: u64,
    pub sigma_in: Option<f64>,
    pub sigma_out: Option<f64>,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            instance: Instance::Demo,
            n: 1000,
            seed: 0,
            sigma_in: None,
            sigma_out: None,
        }
    }
}

impl SynthSpec {
    pub fn to_truth(&self) -> Result<(MultiSynthConfig, TruthFile)> {
        let single = |cfg: SynthConfig| MultiSynthConfig {
            bounds: cfg.bounds,
            regions: vec![ddgroup::synth::PlantedRegion {
                truth: cfg.truth,
                beta: cfg.beta,
                sigma: cfg.sigma_in,
            }],
            sigma_out: cfg.sigma_out,
            n: cfg.n,
            seed: cfg.seed,
        };
        let mut multi = match self.instance {
            Instance::Demo => single(SynthConfig::demo_instance(self.n, self.seed)),
            Instance::SampleSize => single(SynthConfig::sample_size_instance(self.n, self.seed)),
            Instance::TwoRegions => MultiSynthConfig::two_regions(self.n, self.seed),
        };
        if let Some(s) = self.sigma_in {
            multi.regions.iter_mut().for_each(|r| r.sigma = s);
        }
        if let Some(s) = self.sigma_out {
            multi.sigma_out = s;
        }
        multi.validate()?;
        let truth = TruthFile {
            bounds: multi.bounds.clone(),
            sigma_out: multi.sigma_out,
            regions: multi
                .regions
                .iter()
                .map(|r| TruthRegion {
                    interval_box: r.truth.clone(),
                    beta: r.beta.clone(),
                    sigma: r.sigma,
                })
                .collect(),
        };
        Ok((multi, truth))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthRegion {
    pub interval_box: AxisBox,
    pub beta: Vec<f64>,
    pub sigma: f64,
}

/// Planted regions of a synthetic dataset, in the CSV's feature units plus a
/// trailing intercept coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthFile {
    pub bounds: AxisBox,
    pub sigma_out: f64,
    pub regions: Vec<TruthRegion>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub target: String,
    pub seed: u64,
    pub split: [f64; 3],
    pub groups: usize,
    pub standardize: bool,
    pub baseline: Baseline,
    /// Cluster counts for the k-means baseline; empty means 2 to twice the
    /// number of features.
    pub clusters: Vec<usize>,
    pub pipeline: PipelineConfig,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            target: "y".into(),
            seed: 0,
            split: [0.5, 0.3, 0.2],
            groups: 1,
            standardize: true,
            baseline: Baseline::None,
            clusters: Vec::new(),
            pipeline: PipelineConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RobustnessSpec {
    pub n: usize,
    pub trials: usize,
    pub offsets: Vec<f64>,
}

impl Default for RobustnessSpec {
    fn default() -> Self {
        Self {
            n: 1000,
            trials: 50,
            offsets: (0..=8).map(|i| i as f64 / 12.0).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchSpec {
    pub bench: BenchConfig,
    pub robustness: RobustnessSpec,
}

impl Default for BenchSpec {
    fn default() -> Self {
        Self {
            bench: BenchConfig::default(),
            robustness: RobustnessSpec::default(),
        }
    }
}
