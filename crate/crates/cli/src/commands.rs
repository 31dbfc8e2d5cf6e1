use std::fmt::Write as _;
use std::path::Path;

use ddgroup::baseline::{cluster_subgroup, default_cluster_grid};
use ddgroup::bench::{rows_to_csv, rows_to_markdown, run_bench};
use ddgroup::dataset::{load_csv, split, Dataset, SplitSpec, Standardizer};
use ddgroup::numerics::{mse, ols};
use ddgroup::pipeline::{fit_multi, Flag, GridRecord, GroupReport};
use ddgroup::region::AxisBox;
use ddgroup::synth::{generate_multi, robustness_sweep, score_region, RobustnessConfig, SynthConfig};
use serde::{Deserialize, Serialize};

use crate::args::{Baseline, BenchArgs, FitArgs, ScoreArgs, SynthArgs};
use crate::config::{load_toml, to_toml, BenchSpec, FitConfig, SynthSpec, TruthFile};
use crate::error::{io_err, CliError, Result};
use crate::output::{digest_file, Outputs, RunManifest};

pub const DATA_FILE: &str = "data.csv";
pub const TRUTH_FILE: &str = "truth.json";
pub const REPORT_FILE: &str = "report.json";
pub const GRID_LOG_FILE: &str = "grid_log.json";
pub const CONFIG_FILE: &str = "resolved_config.toml";

pub fn synth(a: &SynthArgs, argv: &[String]) -> Result<RunManifest> {
    let mut spec: SynthSpec = match &a.config {
        Some(p) => load_toml(p)?,
        None => SynthSpec::default(),
    };
    if let Some(i) = a.instance {
        spec.instance = i;
    }
    if let Some(n) = a.n {
        spec.n = n;
    }
    if let Some(s) = a.seed {
        spec.seed = s;
    }
    let (multi, truth) = spec.to_truth()?;
    let data = generate_multi(&multi)?.data;

    let mut csv = Vec::new();
    data.write_csv(&mut csv)?;
    let mut out = Outputs::new(&a.out);
    out.add(DATA_FILE, csv);
    out.add_json(TRUTH_FILE, &truth)?;
    out.add(CONFIG_FILE, to_toml(&spec)?);
    let inputs = config_digest(a.config.as_deref())?;
    out.finish("synth", argv, serde_json::to_value(&spec)?, spec.seed, inputs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthMatch {
    /// Index of the best-matching planted region.
    pub region: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupOutput {
    /// Fitted in the (possibly standardized) fitting units.
    pub report: GroupReport,
    /// The region's interval box in the input CSV's units.
    pub original_box: AxisBox,
    pub truth_score: Option<TruthMatch>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOutput {
    pub target: String,
    pub n_train: usize,
    pub n_val: usize,
    pub n_test: usize,
    /// Features and target were standardized with training statistics; all
    /// MSE values are in standardized target units.
    pub standardized: bool,
    /// Test MSE of one least-squares model fit to the whole training split.
    pub whole_data_test_mse: f64,
    pub groups: Vec<GroupOutput>,
    pub exhausted: bool,
    pub baseline: Option<GroupOutput>,
}

pub fn resolve_fit_config(a: &FitArgs) -> Result<FitConfig> {
    let mut cfg: FitConfig = match &a.config {
        Some(p) => load_toml(p)?,
        None => FitConfig::default(),
    };
    if let Some(t) = &a.target {
        cfg.target = t.clone();
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
        cfg.pipeline.seed = s;
    }
    if let Some(s) = &a.split {
        cfg.split = s
            .as_slice()
            .try_into()
            .map_err(|_| CliError::Usage(format!("--split takes three fractions, got {}", s.len())))?;
    }
    if let Some(g) = a.groups {
        cfg.groups = g;
    }
    if let Some(p) = a.p_min {
        cfg.pipeline.p_min = p;
    }
    if let Some(s) = a.selection {
        cfg.pipeline.selection = s;
    }
    if let Some(s) = &a.speeds {
        cfg.pipeline.speeds = s.clone();
    }
    if let Some(b) = a.baseline {
        cfg.baseline = b;
    }
    if a.no_standardize {
        cfg.standardize = false;
    }
    if cfg.groups == 0 {
        return Err(CliError::Usage("--groups must be at least 1".into()));
    }
    cfg.pipeline.validate()?;
    Ok(cfg)
}

fn whole_data_mse(train: &Dataset, test: &Dataset) -> Result<f64> {
    let x = train.features();
    let fit = ols(x, train.d(), train.targets())?;
    Ok(mse(&fit.beta, test.features(), test.d(), test.targets())?)
}

fn match_truth(b: &AxisBox, truth: &TruthFile) -> Result<TruthMatch> {
    let mut best: Option<TruthMatch> = None;
    for (i, r) in truth.regions.iter().enumerate() {
        let s = score_region(b, &r.interval_box)?;
        if best.as_ref().is_none_or(|m| s.f1 > m.f1) {
            best = Some(TruthMatch {
                region: i,
                precision: s.precision,
                recall: s.recall,
                f1: s.f1,
            });
        }
    }
    best.ok_or_else(|| CliError::Usage("truth file lists no regions".into()))
}

fn finish_group(
    mut report: GroupReport,
    test: &Dataset,
    scaler: Option<&Standardizer>,
    truth: Option<&TruthFile>,
) -> Result<GroupOutput> {
    report.evaluate_test(test);
    let original_box = match scaler {
        Some(s) => {
            report.add_flag(Flag::StandardizedUnits);
            report.interval_box.map_coords(|j, v| s.inverse_coord(j, v))
        }
        None => report.interval_box.clone(),
    };
    let truth_score = truth.map(|t| match_truth(&original_box, t)).transpose()?;
    Ok(GroupOutput {
        report,
        original_box,
        truth_score,
    })
}

fn mse_vs_size_csv(logs: &[Vec<GridRecord>]) -> String {
    let mut out = String::from("group,grid_index,train_fraction,val_fraction,volume,val_mse\n");
    for (g, log) in logs.iter().enumerate() {
        for rec in log {
            if let Some(r) = &rec.report {
                let m = r.val_mse.map(|v| v.to_string()).unwrap_or_default();
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    g + 1,
                    rec.index,
                    r.train_fraction,
                    r.val_fraction,
                    r.volume,
                    m
                );
            }
        }
    }
    out
}

pub fn fit(a: &FitArgs, argv: &[String]) -> Result<RunManifest> {
    let cfg = resolve_fit_config(a)?;
    let truth: Option<TruthFile> = match &a.score_truth {
        Some(p) => Some(read_json(p)?),
        None => None,
    };
    let data = load_csv(&a.data, &cfg.target, true)?;
    let spec = SplitSpec::new(cfg.split[0], cfg.split[1], cfg.split[2], cfg.seed)?;
    let (train, val, test) = split(&data, &spec)?;
    let scaler = if cfg.standardize {
        Some(Standardizer::fit(&train, true)?)
    } else {
        None
    };
    let (train, val, test) = match &scaler {
        Some(s) => (s.apply(&train)?, s.apply(&val)?, s.apply(&test)?),
        None => (train, val, test),
    };
    if train.n() <= train.d() {
        return Err(CliError::Usage(format!(
            "training split has {} rows, too few for any grid point",
            train.n()
        )));
    }

    let multi = fit_multi(&train, &val, &cfg.pipeline, cfg.groups)?;
    let groups = multi
        .reports
        .iter()
        .map(|r| finish_group(r.clone(), &test, scaler.as_ref(), truth.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    let baseline = match cfg.baseline {
        Baseline::None => None,
        Baseline::Kmeans => {
            let grid = if cfg.clusters.is_empty() {
                default_cluster_grid(&train)
            } else {
                cfg.clusters.clone()
            };
            let res = cluster_subgroup(&train, &val, &grid, cfg.pipeline.p_min, cfg.pipeline.refit, cfg.seed)?;
            Some(finish_group(res.best, &test, scaler.as_ref(), truth.as_ref())?)
        }
    };
    let output = FitOutput {
        target: cfg.target.clone(),
        n_train: train.n(),
        n_val: val.n(),
        n_test: test.n(),
        standardized: scaler.is_some(),
        whole_data_test_mse: whole_data_mse(&train, &test)?,
        groups,
        exhausted: multi.exhausted,
        baseline,
    };

    let mut out = Outputs::new(&a.out);
    out.add_json(REPORT_FILE, &output)?;
    out.add_json(GRID_LOG_FILE, &multi.logs)?;
    out.add("mse_vs_size.csv", mse_vs_size_csv(&multi.logs));
    out.add(CONFIG_FILE, to_toml(&cfg)?);
    let mut inputs = vec![digest_file(&a.data)?];
    inputs.extend(config_digest(a.config.as_deref())?);
    if let Some(p) = &a.score_truth {
        inputs.push(digest_file(p)?);
    }
    out.finish("fit", argv, serde_json::to_value(&cfg)?, cfg.seed, inputs)
}

pub fn resolve_bench_spec(a: &BenchArgs) -> Result<BenchSpec> {
    let mut spec: BenchSpec = match &a.config {
        Some(p) => load_toml(p)?,
        None => BenchSpec::default(),
    };
    if let Some(s) = &a.sizes {
        spec.bench.sizes = s.clone();
    }
    if let Some(t) = a.trials {
        spec.bench.trials = t;
        spec.robustness.trials = t;
    }
    if let Some(s) = a.seed {
        spec.bench.seed = s;
    }
    Ok(spec)
}

pub fn bench(a: &BenchArgs, argv: &[String]) -> Result<RunManifest> {
    let spec = resolve_bench_spec(a)?;
    let mut out = Outputs::new(&a.out);
    if a.robustness {
        let cfg = SynthConfig::demo_instance(spec.robustness.n, spec.bench.seed);
        let rc = RobustnessConfig {
            trials: spec.robustness.trials,
            ..RobustnessConfig::for_config(&cfg, spec.robustness.offsets.clone())
        };
        let points = robustness_sweep(&cfg, &rc)?;
        let mut csv = String::from(
            "offset,precision_mean,precision_sem,recall_mean,recall_sem,f1_mean,f1_sem,core_outside_mean\n",
        );
        for p in &points {
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{},{}",
                p.offset,
                p.precision.mean,
                p.precision.sem,
                p.recall.mean,
                p.recall.sem,
                p.f1.mean,
                p.f1.sem,
                p.core_outside.mean
            );
        }
        out.add_json("robustness.json", &points)?;
        out.add("f1_vs_offset.csv", csv);
    } else {
        let rows = run_bench(&spec.bench)?;
        out.add_json("bench.json", &rows)?;
        out.add("bench.csv", rows_to_csv(&rows));
        out.add("bench.md", rows_to_markdown(&rows));
    }
    out.add(CONFIG_FILE, to_toml(&spec)?);
    let inputs = config_digest(a.config.as_deref())?;
    out.finish("bench", argv, serde_json::to_value(&spec)?, spec.bench.seed, inputs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreOutput {
    pub groups: Vec<TruthMatch>,
    pub baseline: Option<TruthMatch>,
}

pub fn score(a: &ScoreArgs) -> Result<ScoreOutput> {
    let report: FitOutput = read_json(&a.report)?;
    let truth: TruthFile = read_json(&a.truth)?;
    let scores = ScoreOutput {
        groups: report
            .groups
            .iter()
            .map(|g| match_truth(&g.original_box, &truth))
            .collect::<Result<_>>()?,
        baseline: report
            .baseline
            .as_ref()
            .map(|g| match_truth(&g.original_box, &truth))
            .transpose()?,
    };
    if let Some(path) = &a.out {
        let mut text = serde_json::to_string_pretty(&scores)?;
        text.push('\n');
        std::fs::write(path, text).map_err(io_err(path))?;
    }
    Ok(scores)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| CliError::ConfigFile {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn config_digest(path: Option<&Path>) -> Result<Vec<crate::output::FileDigest>> {
    path.map(digest_file).into_iter().collect()
}
