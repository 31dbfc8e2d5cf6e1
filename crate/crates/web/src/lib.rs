//! WebAssembly bindings for the browser demo. Every exported function returns
//! a JSON string; the page in `www/` draws it on a canvas.

use ddgroup::coregroup::find_core_group;
use ddgroup::neighbors::KnnIndex;
use ddgroup::pipeline::{grow_from_core, SigmaSource, ThresholdRule};
use ddgroup::region::{box_of, SpeedPreset};
use ddgroup::synth::{generate, robustness_sweep, score_region, RegionScore, RobustnessConfig, RobustnessPoint, SynthConfig};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Keeps a single call under a second or so in the browser.
pub const MAX_POINTS: usize = 5000;
pub const MAX_TRIALS: usize = 50;
/// Smaller samples leave the hand-placed core box too sparse to fit.
pub const MIN_SWEEP_POINTS: usize = 500;

#[derive(Debug, Serialize)]
pub struct DemoPoint {
    pub x: f64,
    pub y: f64,
    pub rejected: bool,
    pub in_core: bool,
}

#[derive(Debug, Serialize)]
pub struct Step {
    pub face: String,
    pub value: f64,
    /// Index into `points` of the rejected point that stopped the face.
    pub support: Option<usize>,
    /// Box after this face was fixed: `[x_lo, x_hi, y_lo, y_hi]`.
    pub region: [f64; 4],
}

#[derive(Debug, Serialize)]
pub struct DemoFit {
    pub points: Vec<DemoPoint>,
    pub truth: [f64; 4],
    pub region: [f64; 4],
    pub center: [f64; 2],
    pub rho: f64,
    pub steps: Vec<Step>,
    pub score: RegionScore,
}

fn rect(lo: &[f64], hi: &[f64]) -> [f64; 4] {
    [lo[0], hi[0], lo[1], hi[1]]
}

/// Generates the rectangle instance, finds the core group, rejects with the
/// theory threshold at the true noise level and grows the box, recording the
/// box after every fixed face.
pub fn demo_fit(n: usize, seed: u64, shrinkage: f64, bbox_speeds: bool) -> ddgroup::Result<DemoFit> {
    let cfg = SynthConfig::demo_instance(n.clamp(50, MAX_POINTS), seed);
    let data = generate(&cfg)?.data;
    let k = (data.n() / 20).max(data.d() + 1);
    let index = KnnIndex::build(data.features(), data.d())?;
    let core = find_core_group(&data, k, &index)?;
    let rule = ThresholdRule::Theory {
        sigma: SigmaSource::Known(cfg.sigma_in),
    };
    let speeds = if bbox_speeds { SpeedPreset::Bbox } else { SpeedPreset::Uniform };
    let phases = grow_from_core(&data, &core, &rule, speeds, shrinkage)?;

    let mut in_core = vec![false; data.n()];
    for &i in &core.members {
        in_core[i] = true;
    }
    let points = (0..data.n())
        .map(|i| DemoPoint {
            x: data.row(i)[0],
            y: data.row(i)[1],
            rejected: phases.rejected[i],
            in_core: in_core[i],
        })
        .collect();

    // replay the constraints one at a time to show the box shrinking
    let bounds = &phases.region.bounding_box;
    let mut lo = bounds.lo().to_vec();
    let mut hi = bounds.hi().to_vec();
    let steps = phases
        .region
        .constraints
        .iter()
        .map(|c| {
            if let Some((j, u)) = c.direction.axis_component() {
                let edge = core.center[j] + c.value / u;
                if u > 0.0 {
                    hi[j] = hi[j].min(edge);
                } else {
                    lo[j] = lo[j].max(edge);
                }
            }
            Step {
                face: c.direction.label.clone(),
                value: c.value,
                support: c.support,
                region: rect(&lo, &hi),
            }
        })
        .collect();

    let final_box = box_of(&phases.region)?;
    Ok(DemoFit {
        points,
        truth: rect(cfg.truth.lo(), cfg.truth.hi()),
        region: rect(final_box.lo(), final_box.hi()),
        center: [core.center[0], core.center[1]],
        rho: phases.threshold.offset,
        steps,
        score: score_region(&final_box, &cfg.truth)?,
    })
}

/// F1, precision and recall against the offset of a hand-placed core box.
pub fn robustness(n: usize, trials: usize, seed: u64) -> ddgroup::Result<Vec<RobustnessPoint>> {
    let cfg = SynthConfig::demo_instance(n.clamp(MIN_SWEEP_POINTS, MAX_POINTS), seed);
    let offsets = (0..=8).map(|i| i as f64 / 12.0).collect();
    let rc = RobustnessConfig {
        trials: trials.clamp(1, MAX_TRIALS),
        ..RobustnessConfig::for_config(&cfg, offsets)
    };
    robustness_sweep(&cfg, &rc)
}

fn to_js<T: Serialize>(value: ddgroup::Result<T>) -> Result<String, JsError> {
    let value = value.map_err(|e| JsError::new(&e.to_string()))?;
    serde_json::to_string(&value).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = demoFit)]
pub fn demo_fit_js(n: usize, seed: u64, shrinkage: f64, bbox_speeds: bool) -> Result<String, JsError> {
    to_js(demo_fit(n, seed, shrinkage, bbox_speeds))
}

#[wasm_bindgen(js_name = robustnessCurve)]
pub fn robustness_js(n: usize, trials: usize, seed: u64) -> Result<String, JsError> {
    to_js(robustness(n, trials, seed))
}
