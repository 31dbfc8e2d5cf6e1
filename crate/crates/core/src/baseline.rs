//! k-means clustering baseline: pick the cluster whose own least-squares fit
//! has the lowest MSE and report its bounding box as the subgroup.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coregroup::gather;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::numerics::{ols, LinearFit};
use crate::pipeline::{assess, valmse_select, Flag, GroupReport, Hyper};
use crate::region::{AxisBox, Region};

pub const MAX_LLOYD_ITERATIONS: usize = 300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeans {
    pub assignments: Vec<usize>,
    /// Row-major `K × d`.
    pub centroids: Vec<f64>,
    pub clusters: usize,
    pub d: usize,
    /// Within-cluster sum of squares after initialization and after each iteration.
    pub wcss_history: Vec<f64>,
    pub iterations: usize,
}

impl KMeans {
    pub fn centroid(&self, c: usize) -> &[f64] {
        &self.centroids[c * self.d..(c + 1) * self.d]
    }

    pub fn wcss(&self) -> f64 {
        *self.wcss_history.last().expect("history is nonempty")
    }
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}

fn nearest(x: &[f64], centroids: &[f64], d: usize) -> (usize, f64) {
    centroids
        .chunks_exact(d)
        .enumerate()
        .map(|(c, m)| (c, dist2(x, m)))
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
}

fn seed_centroids(points: &[f64], d: usize, clusters: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = points.len() / d;
    let row = |i: usize| &points[i * d..(i + 1) * d];
    let mut chosen = vec![rng.random_range(0..n)];
    let mut closest: Vec<f64> = (0..n).map(|i| dist2(row(i), row(chosen[0]))).collect();
    while chosen.len() < clusters {
        let total: f64 = closest.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random_range(0.0..total);
            let mut pick = n - 1;
            for (i, w) in closest.iter().enumerate() {
                if target < *w {
                    pick = i;
                    break;
                }
                target -= w;
            }
            pick
        } else {
            // every point coincides with a centroid already
            (0..n).find(|i| !chosen.contains(i)).unwrap_or(0)
        };
        chosen.push(next);
        for (i, c) in closest.iter_mut().enumerate() {
            *c = c.min(dist2(row(i), row(next)));
        }
    }
    chosen.iter().flat_map(|&i| row(i).iter().copied()).collect()
}

/// Lloyd iterations from a seeded k-means++ start, until the assignment stops
/// changing or [`MAX_LLOYD_ITERATIONS`] is reached. Empty clusters keep their
/// previous centroid.
pub fn kmeans(points: &[f64], d: usize, clusters: usize, seed: u64) -> Result<KMeans> {
    if points.is_empty() || d == 0 {
        return Err(Error::Empty("k-means on no points"));
    }
    let n = points.len() / d;
    if clusters == 0 || clusters > n {
        return Err(Error::Config(format!("cluster count {clusters} must lie in 1..={n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = seed_centroids(points, d, clusters, &mut rng);
    let assign = |centroids: &[f64]| -> (Vec<usize>, f64) {
        let mut wcss = 0.0;
        let a = points
            .chunks_exact(d)
            .map(|x| {
                let (c, dd) = nearest(x, centroids, d);
                wcss += dd;
                c
            })
            .collect();
        (a, wcss)
    };
    let (mut assignments, wcss) = assign(&centroids);
    let mut wcss_history = vec![wcss];
    let mut iterations = 0;

    while iterations < MAX_LLOYD_ITERATIONS {
        iterations += 1;
        let mut sums = vec![0.0; clusters * d];
        let mut counts = vec![0usize; clusters];
        for (x, &c) in points.chunks_exact(d).zip(&assignments) {
            counts[c] += 1;
            for (s, v) in sums[c * d..(c + 1) * d].iter_mut().zip(x) {
                *s += v;
            }
        }
        for c in 0..clusters {
            if counts[c] > 0 {
                for j in 0..d {
                    centroids[c * d + j] = sums[c * d + j] / counts[c] as f64;
                }
            }
        }
        let (next, wcss) = assign(&centroids);
        wcss_history.push(wcss);
        if next == assignments {
            break;
        }
        assignments = next;
    }

    Ok(KMeans {
        assignments,
        centroids,
        clusters,
        d,
        wcss_history,
        iterations,
    })
}

/// The cluster picked for one cluster count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSubgroup {
    pub clustering: KMeans,
    pub selected: usize,
    /// Exact per-dimension extent of the selected cluster's members.
    pub bounding_box: AxisBox,
    pub fit: LinearFit,
    pub members: Vec<usize>,
}

/// Clusters the training features and selects the cluster with the lowest
/// in-cluster OLS training MSE. Clusters with at most `d` members, or with a
/// rank-deficient design, are not eligible.
pub fn select_cluster(train: &Dataset, clusters: usize, seed: u64) -> Result<ClusterSubgroup> {
    let clustering = kmeans(train.features(), train.d(), clusters, seed)?;
    let mut best: Option<(usize, LinearFit, Vec<usize>)> = None;
    for c in 0..clusters {
        let members: Vec<usize> = (0..train.n()).filter(|&i| clustering.assignments[i] == c).collect();
        if members.len() <= train.d() {
            continue;
        }
        let (x, y) = gather(train, &members);
        let Ok(fit) = ols(&x, train.d(), &y) else {
            continue;
        };
        if best.as_ref().is_none_or(|(_, f, _)| fit.train_mse < f.train_mse) {
            best = Some((c, fit, members));
        }
    }
    let (selected, fit, members) = best.ok_or(Error::NoValidNeighborhood)?;
    let (x, _) = gather(train, &members);
    let bounding_box = AxisBox::bounding(&x, train.d())?;
    Ok(ClusterSubgroup {
        clustering,
        selected,
        bounding_box,
        fit,
        members,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineResult {
    pub best: GroupReport,
    /// One report per cluster count that produced an eligible cluster.
    pub log: Vec<GroupReport>,
}

/// Runs [`select_cluster`] for every cluster count and picks one by the
/// validation-MSE rule with minimum validation share `p_min`.
pub fn cluster_subgroup(
    train: &Dataset,
    val: &Dataset,
    cluster_grid: &[usize],
    p_min: f64,
    refit: bool,
    seed: u64,
) -> Result<BaselineResult> {
    if cluster_grid.is_empty() {
        return Err(Error::Config("cluster grid must be nonempty".into()));
    }
    let bounds = AxisBox::bounding(train.features(), train.d())?;
    let outcomes: Vec<Result<GroupReport>> = crate::par::map_indexed(cluster_grid.len(), |i| {
        let clusters = cluster_grid[i];
        let chosen = select_cluster(train, clusters, seed)?;
        let region = Region::unconstrained(
            chosen.clustering.centroid(chosen.selected).to_vec(),
            chosen.bounding_box.intersect(&bounds)?,
        );
        assess(
            train,
            val,
            region,
            None,
            &chosen.fit,
            0,
            refit,
            Hyper::Kmeans { clusters },
            i,
            seed,
        )
    });
    let log: Vec<GroupReport> = outcomes.into_iter().filter_map(|r| r.ok()).collect();
    if log.is_empty() {
        return Err(Error::NoValidNeighborhood);
    }
    let refs: Vec<&GroupReport> = log.iter().collect();
    let (i, fallback) = valmse_select(&refs, p_min);
    let mut best = log[i].clone();
    if fallback {
        best.add_flag(Flag::Fallback);
    }
    Ok(BaselineResult { best, log })
}

/// Cluster counts from 2 to twice the number of free features.
pub fn default_cluster_grid(train: &Dataset) -> Vec<usize> {
    let free = train.d() - usize::from(train.has_intercept_column());
    (2..=(2 * free).max(2)).collect()
}
