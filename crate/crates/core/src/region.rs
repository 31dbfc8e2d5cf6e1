//! Regions, axis-aligned boxes and the growing-box procedure.
//!
//! A [`Region`] is a set of half-space constraints `uᵀ(x - center) <= a`
//! clipped to a bounding box. With directions `±e_j / s` it is an axis-aligned
//! box, recovered by [`box_of`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::dot;

fn is_false(b: &bool) -> bool {
    !*b
}

/// Product of closed intervals `[lo_j, hi_j]`. An empty box has `empty` set
/// and zero bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
    #[serde(default, skip_serializing_if = "is_false")]
    empty: bool,
}

impl AxisBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                got: hi.len(),
            });
        }
        if lo.is_empty() {
            return Err(Error::Empty("box of dimension zero"));
        }
        if lo.iter().chain(&hi).any(|v| v.is_nan()) {
            return Err(Error::NonFinite);
        }
        if lo.iter().zip(&hi).any(|(l, h)| l > h) {
            return Ok(Self::empty(lo.len()));
        }
        Ok(Self { lo, hi, empty: false })
    }

    pub fn from_intervals(intervals: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            intervals.iter().map(|i| i.0).collect(),
            intervals.iter().map(|i| i.1).collect(),
        )
    }

    pub fn empty(d: usize) -> Self {
        Self {
            lo: vec![0.0; d],
            hi: vec![0.0; d],
            empty: true,
        }
    }

    /// Smallest box containing every row of a row-major matrix.
    pub fn bounding(points: &[f64], d: usize) -> Result<Self> {
        if points.is_empty() || d == 0 {
            return Err(Error::Empty("bounding box of no points"));
        }
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for row in points.chunks_exact(d) {
            for j in 0..d {
                lo[j] = lo[j].min(row[j]);
                hi[j] = hi[j].max(row[j]);
            }
        }
        Self::new(lo, hi)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn is_empty(&self) -> bool {
        self.empty
    }

    pub fn side(&self, j: usize) -> f64 {
        if self.empty {
            0.0
        } else {
            self.hi[j] - self.lo[j]
        }
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(l, h)| 0.5 * (l + h)).collect()
    }

    /// Dimensions with positive extent.
    pub fn nondegenerate_dims(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&j| self.side(j) > 0.0).collect()
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if d != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: d,
            });
        }
        Ok(())
    }

    /// Closed-interval membership.
    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        self.check_dim(x.len())?;
        Ok(self.contains_point(x))
    }

    pub(crate) fn contains_point(&self, x: &[f64]) -> bool {
        !self.empty
            && x.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(v, (l, h))| *l <= *v && *v <= *h)
    }

    /// Product of side lengths over dimensions with positive extent; zero for
    /// an empty or fully degenerate box.
    pub fn volume(&self) -> f64 {
        let dims = self.nondegenerate_dims();
        if dims.is_empty() {
            return 0.0;
        }
        self.volume_over(&dims)
    }

    /// Product of side lengths over the given dimensions.
    pub fn volume_over(&self, dims: &[usize]) -> f64 {
        if self.empty {
            return 0.0;
        }
        dims.iter().map(|&j| self.side(j)).product()
    }

    pub fn intersect(&self, other: &AxisBox) -> Result<AxisBox> {
        self.check_dim(other.dim())?;
        if self.empty || other.empty {
            return Ok(Self::empty(self.dim()));
        }
        Self::new(
            self.lo.iter().zip(&other.lo).map(|(a, b)| a.max(*b)).collect(),
            self.hi.iter().zip(&other.hi).map(|(a, b)| a.min(*b)).collect(),
        )
    }

    /// Per-dimension interval containment of `other` in `self`.
    pub fn encloses(&self, other: &AxisBox) -> bool {
        if other.empty {
            return true;
        }
        !self.empty
            && (0..self.dim()).all(|j| self.lo[j] <= other.lo[j] && other.hi[j] <= self.hi[j])
    }

    /// Applies a monotone per-coordinate map to both bounds.
    pub fn map_coords(&self, f: impl Fn(usize, f64) -> f64) -> AxisBox {
        if self.empty {
            return self.clone();
        }
        Self {
            lo: self.lo.iter().enumerate().map(|(j, v)| f(j, *v)).collect(),
            hi: self.hi.iter().enumerate().map(|(j, v)| f(j, *v)).collect(),
            empty: false,
        }
    }
}

/// Outward normal of one face of the growing polytope. A face at bound `a`
/// sits at distance `a / |u|` from the center, so a face with speed `s` uses
/// a normal of length `1 / s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    pub label: String,
    pub u: Vec<f64>,
}

impl Direction {
    pub fn new(label: impl Into<String>, u: Vec<f64>) -> Result<Self> {
        if u.iter().all(|v| *v == 0.0) || u.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("direction must be finite and nonzero".into()));
        }
        Ok(Self {
            label: label.into(),
            u,
        })
    }

    /// `±e_j / speed`, labelled `+name` / `-name`.
    pub fn axis(d: usize, j: usize, positive: bool, speed: f64, name: &str) -> Result<Self> {
        if !(speed > 0.0) || !speed.is_finite() {
            return Err(Error::Config(format!("speed for {name} must be positive, got {speed}")));
        }
        let mut u = vec![0.0; d];
        u[j] = if positive { 1.0 / speed } else { -1.0 / speed };
        Self::new(format!("{}{name}", if positive { '+' } else { '-' }), u)
    }

    /// `(j, u_j)` when the direction is a signed multiple of `e_j`.
    pub fn axis_component(&self) -> Option<(usize, f64)> {
        let mut found = None;
        for (j, &v) in self.u.iter().enumerate() {
            if v != 0.0 {
                if found.is_some() {
                    return None;
                }
                found = Some((j, v));
            }
        }
        found
    }
}

/// Face growth-rate presets for axis-aligned boxes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpeedPreset {
    /// Every face grows at rate 1.
    Uniform,
    /// Faces along dimension `j` grow at the bounding-box side length.
    Bbox,
}

impl SpeedPreset {
    pub fn name(&self) -> &'static str {
        match self {
            SpeedPreset::Uniform => "uniform",
            SpeedPreset::Bbox => "bbox",
        }
    }
}

impl std::str::FromStr for SpeedPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(SpeedPreset::Uniform),
            "bbox" | "bbox-proportional" => Ok(SpeedPreset::Bbox),
            other => Err(Error::Config(format!("unknown speed preset '{other}'"))),
        }
    }
}

/// Directions `+s e_j, -s e_j` for every dimension of `bounds` with positive
/// extent, in dimension order. Degenerate dimensions (e.g. the intercept)
/// get no direction and stay clipped to the bounding box.
pub fn axis_directions(bounds: &AxisBox, preset: SpeedPreset, names: &[String]) -> Result<Vec<Direction>> {
    let dims = bounds.nondegenerate_dims();
    let speeds: Vec<(f64, f64)> = dims
        .iter()
        .map(|&j| match preset {
            SpeedPreset::Uniform => (1.0, 1.0),
            SpeedPreset::Bbox => (bounds.side(j), bounds.side(j)),
        })
        .collect();
    axis_directions_with_speeds(bounds.dim(), &dims, &speeds, names)
}

/// Directions with explicit per-face speeds `(s+, s-)` for the listed dimensions.
pub fn axis_directions_with_speeds(
    d: usize,
    dims: &[usize],
    speeds: &[(f64, f64)],
    names: &[String],
) -> Result<Vec<Direction>> {
    if dims.len() != speeds.len() {
        return Err(Error::DimensionMismatch {
            expected: dims.len(),
            got: speeds.len(),
        });
    }
    let mut out = Vec::with_capacity(2 * dims.len());
    for (&j, &(up, down)) in dims.iter().zip(speeds) {
        let name = names.get(j).cloned().unwrap_or_else(|| format!("x{}", j + 1));
        out.push(Direction::axis(d, j, true, up, &name)?);
        out.push(Direction::axis(d, j, false, down, &name)?);
    }
    Ok(out)
}

/// `max_{u ∈ U} uᵀx` together with the index of the first maximizing direction.
pub fn directed_inf_norm(x: &[f64], directions: &[Direction]) -> Result<(f64, usize)> {
    if directions.is_empty() {
        return Err(Error::Empty("directed norm over an empty direction set"));
    }
    if let Some(bad) = directions.iter().find(|u| u.u.len() != x.len()) {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: bad.u.len(),
        });
    }
    let all: Vec<usize> = (0..directions.len()).collect();
    Ok(directed_norm_over(x, directions, &all))
}

fn directed_norm_over(x: &[f64], directions: &[Direction], active: &[usize]) -> (f64, usize) {
    let mut best = (f64::NEG_INFINITY, active[0]);
    for &i in active {
        let v = dot(&directions[i].u, x);
        if v > best.0 {
            best = (v, i);
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub direction: Direction,
    /// Bound `a` in `uᵀ(x - center) <= a`.
    pub value: f64,
    /// Index of the rejected point that stopped this face, if any.
    pub support: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "RegionRecord", try_from = "RegionRecord")]
pub struct Region {
    pub center: Vec<f64>,
    /// In the order the faces were fixed.
    pub constraints: Vec<Constraint>,
    pub bounding_box: AxisBox,
}

impl Region {
    /// The bounding box with no constraints.
    pub fn unconstrained(center: Vec<f64>, bounding_box: AxisBox) -> Self {
        Self {
            center,
            constraints: Vec::new(),
            bounding_box,
        }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.bounding_box.contains_point(x)
            && self.constraints.iter().all(|c| {
                let shifted: f64 = c
                    .direction
                    .u
                    .iter()
                    .zip(x.iter().zip(&self.center))
                    .map(|(u, (xi, ci))| u * (xi - ci))
                    .sum();
                shifted <= c.value
            })
    }

    /// The interval box when every direction is axis aligned.
    pub fn to_box(&self) -> Result<AxisBox> {
        box_of(self)
    }
}

/// Converts an axis-aligned region into its interval box: `hi_j = c_j + a/u_j`
/// for faces with `u_j > 0` and `lo_j = c_j + a/u_j` for `u_j < 0`, clipped to
/// the bounding box.
pub fn box_of(region: &Region) -> Result<AxisBox> {
    if region.bounding_box.is_empty() {
        return Ok(AxisBox::empty(region.dim()));
    }
    let mut lo = region.bounding_box.lo().to_vec();
    let mut hi = region.bounding_box.hi().to_vec();
    for c in &region.constraints {
        let (j, s) = c
            .direction
            .axis_component()
            .ok_or_else(|| Error::NotAxisAligned(c.direction.label.clone()))?;
        let bound = region.center[j] + c.value / s;
        if s > 0.0 {
            hi[j] = hi[j].min(bound);
        } else {
            lo[j] = lo[j].max(bound);
        }
    }
    AxisBox::new(lo, hi)
}

/// Grows a polytope from `center` until each face is supported by a rejected
/// point or every rejected point has been excluded.
///
/// `rejected` is row-major with the same dimension as `center`. Each step
/// takes the rejected point with the smallest directed infinity norm over
/// the remaining directions, fixes the face it hits at `a* - shrinkage`,
/// drops that direction and discards every point at or beyond the new face.
/// Ties go to the earlier point, then the earlier direction.
pub fn grow_box(
    center: &[f64],
    rejected: &[f64],
    directions: &[Direction],
    shrinkage: f64,
    bounding_box: &AxisBox,
) -> Result<Region> {
    let d = center.len();
    if d == 0 {
        return Err(Error::Empty("center has dimension zero"));
    }
    if bounding_box.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: bounding_box.dim(),
        });
    }
    if rejected.len() % d != 0 {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: rejected.len() % d,
        });
    }
    if !(shrinkage >= 0.0) || !shrinkage.is_finite() {
        return Err(Error::Config(format!("shrinkage must be nonnegative, got {shrinkage}")));
    }
    if let Some(bad) = directions.iter().find(|u| u.u.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: bad.u.len(),
        });
    }

    let centered: Vec<f64> = rejected
        .chunks_exact(d)
        .flat_map(|row| row.iter().zip(center).map(|(x, c)| x - c))
        .collect();
    let point = |i: usize| &centered[i * d..(i + 1) * d];

    let mut alive: Vec<usize> = (0..centered.len() / d).collect();
    let mut active: Vec<usize> = (0..directions.len()).collect();
    let mut constraints = Vec::new();

    while !alive.is_empty() && !active.is_empty() {
        let mut best: Option<(f64, usize, usize)> = None;
        for &p in &alive {
            let (norm, dir) = directed_norm_over(point(p), directions, &active);
            if best.is_none_or(|(b, _, _)| norm < b) {
                best = Some((norm, p, dir));
            }
        }
        let (a_star, support, dir) = best.expect("alive is nonempty");
        let limit = a_star - shrinkage;
        constraints.push(Constraint {
            direction: directions[dir].clone(),
            value: limit,
            support: Some(support),
        });
        active.retain(|&i| i != dir);
        let u = &directions[dir].u;
        alive.retain(|&p| dot(u, point(p)) < limit);
    }

    Ok(Region {
        center: center.to_vec(),
        constraints,
        bounding_box: bounding_box.clone(),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ConstraintRecord {
    direction: String,
    u: Vec<f64>,
    value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    support: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RegionRecord {
    center: Vec<f64>,
    constraints: Vec<ConstraintRecord>,
    bounding_box: AxisBox,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    interval_box: Option<AxisBox>,
}

impl From<Region> for RegionRecord {
    fn from(r: Region) -> Self {
        let interval_box = box_of(&r).ok();
        RegionRecord {
            center: r.center,
            constraints: r
                .constraints
                .into_iter()
                .map(|c| ConstraintRecord {
                    direction: c.direction.label,
                    u: c.direction.u,
                    value: c.value,
                    support: c.support,
                })
                .collect(),
            bounding_box: r.bounding_box,
            interval_box,
        }
    }
}

impl TryFrom<RegionRecord> for Region {
    type Error = Error;

    fn try_from(r: RegionRecord) -> Result<Self> {
        let constraints = r
            .constraints
            .into_iter()
            .map(|c| {
                Ok(Constraint {
                    direction: Direction::new(c.direction, c.u)?,
                    value: c.value,
                    support: c.support,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Region {
            center: r.center,
            constraints,
            bounding_box: r.bounding_box,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(d: usize) -> Vec<String> {
        (1..=d).map(|j| format!("x{j}")).collect()
    }

    fn unit_axes(d: usize) -> Vec<Direction> {
        let b = AxisBox::new(vec![0.0; d], vec![1.0; d]).unwrap();
        axis_directions(&b, SpeedPreset::Uniform, &names(d)).unwrap()
    }

    #[test]
    fn directed_norm_examples() {
        let u = unit_axes(2);
        assert_eq!(directed_inf_norm(&[3.0, -4.0], &u).unwrap().0, 4.0);
        let single = [Direction::new("2e1", vec![2.0, 0.0]).unwrap()];
        assert_eq!(directed_inf_norm(&[3.0, 5.0], &single).unwrap().0, 6.0);
        let pm = &u[..2];
        let (v, i) = directed_inf_norm(&[-2.0, 7.0], pm).unwrap();
        assert_eq!((v, pm[i].label.as_str()), (2.0, "-x1"));
        assert!(directed_inf_norm(&[1.0], &[]).is_err());
    }

    #[test]
    fn hand_traced_four_point_example() {
        let bbox = AxisBox::new(vec![-10.0, -10.0], vec![10.0, 10.0]).unwrap();
        let rejected = [1.0, 0.2, -0.5, 3.0, 0.1, -2.0, 4.0, -4.0];
        let region = grow_box(&[0.0, 0.0], &rejected, &unit_axes(2), 0.0, &bbox).unwrap();
        let trace: Vec<(&str, f64, Option<usize>)> = region
            .constraints
            .iter()
            .map(|c| (c.direction.label.as_str(), c.value, c.support))
            .collect();
        assert_eq!(
            trace,
            vec![("+x1", 1.0, Some(0)), ("-x2", 2.0, Some(2)), ("+x2", 3.0, Some(1))]
        );
        let b = box_of(&region).unwrap();
        assert_eq!(b.lo(), [-10.0, -2.0]);
        assert_eq!(b.hi(), [1.0, 3.0]);
    }

    #[test]
    fn no_rejected_points_gives_bounding_box() {
        let bbox = AxisBox::new(vec![-1.0, 0.0], vec![2.0, 3.0]).unwrap();
        let region = grow_box(&[0.5, 1.0], &[], &unit_axes(2), 0.0, &bbox).unwrap();
        assert!(region.constraints.is_empty());
        assert_eq!(box_of(&region).unwrap(), bbox);
    }

    #[test]
    fn single_point_single_constraint() {
        let bbox = AxisBox::new(vec![-5.0, -5.0], vec![5.0, 5.0]).unwrap();
        let region = grow_box(&[1.0, 1.0], &[1.5, 3.0], &unit_axes(2), 0.0, &bbox).unwrap();
        assert_eq!(region.constraints.len(), 1);
        assert_eq!(region.constraints[0].value, 2.0);
        let b = box_of(&region).unwrap();
        assert_eq!((b.lo(), b.hi()), ([-5.0, -5.0].as_slice(), [5.0, 3.0].as_slice()));
    }

    #[test]
    fn shrinkage_pulls_faces_back() {
        let bbox = AxisBox::new(vec![-10.0, -10.0], vec![10.0, 10.0]).unwrap();
        let rejected = [1.0, 0.2, -0.5, 3.0, 0.1, -2.0, 4.0, -4.0];
        let region = grow_box(&[0.0, 0.0], &rejected, &unit_axes(2), 0.1, &bbox).unwrap();
        let b = box_of(&region).unwrap();
        assert!((b.hi()[0] - 0.9).abs() < 1e-12);
        assert!((b.lo()[1] + 1.9).abs() < 1e-12);
        assert!((b.hi()[1] - 2.9).abs() < 1e-12);
        for p in rejected.chunks_exact(2) {
            assert!(!region.contains(p));
        }
    }

    #[test]
    fn box_of_examples() {
        let d = 2;
        let bbox = AxisBox::new(vec![-5.0, -5.0], vec![5.0, 5.0]).unwrap();
        let region = Region {
            center: vec![0.0, 0.0],
            constraints: vec![
                Constraint {
                    direction: Direction::axis(d, 0, true, 1.0, "x1").unwrap(),
                    value: 1.0,
                    support: None,
                },
                Constraint {
                    direction: Direction::axis(d, 0, false, 1.0, "x1").unwrap(),
                    value: 2.0,
                    support: None,
                },
            ],
            bounding_box: bbox.clone(),
        };
        let b = box_of(&region).unwrap();
        assert_eq!((b.lo(), b.hi()), ([-2.0, -5.0].as_slice(), [1.0, 5.0].as_slice()));

        let scaled = Region {
            constraints: vec![Constraint {
                direction: Direction::new("+2x1", vec![2.0, 0.0]).unwrap(),
                value: 4.0,
                support: None,
            }],
            ..region.clone()
        };
        assert_eq!(box_of(&scaled).unwrap().hi()[0], 2.0);

        let oblique = Region {
            constraints: vec![Constraint {
                direction: Direction::new("diag", vec![1.0, 1.0]).unwrap(),
                value: 1.0,
                support: None,
            }],
            ..region
        };
        assert!(matches!(box_of(&oblique), Err(Error::NotAxisAligned(_))));
    }

    #[test]
    fn face_speeds_from_center_to_truth_faces_recover_truth() {
        // truth [-1/3, 1/3] x [-2/3, 2/3], off-center start, rejected points
        // just outside every face
        let truth = AxisBox::new(vec![-1.0 / 3.0, -2.0 / 3.0], vec![1.0 / 3.0, 2.0 / 3.0]).unwrap();
        let bbox = AxisBox::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        let c = [0.1, -0.2];
        let speeds = [
            (truth.hi()[0] - c[0], c[0] - truth.lo()[0]),
            (truth.hi()[1] - c[1], c[1] - truth.lo()[1]),
        ];
        let dirs = axis_directions_with_speeds(2, &[0, 1], &speeds, &names(2)).unwrap();
        let eps = 1e-9;
        let mut rejected = Vec::new();
        for t in [-0.3, 0.0, 0.3] {
            rejected.extend([truth.hi()[0] + eps, t]);
            rejected.extend([truth.lo()[0] - eps, t]);
            rejected.extend([t, truth.hi()[1] + eps]);
            rejected.extend([t, truth.lo()[1] - eps]);
        }
        let region = grow_box(&c, &rejected, &dirs, 0.0, &bbox).unwrap();
        // every face fixes at normalized distance 1 + O(eps)
        for con in &region.constraints {
            assert!((con.value - 1.0).abs() < 1e-8, "{con:?}");
        }
        let b = box_of(&region).unwrap();
        for j in 0..2 {
            assert!((b.lo()[j] - truth.lo()[j]).abs() < 1e-8);
            assert!((b.hi()[j] - truth.hi()[j]).abs() < 1e-8);
        }
    }

    #[test]
    fn box_algebra() {
        let a = AxisBox::new(vec![0.0, 0.0], vec![1.0, 2.0]).unwrap();
        assert_eq!(a.volume(), 2.0);
        let u = AxisBox::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let v = AxisBox::new(vec![0.5, 0.5], vec![1.5, 1.5]).unwrap();
        let w = u.intersect(&v).unwrap();
        assert_eq!((w.lo(), w.hi()), ([0.5, 0.5].as_slice(), [1.0, 1.0].as_slice()));
        assert_eq!(w.volume(), 0.25);
        let far = AxisBox::new(vec![3.0, 3.0], vec![4.0, 4.0]).unwrap();
        let none = u.intersect(&far).unwrap();
        assert!(none.is_empty());
        assert_eq!(none.volume(), 0.0);
        assert!(u.contains(&[1.0, 0.0]).unwrap());
        assert!(!u.contains(&[1.0 + 1e-12, 0.0]).unwrap());
        assert!(u.contains(&[1.0]).is_err());
        assert!(u.intersect(&AxisBox::new(vec![0.0], vec![1.0]).unwrap()).is_err());
        let flat = AxisBox::new(vec![-1.0, -1.0, 1.0], vec![1.0, 1.0, 1.0]).unwrap();
        assert_eq!(flat.volume(), 4.0);
        assert_eq!(flat.nondegenerate_dims(), vec![0, 1]);
    }

    #[test]
    fn bbox_speeds_skip_degenerate_dims() {
        let b = AxisBox::new(vec![-1.0, 0.0, 1.0], vec![1.0, 4.0, 1.0]).unwrap();
        let dirs = axis_directions(&b, SpeedPreset::Bbox, &["a".into(), "b".into(), "c".into()]).unwrap();
        let labels: Vec<&str> = dirs.iter().map(|d| d.label.as_str()).collect();
        assert_eq!(labels, ["+a", "-a", "+b", "-b"]);
        assert_eq!(dirs[0].u, [0.5, 0.0, 0.0]);
        assert_eq!(dirs[3].u, [0.0, -0.25, 0.0]);
    }

    #[test]
    fn region_json_carries_interval_box() {
        let bbox = AxisBox::new(vec![-10.0, -10.0], vec![10.0, 10.0]).unwrap();
        let region = grow_box(&[0.0, 0.0], &[1.0, 0.2], &unit_axes(2), 0.0, &bbox).unwrap();
        let json = serde_json::to_value(&region).unwrap();
        assert_eq!(json["constraints"][0]["direction"], "+x1");
        assert_eq!(json["interval_box"]["hi"][0], 1.0);
        let back: Region = serde_json::from_value(json).unwrap();
        assert_eq!(back, region);
    }
}
