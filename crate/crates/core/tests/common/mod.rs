//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use ddgroup::dataset::Dataset;
use ddgroup::numerics::ols;
use ddgroup::region::Direction;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Grows every active face at unit rate from `t = 0` and records the face
/// and time at which the expanding polytope first touches a live rejected
/// point. Hit times are located by a coarse scan of step `step` followed by
/// bisection on the membership predicate, so no directed norm is evaluated.
pub fn grow_box_oracle(center: &[f64], rejected: &[f64], directions: &[Direction], step: f64) -> Vec<(usize, f64)> {
    let d = center.len();
    let pts: Vec<Vec<f64>> = rejected
        .chunks_exact(d)
        .map(|r| r.iter().zip(center).map(|(x, c)| x - c).collect())
        .collect();
    let mut active: Vec<usize> = (0..directions.len()).collect();
    let mut fixed: Vec<(usize, f64)> = Vec::new();
    let mut alive: Vec<usize> = (0..pts.len()).collect();

    let inside = |p: &[f64], t: f64, active: &[usize], fixed: &[(usize, f64)]| {
        active.iter().all(|&k| dot(&directions[k].u, p) <= t)
            && fixed.iter().all(|&(k, a)| dot(&directions[k].u, p) < a)
    };

    let mut t = 0.0;
    while !alive.is_empty() && !active.is_empty() {
        let any_inside = |t: f64| alive.iter().any(|&i| inside(&pts[i], t, &active, &fixed));
        let mut hi = t;
        while !any_inside(hi) {
            hi += step;
        }
        let mut lo = (hi - step).max(t);
        if any_inside(lo) {
            hi = lo;
        }
        while hi - lo > 1e-12 {
            let mid = 0.5 * (lo + hi);
            if any_inside(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let hit = *alive
            .iter()
            .find(|&&i| inside(&pts[i], hi, &active, &fixed))
            .expect("bisection keeps a hit at hi");
        // bisection only brackets the hit; the exact entry time is where the
        // last active constraint on the hit point became slack
        let (face, hi) = active
            .iter()
            .map(|&k| (k, dot(&directions[k].u, &pts[hit])))
            .fold(None, |best: Option<(usize, f64)>, (k, v)| match best {
                Some((_, b)) if b >= v => best,
                _ => Some((k, v)),
            })
            .expect("active is nonempty");
        let hi = hi.max(t);
        fixed.push((face, hi));
        active.retain(|&k| k != face);
        alive.retain(|&i| dot(&directions[face].u, &pts[i]) < hi);
        t = hi;
    }
    fixed
}

/// Solves `XᵀX b = Xᵀy` by Gaussian elimination with partial pivoting.
pub fn normal_equation_solve(x: &[f64], d: usize, y: &[f64]) -> Vec<f64> {
    let mut a = vec![vec![0.0; d + 1]; d];
    for (row, &yi) in x.chunks_exact(d).zip(y) {
        for i in 0..d {
            for j in 0..d {
                a[i][j] += row[i] * row[j];
            }
            a[i][d] += row[i] * yi;
        }
    }
    for col in 0..d {
        let piv = (col..d).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        for r in col + 1..d {
            let f = a[r][col] / a[col][col];
            for c in col..=d {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    let mut b = vec![0.0; d];
    for i in (0..d).rev() {
        let s: f64 = (i + 1..d).map(|j| a[i][j] * b[j]).sum();
        b[i] = (a[i][d] - s) / a[i][i];
    }
    b
}

/// Every anchor, neighbors by full sort on `(squared distance, index)`.
/// Returns the winning anchor and its training MSE.
pub fn brute_force_core(data: &Dataset, k: usize) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for a in 0..data.n() {
        let q = data.row(a);
        let mut order: Vec<(f64, usize)> = (0..data.n())
            .map(|i| {
                let dist: f64 = data.row(i).iter().zip(q).map(|(x, y)| (x - y) * (x - y)).sum();
                (dist, i)
            })
            .collect();
        order.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        let mut members: Vec<usize> = order[..k].iter().map(|p| p.1).collect();
        members.sort_unstable();
        let x: Vec<f64> = members.iter().flat_map(|&i| data.row(i).to_vec()).collect();
        let y: Vec<f64> = members.iter().map(|&i| data.target(i)).collect();
        if let Ok(fit) = ols(&x, data.d(), &y) {
            if best.is_none_or(|(_, m)| fit.train_mse < m) {
                best = Some((a, fit.train_mse));
            }
        }
    }
    best
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    if va == 0.0 || vb == 0.0 {
        0.0
    } else {
        cov / (va * vb).sqrt()
    }
}
