//! Least squares and residual statistics.
//!
//! Matrices are passed row-major as `(x, d)` with the row count implied by
//! `y.len()`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative threshold on the R diagonal (or singular values) below which a
/// design is treated as rank deficient.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMode {
    /// Householder QR; errors when `k < d` or the design is rank deficient.
    #[default]
    Strict,
    /// SVD pseudo-inverse; returns the least-norm minimizer for any shape.
    MinimumNorm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub beta: Vec<f64>,
    pub train_mse: f64,
    /// Unbiased residual standard deviation; `None` when `dof < 1`.
    pub sigma_hat: Option<f64>,
    /// Rows minus columns.
    pub dof: i64,
}

impl LinearFit {
    pub fn predict(&self, x: &[f64]) -> f64 {
        dot(&self.beta, x)
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

fn check_shape(x: &[f64], d: usize, y: &[f64]) -> Result<()> {
    if y.is_empty() {
        return Err(Error::Empty("least squares on zero rows"));
    }
    if d == 0 || x.len() != y.len() * d {
        return Err(Error::DimensionMismatch {
            expected: y.len() * d,
            got: x.len(),
        });
    }
    Ok(())
}

pub fn ols(x: &[f64], d: usize, y: &[f64]) -> Result<LinearFit> {
    ols_with(x, d, y, SolveMode::Strict)
}

pub fn ols_with(x: &[f64], d: usize, y: &[f64], mode: SolveMode) -> Result<LinearFit> {
    check_shape(x, d, y)?;
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let k = y.len();
    let a = DMatrix::from_row_slice(k, d, x);
    let b = DVector::from_column_slice(y);
    let beta = match mode {
        SolveMode::Strict => solve_qr(a, b)?,
        SolveMode::MinimumNorm => solve_min_norm(a, b)?,
    };
    let beta: Vec<f64> = beta.iter().copied().collect();
    if beta.iter().any(|v| !v.is_finite()) {
        return Err(Error::RankDeficient);
    }
    let sse = sum_squared_residuals(&beta, x, d, y);
    let dof = k as i64 - d as i64;
    Ok(LinearFit {
        train_mse: sse / k as f64,
        sigma_hat: (dof >= 1).then(|| (sse / dof as f64).sqrt()),
        dof,
        beta,
    })
}

fn solve_qr(a: DMatrix<f64>, b: DVector<f64>) -> Result<DVector<f64>> {
    let (k, d) = a.shape();
    if k < d {
        return Err(Error::Underdetermined {
            rows: k,
            dim: d,
            needed: d,
        });
    }
    let qr = a.qr();
    let r = qr.r();
    let diag_max = r.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if diag_max == 0.0 || r.diagonal().iter().any(|v| v.abs() <= RANK_TOLERANCE * diag_max) {
        return Err(Error::RankDeficient);
    }
    let mut qtb = b;
    qr.q_tr_mul(&mut qtb);
    r.solve_upper_triangular(&qtb.rows(0, d).into_owned())
        .ok_or(Error::RankDeficient)
}

fn solve_min_norm(a: DMatrix<f64>, b: DVector<f64>) -> Result<DVector<f64>> {
    let svd = a.svd(true, true);
    let s_max = svd.singular_values.iter().fold(0.0f64, |m, v| m.max(*v));
    let eps = (RANK_TOLERANCE * s_max).max(f64::MIN_POSITIVE);
    svd.solve(&b, eps)
        .map_err(|_| Error::RankDeficient)
}

pub fn residuals(beta: &[f64], x: &[f64], d: usize, y: &[f64]) -> Vec<f64> {
    x.chunks_exact(d)
        .zip(y)
        .map(|(row, &yi)| yi - dot(beta, row))
        .collect()
}

fn sum_squared_residuals(beta: &[f64], x: &[f64], d: usize, y: &[f64]) -> f64 {
    x.chunks_exact(d)
        .zip(y)
        .map(|(row, &yi)| (yi - dot(beta, row)).powi(2))
        .sum()
}

/// Mean squared error of `beta` on `(x, y)`.
pub fn mse(beta: &[f64], x: &[f64], d: usize, y: &[f64]) -> Result<f64> {
    check_shape(x, d, y)?;
    Ok(sum_squared_residuals(beta, x, d, y) / y.len() as f64)
}

/// Square root of the unbiased residual variance, `SSE / (k - d)`.
pub fn sigma_hat(beta: &[f64], x: &[f64], d: usize, y: &[f64]) -> Result<f64> {
    check_shape(x, d, y)?;
    let k = y.len();
    if k <= d {
        return Err(Error::Underdetermined {
            rows: k,
            dim: d,
            needed: d + 1,
        });
    }
    Ok((sum_squared_residuals(beta, x, d, y) / (k - d) as f64).sqrt())
}

/// Smallest absolute residual `t` such that the fraction of rows with
/// `|r| <= t` reaches `q`. No interpolation.
pub fn abs_residual_quantile(beta: &[f64], x: &[f64], d: usize, y: &[f64], q: f64) -> Result<f64> {
    check_shape(x, d, y)?;
    let abs: Vec<f64> = residuals(beta, x, d, y).into_iter().map(f64::abs).collect();
    quantile_lower(abs, q)
}

/// Left-continuous inverse empirical CDF of `values` at `q ∈ (0, 1]`.
pub fn quantile_lower(mut values: Vec<f64>, q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Empty("quantile of an empty sample"));
    }
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::Config(format!("quantile level {q} outside (0, 1]")));
    }
    values.sort_by(f64::total_cmp);
    let k = values.len() as f64;
    let idx = (0..values.len())
        .find(|&i| (i + 1) as f64 / k >= q)
        .unwrap_or(values.len() - 1);
    Ok(values[idx])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn design(rows: &[[f64; 2]]) -> Vec<f64> {
        rows.iter().flatten().copied().collect()
    }

    #[test]
    fn exact_line() {
        let x = design(&[[1.0, 0.0], [1.0, 1.0], [1.0, 2.0]]);
        let fit = ols(&x, 2, &[1.0, 3.0, 5.0]).unwrap();
        assert!((fit.beta[0] - 1.0).abs() < 1e-12 && (fit.beta[1] - 2.0).abs() < 1e-12);
        assert!(fit.train_mse < 1e-24);
        assert_eq!(fit.dof, 1);
    }

    #[test]
    fn hand_solved_normal_equations() {
        // [[3,3],[3,5]] beta = (2,3)  =>  beta = (1/6, 1/2)
        let x = design(&[[1.0, 0.0], [1.0, 1.0], [1.0, 2.0]]);
        let y = [0.0, 1.0, 1.0];
        let fit = ols(&x, 2, &y).unwrap();
        assert!((fit.beta[0] - 1.0 / 6.0).abs() < 1e-12);
        assert!((fit.beta[1] - 0.5).abs() < 1e-12);
        assert!((fit.train_mse - 1.0 / 18.0).abs() < 1e-12);
        assert!((mse(&fit.beta, &x, 2, &y).unwrap() - 1.0 / 18.0).abs() < 1e-12);
        let s = sigma_hat(&fit.beta, &x, 2, &y).unwrap();
        assert!((s - (1.0f64 / 6.0).sqrt()).abs() < 1e-12);
        assert!((fit.sigma_hat.unwrap() - s).abs() < 1e-12);
    }

    #[test]
    fn mse_direct_sum() {
        let x = [1.0, 1.0];
        assert_eq!(mse(&[0.0], &x, 1, &[1.0, 2.0]).unwrap(), 2.5);
        assert!(mse(&[0.0], &[], 1, &[]).is_err());
    }

    #[test]
    fn sigma_hat_from_given_residuals() {
        // zero design leaves residuals equal to y
        let x = vec![0.0; 8];
        let s = sigma_hat(&[0.0, 0.0], &x, 2, &[1.0, -1.0, 1.0, -1.0]).unwrap();
        assert!((s - 2f64.sqrt()).abs() < 1e-15);
        assert!(sigma_hat(&[0.0, 0.0], &x[..4], 2, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn strict_mode_errors() {
        let x = design(&[[1.0, 2.0]]);
        assert!(matches!(ols(&x, 2, &[1.0]), Err(Error::Underdetermined { .. })));
        let dup = design(&[[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]]);
        assert!(matches!(ols(&dup, 2, &[1.0, 2.0, 4.0]), Err(Error::RankDeficient)));
        let bad = design(&[[1.0, f64::NAN], [1.0, 1.0], [1.0, 2.0]]);
        assert!(matches!(ols(&bad, 2, &[1.0, 2.0, 3.0]), Err(Error::NonFinite)));
    }

    #[test]
    fn minimum_norm_splits_duplicated_column() {
        // columns (a, a, 1): the least-norm solution halves the coefficient on a
        let a = [0.0, 1.0, 2.0, 3.0, 5.0];
        let y = [1.0, 2.9, 5.2, 7.0, 11.1];
        let full: Vec<f64> = a.iter().flat_map(|&v| [v, v, 1.0]).collect();
        let reduced: Vec<f64> = a.iter().flat_map(|&v| [v, 1.0]).collect();
        let fit = ols_with(&full, 3, &y, SolveMode::MinimumNorm).unwrap();
        let base = ols(&reduced, 2, &y).unwrap();
        assert!((fit.beta[0] - base.beta[0] / 2.0).abs() < 1e-9);
        assert!((fit.beta[1] - base.beta[0] / 2.0).abs() < 1e-9);
        assert!((fit.beta[2] - base.beta[1]).abs() < 1e-9);
        let r_full = residuals(&fit.beta, &full, 3, &y);
        let r_base = residuals(&base.beta, &reduced, 2, &y);
        for (p, q) in r_full.iter().zip(&r_base) {
            assert!((p - q).abs() < 1e-9);
        }
    }

    #[test]
    fn minimum_norm_underdetermined() {
        // one equation x1 + x2 = 2 -> least norm (1, 1)
        let fit = ols_with(&[1.0, 1.0], 2, &[2.0], SolveMode::MinimumNorm).unwrap();
        assert!((fit.beta[0] - 1.0).abs() < 1e-12 && (fit.beta[1] - 1.0).abs() < 1e-12);
        assert_eq!(fit.sigma_hat, None);
    }

    #[test]
    fn quantile_examples() {
        let x = vec![0.0; 10];
        let y: Vec<f64> = (1..=10).map(f64::from).collect();
        assert_eq!(abs_residual_quantile(&[0.0], &x, 1, &y, 0.9).unwrap(), 9.0);
        assert_eq!(abs_residual_quantile(&[0.0], &x, 1, &[0.0; 10], 0.3).unwrap(), 0.0);
        let x3 = vec![0.0; 3];
        assert_eq!(abs_residual_quantile(&[0.0], &x3, 1, &[0.5, -2.0, 1.0], 0.9).unwrap(), 2.0);
        assert_eq!(quantile_lower(vec![3.0, 1.0], 1.0).unwrap(), 3.0);
        assert!(quantile_lower(vec![], 0.5).is_err());
        assert!(quantile_lower(vec![1.0], 0.0).is_err());
    }

    fn system() -> impl Strategy<Value = (usize, Vec<f64>, Vec<f64>)> {
        (1usize..5, 0usize..20).prop_flat_map(|(d, extra)| {
            let k = d + 1 + extra;
            (
                Just(d),
                prop::collection::vec(-3.0f64..3.0, k * d),
                prop::collection::vec(-5.0f64..5.0, k),
            )
        })
    }

    proptest! {
        #[test]
        fn ols_is_optimal((d, x, y) in system(), dirs in prop::collection::vec(-1.0f64..1.0, 40)) {
            let fit = match ols(&x, d, &y) {
                Ok(f) => f,
                Err(Error::RankDeficient) => return Ok(()),
                Err(e) => panic!("{e}"),
            };
            let best = fit.train_mse;
            for chunk in dirs.chunks(d) {
                if chunk.len() < d { break; }
                for eps in [1e-3, 1e-1] {
                    let moved: Vec<f64> = fit.beta.iter().zip(chunk).map(|(b, v)| b + eps * v).collect();
                    prop_assert!(best <= mse(&moved, &x, d, &y).unwrap() + 1e-12);
                }
            }
        }

        #[test]
        fn sigma_and_mse_consistent((d, x, y) in system()) {
            if let Ok(fit) = ols(&x, d, &y) {
                let k = y.len() as f64;
                let s = fit.sigma_hat.unwrap();
                prop_assert!((s * s * (k - d as f64) - k * fit.train_mse).abs() < 1e-9 * (1.0 + k * fit.train_mse));
            }
        }

        #[test]
        fn quantile_monotone_in_level(v in prop::collection::vec(-10.0f64..10.0, 1..30), a in 0.01f64..1.0, b in 0.01f64..1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let abs: Vec<f64> = v.iter().map(|x| x.abs()).collect();
            prop_assert!(quantile_lower(abs.clone(), lo).unwrap() <= quantile_lower(abs, hi).unwrap());
        }
    }
}
