//! Residual thresholds for rejecting points under the core model.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::numerics::{dot, LinearFit};

/// Where the noise level used by a threshold comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SigmaSource {
    Known(f64),
    /// Unbiased residual standard deviation of the core-group fit.
    EstimateFromCore,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum ThresholdRule {
    /// `rho = 2.1 * sigma * sqrt(ln n)` with `n` the training-set size.
    Theory { sigma: SigmaSource },
    /// `rho(x) = sigma * gamma1 * ||x|| + sigma * gamma2`.
    Affine {
        sigma: SigmaSource,
        gamma1: f64,
        gamma2: f64,
    },
    Constant { rho: f64 },
}

pub const THEORY_CONSTANT: f64 = 2.1;

/// Threshold with the noise level and sample size substituted in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolvedThreshold {
    /// Coefficient on `||x||`.
    pub slope: f64,
    pub offset: f64,
}

impl ResolvedThreshold {
    pub fn at(&self, x: &[f64]) -> f64 {
        if self.slope == 0.0 {
            self.offset
        } else {
            self.slope * dot(x, x).sqrt() + self.offset
        }
    }
}

pub fn theory_rho(sigma: f64, n: usize) -> f64 {
    THEORY_CONSTANT * sigma * (n.max(1) as f64).ln().sqrt()
}

impl ThresholdRule {
    pub fn validate(&self) -> Result<()> {
        let sigma_ok = |s: &SigmaSource| match s {
            SigmaSource::Known(v) => *v >= 0.0 && v.is_finite(),
            SigmaSource::EstimateFromCore => true,
        };
        let ok = match self {
            ThresholdRule::Theory { sigma } => sigma_ok(sigma),
            ThresholdRule::Affine {
                sigma,
                gamma1,
                gamma2,
            } => sigma_ok(sigma) && *gamma1 >= 0.0 && *gamma2 >= 0.0 && gamma1.is_finite() && gamma2.is_finite(),
            ThresholdRule::Constant { rho } => *rho >= 0.0 && rho.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid threshold rule {self:?}")))
        }
    }

    fn sigma(&self) -> Option<SigmaSource> {
        match self {
            ThresholdRule::Theory { sigma } | ThresholdRule::Affine { sigma, .. } => Some(*sigma),
            ThresholdRule::Constant { .. } => None,
        }
    }

    /// Substitutes `sigma` (known or the core estimate) and the training size `n`.
    pub fn resolve(&self, core_sigma: Option<f64>, n: usize) -> Result<ResolvedThreshold> {
        self.validate()?;
        let sigma = match self.sigma() {
            Some(SigmaSource::Known(s)) => s,
            Some(SigmaSource::EstimateFromCore) => core_sigma.ok_or(Error::Underdetermined {
                rows: 0,
                dim: 0,
                needed: 1,
            })?,
            None => 0.0,
        };
        Ok(match *self {
            ThresholdRule::Theory { .. } => ResolvedThreshold {
                slope: 0.0,
                offset: theory_rho(sigma, n),
            },
            ThresholdRule::Affine { gamma1, gamma2, .. } => ResolvedThreshold {
                slope: sigma * gamma1,
                offset: sigma * gamma2,
            },
            ThresholdRule::Constant { rho } => ResolvedThreshold {
                slope: 0.0,
                offset: rho,
            },
        })
    }
}

/// Labels `l_i = 1{|y_i - betaᵀx_i| >= rho(x_i)}` under the core fit. The
/// core fit also supplies sigma when the rule asks for an estimate.
pub fn reject_labels(fit: &LinearFit, data: &Dataset, rule: &ThresholdRule) -> Result<Vec<bool>> {
    if rule.sigma() == Some(SigmaSource::EstimateFromCore) && fit.sigma_hat.is_none() {
        return Err(Error::Underdetermined {
            rows: (fit.dof + fit.beta.len() as i64).max(0) as usize,
            dim: fit.beta.len(),
            needed: fit.beta.len() + 1,
        });
    }
    let threshold = rule.resolve(fit.sigma_hat, data.n())?;
    Ok(labels_with(&fit.beta, data, &threshold))
}

pub(crate) fn labels_with(beta: &[f64], data: &Dataset, threshold: &ResolvedThreshold) -> Vec<bool> {
    (0..data.n())
        .map(|i| {
            let x = data.row(i);
            (data.target(i) - dot(beta, x)).abs() >= threshold.at(x)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fit(beta: Vec<f64>, sigma_hat: Option<f64>) -> LinearFit {
        LinearFit {
            beta,
            train_mse: 0.0,
            sigma_hat,
            dof: 1,
        }
    }

    #[test]
    fn theory_threshold_value() {
        // 2.1 * 0.3 * sqrt(ln 1000), evaluated at high precision
        let rho = theory_rho(0.3, 1000);
        assert!((rho - 1.655_804_357_473_433_6).abs() < 1e-13, "{rho}");
        assert_eq!(theory_rho(0.3, 1), 0.0);
    }

    #[test]
    fn theory_labels_keep_and_reject() {
        let rows: Vec<Vec<f64>> = (0..1000).map(|i| vec![i as f64]).collect();
        let mut y = vec![0.0; 1000];
        y[0] = 1.6;
        y[1] = 1.7;
        y[2] = -1.7;
        let data = Dataset::from_rows(&rows, y, vec!["a".into()], "y", false).unwrap();
        let rule = ThresholdRule::Theory {
            sigma: SigmaSource::Known(0.3),
        };
        let labels = reject_labels(&fit(vec![0.0], None), &data, &rule).unwrap();
        assert_eq!(&labels[..4], [false, true, true, false]);
    }

    #[test]
    fn single_row_rejects_any_nonzero_residual() {
        let data = Dataset::from_rows(&[vec![1.0]], vec![1e-9], vec!["a".into()], "y", false).unwrap();
        let rule = ThresholdRule::Theory {
            sigma: SigmaSource::Known(5.0),
        };
        assert_eq!(reject_labels(&fit(vec![0.0], None), &data, &rule).unwrap(), [true]);
    }

    #[test]
    fn affine_threshold() {
        let rule = ThresholdRule::Affine {
            sigma: SigmaSource::Known(2.0),
            gamma1: 1.0,
            gamma2: 0.0,
        };
        let t = rule.resolve(None, 10).unwrap();
        assert_eq!(t.at(&[3.0, 0.0]), 6.0);
        let est = ThresholdRule::Affine {
            sigma: SigmaSource::EstimateFromCore,
            gamma1: 0.5,
            gamma2: 1.0,
        };
        let t = est.resolve(Some(2.0), 10).unwrap();
        assert_eq!(t.at(&[0.0, 4.0]), 6.0);
    }

    #[test]
    fn estimate_requires_core_sigma() {
        let data = Dataset::from_rows(&[vec![1.0], vec![2.0]], vec![0.0, 1.0], vec!["a".into()], "y", false).unwrap();
        let rule = ThresholdRule::Theory {
            sigma: SigmaSource::EstimateFromCore,
        };
        assert!(reject_labels(&fit(vec![0.0], None), &data, &rule).is_err());
        assert!(reject_labels(&fit(vec![0.0], Some(1.0)), &data, &rule).is_ok());
    }

    #[test]
    fn invalid_rules() {
        assert!(ThresholdRule::Constant { rho: -1.0 }.validate().is_err());
        assert!(ThresholdRule::Affine {
            sigma: SigmaSource::Known(1.0),
            gamma1: -1.0,
            gamma2: 0.0
        }
        .validate()
        .is_err());
    }
}
