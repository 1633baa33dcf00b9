//! Global cepstral mean and variance normalization.
//!
//! Statistics are plain sums so shard-local accumulators merge by addition
//! and serialize without loss.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::FeatureMatrix;

/// Floor applied to per-dimension variance before taking the square root.
pub const VARIANCE_FLOOR: f64 = 1e-20;

#[derive(Debug, Error, PartialEq)]
pub enum CmvnError {
    #[error("dimension mismatch: statistics have dim {expected}, features have {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("empty statistics")]
    EmptyStats,
    #[error("variance normalization needs at least 2 frames, statistics have {0}")]
    TooFewFrames(u64),
    #[error("statistics dim must be positive")]
    ZeroDim,
    #[error("statistics vectors have length sum={sum}, sumsq={sumsq} but dim={dim}")]
    Inconsistent { dim: usize, sum: usize, sumsq: usize },
}

/// Per-dimension frame count, sum and sum of squares, accumulated in f64.
///
/// Serves both as the running accumulator and as the persisted statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmvnStats {
    pub dim: usize,
    pub count: u64,
    pub sum: Vec<f64>,
    pub sumsq: Vec<f64>,
}

impl CmvnStats {
    pub fn new(dim: usize) -> Result<Self, CmvnError> {
        if dim == 0 {
            return Err(CmvnError::ZeroDim);
        }
        Ok(Self {
            dim,
            count: 0,
            sum: vec![0.0; dim],
            sumsq: vec![0.0; dim],
        })
    }

    pub fn validate(&self) -> Result<(), CmvnError> {
        if self.dim == 0 {
            return Err(CmvnError::ZeroDim);
        }
        if self.sum.len() != self.dim || self.sumsq.len() != self.dim {
            return Err(CmvnError::Inconsistent {
                dim: self.dim,
                sum: self.sum.len(),
                sumsq: self.sumsq.len(),
            });
        }
        Ok(())
    }

    /// Adds every row of `feat`, in row order.
    pub fn accumulate(&mut self, feat: &FeatureMatrix) -> Result<(), CmvnError> {
        if feat.cols() != self.dim {
            return Err(CmvnError::DimMismatch {
                expected: self.dim,
                got: feat.cols(),
            });
        }
        for row in feat.iter_rows() {
            for ((s, q), &x) in self.sum.iter_mut().zip(&mut self.sumsq).zip(row) {
                *s += x;
                *q += x * x;
            }
        }
        self.count += feat.rows() as u64;
        Ok(())
    }

    /// Field-wise addition of another shard's statistics.
    pub fn merge(&mut self, other: &CmvnStats) -> Result<(), CmvnError> {
        if other.dim != self.dim {
            return Err(CmvnError::DimMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        self.count += other.count;
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            *a += b;
        }
        for (a, b) in self.sumsq.iter_mut().zip(&other.sumsq) {
            *a += b;
        }
        Ok(())
    }

    pub fn mean(&self) -> Result<Vec<f64>, CmvnError> {
        if self.count == 0 {
            return Err(CmvnError::EmptyStats);
        }
        let n = self.count as f64;
        Ok(self.sum.iter().map(|s| s / n).collect())
    }

    /// Population variance `sumsq/count - mean^2`, floored at [`VARIANCE_FLOOR`].
    pub fn variance(&self) -> Result<Vec<f64>, CmvnError> {
        let mean = self.mean()?;
        let n = self.count as f64;
        Ok(self
            .sumsq
            .iter()
            .zip(&mean)
            .map(|(q, m)| (q / n - m * m).max(VARIANCE_FLOOR))
            .collect())
    }

    /// Precomputes the per-dimension affine map used by [`apply_cmvn`].
    pub fn transform(&self, norm_vars: bool) -> Result<CmvnTransform, CmvnError> {
        self.validate()?;
        if norm_vars && self.count == 1 {
            return Err(CmvnError::TooFewFrames(1));
        }
        let mean = self.mean()?;
        let inv_std = if norm_vars {
            Some(self.variance()?.iter().map(|v| 1.0 / v.sqrt()).collect())
        } else {
            None
        };
        Ok(CmvnTransform { mean, inv_std })
    }
}

/// `(x - mean)`, optionally scaled by `1/sqrt(var)`, per dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct CmvnTransform {
    mean: Vec<f64>,
    inv_std: Option<Vec<f64>>,
}

impl CmvnTransform {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn apply_row(&self, row: &mut [f64]) {
        for (x, m) in row.iter_mut().zip(&self.mean) {
            *x -= m;
        }
        if let Some(inv) = &self.inv_std {
            for (x, s) in row.iter_mut().zip(inv) {
                *x *= s;
            }
        }
    }

    pub fn apply(&self, feat: &FeatureMatrix) -> Result<FeatureMatrix, CmvnError> {
        if feat.cols() != self.dim() {
            return Err(CmvnError::DimMismatch {
                expected: self.dim(),
                got: feat.cols(),
            });
        }
        let mut out = feat.clone();
        for r in 0..out.rows() {
            self.apply_row(out.row_mut(r));
        }
        Ok(out)
    }
}

pub fn accumulate(mut acc: CmvnStats, feat: &FeatureMatrix) -> Result<CmvnStats, CmvnError> {
    acc.accumulate(feat)?;
    Ok(acc)
}

pub fn apply_cmvn(
    feat: &FeatureMatrix,
    stats: &CmvnStats,
    norm_vars: bool,
) -> Result<FeatureMatrix, CmvnError> {
    stats.transform(norm_vars)?.apply(feat)
}
