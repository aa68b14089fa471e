use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

const NORMALIZATION_TOL: f64 = 1e-10;

/// Normalization regime of a weight vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Non-negative weights summing to one.
    Simplex,
    /// Signed weights whose absolute values sum to one.
    SignedL1,
    /// No constraint.
    Raw,
}

/// Weights of a group effect `w_1 beta_1 + ... + w_p beta_p`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    weights: Vec<f64>,
    regime: Regime,
}

impl WeightVector {
    pub fn new(weights: Vec<f64>, regime: Regime) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyGroup);
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite("weights"));
        }
        match regime {
            Regime::Simplex => {
                if weights.iter().any(|&w| w < 0.0) {
                    return Err(Error::InvalidWeights("simplex weights must be non-negative"));
                }
                let sum: f64 = weights.iter().sum();
                if (sum - 1.0).abs() > NORMALIZATION_TOL {
                    return Err(Error::InvalidWeights("simplex weights must sum to one"));
                }
            }
            Regime::SignedL1 => {
                let sum: f64 = weights.iter().map(|w| w.abs()).sum();
                if (sum - 1.0).abs() > NORMALIZATION_TOL {
                    return Err(Error::InvalidWeights("absolute weights must sum to one"));
                }
            }
            Regime::Raw => {}
        }
        Ok(WeightVector { weights, regime })
    }

    pub fn simplex(weights: Vec<f64>) -> Result<Self> {
        Self::new(weights, Regime::Simplex)
    }

    pub fn signed_l1(weights: Vec<f64>) -> Result<Self> {
        Self::new(weights, Regime::SignedL1)
    }

    pub fn raw(weights: Vec<f64>) -> Result<Self> {
        Self::new(weights, Regime::Raw)
    }

    /// Equal weights `(1/p, ..., 1/p)`.
    pub fn average(p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::EmptyGroup);
        }
        Ok(WeightVector {
            weights: vec![1.0 / p as f64; p],
            regime: Regime::Simplex,
        })
    }

    /// Unit vector `e_j`, the individual effect of variable `j`.
    pub fn basis(p: usize, j: usize) -> Result<Self> {
        if j >= p {
            return Err(Error::IndexOutOfRange { index: j, len: p });
        }
        let mut weights = vec![0.0; p];
        weights[j] = 1.0;
        Ok(WeightVector {
            weights,
            regime: Regime::Simplex,
        })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Element-wise absolute values; a signed-L1 vector maps into the simplex.
    pub fn abs(&self) -> WeightVector {
        let regime = match self.regime {
            Regime::Raw => Regime::Raw,
            _ => Regime::Simplex,
        };
        WeightVector {
            weights: self.weights.iter().map(|w| w.abs()).collect(),
            regime,
        }
    }

    /// `p * sum(w_i^2) - 1`, the squared distance from the average weights
    /// scaled by `p` (zero exactly at `w_0`).
    pub fn delta(&self) -> f64 {
        let p = self.weights.len() as f64;
        p * self.weights.iter().map(|w| w * w).sum::<f64>() - 1.0
    }
}

impl AsRef<[f64]> for WeightVector {
    fn as_ref(&self) -> &[f64] {
        &self.weights
    }
}
