//! Closed forms for the uniform (equicorrelated) model.
//!
//! The predictors of a uniform model are centered, unit length and pairwise
//! correlated with a common `r`, so `X^T X` is the equicorrelation matrix
//! `(1 - r) I + r 1 1^T`. Every expression here is evaluated through the
//! factored determinant-like term `(1 - r) (1 + (p - 1) r)` and, for quadratic
//! forms, through the Lagrange identity so that nothing cancels as `r -> 1`.

use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// The eleven correlation levels tabulated for `p = 8`.
pub const TABLE1_R_VALUES: [f64; 11] = [
    0.0,
    1.0 / 2.0,
    2.0 / 3.0,
    3.0 / 4.0,
    4.0 / 5.0,
    5.0 / 6.0,
    6.0 / 7.0,
    7.0 / 8.0,
    8.0 / 9.0,
    9.0 / 10.0,
    0.999,
];

/// `(p, r, sigma^2)` of a uniform model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformSpec {
    p: usize,
    r: f64,
    sigma2: f64,
}

impl UniformSpec {
    /// Unit error variance. `r = 0` is admitted as the orthogonal baseline.
    pub fn new(p: usize, r: f64) -> Result<Self> {
        Self::with_sigma2(p, r, 1.0)
    }

    pub fn with_sigma2(p: usize, r: f64, sigma2: f64) -> Result<Self> {
        if p < 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: p });
        }
        if !(0.0..1.0).contains(&r) {
            return Err(Error::DegenerateR(r));
        }
        if !(sigma2 > 0.0) || !sigma2.is_finite() {
            return Err(Error::InvalidConfig(alloc::format!(
                "error variance must be positive, got {sigma2}"
            )));
        }
        let spec = UniformSpec { p, r, sigma2 };
        debug_assert!(spec.denominator() > 0.0);
        Ok(spec)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// `1 + (p-2) r - (p-1) r^2 = (1 - r)(1 + (p-1) r)`.
    pub fn denominator(&self) -> f64 {
        let (p, r) = (self.p as f64, self.r);
        (1.0 - r) * (1.0 + (p - 1.0) * r)
    }

    /// The equicorrelation matrix itself.
    pub fn matrix(&self) -> DMatrix<f64> {
        equicorrelation_matrix(self.p, self.r)
    }

    /// Diagonal and off-diagonal entries of the inverse equicorrelation
    /// matrix.
    pub fn inverse(&self) -> UniformInverse {
        let (p, r) = (self.p as f64, self.r);
        let d = self.denominator();
        UniformInverse {
            p: self.p,
            t: (1.0 + (p - 2.0) * r) / d,
            v: -r / d,
        }
    }

    /// Variance of the least-squares estimator of the effect with weights
    /// `w`; valid for any real weights.
    pub fn effect_variance(&self, w: &[f64]) -> Result<f64> {
        if w.len() != self.p {
            return Err(Error::DimensionMismatch {
                expected: self.p,
                found: w.len(),
            });
        }
        if w.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("weights"));
        }
        let p = self.p as f64;
        let r = self.r;
        let mean = w.iter().sum::<f64>() / p;
        let sum_sq: f64 = w.iter().map(|x| x * x).sum();
        // p * sum w^2 - (sum w)^2 = sum_{i<j} (w_i - w_j)^2
        let spread: f64 = p * w.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
        // [1 + (p-2) r] sum w^2 - 2 r sum_{i<j} w_i w_j
        //   = (1 - r) sum w^2 + r (p sum w^2 - (sum w)^2)
        let numerator = (1.0 - r) * sum_sq + r * spread;
        Ok(self.sigma2 * numerator / self.denominator())
    }

    /// Variance of the average-effect estimator, `sigma^2 / (p + p(p-1) r)`.
    pub fn average_effect_variance(&self) -> f64 {
        let p = self.p as f64;
        self.sigma2 / (p * (1.0 + (p - 1.0) * self.r))
    }

    /// Variance of an individual coefficient estimator.
    pub fn individual_effect_variance(&self) -> f64 {
        let p = self.p as f64;
        self.sigma2 * (1.0 + (p - 2.0) * self.r) / self.denominator()
    }

    /// Variance of a simplex-weighted effect as a function of
    /// `delta = p * sum(w_i^2) - 1`.
    pub fn delta_variance(&self, delta: f64) -> Result<f64> {
        if !(delta >= 0.0) {
            return Err(Error::NegativeDelta(delta));
        }
        let p = self.p as f64;
        let r = self.r;
        let numerator = (1.0 - r) + delta * (1.0 + (p - 1.0) * r);
        Ok(self.sigma2 * numerator / (p * self.denominator()))
    }

    /// Largest `delta` in `[0, p - 1]` whose simplex effects have variance at
    /// most `var_budget`: the radius of the estimable neighbourhood around
    /// the average weights.
    pub fn estimable_delta_bound(&self, var_budget: f64) -> Result<f64> {
        let minimum = self.average_effect_variance();
        if !(var_budget >= minimum) {
            return Err(Error::BudgetTooSmall {
                budget: var_budget,
                minimum,
            });
        }
        let p = self.p as f64;
        let r = self.r;
        let spread = 1.0 + (p - 1.0) * r;
        // invert delta_variance: (1-r) + delta * spread = B p (1-r) spread / sigma^2
        let delta = (1.0 - r) * (var_budget * p / self.sigma2 - 1.0 / spread);
        Ok(delta.clamp(0.0, p - 1.0))
    }
}

/// `(X^T X)^{-1}` of a uniform model: `t` on the diagonal, `v` elsewhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformInverse {
    pub p: usize,
    pub t: f64,
    pub v: f64,
}

impl UniformInverse {
    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.p, self.p, |i, j| if i == j { self.t } else { self.v })
    }
}

pub fn equicorrelation_matrix(p: usize, r: f64) -> DMatrix<f64> {
    DMatrix::from_fn(p, p, |i, j| if i == j { 1.0 } else { r })
}

/// One row of the variance table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Table1Row {
    pub r: f64,
    pub var_avg: f64,
    pub var_indiv: f64,
}

/// Average- and individual-effect variances over a list of correlation
/// levels.
pub fn table1(p: usize, r_list: &[f64], sigma2: f64) -> Result<Vec<Table1Row>> {
    r_list
        .iter()
        .map(|&r| {
            let spec = UniformSpec::with_sigma2(p, r, sigma2)?;
            Ok(Table1Row {
                r,
                var_avg: spec.average_effect_variance(),
                var_indiv: spec.individual_effect_variance(),
            })
        })
        .collect()
}
