//! Group-effect estimation on arbitrary designs.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::apc::SignArrangement;
use crate::error::{Error, Result};
use crate::linmod::{CorrelationMatrix, OlsFit};
use crate::tdist::two_sided_p_value;
use crate::weights::WeightVector;

/// Point estimate of an effect with its t test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectEstimate {
    pub value: f64,
    pub variance: f64,
    pub std_error: f64,
    pub t_stat: f64,
    /// Two-sided, from a t distribution with `dof` degrees of freedom.
    pub p_value: f64,
    pub dof: usize,
}

impl EffectEstimate {
    pub fn new(value: f64, variance: f64, dof: usize) -> Self {
        let variance = variance.max(0.0);
        let std_error = libm::sqrt(variance);
        let t_stat = if std_error > 0.0 {
            value / std_error
        } else if value == 0.0 {
            0.0
        } else {
            value.signum() * f64::INFINITY
        };
        let p_value = if dof == 0 {
            f64::NAN
        } else {
            two_sided_p_value(t_stat, dof as f64)
        };
        EffectEstimate {
            value,
            variance,
            std_error,
            t_stat,
            p_value,
            dof,
        }
    }
}

/// Simplex weights proportional to the centered column norms `s_j`.
pub fn variability_weights(corr: &CorrelationMatrix) -> Result<WeightVector> {
    variability_weights_from_scales(corr.column_sds())
}

pub fn variability_weights_from_scales(scales: &[f64]) -> Result<WeightVector> {
    if let Some(j) = scales.iter().position(|&s| !(s > 0.0) || !s.is_finite()) {
        return Err(Error::ZeroVariance { column: j });
    }
    let total: f64 = scales.iter().sum();
    let mut w: Vec<f64> = scales.iter().map(|s| s / total).collect();
    // absorb rounding so the simplex check holds exactly
    let drift = 1.0 - w.iter().sum::<f64>();
    if let Some(max) = w.iter_mut().max_by(|a, b| a.total_cmp(b)) {
        *max += drift;
    }
    WeightVector::simplex(w)
}

/// Coefficient-space weights `signs ⊙ w`.
pub fn signed_weights(w: &WeightVector, signs: &SignArrangement) -> Result<Vec<f64>> {
    if w.len() != signs.len() {
        return Err(Error::DimensionMismatch {
            expected: w.len(),
            found: signs.len(),
        });
    }
    Ok(signs.apply(w.as_slice()))
}

/// Estimate `sum_i s_i w_i beta_{g(i)}` with variance `w~^T Cov_g w~`.
pub fn estimate_effect(
    fit: &OlsFit,
    group: &[usize],
    w: &WeightVector,
    signs: &SignArrangement,
) -> Result<EffectEstimate> {
    let idx = fit.group_coefficients(group)?;
    if w.len() != idx.len() {
        return Err(Error::DimensionMismatch {
            expected: idx.len(),
            found: w.len(),
        });
    }
    let wt = DVector::from_vec(signed_weights(w, signs)?);
    let value: f64 = idx
        .iter()
        .zip(wt.iter())
        .map(|(&i, wi)| wi * fit.beta_hat[i])
        .sum();
    let cov = OlsFit::block(&fit.cov, &idx);
    let variance = (wt.transpose() * cov * &wt)[0];
    Ok(EffectEstimate::new(value, variance, fit.dof))
}

/// Every coefficient as its own effect, in coefficient order.
pub fn individual_effects(fit: &OlsFit) -> Vec<EffectEstimate> {
    (0..fit.n_coefficients())
        .map(|i| EffectEstimate::new(fit.beta_hat[i], fit.cov[(i, i)], fit.dof))
        .collect()
}

/// Eigen-decomposition view of `var(c^T beta_hat)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SilveyDecomposition {
    /// `sigma^2 * sum(alpha_i^2 / lambda_i)`.
    pub variance: f64,
    /// Coordinates of `c` in the eigenbasis.
    pub alphas: Vec<f64>,
    /// Eigenvalues of `X^T X`, descending.
    pub lambdas: Vec<f64>,
}

/// Decomposes the variance of `c^T beta_hat` along the eigenvectors of
/// `X^T X`, scaled by the fitted error variance.
pub fn silvey_variance(fit: &OlsFit, c: &[f64]) -> Result<SilveyDecomposition> {
    silvey_decomposition(&fit.xtx, c, fit.sigma2_hat)
}

pub fn silvey_decomposition(xtx: &DMatrix<f64>, c: &[f64], sigma2: f64) -> Result<SilveyDecomposition> {
    let q = xtx.nrows();
    if c.len() != q {
        return Err(Error::DimensionMismatch {
            expected: q,
            found: c.len(),
        });
    }
    let eig = xtx
        .clone()
        .try_symmetric_eigen(f64::EPSILON, 10_000)
        .ok_or(Error::EigenFailure)?;
    let mut order: Vec<usize> = (0..q).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let c = DVector::from_column_slice(c);
    let mut alphas = Vec::with_capacity(q);
    let mut lambdas = Vec::with_capacity(q);
    for &k in &order {
        let lambda = eig.eigenvalues[k];
        if !(lambda > 0.0) {
            return Err(Error::SingularDesign { rcond: 0.0 });
        }
        alphas.push(eig.eigenvectors.column(k).dot(&c));
        lambdas.push(lambda);
    }
    let variance = sigma2
        * alphas
            .iter()
            .zip(&lambdas)
            .map(|(a, l)| a * a / l)
            .sum::<f64>();
    Ok(SilveyDecomposition {
        variance,
        alphas,
        lambdas,
    })
}
