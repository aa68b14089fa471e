//! Minimizing a positive-definite quadratic form over the probability
//! simplex.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Euclidean projection onto `{u : u >= 0, sum(u) = 1}` (sort-based).
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (k, &s) in sorted.iter().enumerate() {
        cum += s;
        let t = (cum - 1.0) / (k + 1) as f64;
        if s - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QpSettings {
    /// Stop when successive iterates differ by less than this (max norm).
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for QpSettings {
    fn default() -> Self {
        QpSettings {
            tolerance: 1e-10,
            max_iterations: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexQpSolution {
    pub u: Vec<f64>,
    /// `u^T M u`.
    pub objective: f64,
    pub iterations: usize,
}

fn quad(m: &DMatrix<f64>, u: &DVector<f64>) -> f64 {
    (u.transpose() * m * u)[0]
}

/// Exact minimizer on the face spanned by the current support, kept only if
/// it is feasible and no worse.
fn polish(m: &DMatrix<f64>, u: &DVector<f64>) -> Option<DVector<f64>> {
    let support: Vec<usize> = (0..u.len()).filter(|&i| u[i] > 1e-12).collect();
    let k = support.len();
    let sub = DMatrix::from_fn(k, k, |i, j| m[(support[i], support[j])]);
    let z = sub.lu().solve(&DVector::from_element(k, 1.0))?;
    let total = z.sum();
    if !(total > 0.0) || z.iter().any(|&x| !(x >= 0.0)) {
        return None;
    }
    let mut out = DVector::zeros(u.len());
    for (i, &s) in support.iter().enumerate() {
        out[s] = z[i] / total;
    }
    Some(out)
}

/// `argmin u^T M u` over the simplex by projected gradient with step
/// `1/lambda_max(M)`, followed by an exact solve on the detected support.
pub fn minimize_on_simplex(m: &DMatrix<f64>, settings: QpSettings) -> Result<SimplexQpSolution> {
    let p = m.nrows();
    if p == 0 {
        return Err(Error::EmptyGroup);
    }
    if m.ncols() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: m.ncols(),
        });
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("quadratic form"));
    }
    let eig = m
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    if !(eig > 0.0) {
        return Err(Error::EigenFailure);
    }
    let step = 1.0 / eig;
    let mut u = DVector::from_vec(vec![1.0 / p as f64; p]);
    let mut iterations = 0;
    loop {
        if iterations >= settings.max_iterations {
            return Err(Error::QpNonConvergence { iterations });
        }
        iterations += 1;
        let grad = m * &u;
        let trial: Vec<f64> = u.iter().zip(grad.iter()).map(|(a, g)| a - step * g).collect();
        let next = DVector::from_vec(project_to_simplex(&trial));
        let change = (&next - &u).amax();
        u = next;
        if change < settings.tolerance {
            break;
        }
    }
    let mut objective = quad(m, &u);
    if let Some(candidate) = polish(m, &u) {
        let obj = quad(m, &candidate);
        if obj <= objective {
            u = candidate;
            objective = obj;
        }
    }
    Ok(SimplexQpSolution {
        u: u.iter().copied().collect(),
        objective,
        iterations,
    })
}
