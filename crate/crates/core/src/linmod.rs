//! Least-squares fitting and correlation machinery.
//!
//! Predictors are stored column-major without the intercept; when a dataset
//! declares an intercept, the design matrix gets an explicit leading column of
//! ones and coefficient `0` is the intercept. All group indices in this crate
//! refer to *predictor columns* (0-based, intercept excluded); use
//! [`OlsFit::coef_index`] to map them to coefficient positions.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Designs whose reciprocal condition number falls below this are rejected.
pub const RCOND_TOLERANCE: f64 = 1e-12;

/// Response vector plus named predictor columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    y: Vec<f64>,
    x: DMatrix<f64>,
    names: Vec<String>,
    has_intercept: bool,
}

impl Dataset {
    /// Builds a dataset from predictor columns.
    ///
    /// Every value must be finite, every column must have length `y.len()`,
    /// and no predictor column may be constant (the intercept is added
    /// separately through `has_intercept`).
    pub fn new(
        y: Vec<f64>,
        columns: Vec<Vec<f64>>,
        names: Vec<String>,
        has_intercept: bool,
    ) -> Result<Self> {
        let n = y.len();
        if names.len() != columns.len() {
            return Err(Error::DimensionMismatch {
                expected: columns.len(),
                found: names.len(),
            });
        }
        for col in &columns {
            if col.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: col.len(),
                });
            }
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("response"));
        }
        if columns.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("predictors"));
        }
        let k = columns.len();
        let x = DMatrix::from_iterator(n, k, columns.into_iter().flatten());
        let data = Dataset {
            y,
            x,
            names,
            has_intercept,
        };
        for j in 0..k {
            if is_constant(data.column(j)) {
                return Err(Error::ZeroVariance { column: j });
            }
        }
        Ok(data)
    }

    /// Convenience constructor naming columns `x1, x2, ...`.
    pub fn from_columns(y: Vec<f64>, columns: Vec<Vec<f64>>, has_intercept: bool) -> Result<Self> {
        let names = (1..=columns.len()).map(|j| format!("x{j}")).collect();
        Dataset::new(y, columns, names, has_intercept)
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// Predictor matrix, `n x k`, intercept excluded.
    pub fn predictors(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn has_intercept(&self) -> bool {
        self.has_intercept
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn n_predictors(&self) -> usize {
        self.x.ncols()
    }

    /// Number of coefficients in the fitted model, intercept included.
    pub fn n_coefficients(&self) -> usize {
        self.x.ncols() + usize::from(self.has_intercept)
    }

    pub fn column(&self, j: usize) -> &[f64] {
        let n = self.n();
        &self.x.as_slice()[j * n..(j + 1) * n]
    }

    /// Design matrix with the explicit intercept column when declared.
    pub fn design_matrix(&self) -> DMatrix<f64> {
        if self.has_intercept {
            let n = self.n();
            let mut d = DMatrix::zeros(n, self.x.ncols() + 1);
            d.column_mut(0).fill(1.0);
            d.columns_mut(1, self.x.ncols()).copy_from(&self.x);
            d
        } else {
            self.x.clone()
        }
    }

    /// Same predictors, new response.
    pub fn with_response(&self, y: Vec<f64>) -> Result<Self> {
        if y.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: y.len(),
            });
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("response"));
        }
        Ok(Dataset { y, ..self.clone() })
    }

    /// Subset of rows, in the given order. Constant columns are not rejected
    /// here; a subset that loses rank fails later at the fit.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let n = self.n();
        if let Some(&bad) = rows.iter().find(|&&r| r >= n) {
            return Err(Error::IndexOutOfRange { index: bad, len: n });
        }
        let y = rows.iter().map(|&r| self.y[r]).collect();
        let x = DMatrix::from_fn(rows.len(), self.x.ncols(), |i, j| self.x[(rows[i], j)]);
        Ok(Dataset {
            y,
            x,
            names: self.names.clone(),
            has_intercept: self.has_intercept,
        })
    }

    /// Raw row-wise prediction `X b` where `b` has one entry per coefficient.
    pub fn predict(&self, coefficients: &DVector<f64>) -> Result<DVector<f64>> {
        if coefficients.len() != self.n_coefficients() {
            return Err(Error::DimensionMismatch {
                expected: self.n_coefficients(),
                found: coefficients.len(),
            });
        }
        Ok(self.design_matrix() * coefficients)
    }

    /// Residual sum of squares for arbitrary coefficients.
    pub fn rss(&self, coefficients: &DVector<f64>) -> Result<f64> {
        let fitted = self.predict(coefficients)?;
        Ok(self
            .y
            .iter()
            .zip(fitted.iter())
            .map(|(y, f)| (y - f) * (y - f))
            .sum())
    }
}

fn is_constant(col: &[f64]) -> bool {
    if col.len() < 2 {
        return true;
    }
    let (mean, ss) = centered_stats(col);
    let scale = libm::sqrt(col.iter().map(|v| v * v).sum::<f64>()).max(mean.abs());
    libm::sqrt(ss) <= 1e-14 * scale || ss == 0.0
}

/// Mean and centered sum of squares.
fn centered_stats(col: &[f64]) -> (f64, f64) {
    let n = col.len() as f64;
    let mean = col.iter().sum::<f64>() / n;
    let ss = col.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, ss)
}

pub(crate) fn validate_group(group: &[usize], len: usize) -> Result<()> {
    if group.is_empty() {
        return Err(Error::EmptyGroup);
    }
    for (i, &g) in group.iter().enumerate() {
        if g >= len {
            return Err(Error::IndexOutOfRange { index: g, len });
        }
        if group[..i].contains(&g) {
            return Err(Error::DuplicateIndex(g));
        }
    }
    Ok(())
}

/// A factorized design matrix that can be refitted against many responses.
#[derive(Debug, Clone)]
pub struct Design {
    x: DMatrix<f64>,
    /// `R^{-1} Q^T`, so that `beta_hat = solver * y`.
    solver: DMatrix<f64>,
    xtx: DMatrix<f64>,
    xtx_inv: DMatrix<f64>,
    rcond: f64,
    has_intercept: bool,
    names: Vec<String>,
}

impl Design {
    /// Householder QR of the design; rejects rank-deficient or
    /// near-singular designs.
    pub fn factorize(data: &Dataset) -> Result<Self> {
        let x = data.design_matrix();
        let (n, q) = x.shape();
        if n <= q {
            return Err(Error::InsufficientObservations { n, q });
        }
        let qr = x.clone().qr();
        let r = qr.r();
        let sv = r.clone().singular_values();
        let smax = sv.max();
        let smin = sv.min();
        let rcond = if smax > 0.0 { smin / smax } else { 0.0 };
        if !(rcond >= RCOND_TOLERANCE) {
            return Err(Error::SingularDesign { rcond });
        }
        let q_thin = qr.q();
        let solver = r
            .solve_upper_triangular(&q_thin.transpose())
            .ok_or(Error::SingularDesign { rcond })?;
        let r_inv = r
            .solve_upper_triangular(&DMatrix::identity(q, q))
            .ok_or(Error::SingularDesign { rcond })?;
        let mut xtx_inv = &r_inv * r_inv.transpose();
        symmetrize(&mut xtx_inv);
        let mut xtx = x.transpose() * &x;
        symmetrize(&mut xtx);

        let mut names = Vec::with_capacity(q);
        if data.has_intercept() {
            names.push(String::from("(Intercept)"));
        }
        names.extend(data.names().iter().cloned());

        Ok(Design {
            x,
            solver,
            xtx,
            xtx_inv,
            rcond,
            has_intercept: data.has_intercept(),
            names,
        })
    }

    pub fn rcond(&self) -> f64 {
        self.rcond
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_coefficients(&self) -> usize {
        self.x.ncols()
    }

    pub fn xtx_inv(&self) -> &DMatrix<f64> {
        &self.xtx_inv
    }

    /// Least-squares coefficients for a response, without the variance
    /// bookkeeping of a full fit.
    pub fn coefficients(&self, y: &[f64]) -> Result<DVector<f64>> {
        if y.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: y.len(),
            });
        }
        Ok(&self.solver * DVector::from_column_slice(y))
    }

    pub fn fit(&self, y: &[f64]) -> Result<OlsFit> {
        let beta_hat = self.coefficients(y)?;
        let fitted = &self.x * &beta_hat;
        let rss: f64 = y
            .iter()
            .zip(fitted.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let (n, q) = self.x.shape();
        let dof = n - q;
        let sigma2_hat = rss / dof as f64;
        let cov = &self.xtx_inv * sigma2_hat;
        Ok(OlsFit {
            beta_hat,
            sigma2_hat,
            xtx: self.xtx.clone(),
            xtx_inv: self.xtx_inv.clone(),
            cov,
            dof,
            n,
            rss,
            has_intercept: self.has_intercept,
            names: self.names.clone(),
        })
    }
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let k = m.nrows();
    for i in 0..k {
        for j in (i + 1)..k {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Result of an ordinary least-squares fit.
#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub beta_hat: DVector<f64>,
    /// `RSS / (n - q)`.
    pub sigma2_hat: f64,
    pub xtx: DMatrix<f64>,
    /// Unscaled covariance `(X^T X)^{-1}`.
    pub xtx_inv: DMatrix<f64>,
    /// `sigma2_hat * xtx_inv`.
    pub cov: DMatrix<f64>,
    pub dof: usize,
    pub n: usize,
    pub rss: f64,
    pub has_intercept: bool,
    /// Coefficient labels, `(Intercept)` first when present.
    pub names: Vec<String>,
}

impl OlsFit {
    /// Coefficient position of predictor column `col`.
    pub fn coef_index(&self, col: usize) -> usize {
        col + usize::from(self.has_intercept)
    }

    pub fn n_coefficients(&self) -> usize {
        self.beta_hat.len()
    }

    pub fn n_predictors(&self) -> usize {
        self.beta_hat.len() - usize::from(self.has_intercept)
    }

    /// Validates a predictor group and maps it to coefficient positions.
    pub fn group_coefficients(&self, group: &[usize]) -> Result<Vec<usize>> {
        validate_group(group, self.n_predictors())?;
        Ok(group.iter().map(|&g| self.coef_index(g)).collect())
    }

    /// Square sub-block of `m` on the given coefficient positions.
    pub(crate) fn block(m: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])])
    }

    /// Group block of `(X^T X)^{-1}`.
    pub fn xtx_inv_block(&self, group: &[usize]) -> Result<DMatrix<f64>> {
        let idx = self.group_coefficients(group)?;
        Ok(Self::block(&self.xtx_inv, &idx))
    }
}

/// Ordinary least squares: `beta_hat = (X^T X)^{-1} X^T y`.
pub fn fit_ols(data: &Dataset) -> Result<OlsFit> {
    Design::factorize(data)?.fit(data.y())
}

/// Pearson correlations of a predictor group plus the centered column norms
/// `s_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    values: DMatrix<f64>,
    column_sds: Vec<f64>,
}

impl CorrelationMatrix {
    /// Builds a correlation matrix from explicit parts. Fails unless the
    /// matrix is square, symmetric, has a unit diagonal and entries in
    /// `[-1, 1]`, and the `s_j` are positive.
    pub fn from_parts(values: DMatrix<f64>, column_sds: Vec<f64>) -> Result<Self> {
        let p = values.nrows();
        if values.ncols() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: values.ncols(),
            });
        }
        if column_sds.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: column_sds.len(),
            });
        }
        if let Some(j) = column_sds.iter().position(|&s| !(s > 0.0) || !s.is_finite()) {
            return Err(Error::ZeroVariance { column: j });
        }
        for i in 0..p {
            if values[(i, i)] != 1.0 {
                return Err(Error::InvalidConfig(format!("diagonal entry {i} is not 1")));
            }
            for j in 0..p {
                let v = values[(i, j)];
                if !v.is_finite() || v.abs() > 1.0 || (v - values[(j, i)]).abs() > 1e-12 {
                    return Err(Error::InvalidConfig(format!(
                        "entry ({i}, {j}) is not a valid symmetric correlation"
                    )));
                }
            }
        }
        Ok(CorrelationMatrix { values, column_sds })
    }

    /// Equicorrelation matrix with unit `s_j`.
    pub fn uniform(p: usize, r: f64) -> Result<Self> {
        let values = DMatrix::from_fn(p, p, |i, j| if i == j { 1.0 } else { r });
        Self::from_parts(values, alloc::vec![1.0; p])
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    pub fn column_sds(&self) -> &[f64] {
        &self.column_sds
    }

    pub fn dim(&self) -> usize {
        self.values.nrows()
    }
}

/// Pearson correlations of the group columns.
pub fn correlation(data: &Dataset, group: &[usize]) -> Result<CorrelationMatrix> {
    validate_group(group, data.n_predictors())?;
    let p = group.len();
    let mut centered: Vec<Vec<f64>> = Vec::with_capacity(p);
    let mut sds = Vec::with_capacity(p);
    for &g in group {
        let col = data.column(g);
        let (mean, ss) = centered_stats(col);
        let s = libm::sqrt(ss);
        if !(s > 0.0) {
            return Err(Error::ZeroVariance { column: g });
        }
        centered.push(col.iter().map(|v| v - mean).collect());
        sds.push(s);
    }
    let mut values = DMatrix::identity(p, p);
    for i in 0..p {
        for j in (i + 1)..p {
            let dot: f64 = centered[i]
                .iter()
                .zip(&centered[j])
                .map(|(a, b)| a * b)
                .sum();
            let r = (dot / (sds[i] * sds[j])).clamp(-1.0, 1.0);
            values[(i, j)] = r;
            values[(j, i)] = r;
        }
    }
    Ok(CorrelationMatrix {
        values,
        column_sds: sds,
    })
}

/// Centers every predictor and the response, and scales the group columns to
/// unit length. Returns the new dataset (without intercept) and the group
/// scale vector `s`, so that the standardized coefficients satisfy
/// `beta'_j = s_j beta_j` for an intercept model.
pub fn standardize(data: &Dataset, group: &[usize]) -> Result<(Dataset, Vec<f64>)> {
    validate_group(group, data.n_predictors())?;
    let k = data.n_predictors();
    let mut columns = Vec::with_capacity(k);
    let mut scales = alloc::vec![0.0; group.len()];
    for j in 0..k {
        let col = data.column(j);
        let (mean, ss) = centered_stats(col);
        let mut c: Vec<f64> = col.iter().map(|v| v - mean).collect();
        if let Some(pos) = group.iter().position(|&g| g == j) {
            let s = libm::sqrt(ss);
            if !(s > 0.0) {
                return Err(Error::ZeroVariance { column: j });
            }
            c.iter_mut().for_each(|v| *v /= s);
            scales[pos] = s;
        }
        columns.push(c);
    }
    let (ybar, _) = centered_stats(data.y());
    let y = data.y().iter().map(|v| v - ybar).collect();
    let out = Dataset::new(y, columns, data.names().to_vec(), false)?;
    Ok((out, scales))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use approx::assert_relative_eq;

    fn lcg_columns(n: usize, k: usize, mut state: u64) -> Vec<Vec<f64>> {
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        (0..k).map(|_| (0..n).map(|_| next()).collect()).collect()
    }

    #[test]
    fn orthonormal_design_interpolates() {
        // columns of a 4x4 Hadamard matrix scaled to unit length
        let h = [
            [1.0, 1.0, 1.0, 1.0],
            [1.0, -1.0, 1.0, -1.0],
            [1.0, 1.0, -1.0, -1.0],
        ];
        let cols: Vec<Vec<f64>> = h.iter().map(|c| c.iter().map(|v| v / 2.0).collect()).collect();
        let y = cols[0].clone();
        // n must exceed q, so add a fifth row orthogonal to all columns
        let mut cols5 = cols.clone();
        cols5.iter_mut().for_each(|c| c.push(0.0));
        let mut y5 = y.clone();
        y5.push(0.0);
        // x1 constant over the first 4 rows but zero in the 5th: not constant
        let data = Dataset::from_columns(y5, cols5, false).unwrap();
        let fit = fit_ols(&data).unwrap();
        assert_relative_eq!(fit.beta_hat[0], 1.0, epsilon = 1e-12);
        assert!(fit.beta_hat[1].abs() < 1e-12);
        assert!(fit.beta_hat[2].abs() < 1e-12);
        assert!(fit.rss < 1e-24);
    }

    #[test]
    fn two_by_two_uniform_variance() {
        // Columns centered, unit length, correlation 0.5: rows of a 2-column
        // design built from an explicit construction.
        let a = [1.0, -1.0, 0.0];
        let b = [1.0, 1.0, -2.0];
        let na = (2.0f64).sqrt();
        let nb = (6.0f64).sqrt();
        let u: Vec<f64> = a.iter().map(|v| v / na).collect();
        let v: Vec<f64> = b.iter().map(|v| v / nb).collect();
        // x1 = u, x2 = 0.5 u + sqrt(0.75) v
        let x2: Vec<f64> = u.iter().zip(&v).map(|(p, q)| 0.5 * p + 0.75f64.sqrt() * q).collect();
        let mut x1 = u.clone();
        let mut x2 = x2;
        // pad with an orthogonal observation so that n > q
        x1.push(0.0);
        x2.push(0.0);
        let data = Dataset::from_columns(vec![0.3, -0.1, 0.2, 0.5], vec![x1, x2], false).unwrap();
        let fit = fit_ols(&data).unwrap();
        assert_relative_eq!(fit.xtx_inv[(0, 0)], 4.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(fit.xtx_inv[(1, 1)], 4.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(fit.xtx_inv[(0, 1)], -2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn normal_equations_and_inverse_identity() {
        let cols = lcg_columns(30, 5, 7);
        let y: Vec<f64> = (0..30).map(|i| (i as f64 * 0.37).sin()).collect();
        let data = Dataset::from_columns(y.clone(), cols, true).unwrap();
        let fit = fit_ols(&data).unwrap();
        let x = data.design_matrix();
        let resid = DVector::from_vec(y.clone()) - &x * &fit.beta_hat;
        let ynorm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let xtr = x.transpose() * resid;
        assert!(xtr.amax() < 1e-8 * ynorm);
        let ident = &fit.xtx * &fit.xtx_inv;
        let dev = (ident - DMatrix::<f64>::identity(6, 6)).amax();
        assert!(dev < 1e-8, "{dev}");
        assert_eq!(fit.dof, 24);
        for i in 0..6 {
            for j in 0..6 {
                let a = fit.xtx_inv[(i, j)];
                let b = fit.xtx_inv[(j, i)];
                assert!((a - b).abs() <= 1e-10 * a.abs().max(b.abs()));
            }
        }
    }

    #[test]
    fn duplicate_columns_are_singular() {
        let mut cols = lcg_columns(10, 2, 3);
        cols[1] = cols[0].clone();
        let data = Dataset::from_columns(vec![1.0; 10], cols, true).unwrap();
        assert!(matches!(fit_ols(&data), Err(Error::SingularDesign { .. })));
    }

    #[test]
    fn ragged_and_constant_input_rejected() {
        let err = Dataset::from_columns(vec![1.0, 2.0, 3.0], vec![vec![1.0, 2.0]], true);
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
        let err = Dataset::from_columns(vec![1.0, 2.0, 3.0], vec![vec![4.0; 3]], true);
        assert!(matches!(err, Err(Error::ZeroVariance { column: 0 })));
        let err = Dataset::from_columns(vec![1.0, f64::NAN], vec![vec![1.0, 2.0]], true);
        assert!(matches!(err, Err(Error::NonFinite(_))));
    }

    #[test]
    fn too_few_observations() {
        let data = Dataset::from_columns(vec![1.0, 2.0], vec![vec![1.0, 3.0]], true).unwrap();
        assert!(matches!(fit_ols(&data), Err(Error::InsufficientObservations { n: 2, q: 2 })));
    }

    #[test]
    fn perfect_correlations() {
        let x1 = vec![1.0, 3.0, 2.0, 7.0, 5.0];
        let x2: Vec<f64> = x1.iter().map(|v| 2.0 * v).collect();
        let x3: Vec<f64> = x1.iter().map(|v| -v).collect();
        let data = Dataset::from_columns(vec![0.0; 5], vec![x1, x2, x3], true).unwrap();
        let c = correlation(&data, &[0, 1, 2]).unwrap();
        assert_relative_eq!(c.get(0, 1), 1.0, epsilon = 1e-15);
        assert_relative_eq!(c.get(0, 2), -1.0, epsilon = 1e-15);
        assert_eq!(c.get(1, 1), 1.0);
    }

    #[test]
    fn mixing_weight_correlation_population_value() {
        // Population orthonormal z1, z2 (exactly orthogonal, equal norm, mean 0)
        let z1 = [1.0, -1.0, 1.0, -1.0];
        let z2 = [1.0, 1.0, -1.0, -1.0];
        let w = 0.9;
        let x2: Vec<f64> = z1.iter().zip(&z2).map(|(a, b)| w * a + (1.0 - w) * b).collect();
        let data = Dataset::from_columns(vec![0.0; 4], vec![z1.to_vec(), x2], true).unwrap();
        let c = correlation(&data, &[0, 1]).unwrap();
        let expected = 0.9 / (0.81f64 + 0.01).sqrt();
        assert_relative_eq!(c.get(0, 1), expected, epsilon = 1e-12);
        assert_relative_eq!(expected, 0.99388, epsilon = 1e-5);
    }

    #[test]
    fn standardize_scales_and_centers() {
        // centered, sd-norm 2 column
        let x1 = vec![1.0, -1.0, 1.0, -1.0, 0.0, 0.0, 0.0, 0.0];
        let x1: Vec<f64> = x1.iter().map(|v| v * 1.0).collect();
        let x2 = vec![0.5, 0.5, -0.5, -0.5, 0.0, 0.0, 0.0, 0.0]; // already unit length, mean 0
        let data = Dataset::from_columns(vec![1.0; 8].iter().enumerate().map(|(i, _)| i as f64).collect(), vec![x1, x2.clone()], true).unwrap();
        let (std, s) = standardize(&data, &[0, 1]).unwrap();
        assert_relative_eq!(s[0], 2.0, epsilon = 1e-15);
        assert_relative_eq!(s[1], 1.0, epsilon = 1e-15);
        assert_eq!(std.column(1), &x2[..]);
        let norm: f64 = std.column(0).iter().map(|v| v * v).sum::<f64>().sqrt();
        assert_relative_eq!(norm, 1.0, epsilon = 1e-15);
        assert!(std.y().iter().sum::<f64>().abs() < 1e-12);
        assert!(!std.has_intercept());
    }

    #[test]
    fn standardized_fit_round_trip() {
        let cols = lcg_columns(40, 4, 11);
        let y: Vec<f64> = (0..40).map(|i| (i as f64 * 0.71).cos() * 3.0 + i as f64 * 0.01).collect();
        let cols: Vec<Vec<f64>> = cols
            .into_iter()
            .enumerate()
            .map(|(j, c)| c.into_iter().map(|v| v * (j as f64 + 1.5) + 4.0).collect())
            .collect();
        let data = Dataset::from_columns(y, cols, true).unwrap();
        let direct = fit_ols(&data).unwrap();
        let group = [0, 2, 3];
        let (std, s) = standardize(&data, &group).unwrap();
        let sfit = fit_ols(&std).unwrap();
        for (pos, &g) in group.iter().enumerate() {
            let back = sfit.beta_hat[g] / s[pos];
            let want = direct.beta_hat[direct.coef_index(g)];
            assert!((back - want).abs() <= 1e-8 * want.abs().max(1.0));
        }
    }

    #[test]
    fn group_validation() {
        assert_eq!(validate_group(&[], 3), Err(Error::EmptyGroup));
        assert_eq!(validate_group(&[0, 3], 3), Err(Error::IndexOutOfRange { index: 3, len: 3 }));
        assert_eq!(validate_group(&[1, 1], 3), Err(Error::DuplicateIndex(1)));
    }
}
