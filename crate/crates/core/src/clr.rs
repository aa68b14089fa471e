//! Constrained local regression.
//!
//! The weighted group effect is well estimated even when the individual
//! coefficients of a correlated group are not. Fixing `w^T beta = tau_hat`
//! confines the group coefficients to a hyperplane; intersecting it with the
//! sphere `|beta|^2 = c` and choosing a point on that intersection gives a
//! local estimate of the group's coefficients. Everything here works in APC
//! coordinates (`s_i beta_i`) and maps back at the end.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DVector;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::apc::{apc_arrangement, apc_arrangement_with_anchor, SignArrangement};
use crate::effects::{estimate_effect, variability_weights};
use crate::error::{Error, Result};
use crate::linmod::{correlation, fit_ols, Dataset, OlsFit};
use crate::weights::WeightVector;

const ORTHO_TOL: f64 = 1e-12;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Hyperplane `w^T beta = tau_hat` in APC coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ClrProblem {
    w: Vec<f64>,
    tau_hat: f64,
}

impl ClrProblem {
    pub fn new(w: &WeightVector, tau_hat: f64) -> Result<Self> {
        Self::from_slice(w.as_slice(), tau_hat)
    }

    pub fn from_slice(w: &[f64], tau_hat: f64) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::EmptyGroup);
        }
        if !tau_hat.is_finite() || w.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("hyperplane"));
        }
        if dot(w, w) == 0.0 {
            return Err(Error::ZeroWeight);
        }
        Ok(ClrProblem {
            w: w.to_vec(),
            tau_hat,
        })
    }

    pub fn w(&self) -> &[f64] {
        &self.w
    }

    pub fn tau_hat(&self) -> f64 {
        self.tau_hat
    }

    pub fn p(&self) -> usize {
        self.w.len()
    }

    /// `w^T beta - tau_hat`.
    pub fn residual(&self, beta: &[f64]) -> f64 {
        dot(&self.w, beta) - self.tau_hat
    }
}

/// Closest point of the hyperplane to the origin and its squared norm.
pub fn min_norm_point(problem: &ClrProblem) -> (Vec<f64>, f64) {
    let ww = dot(&problem.w, &problem.w);
    let scale = problem.tau_hat / ww;
    let beta = problem.w.iter().map(|x| scale * x).collect();
    (beta, problem.tau_hat * problem.tau_hat / ww)
}

fn orthogonalize(problem: &ClrProblem, v: &[f64]) -> Option<Vec<f64>> {
    let w = &problem.w;
    let k = dot(v, w) / dot(w, w);
    let u: Vec<f64> = v.iter().zip(w).map(|(a, b)| a - k * b).collect();
    let norm = libm::sqrt(dot(&u, &u));
    let scale = libm::sqrt(dot(v, v)).max(1.0);
    if norm <= ORTHO_TOL * scale {
        return None;
    }
    Some(u.iter().map(|x| x / norm).collect())
}

/// The two points `beta* ± sqrt(c - |beta*|^2) d` where the line through
/// `beta*` along `d` meets the sphere `|beta|^2 = c`.
pub fn sphere_candidates(problem: &ClrProblem, c: f64, direction: &[f64]) -> Result<[Vec<f64>; 2]> {
    if direction.len() != problem.p() {
        return Err(Error::DimensionMismatch {
            expected: problem.p(),
            found: direction.len(),
        });
    }
    let (star, m) = min_norm_point(problem);
    if !(c >= m) {
        return Err(Error::RadiusTooSmall { c, minimum: m });
    }
    let d = orthogonalize(problem, direction).ok_or(Error::InvalidConfig(
        "direction must not be parallel to the weights".into(),
    ))?;
    let h = libm::sqrt(c - m);
    let plus = star.iter().zip(&d).map(|(b, x)| b + h * x).collect();
    let minus = star.iter().zip(&d).map(|(b, x)| b - h * x).collect();
    Ok([plus, minus])
}

/// Unit direction in the hyperplane pointing from `beta*` toward `target`;
/// falls back to the first canonical axis with a component orthogonal to
/// `w` when the target sits on the normal line.
pub fn search_direction(problem: &ClrProblem, target: &[f64]) -> Vec<f64> {
    let (star, _) = min_norm_point(problem);
    let diff: Vec<f64> = target.iter().zip(&star).map(|(a, b)| a - b).collect();
    if let Some(d) = orthogonalize(problem, &diff) {
        return d;
    }
    let p = problem.p();
    (0..p)
        .find_map(|j| {
            let mut e = vec![0.0; p];
            e[j] = 1.0;
            orthogonalize(problem, &e)
        })
        // only reached when p == 1, where the hyperplane is a point
        .unwrap_or_else(|| vec![0.0; p])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    /// Lower training residual sum of squares.
    MinRss,
    /// Lower k-fold cross-validated squared prediction error.
    KFold { folds: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClrConfig {
    pub c_offset: f64,
    /// Extra offsets to score alongside `c_offset`; the best is kept.
    pub offset_grid: Vec<f64>,
    pub selection: Selection,
    /// Seeds the fold assignment.
    pub seed: u64,
    /// APC anchor; `None` picks one automatically.
    pub anchor: Option<usize>,
}

impl Default for ClrConfig {
    fn default() -> Self {
        ClrConfig {
            c_offset: 3.0,
            offset_grid: Vec::new(),
            selection: Selection::MinRss,
            seed: 0,
            anchor: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClrSolution {
    pub group: Vec<usize>,
    pub signs: SignArrangement,
    /// Variability weights of the hyperplane.
    pub weights: WeightVector,
    pub tau_hat: f64,
    /// Minimum-norm point, APC coordinates.
    pub beta_star: Vec<f64>,
    pub min_norm_sq: f64,
    pub c_offset: f64,
    pub c: f64,
    pub direction: Vec<f64>,
    /// `+` and `-` candidates, APC coordinates.
    pub candidates: [Vec<f64>; 2],
    pub chosen_index: usize,
    /// Chosen group coefficients in the original signs.
    pub chosen: Vec<f64>,
    /// Full coefficient vector: OLS outside the group, `chosen` inside.
    pub coefficients: DVector<f64>,
    pub ols_group: Vec<f64>,
    /// Selection score of each candidate at the chosen offset.
    pub scores: [f64; 2],
    pub rss_ols: f64,
    pub rss_beta_star: f64,
    pub rss_chosen: f64,
}

struct Local {
    signs: SignArrangement,
    weights: WeightVector,
    problem: ClrProblem,
    fit: OlsFit,
    ols_apc: Vec<f64>,
}

fn local_problem(data: &Dataset, group: &[usize], anchor: Option<usize>) -> Result<Local> {
    let fit = fit_ols(data)?;
    let corr = correlation(data, group)?;
    let apc = match anchor {
        Some(a) => apc_arrangement_with_anchor(&corr, a)?,
        None => apc_arrangement(&corr),
    };
    let weights = variability_weights(&corr)?;
    let est = estimate_effect(&fit, group, &weights, &apc.signs)?;
    let idx = fit.group_coefficients(group)?;
    let ols_apc = apc
        .signs
        .apply(&idx.iter().map(|&i| fit.beta_hat[i]).collect::<Vec<_>>());
    let problem = ClrProblem::new(&weights, est.value)?;
    Ok(Local {
        signs: apc.signs,
        weights,
        problem,
        fit,
        ols_apc,
    })
}

/// Candidates (APC coordinates) and their full coefficient vectors.
fn candidates_for(local: &Local, group: &[usize], offset: f64) -> Result<([Vec<f64>; 2], [DVector<f64>; 2], Vec<f64>)> {
    let (_, m) = min_norm_point(&local.problem);
    let direction = search_direction(&local.problem, &local.ols_apc);
    let cands = sphere_candidates(&local.problem, m + offset, &direction)?;
    let idx = local.fit.group_coefficients(group)?;
    let full = |g: &[f64]| {
        let mut b = local.fit.beta_hat.clone();
        for (k, &i) in idx.iter().enumerate() {
            b[i] = local.signs.sign(k) * g[k];
        }
        b
    };
    let fulls = [full(&cands[0]), full(&cands[1])];
    Ok((cands, fulls, direction))
}

fn fold_assignment(n: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let mut fold = vec![0; n];
    for (pos, &row) in order.iter().enumerate() {
        fold[row] = pos % folds;
    }
    fold
}

/// Cross-validated squared error of the `+`/`-` candidates for one offset.
fn cv_scores(
    data: &Dataset,
    group: &[usize],
    offset: f64,
    fold: &[usize],
    folds: usize,
    anchor: Option<usize>,
) -> Result<[f64; 2]> {
    let mut scores = [0.0; 2];
    for f in 0..folds {
        let train: Vec<usize> = (0..data.n()).filter(|&i| fold[i] != f).collect();
        let test: Vec<usize> = (0..data.n()).filter(|&i| fold[i] == f).collect();
        if test.is_empty() {
            continue;
        }
        let local = local_problem(&data.select_rows(&train)?, group, anchor)?;
        let (_, fulls, _) = candidates_for(&local, group, offset)?;
        let held = data.select_rows(&test)?;
        for (s, b) in scores.iter_mut().zip(&fulls) {
            *s += held.rss(b)?;
        }
    }
    Ok(scores)
}

/// Constrained local regression for one group. Coefficients outside the
/// group keep their OLS values.
pub fn solve_clr(data: &Dataset, group: &[usize], config: &ClrConfig) -> Result<ClrSolution> {
    let mut offsets = vec![config.c_offset];
    offsets.extend(config.offset_grid.iter().copied());
    if let Some(bad) = offsets.iter().find(|o| !(**o >= 0.0) || !o.is_finite()) {
        return Err(Error::InvalidConfig(alloc::format!("c offset must be a non-negative number, got {bad}")));
    }
    let fold = match config.selection {
        Selection::KFold { folds } => {
            if folds < 2 || folds > data.n() {
                return Err(Error::InvalidConfig(alloc::format!(
                    "fold count must be between 2 and n={}, got {folds}",
                    data.n()
                )));
            }
            Some((fold_assignment(data.n(), folds, config.seed), folds))
        }
        Selection::MinRss => None,
    };
    let local = local_problem(data, group, config.anchor)?;
    let score = |offset: f64| -> Result<[f64; 2]> {
        match &fold {
            Some((fold, folds)) => cv_scores(data, group, offset, fold, *folds, config.anchor),
            None => {
                let (_, fulls, _) = candidates_for(&local, group, offset)?;
                Ok([data.rss(&fulls[0])?, data.rss(&fulls[1])?])
            }
        }
    };
    let mut best: Option<(f64, usize, [f64; 2])> = None;
    for &offset in &offsets {
        let s = score(offset)?;
        let side = if s[1] < s[0] { 1 } else { 0 };
        if best.map_or(true, |(_, bs, bsc)| s[side] < bsc[bs]) {
            best = Some((offset, side, s));
        }
    }
    let (c_offset, chosen_index, scores) = best.expect("at least one offset");

    let (candidates, fulls, direction) = candidates_for(&local, group, c_offset)?;
    let (beta_star, min_norm_sq) = min_norm_point(&local.problem);
    let idx = local.fit.group_coefficients(group)?;
    let coefficients = fulls[chosen_index].clone();
    let chosen = idx.iter().map(|&i| coefficients[i]).collect();
    let mut star_full = local.fit.beta_hat.clone();
    for (k, &i) in idx.iter().enumerate() {
        star_full[i] = local.signs.sign(k) * beta_star[k];
    }
    Ok(ClrSolution {
        group: group.to_vec(),
        signs: local.signs.clone(),
        weights: local.weights.clone(),
        tau_hat: local.problem.tau_hat(),
        c: min_norm_sq + c_offset,
        beta_star,
        min_norm_sq,
        c_offset,
        direction,
        candidates,
        chosen_index,
        chosen,
        ols_group: idx.iter().map(|&i| local.fit.beta_hat[i]).collect(),
        scores,
        rss_ols: local.fit.rss,
        rss_beta_star: data.rss(&star_full)?,
        rss_chosen: data.rss(&coefficients)?,
        coefficients,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand_distr::{Distribution, StandardNormal};

    fn reported_problem() -> ClrProblem {
        ClrProblem::from_slice(&[0.3712, 0.3218, 0.3068], 1.8511).unwrap()
    }

    #[test]
    fn minimum_norm_point_of_reported_hyperplane() {
        let prob = reported_problem();
        let (b, m) = min_norm_point(&prob);
        let want = [2.047952, 1.775069, 1.692757];
        for (x, y) in b.iter().zip(want) {
            assert!((x - y).abs() < 1e-3, "{x} vs {y}");
        }
        // |beta*|^2 = tau^2 / |w|^2 evaluated independently
        let ww: f64 = 0.3712f64.powi(2) + 0.3218f64.powi(2) + 0.3068f64.powi(2);
        assert!((m - 1.8511f64.powi(2) / ww).abs() < 1e-12);
        assert!((m - dot(&b, &b)).abs() < 1e-12);
        // the four-decimal inputs shift the squared norm from the reported
        // 10.2104 by about 4e-3
        assert!((m - 10.2104).abs() < 5e-3);
    }

    #[test]
    fn reported_local_estimate_lies_on_both_surfaces() {
        let prob = reported_problem();
        let point = [0.8742301, 1.9232452, 2.9575739];
        assert!(prob.residual(&point).abs() < 1e-3);
        assert!((dot(&point, &point) - 13.2104).abs() < 1e-3);
    }

    #[test]
    fn trivial_hyperplanes() {
        let (b, m) = min_norm_point(&ClrProblem::from_slice(&[0.5, 0.5], 0.0).unwrap());
        assert_eq!((b, m), (vec![0.0, 0.0], 0.0));
        let (b, _) = min_norm_point(&ClrProblem::from_slice(&[1.0, 0.0, 0.0], 5.0).unwrap());
        assert_eq!(b, vec![5.0, 0.0, 0.0]);
        assert_eq!(ClrProblem::from_slice(&[0.0, 0.0], 1.0), Err(Error::ZeroWeight));
    }

    #[test]
    fn candidates_on_hyperplane_and_sphere() {
        let prob = reported_problem();
        let (star, m) = min_norm_point(&prob);
        let d = search_direction(&prob, &[0.1987, 2.0414, 3.6507]);
        let c = m + 3.0;
        for cand in sphere_candidates(&prob, c, &d).unwrap() {
            assert!(prob.residual(&cand).abs() < 1e-8 * (1.0 + prob.tau_hat().abs()));
            assert!((dot(&cand, &cand) - c).abs() < 1e-8 * (1.0 + c));
        }
        let tangent = sphere_candidates(&prob, m, &d).unwrap();
        for cand in &tangent {
            for (a, b) in cand.iter().zip(&star) {
                assert!((a - b).abs() < 1e-12);
            }
        }
        assert!(matches!(
            sphere_candidates(&prob, m - 0.1, &d),
            Err(Error::RadiusTooSmall { .. })
        ));
        assert!(sphere_candidates(&prob, c, prob.w()).is_err());
    }

    #[test]
    fn two_dimensional_intersection_matches_quadratic_formula() {
        // line w1 b1 + w2 b2 = t meets b1^2 + b2^2 = c
        let (w1, w2, t, c) = (0.3, 0.7, 1.2, 9.0);
        let prob = ClrProblem::from_slice(&[w1, w2], t).unwrap();
        let cands = sphere_candidates(&prob, c, &[1.0, 0.0]).unwrap();
        // substitute b2 = (t - w1 b1) / w2
        let qa = 1.0 + (w1 / w2) * (w1 / w2);
        let qb = -2.0 * t * w1 / (w2 * w2);
        let qc = (t / w2) * (t / w2) - c;
        let disc = (qb * qb - 4.0 * qa * qc).sqrt();
        let mut roots = [(-qb + disc) / (2.0 * qa), (-qb - disc) / (2.0 * qa)];
        roots.sort_by(f64::total_cmp);
        let mut got = [cands[0][0], cands[1][0]];
        got.sort_by(f64::total_cmp);
        for (g, r) in got.iter().zip(roots) {
            assert!((g - r).abs() < 1e-12);
        }
        for cand in &cands {
            assert!((cand[1] - (t - w1 * cand[0]) / w2).abs() < 1e-12);
        }
    }

    #[test]
    fn direction_falls_back_to_axis() {
        let prob = ClrProblem::from_slice(&[1.0, 0.0, 0.0], 2.0).unwrap();
        // target on the normal line
        assert_eq!(search_direction(&prob, &[7.0, 0.0, 0.0]), vec![0.0, 1.0, 0.0]);
    }

    fn group_design(seed: u64, n: usize) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut z = || -> Vec<f64> { (0..n).map(|_| StandardNormal.sample(&mut rng)).collect() };
        let (z1, z2, z3, z4, e) = (z(), z(), z(), z(), z());
        let x1 = z1.clone();
        let x2: Vec<f64> = z1.iter().zip(&z2).map(|(a, b)| 0.85 * a + 0.15 * b).collect();
        let x3: Vec<f64> = z1.iter().zip(&z3).map(|(a, b)| -0.8 * a + 0.2 * b).collect();
        let x4 = z4;
        let y = (0..n)
            .map(|i| 1.0 + x1[i] + 2.0 * x2[i] - x3[i] + 0.5 * x4[i] + e[i])
            .collect();
        Dataset::from_columns(y, vec![x1, x2, x3, x4], true).unwrap()
    }

    #[test]
    fn zero_offset_returns_minimum_norm_point() {
        let data = group_design(3, 30);
        let cfg = ClrConfig {
            c_offset: 0.0,
            ..ClrConfig::default()
        };
        let sol = solve_clr(&data, &[0, 1, 2], &cfg).unwrap();
        let mapped = sol.signs.apply(&sol.beta_star);
        for (a, b) in sol.chosen.iter().zip(mapped) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn locality_and_geometry() {
        let data = group_design(4, 30);
        let fit = fit_ols(&data).unwrap();
        for selection in [Selection::MinRss, Selection::KFold { folds: 5 }] {
            let cfg = ClrConfig {
                c_offset: 1.5,
                selection,
                seed: 11,
                ..ClrConfig::default()
            };
            let sol = solve_clr(&data, &[0, 1, 2], &cfg).unwrap();
            assert_eq!(sol.signs.as_slice(), &[1, 1, -1]);
            // intercept and x4 untouched
            assert_eq!(sol.coefficients[0], fit.beta_hat[0]);
            assert_eq!(sol.coefficients[4], fit.beta_hat[4]);
            let prob = ClrProblem::new(&sol.weights, sol.tau_hat).unwrap();
            for cand in &sol.candidates {
                assert!(prob.residual(cand).abs() < 1e-8 * (1.0 + sol.tau_hat.abs()));
                assert!((dot(cand, cand) - sol.c).abs() < 1e-8 * (1.0 + sol.c));
            }
            assert_eq!(sol.chosen, sol.signs.apply(&sol.candidates[sol.chosen_index]));
        }
    }

    #[test]
    fn min_rss_never_loses_to_minimum_norm_point_near_ols() {
        // step sqrt(offset) below twice the distance to OLS keeps the
        // toward-OLS candidate inside the RSS sublevel set of beta*
        let data = group_design(8, 40);
        let cfg = ClrConfig {
            c_offset: 0.5,
            ..ClrConfig::default()
        };
        let sol = solve_clr(&data, &[0, 1, 2], &cfg).unwrap();
        let dist: f64 = sol
            .signs
            .apply(&sol.ols_group)
            .iter()
            .zip(&sol.beta_star)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        assert!(0.5f64.sqrt() <= 2.0 * dist);
        assert_eq!(sol.chosen_index, 0);
        assert!(sol.rss_chosen <= sol.rss_beta_star);
        assert!(sol.rss_ols <= sol.rss_chosen);
    }

    #[test]
    fn kfold_is_deterministic_and_grid_picks_best() {
        let data = group_design(5, 40);
        let cfg = ClrConfig {
            c_offset: 1.0,
            offset_grid: vec![0.0, 0.25, 4.0],
            selection: Selection::KFold { folds: 5 },
            seed: 3,
            anchor: None,
        };
        let a = solve_clr(&data, &[0, 1, 2], &cfg).unwrap();
        let b = solve_clr(&data, &[0, 1, 2], &cfg).unwrap();
        assert_eq!(a, b);
        let fold = fold_assignment(data.n(), 5, 3);
        for off in [1.0, 0.0, 0.25, 4.0] {
            let s = cv_scores(&data, &[0, 1, 2], off, &fold, 5, None).unwrap();
            assert!(a.scores[a.chosen_index] <= s[0].min(s[1]));
        }
        let bad = ClrConfig {
            selection: Selection::KFold { folds: 1 },
            ..cfg
        };
        assert!(matches!(solve_clr(&data, &[0, 1, 2], &bad), Err(Error::InvalidConfig(_))));
    }

    proptest! {
        #[test]
        fn minimum_norm_is_minimal(
            w in proptest::collection::vec(0.01f64..1.0, 2..6),
            tau in -10.0f64..10.0,
            moves in proptest::collection::vec(proptest::collection::vec(-5.0f64..5.0, 6), 1000),
        ) {
            let prob = ClrProblem::from_slice(&w, tau).unwrap();
            let (star, m) = min_norm_point(&prob);
            prop_assert!(prob.residual(&star).abs() < 1e-10 * (1.0 + tau.abs()));
            for mv in &moves {
                // project the move into the hyperplane's direction space
                let v = &mv[..w.len()];
                let k = dot(v, &w) / dot(&w, &w);
                let point: Vec<f64> = star.iter().zip(v).zip(&w).map(|((s, a), b)| s + a - k * b).collect();
                prop_assert!(prob.residual(&point).abs() < 1e-8 * (1.0 + tau.abs()));
                prop_assert!(dot(&point, &point) >= m - 1e-9 * (1.0 + m));
            }
        }
    }
}
