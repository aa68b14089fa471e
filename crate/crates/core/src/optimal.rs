//! Exact minimum-variance normalized group effect.
//!
//! For each anchor-fixed sign arrangement `s` the variance of the effect with
//! weights `s ⊙ u`, `u` in the simplex, is `sigma^2 (s⊙u)^T A (s⊙u)`. Each of
//! these problems is a convex QP; the effect is the best of the
//! `2^(p-1)` orthant optima.

use nalgebra::DMatrix;

use crate::apc::SignArrangement;
use crate::effects::{estimate_effect, EffectEstimate};
use crate::error::{Error, Result};
use crate::linmod::OlsFit;
use crate::qp::{minimize_on_simplex, QpSettings};
use crate::weights::WeightVector;

/// Largest group handled by the exhaustive orthant search.
pub const MAX_GROUP_SIZE: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct OrthantSolution {
    pub signs: SignArrangement,
    /// Simplex weights `u`.
    pub u: WeightVector,
    /// `(s⊙u)^T A (s⊙u)`.
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimalEffect {
    pub signs: SignArrangement,
    /// Signed weights `s ⊙ u` (absolute values sum to one).
    pub weights: WeightVector,
    /// `sigma^2` times the minimal quadratic form.
    pub variance: f64,
    pub unscaled_variance: f64,
}

impl OptimalEffect {
    /// Estimate of the effect from a fit on the same group.
    pub fn estimate(&self, fit: &OlsFit, group: &[usize]) -> Result<EffectEstimate> {
        let u = self.weights.abs();
        estimate_effect(fit, group, &u, &self.signs)
    }
}

/// Minimizes the orthant QP for a single sign arrangement.
pub fn solve_orthant(
    block: &DMatrix<f64>,
    signs: &SignArrangement,
    settings: QpSettings,
) -> Result<OrthantSolution> {
    let p = block.nrows();
    if signs.len() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: signs.len(),
        });
    }
    let m = DMatrix::from_fn(p, p, |i, j| block[(i, j)] * signs.sign(i) * signs.sign(j));
    let sol = minimize_on_simplex(&m, settings)?;
    let total: f64 = sol.u.iter().sum();
    let u = WeightVector::simplex(sol.u.iter().map(|x| x / total).collect())?;
    Ok(OrthantSolution {
        signs: signs.clone(),
        u,
        objective: sol.objective,
    })
}

/// Searches all anchor-fixed orthants of a group block `A` of `(X^T X)^{-1}`.
/// Ties keep the lexicographically smallest sign vector.
pub fn optimal_effect_for_block(
    block: &DMatrix<f64>,
    sigma2: f64,
    settings: QpSettings,
) -> Result<OptimalEffect> {
    let p = block.nrows();
    if p == 0 {
        return Err(Error::EmptyGroup);
    }
    if p > MAX_GROUP_SIZE {
        return Err(Error::GroupTooLarge {
            size: p,
            max: MAX_GROUP_SIZE,
        });
    }
    let mut best: Option<OrthantSolution> = None;
    for k in 0..(1u64 << (p - 1)) {
        let signs = SignArrangement::from_index(p, k);
        let sol = solve_orthant(block, &signs, settings)?;
        if best.as_ref().map_or(true, |b| sol.objective < b.objective) {
            best = Some(sol);
        }
    }
    let best = best.expect("at least one orthant");
    let weights = WeightVector::signed_l1(best.signs.apply(best.u.as_slice()))?;
    Ok(OptimalEffect {
        signs: best.signs,
        weights,
        variance: sigma2 * best.objective,
        unscaled_variance: best.objective,
    })
}

/// The exact optimal effect `tau*` of a group, with variance scaled by the
/// fitted error variance.
pub fn optimal_effect(fit: &OlsFit, group: &[usize]) -> Result<OptimalEffect> {
    if group.len() > MAX_GROUP_SIZE {
        return Err(Error::GroupTooLarge {
            size: group.len(),
            max: MAX_GROUP_SIZE,
        });
    }
    let block = fit.xtx_inv_block(group)?;
    optimal_effect_for_block(&block, fit.sigma2_hat, QpSettings::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apc::apc_arrangement;
    use crate::effects::variability_weights;
    use crate::linmod::{correlation, fit_ols, Dataset};
    use crate::uniform::UniformSpec;
    use alloc::vec;
    use alloc::vec::Vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn quad(a: &DMatrix<f64>, w: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..w.len() {
            for j in 0..w.len() {
                s += w[i] * a[(i, j)] * w[j];
            }
        }
        s
    }

    #[test]
    fn uniform_block_gives_average_weights() {
        for &(p, r) in &[(2, 0.3), (4, 0.6), (5, 0.95), (3, 0.1)] {
            let spec = UniformSpec::new(p, r).unwrap();
            let opt =
                optimal_effect_for_block(&spec.inverse().matrix(), 1.0, QpSettings::default()).unwrap();
            assert!(opt.signs.is_all_positive());
            for w in opt.weights.as_slice() {
                assert!((w - 1.0 / p as f64).abs() < 1e-6);
            }
            let want = spec.average_effect_variance();
            assert!((opt.variance - want).abs() < 1e-9 * want);
        }
    }

    #[test]
    fn two_variable_block_against_grid() {
        let a = DMatrix::from_row_slice(2, 2, &[9.519, -8.846, -8.846, 9.230]);
        let opt = optimal_effect_for_block(&a, 1.0, QpSettings::default()).unwrap();
        // grid over |w1| + |w2| = 1 with w1 >= 0 (global sign flip is free)
        let mut best = (f64::INFINITY, [0.0, 0.0]);
        for k in 0..=10_000 {
            let w1 = k as f64 * 1e-4;
            for s in [1.0, -1.0] {
                let w = [w1, s * (1.0 - w1)];
                let v = quad(&a, &w);
                if v < best.0 {
                    best = (v, w);
                }
            }
        }
        let w = opt.weights.as_slice();
        assert!((w[0] - best.1[0]).abs() < 1e-3 && (w[1] - best.1[1]).abs() < 1e-3);
        assert!(opt.unscaled_variance <= best.0 + 1e-12);
        assert_eq!(opt.signs.as_slice(), &[1, 1]);
    }

    fn random_fit(rng: &mut ChaCha8Rng, n: usize, mix: f64) -> OlsFit {
        let z: Vec<Vec<f64>> = (0..4)
            .map(|_| (0..n).map(|_| StandardNormal.sample(rng)).collect())
            .collect();
        let cols = vec![
            z[0].clone(),
            z[0].iter().zip(&z[1]).map(|(a, b)| mix * a + (1.0 - mix) * b).collect(),
            z[0].iter().zip(&z[2]).map(|(a, b)| -mix * a + (1.0 - mix) * b).collect(),
            z[3].clone(),
        ];
        let y = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        fit_ols(&Dataset::from_columns(y, cols, true).unwrap()).unwrap()
    }

    #[test]
    fn dominates_named_effects() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let group = [0usize, 1, 2];
        let mut apc_hits = 0;
        let trials = 40;
        for t in 0..trials {
            let mix = 0.3 + 0.65 * (t as f64 / trials as f64);
            let fit = random_fit(&mut rng, 20, mix);
            let opt = optimal_effect(&fit, &group).unwrap();
            let all = SignArrangement::all_positive(3);
            let ta = estimate_effect(&fit, &group, &WeightVector::average(3).unwrap(), &all).unwrap();
            assert!(opt.variance <= ta.variance * (1.0 + 1e-9));
            for j in 0..3 {
                let e = estimate_effect(&fit, &group, &WeightVector::basis(3, j).unwrap(), &all).unwrap();
                assert!(opt.variance <= e.variance * (1.0 + 1e-9));
            }
            let est = opt.estimate(&fit, &group).unwrap();
            assert!((est.variance - opt.variance).abs() < 1e-9 * opt.variance);
            let flipped = SignArrangement::new(vec![1, 1, -1]).unwrap();
            if opt.signs == flipped {
                apc_hits += 1;
            }
        }
        std::println!("tau* on expected APC orthant: {apc_hits}/{trials}");
    }

    #[test]
    fn dominates_weighted_effect_under_apc() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = 25;
        let group = [0usize, 1, 2];
        let mut apc_hits = 0;
        let trials = 30;
        for _ in 0..trials {
            let z: Vec<Vec<f64>> = (0..4)
                .map(|_| (0..n).map(|_| StandardNormal.sample(&mut rng)).collect())
                .collect();
            let cols = vec![
                z[0].iter().map(|a| 2.0 * a).collect(),
                z[0].iter().zip(&z[1]).map(|(a, b)| 0.9 * a + 0.1 * b).collect(),
                z[0].iter().zip(&z[2]).map(|(a, b)| -0.8 * a + 0.2 * b).collect(),
                z[3].clone(),
            ];
            let y = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            let data = Dataset::from_columns(y, cols, true).unwrap();
            let fit = fit_ols(&data).unwrap();
            let corr = correlation(&data, &group).unwrap();
            let apc = apc_arrangement(&corr);
            let ww = variability_weights(&corr).unwrap();
            let tw = estimate_effect(&fit, &group, &ww, &apc.signs).unwrap();
            let opt = optimal_effect(&fit, &group).unwrap();
            assert!(opt.variance <= tw.variance * (1.0 + 1e-9));
            if opt.signs == apc.signs {
                apc_hits += 1;
            }
            let gap = opt
                .weights
                .as_slice()
                .iter()
                .zip(apc.signs.apply(ww.as_slice()))
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            std::println!("|w* - w_w|_inf = {gap:.4}");
        }
        std::println!("tau* on the APC orthant: {apc_hits}/{trials}");
    }

    #[test]
    fn rejects_large_groups() {
        let big = DMatrix::identity(21, 21);
        assert_eq!(
            optimal_effect_for_block(&big, 1.0, QpSettings::default()),
            Err(Error::GroupTooLarge { size: 21, max: 20 })
        );
    }

    #[test]
    fn tie_prefers_smallest_sign_vector() {
        // identity is symmetric under sign flips: every orthant ties
        let opt = optimal_effect_for_block(&DMatrix::identity(3, 3), 1.0, QpSettings::default()).unwrap();
        assert_eq!(opt.signs.as_slice(), &[1, -1, -1]);
    }
}
