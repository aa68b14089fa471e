//! Sign arrangements that make every pairwise correlation in a group
//! positive.
//!
//! Flipping a predictor `x_j -> -x_j` flips the sign of its coefficient and of
//! every correlation it takes part in. When one anchor variable has
//! `|corr| > sqrt(2)/2` with every other member, flipping each member to agree
//! in sign with the anchor places all of them inside a cone of half-angle
//! `pi/4`, so every pair ends up positively correlated.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linmod::CorrelationMatrix;

/// Threshold on `|corr(x_i, x_anchor)|` that guarantees an all-positive
/// arrangement.
pub const APC_THRESHOLD: f64 = core::f64::consts::FRAC_1_SQRT_2;

/// A choice of `+1`/`-1` per group member, normalized so the first entry is
/// `+1` (an arrangement and its global flip are equivalent).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignArrangement {
    signs: Vec<i8>,
}

impl SignArrangement {
    pub fn new(mut signs: Vec<i8>) -> Result<Self> {
        if signs.is_empty() {
            return Err(Error::EmptyGroup);
        }
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidSigns);
        }
        if signs[0] == -1 {
            signs.iter_mut().for_each(|s| *s = -*s);
        }
        Ok(SignArrangement { signs })
    }

    pub fn all_positive(p: usize) -> Self {
        SignArrangement { signs: vec![1; p] }
    }

    /// The `index`-th anchor-fixed arrangement of `p` signs in lexicographic
    /// order (with `-1 < +1`): index 0 is `(+1, -1, ..., -1)` and index
    /// `2^(p-1) - 1` is all-positive.
    pub fn from_index(p: usize, index: u64) -> Self {
        let mut signs = vec![1i8; p];
        for (i, s) in signs.iter_mut().enumerate().skip(1) {
            let bit = (index >> (p - 1 - i)) & 1;
            *s = if bit == 1 { 1 } else { -1 };
        }
        SignArrangement { signs }
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.signs
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    pub fn sign(&self, i: usize) -> f64 {
        f64::from(self.signs[i])
    }

    pub fn is_all_positive(&self) -> bool {
        self.signs.iter().all(|&s| s == 1)
    }

    /// Element-wise product with a vector.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        v.iter()
            .zip(&self.signs)
            .map(|(x, &s)| x * f64::from(s))
            .collect()
    }
}

/// Outcome of the anchor-based APC search.
#[derive(Debug, Clone, PartialEq)]
pub struct ApcArrangement {
    pub signs: SignArrangement,
    pub anchor: usize,
    /// Whether the anchor satisfies the `sqrt(2)/2` condition; when false the
    /// arrangement is the best effort and may leave negative pairs.
    pub condition_holds: bool,
}

/// True iff every other member has `|corr| > sqrt(2)/2` with the anchor.
pub fn check_apc_condition(corr: &CorrelationMatrix, anchor: usize) -> Result<bool> {
    let p = corr.dim();
    if anchor >= p {
        return Err(Error::IndexOutOfRange { index: anchor, len: p });
    }
    Ok((0..p)
        .filter(|&i| i != anchor)
        .all(|i| corr.get(i, anchor).abs() > APC_THRESHOLD))
}

fn signs_from_anchor(corr: &CorrelationMatrix, anchor: usize) -> SignArrangement {
    let signs = (0..corr.dim())
        .map(|j| {
            if j == anchor || corr.get(anchor, j) >= 0.0 {
                1
            } else {
                -1
            }
        })
        .collect();
    // cannot fail: non-empty, entries are +-1
    SignArrangement::new(signs).expect("valid sign vector")
}

/// Arrangement `(sgn(r_a1), ..., sgn(r_ap))` relative to a fixed anchor.
pub fn apc_arrangement_with_anchor(corr: &CorrelationMatrix, anchor: usize) -> Result<ApcArrangement> {
    let condition_holds = check_apc_condition(corr, anchor)?;
    Ok(ApcArrangement {
        signs: signs_from_anchor(corr, anchor),
        anchor,
        condition_holds,
    })
}

/// APC arrangement anchored at the first variable. If the condition fails
/// there, the first anchor satisfying it is used; if none does, the anchor
/// maximizing the smallest `|corr|` with the others is used and
/// `condition_holds` is false.
pub fn apc_arrangement(corr: &CorrelationMatrix) -> ApcArrangement {
    let p = corr.dim();
    let min_abs = |a: usize| {
        (0..p)
            .filter(|&i| i != a)
            .map(|i| corr.get(i, a).abs())
            .fold(f64::INFINITY, f64::min)
    };
    let anchor = (0..p)
        .find(|&a| min_abs(a) > APC_THRESHOLD)
        .unwrap_or_else(|| {
            let mut best = 0;
            for a in 1..p {
                if min_abs(a) > min_abs(best) {
                    best = a;
                }
            }
            best
        });
    ApcArrangement {
        signs: signs_from_anchor(corr, anchor),
        anchor,
        condition_holds: min_abs(anchor) > APC_THRESHOLD,
    }
}

/// Correlation matrix of the re-signed variables `s_i x_i`.
pub fn resigned(corr: &CorrelationMatrix, signs: &SignArrangement) -> DMatrix<f64> {
    let p = corr.dim();
    DMatrix::from_fn(p, p, |i, j| corr.get(i, j) * signs.sign(i) * signs.sign(j))
}

/// Whether the arrangement makes every off-diagonal correlation positive.
pub fn is_all_positive(corr: &CorrelationMatrix, signs: &SignArrangement) -> bool {
    let m = resigned(corr, signs);
    let p = corr.dim();
    (0..p).all(|i| (0..p).all(|j| i == j || m[(i, j)] > 0.0))
}

/// Connected components (size >= 2) of the graph joining predictors with
/// `|corr| > threshold`. Components are listed by their smallest member.
pub fn detect_groups(corr: &CorrelationMatrix, threshold: f64) -> Vec<Vec<usize>> {
    let p = corr.dim();
    let mut label: Vec<Option<usize>> = vec![None; p];
    let mut groups = Vec::new();
    for start in 0..p {
        if label[start].is_some() {
            continue;
        }
        let id = groups.len();
        let mut members = vec![start];
        label[start] = Some(id);
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            for j in 0..p {
                if label[j].is_none() && corr.get(i, j).abs() > threshold {
                    label[j] = Some(id);
                    members.push(j);
                    stack.push(j);
                }
            }
        }
        members.sort_unstable();
        groups.push(members);
    }
    groups.retain(|g| g.len() >= 2);
    groups
}
