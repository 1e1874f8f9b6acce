//! Matching estimated topics to reference topics for evaluation.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::TopicModel;

/// Largest `k` for which [`align_columns`] searches all permutations.
pub const EXHAUSTIVE_MAX_K: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    /// Estimated column `perm[j]` is matched to reference column `j`, so
    /// `estimate.permuted(&perm)` lines up with the reference.
    pub perm: Vec<usize>,
    /// `Σ_j ‖μ̂_{perm[j]} − μ_j‖₂`.
    pub error: f64,
}

fn cost_matrix(estimate: &TopicModel, reference: &TopicModel) -> Result<DMatrix<f64>> {
    if estimate.n() != reference.n() || estimate.k() != reference.k() {
        return Err(Error::DimensionMismatch(format!(
            "estimate is {}x{}, reference is {}x{}",
            estimate.n(),
            estimate.k(),
            reference.n(),
            reference.k()
        )));
    }
    let k = estimate.k();
    Ok(DMatrix::from_fn(k, k, |a, j| (estimate.m().column(a) - reference.m().column(j)).norm()))
}

/// Exhaustive search for `k ≤ 8`, greedy matching above.
pub fn align_columns(estimate: &TopicModel, reference: &TopicModel) -> Result<Alignment> {
    if estimate.k() <= EXHAUSTIVE_MAX_K {
        align_columns_exhaustive(estimate, reference)
    } else {
        align_columns_greedy(estimate, reference)
    }
}

/// Minimum-cost permutation over all `k!` candidates; the first one in
/// lexicographic order wins ties.
pub fn align_columns_exhaustive(estimate: &TopicModel, reference: &TopicModel) -> Result<Alignment> {
    let cost = cost_matrix(estimate, reference)?;
    let k = cost.nrows();
    let mut best = Alignment { perm: (0..k).collect(), error: f64::INFINITY };
    let mut perm = Vec::with_capacity(k);
    let mut used = vec![false; k];
    search(&cost, &mut perm, &mut used, 0.0, &mut best);
    Ok(best)
}

fn search(cost: &DMatrix<f64>, perm: &mut Vec<usize>, used: &mut [bool], partial: f64, best: &mut Alignment) {
    let k = cost.nrows();
    let j = perm.len();
    if j == k {
        if partial < best.error {
            best.error = partial;
            best.perm.clone_from(perm);
        }
        return;
    }
    for a in 0..k {
        if used[a] {
            continue;
        }
        let next = partial + cost[(a, j)];
        if next >= best.error {
            continue;
        }
        used[a] = true;
        perm.push(a);
        search(cost, perm, used, next, best);
        perm.pop();
        used[a] = false;
    }
}

/// Repeatedly matches the closest remaining (estimate, reference) pair.
pub fn align_columns_greedy(estimate: &TopicModel, reference: &TopicModel) -> Result<Alignment> {
    let cost = cost_matrix(estimate, reference)?;
    let k = cost.nrows();
    let mut pairs: Vec<(usize, usize)> = (0..k).flat_map(|a| (0..k).map(move |j| (a, j))).collect();
    pairs.sort_by(|&x, &y| cost[x].total_cmp(&cost[y]).then(x.1.cmp(&y.1)).then(x.0.cmp(&y.0)));
    let mut perm = vec![usize::MAX; k];
    let mut taken = vec![false; k];
    let mut error = 0.0;
    for (a, j) in pairs {
        if perm[j] == usize::MAX && !taken[a] {
            perm[j] = a;
            taken[a] = true;
            error += cost[(a, j)];
        }
    }
    Ok(Alignment { perm, error })
}
