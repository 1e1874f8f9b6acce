//! Randomized simultaneous diagonalization, the competitor to SVTD.
//!
//! The third moment is contracted with a random direction `η` so that
//! `M₃(η) = M diag(Ω) diag(ηᵀμ_1, …, ηᵀμ_k) Mᵀ`; the left singular vectors
//! `O` of `H_η = E⁺ M₃(η) (E⁺)ᵀ` then give `M diag(Ω)^{1/2} = E O`. Each
//! column of `E O` is `√ω_j μ_j`, so its sum is `√ω_j`: dividing by the
//! column sum yields `μ_j` and the squared sums give `Ω` up to scale.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{clamp_and_normalize, finish_model, whiten, DecompositionReport};
use crate::error::{Error, Result};
use crate::linalg::{fix_column_signs, pinv_full_column_rank, project_simplex, svd_sorted};
use crate::model::TopicModel;
use crate::moments::MomentSet;

/// Standard Gaussian direction in `ℝⁿ` from `seed`.
pub fn draw_eta(n: usize, seed: u64) -> DVector<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng))
}

pub fn baseline_random_diag(moments: &MomentSet, k: usize, seed: u64) -> Result<(TopicModel, DecompositionReport)> {
    baseline_with_eta(moments, k, &draw_eta(moments.n(), seed))
}

/// Runs the baseline with a caller-chosen direction `η`. Collisions among
/// the induced values `ηᵀμ_j` are not detected.
pub fn baseline_with_eta(moments: &MomentSet, k: usize, eta: &DVector<f64>) -> Result<(TopicModel, DecompositionReport)> {
    let w = whiten(moments.m2(), k)?;
    let pinv = pinv_full_column_rank(&w.e).ok_or(Error::EffectiveRankBelowK)?;
    let h = moments.projected_contract(eta, &pinv)?;
    let svd = svd_sorted(&h);
    let mut o = svd.u.clone();
    fix_column_signs(&mut o);

    let eo = &w.e * &o;
    let mut raw = eo.clone();
    let mut scales = DVector::zeros(k);
    for (j, mut col) in raw.column_iter_mut().enumerate() {
        let s = col.sum();
        if s == 0.0 || !s.is_finite() {
            return Err(Error::CollapsedColumn(j));
        }
        col /= s;
        scales[j] = s * s;
    }
    let m = clamp_and_normalize(&raw)?;
    let omega = project_simplex(&(&scales / scales.sum()));
    let model = finish_model(moments.flavor(), m, omega)?;

    let d = o.transpose() * &h * &o;
    let gap = svd.singular_values.as_slice().windows(2).map(|p| (p[0] - p[1]).abs()).fold(f64::INFINITY, f64::min);
    let report = DecompositionReport {
        r: None,
        gap_r: gap,
        gap_m2: w.spectral_gap(),
        singular_values: w.singular_values,
        o,
        raw_rows: raw,
        offdiag_residuals: vec![super::offdiag_norm(&d)],
        mu_r: svd.singular_values,
        feature_gaps: Vec::new(),
    };
    Ok((model, report))
}
