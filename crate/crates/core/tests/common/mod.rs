#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use spectral_topics::{Flavor, MomentSet, TopicModel};

/// Raw (unadjusted) population moments of an LDA model, built from the
/// Dirichlet moments `E[h hᵀ]` and `E[h ⊗ h ⊗ h]`.
pub fn raw_lda_moments(model: &TopicModel) -> MomentSet {
    let (alpha, a0) = model.alpha().expect("LDA model");
    let m = model.m();
    let (n, k) = (model.n(), model.k());
    let d2 = a0 * (a0 + 1.0);
    let d3 = d2 * (a0 + 2.0);
    let e2 = DMatrix::from_fn(k, k, |a, b| (alpha[a] * alpha[b] + if a == b { alpha[a] } else { 0.0 }) / d2);
    let e3 = |a: usize, b: usize, c: usize| {
        let d = |x: usize, y: usize| if x == y { 1.0 } else { 0.0 };
        (alpha[a] * alpha[b] * alpha[c]
            + d(a, b) * alpha[a] * alpha[c]
            + d(b, c) * alpha[a] * alpha[b]
            + d(a, c) * alpha[a] * alpha[b]
            + 2.0 * d(a, b) * d(b, c) * alpha[a])
            / d3
    };
    let m1 = m * (alpha / a0);
    let m2 = m * &e2 * m.transpose();
    let slices = (0..n)
        .map(|i| {
            // Slice i: Σ_c μ_{i,c} M E3[·,·,c] Mᵀ.
            let core = DMatrix::from_fn(k, k, |a, b| (0..k).map(|c| e3(a, b, c) * m[(i, c)]).sum());
            m * core * m.transpose()
        })
        .collect();
    MomentSet::from_parts(Flavor::SingleTopic, m1, m2, Some(slices)).expect("consistent shapes")
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).abs().max()
}

pub fn max_abs_diff_vec(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).abs().max()
}
