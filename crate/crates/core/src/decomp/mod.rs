//! Singular-value based tensor decomposition (SVTD).
//!
//! Given `M₂ = E Eᵀ` with `E = U_k S_k^{1/2}`, every whitened slice
//! `H_i = E_i⁺ M₃,i (E_i⁺)ᵀ` (row and column `i` removed) equals
//! `O diag(μ_{i,1}, …, μ_{i,k}) Oᵀ` for one orthogonal `O` shared by all
//! features. SVTD picks the feature whose singular values are best
//! separated, takes `O` from its SVD, and reads every other row of `M` off
//! the diagonal of `Oᵀ H_i O`.

mod align;
mod baseline;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{asymmetry, fix_column_signs, nnls, pinv_full_column_rank, project_simplex, svd_sorted, symmetric_svd};
use crate::model::TopicModel;
use crate::moments::{Flavor, MomentSet};
use crate::par::{map_indexed, Execution};

pub use align::{align_columns, align_columns_exhaustive, align_columns_greedy, Alignment};
pub use baseline::{baseline_random_diag, baseline_with_eta, draw_eta};

/// Gaps within this relative distance of the best one count as ties.
const GAP_TIE_RTOL: f64 = 1e-10;

/// Smallest topic proportion kept when converting to LDA `α`.
const ALPHA_FLOOR: f64 = 1e-12;

/// Rank-`k` factor `E` with `E Eᵀ` the rank-`k` truncation of `M₂`.
#[derive(Debug, Clone)]
pub struct WhiteningFactor {
    pub e: DMatrix<f64>,
    /// All singular values of `M₂`, nonincreasing.
    pub singular_values: DVector<f64>,
    pub k: usize,
}

impl WhiteningFactor {
    /// `min_{i≤k} σ_i² − σ_{i+1}²`, with `σ_{n+1} = 0`.
    pub fn spectral_gap(&self) -> f64 {
        let s = &self.singular_values;
        (0..self.k)
            .map(|i| {
                let next = if i + 1 < s.len() { s[i + 1] } else { 0.0 };
                s[i] * s[i] - next * next
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// `E_i⁺` padded with a zero column at `i`, so that
    /// `P S Pᵀ = E_i⁺ S_{−i,−i} (E_i⁺)ᵀ` for any `n × n` matrix `S`.
    fn removed_row_projector(&self, i: usize) -> Option<DMatrix<f64>> {
        let e_i = self.e.clone().remove_row(i);
        let pinv = pinv_full_column_rank(&e_i)?;
        Some(pinv.insert_column(i, 0.0))
    }
}

/// `E = U_k S_k^{1/2}` from the SVD of `m2`. Each singular vector is signed
/// so that its largest-magnitude entry is positive.
pub fn whiten(m2: &DMatrix<f64>, k: usize) -> Result<WhiteningFactor> {
    let n = m2.nrows();
    if m2.ncols() != n {
        return Err(Error::DimensionMismatch(format!("m2 is {n}x{}", m2.ncols())));
    }
    if k < 1 || k > n {
        return Err(Error::InvalidArgument(format!("rank k = {k} must lie in 1..={n}")));
    }
    let scale = m2.amax();
    if asymmetry(m2) > 1e-10 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::InvalidArgument("m2 is not symmetric".into()));
    }
    let (u, s) = symmetric_svd(m2);
    let tol = k as f64 * f64::EPSILON * s[0];
    if !(s[0] > 0.0) || s[k - 1] <= tol {
        return Err(Error::EffectiveRankBelowK);
    }
    let mut uk = u.columns(0, k).into_owned();
    fix_column_signs(&mut uk);
    for (j, mut col) in uk.column_iter_mut().enumerate() {
        col *= s[j].sqrt();
    }
    Ok(WhiteningFactor { e: uk, singular_values: s, k })
}

/// `E_i⁺ M₃,i (E_i⁺)ᵀ`, where `E_i` is `E` without row `i` and `M₃,i` is
/// slice `i` of the third moment without row and column `i`. Dense
/// reference path; [`svtd`] uses the sparse projected equivalent.
pub fn slice_transform(w: &WhiteningFactor, moments: &MomentSet, i: usize) -> Result<DMatrix<f64>> {
    let n = w.e.nrows();
    if moments.n() != n {
        return Err(Error::DimensionMismatch(format!("moments have n = {}, factor has {n} rows", moments.n())));
    }
    if i >= n {
        return Err(Error::InvalidArgument(format!("feature {i} out of range for n = {n}")));
    }
    let slice = moments.slice(i)?.remove_row(i).remove_column(i);
    let e_i = w.e.clone().remove_row(i);
    let pinv = pinv_full_column_rank(&e_i).ok_or(Error::DegenerateSlice(i))?;
    Ok(&pinv * slice * pinv.transpose())
}

/// All whitened slices `H_i`, `None` where `E_i` is rank deficient.
fn whitened_slices(w: &WhiteningFactor, moments: &MomentSet, exec: Execution) -> Result<Vec<Option<DMatrix<f64>>>> {
    if !moments.has_third_moment() {
        return Err(Error::ThirdMomentUndefined);
    }
    map_indexed(exec, w.e.nrows(), |i| match w.removed_row_projector(i) {
        Some(p) => moments.projected_slice(i, &p).map(Some),
        None => Ok(None),
    })
    .into_iter()
    .collect()
}

/// Outcome of the feature search.
#[derive(Debug, Clone)]
pub struct FeatureSelection {
    pub r: usize,
    /// Singular values of `H_r`, descending.
    pub mu_r: DVector<f64>,
    /// Left singular vectors of `H_r`, sign-normalized.
    pub o: DMatrix<f64>,
    pub gap_r: f64,
    /// Minimum singular-value gap of every feature; `NaN` for degenerate ones.
    pub gaps: Vec<f64>,
}

fn min_gap(s: &DVector<f64>) -> f64 {
    s.as_slice().windows(2).map(|w| (w[0] - w[1]).abs()).fold(f64::INFINITY, f64::min)
}

fn select_from(slices: &[Option<DMatrix<f64>>]) -> Result<FeatureSelection> {
    let svds: Vec<_> = slices.iter().map(|h| h.as_ref().map(svd_sorted)).collect();
    let gaps: Vec<f64> = svds.iter().map(|s| s.as_ref().map_or(f64::NAN, |s| min_gap(&s.singular_values))).collect();
    let best = gaps.iter().copied().filter(|g| !g.is_nan()).fold(f64::NEG_INFINITY, f64::max);
    if !(best > 0.0) {
        return Err(Error::NoSeparatingFeature);
    }
    let threshold = if best.is_finite() { best * (1.0 - GAP_TIE_RTOL) } else { best };
    let r = gaps.iter().position(|&g| g >= threshold).ok_or(Error::NoSeparatingFeature)?;
    let svd = svds[r].as_ref().expect("selected feature has a slice");
    let mut o = svd.u.clone();
    fix_column_signs(&mut o);
    Ok(FeatureSelection { r, mu_r: svd.singular_values.clone(), o, gap_r: gaps[r], gaps })
}

/// Chooses the feature `r` maximizing `min_{i≠j} |μ_{r,i} − μ_{r,j}|`, where
/// the `μ_{r,·}` are the singular values of `H_r`; ties go to the lowest
/// index. With `k = 1` every gap is `+∞`.
pub fn select_feature(w: &WhiteningFactor, moments: &MomentSet) -> Result<FeatureSelection> {
    select_from(&whitened_slices(w, moments, Execution::default())?)
}

#[derive(Debug, Clone)]
pub struct DecompositionReport {
    /// Selected feature; `None` for the randomized baseline.
    pub r: Option<usize>,
    pub gap_r: f64,
    pub gap_m2: f64,
    pub singular_values: DVector<f64>,
    pub o: DMatrix<f64>,
    /// Row estimates before clamping and column renormalization.
    pub raw_rows: DMatrix<f64>,
    /// `‖offdiag(Oᵀ H_i O)‖_F` per feature.
    pub offdiag_residuals: Vec<f64>,
    pub mu_r: DVector<f64>,
    pub feature_gaps: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ReportFile {
    r: Option<usize>,
    gap_r: f64,
    gap_m2: f64,
    singular_values: Vec<f64>,
    offdiag_residuals: Vec<f64>,
    mu_r: Vec<f64>,
    #[serde(rename = "O")]
    o: Vec<Vec<f64>>,
    raw_rows: Vec<Vec<f64>>,
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

impl DecompositionReport {
    fn file(&self) -> ReportFile {
        ReportFile {
            r: self.r,
            gap_r: self.gap_r,
            gap_m2: self.gap_m2,
            singular_values: self.singular_values.as_slice().to_vec(),
            offdiag_residuals: self.offdiag_residuals.clone(),
            mu_r: self.mu_r.as_slice().to_vec(),
            o: rows(&self.o),
            raw_rows: rows(&self.raw_rows),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.file())?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut w, &self.file())?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }
}

/// Learns `(M, Ω)`, or `(M, α)` from LDA-adjusted moments.
pub fn svtd(moments: &MomentSet, k: usize) -> Result<(TopicModel, DecompositionReport)> {
    svtd_with(moments, k, Execution::default())
}

pub fn svtd_with(moments: &MomentSet, k: usize, exec: Execution) -> Result<(TopicModel, DecompositionReport)> {
    let w = whiten(moments.m2(), k)?;
    let slices = whitened_slices(&w, moments, exec)?;
    let sel = select_from(&slices)?;
    let n = moments.n();

    let mut raw = DMatrix::zeros(n, k);
    let mut residuals = vec![0.0; n];
    for (i, h) in slices.iter().enumerate() {
        let h = h.as_ref().ok_or(Error::DegenerateSlice(i))?;
        let d = sel.o.transpose() * h * &sel.o;
        residuals[i] = offdiag_norm(&d);
        if i == sel.r {
            raw.row_mut(i).copy_from(&sel.mu_r.transpose());
        } else {
            raw.row_mut(i).copy_from(&d.diagonal().transpose());
        }
    }

    let m = clamp_and_normalize(&raw)?;
    let omega = project_simplex(&nnls(&m, moments.m1())?);
    let model = finish_model(moments.flavor(), m, omega)?;
    let report = DecompositionReport {
        r: Some(sel.r),
        gap_r: sel.gap_r,
        gap_m2: w.spectral_gap(),
        singular_values: w.singular_values,
        o: sel.o,
        raw_rows: raw,
        offdiag_residuals: residuals,
        mu_r: sel.mu_r,
        feature_gaps: sel.gaps,
    };
    Ok((model, report))
}

fn offdiag_norm(d: &DMatrix<f64>) -> f64 {
    let mut s = 0.0;
    for (idx, &x) in d.iter().enumerate() {
        if idx % d.nrows() != idx / d.nrows() {
            s += x * x;
        }
    }
    s.sqrt()
}

/// Sets negative entries to zero and rescales every column to sum to one.
pub(crate) fn clamp_and_normalize(raw: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let mut m = raw.map(|x| if x > 0.0 { x } else { 0.0 });
    for (j, mut col) in m.column_iter_mut().enumerate() {
        let total = col.sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::CollapsedColumn(j));
        }
        col /= total;
    }
    Ok(m)
}

/// Builds the model for the moments' flavor; LDA `α` is `α₀ · ω`.
pub(crate) fn finish_model(flavor: Flavor, m: DMatrix<f64>, omega: DVector<f64>) -> Result<TopicModel> {
    match flavor {
        Flavor::Lda { alpha0 } => {
            let floored = omega.map(|w| w.max(ALPHA_FLOOR));
            let alpha = &floored * (alpha0 / floored.sum());
            TopicModel::lda(m, alpha)
        }
        Flavor::SingleTopic | Flavor::UniformAverage => TopicModel::stm(m, omega),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn model(rows: &[f64], n: usize, k: usize, omega: &[f64]) -> TopicModel {
        TopicModel::stm(DMatrix::from_row_slice(n, k, rows), DVector::from_row_slice(omega)).unwrap()
    }

    fn three_by_two() -> TopicModel {
        model(&[0.6, 0.1, 0.3, 0.3, 0.1, 0.6], 3, 2, &[0.5, 0.5])
    }

    #[test]
    fn whiten_rank_one() {
        let mu = DVector::from_vec(vec![0.6, 0.4]);
        let w = whiten(&(&mu * mu.transpose()), 1).unwrap();
        assert_relative_eq!(w.e.column(0).into_owned(), mu, epsilon = 1e-14);
    }

    #[test]
    fn whiten_identity() {
        let w = whiten(&DMatrix::identity(2, 2), 2).unwrap();
        assert_relative_eq!(&w.e * w.e.transpose(), DMatrix::identity(2, 2), epsilon = 1e-14);
        assert_relative_eq!(w.e.map(f64::abs), DMatrix::identity(2, 2), epsilon = 1e-14);
    }

    #[test]
    fn whiten_rejects_low_rank_and_bad_k() {
        let mu = DVector::from_vec(vec![0.6, 0.4]);
        let m2 = &mu * mu.transpose();
        assert!(matches!(whiten(&m2, 2), Err(Error::EffectiveRankBelowK)));
        assert!(whiten(&m2, 0).is_err());
        assert!(whiten(&m2, 3).is_err());
        assert!(whiten(&DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]), 1).is_err());
    }

    #[test]
    fn slice_transform_rank_one_by_hand() {
        let exact = MomentSet::population(&model(&[0.5, 0.5], 2, 1, &[1.0]));
        let w = whiten(exact.m2(), 1).unwrap();
        let h = slice_transform(&w, &exact, 1).unwrap();
        assert_relative_eq!(h[(0, 0)], 0.5, epsilon = 1e-14);
    }

    #[test]
    fn slice_transform_of_a_zero_slice_is_zero() {
        let m = model(&[0.5, 0.0, 0.5, 0.5, 0.0, 0.5], 3, 2, &[0.5, 0.5]);
        // Word 1 carries only topic 1's mass; zero out its slice explicitly.
        let exact = MomentSet::population(&m);
        let slices: Vec<_> = (0..3).map(|i| if i == 1 { DMatrix::zeros(3, 3) } else { exact.slice(i).unwrap() }).collect();
        let moments = MomentSet::from_parts(exact.flavor(), exact.m1().clone(), exact.m2().clone(), Some(slices)).unwrap();
        let w = whiten(moments.m2(), 2).unwrap();
        assert_eq!(slice_transform(&w, &moments, 1).unwrap(), DMatrix::zeros(2, 2));
    }

    #[test]
    fn projected_path_matches_dense_slice_transform() {
        let exact = MomentSet::population(&three_by_two());
        let w = whiten(exact.m2(), 2).unwrap();
        let fast = whitened_slices(&w, &exact, Execution::Sequential).unwrap();
        for (i, h) in fast.iter().enumerate() {
            assert_relative_eq!(h.as_ref().unwrap(), &slice_transform(&w, &exact, i).unwrap(), epsilon = 1e-12);
        }
    }

    #[test]
    fn select_feature_breaks_ties_by_index() {
        let exact = MomentSet::population(&three_by_two());
        let w = whiten(exact.m2(), 2).unwrap();
        let sel = select_feature(&w, &exact).unwrap();
        assert_eq!(sel.r, 0);
        assert_relative_eq!(sel.gap_r, 0.5, epsilon = 1e-10);
        assert_relative_eq!(sel.gaps[1], 0.0, epsilon = 1e-10);
        assert_relative_eq!(sel.mu_r, DVector::from_vec(vec![0.6, 0.1]), epsilon = 1e-10);
    }

    #[test]
    fn select_feature_skips_flat_rows() {
        let m = model(&[0.5, 0.1, 0.2, 0.2, 0.2, 0.2, 0.1, 0.5], 4, 2, &[0.4, 0.6]);
        let exact = MomentSet::population(&m);
        let w = whiten(exact.m2(), 2).unwrap();
        let sel = select_feature(&w, &exact).unwrap();
        assert_ne!(sel.r, 1);
        assert_ne!(sel.r, 2);
    }

    #[test]
    fn select_feature_k1_takes_first_feature() {
        let exact = MomentSet::population(&model(&[0.2, 0.5, 0.3], 3, 1, &[1.0]));
        let w = whiten(exact.m2(), 1).unwrap();
        let sel = select_feature(&w, &exact).unwrap();
        assert_eq!(sel.r, 0);
        assert!(sel.gaps.iter().all(|g| g.is_infinite()));
    }

    #[test]
    fn no_separating_feature_when_every_row_is_flat() {
        // Rank-2 M₂ with third-moment slices that are multiples of M₂ make
        // every H_i a multiple of the identity.
        let m2 = DMatrix::from_row_slice(3, 3, &[0.2, 0.0, 0.0, 0.0, 0.2, 0.0, 0.0, 0.0, 0.0]);
        let slices = vec![m2.clone() * 0.3, m2.clone() * 0.5, m2.clone() * 0.2];
        let moments = MomentSet::from_parts(Flavor::SingleTopic, DVector::from_vec(vec![0.3, 0.5, 0.2]), m2, Some(slices)).unwrap();
        let w = whiten(moments.m2(), 2).unwrap();
        assert!(matches!(select_feature(&w, &moments), Err(Error::NoSeparatingFeature)));
    }

    #[test]
    fn svtd_recovers_worked_example() {
        let truth = three_by_two();
        let (est, report) = svtd(&MomentSet::population(&truth), 2).unwrap();
        let a = align_columns(&est, &truth).unwrap();
        let aligned = est.permuted(&a.perm).unwrap();
        assert_relative_eq!(aligned.m(), truth.m(), epsilon = 1e-8);
        assert_relative_eq!(aligned.topic_proportions(), truth.topic_proportions(), epsilon = 1e-8);
        assert_relative_eq!(&report.o.transpose() * &report.o, DMatrix::identity(2, 2), epsilon = 1e-8);
        assert!(report.offdiag_residuals.iter().all(|&r| r < 1e-8));
    }

    #[test]
    fn svtd_rank_one() {
        let truth = model(&[0.2, 0.5, 0.3], 3, 1, &[1.0]);
        let (est, _) = svtd(&MomentSet::population(&truth), 1).unwrap();
        assert_relative_eq!(est.m(), truth.m(), epsilon = 1e-12);
        assert_eq!(est.topic_proportions()[0], 1.0);
    }

    #[test]
    fn clamping_keeps_columns_on_the_simplex() {
        let raw = DMatrix::from_row_slice(3, 2, &[0.5, -0.01, 0.6, 0.3, -0.1, 0.9]);
        let m = clamp_and_normalize(&raw).unwrap();
        for col in m.column_iter() {
            assert_relative_eq!(col.sum(), 1.0, epsilon = 1e-15);
            assert!(col.iter().all(|&x| x >= 0.0));
        }
        let dead = DMatrix::from_row_slice(2, 1, &[-0.1, 0.0]);
        assert!(matches!(clamp_and_normalize(&dead), Err(Error::CollapsedColumn(0))));
    }

    #[test]
    fn spectral_gap_uses_squared_singular_values() {
        let w = WhiteningFactor { e: DMatrix::zeros(3, 2), singular_values: DVector::from_vec(vec![3.0, 2.0, 1.0]), k: 2 };
        assert_relative_eq!(w.spectral_gap(), 3.0);
    }
}
