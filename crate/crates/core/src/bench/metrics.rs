use crate::decomp::align_columns;
use crate::error::{Error, Result};
use crate::model::TopicModel;
use crate::moments::MomentSet;

/// Frobenius errors of estimated moments against the model's population
/// moments. The third-order error is accumulated slice by slice.
///
/// For an LDA truth the population moments are the adjusted ones, so `est`
/// should come from `lda_adjust`.
pub fn err_moments(est: &MomentSet, truth: &TopicModel) -> Result<(f64, f64)> {
    if est.n() != truth.n() {
        return Err(Error::DimensionMismatch(format!("estimate has n = {}, model has n = {}", est.n(), truth.n())));
    }
    let pop = MomentSet::population(truth);
    let err2 = (est.m2() - pop.m2()).norm();
    let mut sq = 0.0;
    for i in 0..est.n() {
        sq += (est.slice(i)? - pop.slice(i)?).norm_squared();
    }
    Ok((err2, sq.sqrt()))
}

/// Second-moment error only; cheaper than [`err_moments`].
pub fn err_second_moment(est: &MomentSet, truth: &TopicModel) -> Result<f64> {
    if est.n() != truth.n() {
        return Err(Error::DimensionMismatch(format!("estimate has n = {}, model has n = {}", est.n(), truth.n())));
    }
    Ok((est.m2() - truth.second_moment()).norm())
}

/// Columns sorted by `(w_j, μ_j)`, so that sums over topics run in an order
/// independent of how the topics were labelled.
fn canonical(model: &TopicModel) -> Result<TopicModel> {
    let w = model.topic_proportions();
    let m = model.m();
    let mut order: Vec<usize> = (0..model.k()).collect();
    order.sort_by(|&a, &b| {
        w[a].total_cmp(&w[b]).then_with(|| {
            m.column(a).iter().zip(m.column(b).iter()).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    model.permuted(&order)
}

/// `‖M̃ diag(w̃) M̃ᵀ − M diag(w) Mᵀ‖_F`; exactly invariant under column
/// permutations of either model.
pub fn err_reconstruction(est: &TopicModel, truth: &TopicModel) -> Result<f64> {
    if est.n() != truth.n() {
        return Err(Error::DimensionMismatch(format!("estimate has n = {}, model has n = {}", est.n(), truth.n())));
    }
    Ok((canonical(est)?.second_moment() - canonical(truth)?.second_moment()).norm())
}

/// `‖M̃_N − M̃_{N−1}‖_F` after aligning the columns of `current` to `previous`.
pub fn variation(previous: &TopicModel, current: &TopicModel) -> Result<f64> {
    let a = align_columns(current, previous)?;
    let aligned = current.permuted(&a.perm)?;
    Ok((aligned.m() - previous.m()).norm())
}

/// Median of the finite values; NaN when there are none.
pub fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidArgument("need at least two paired points".into()));
    }
    if x.iter().chain(y).any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidArgument("log-log regression needs positive values".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Pearson correlation; zero when either input is constant.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len()) as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    if saa == 0.0 || sbb == 0.0 {
        0.0
    } else {
        sab / (saa * sbb).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Corpus, Document, Vocabulary};
    use crate::moments::estimate_moments;
    use approx::assert_relative_eq;
    use nalgebra::{DMatrix, DVector};

    fn model() -> TopicModel {
        TopicModel::stm(
            DMatrix::from_row_slice(3, 2, &[0.6, 0.1, 0.3, 0.3, 0.1, 0.6]),
            DVector::from_vec(vec![0.25, 0.75]),
        )
        .unwrap()
    }

    #[test]
    fn exact_moments_have_zero_error() {
        let m = model();
        let (e2, e3) = err_moments(&MomentSet::population(&m), &m).unwrap();
        assert_eq!((e2, e3), (0.0, 0.0));
    }

    #[test]
    fn two_word_single_document_error() {
        // X = (2, 1): M̃₂ = [[2,2],[2,0]]/6; truth μ = (0.5, 0.5) gives M₂ = 0.25·J.
        let corpus = Corpus::new(Vocabulary::anonymous(2), vec![Document::new("d", [(0, 2), (1, 1)]).unwrap()]).unwrap();
        let truth = TopicModel::stm(DMatrix::from_column_slice(2, 1, &[0.5, 0.5]), DVector::from_vec(vec![1.0])).unwrap();
        let (e2, _) = err_moments(&estimate_moments(&corpus), &truth).unwrap();
        let d = [1.0 / 3.0 - 0.25, 1.0 / 3.0 - 0.25, 1.0 / 3.0 - 0.25, -0.25];
        let expected = d.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert_relative_eq!(e2, expected, epsilon = 1e-15);
        assert_relative_eq!(err_second_moment(&estimate_moments(&corpus), &truth).unwrap(), expected, epsilon = 1e-15);
    }

    #[test]
    fn reconstruction_is_permutation_invariant() {
        let m = model();
        assert_eq!(err_reconstruction(&m, &m).unwrap(), 0.0);
        assert_eq!(err_reconstruction(&m.permuted(&[1, 0]).unwrap(), &m).unwrap(), 0.0);
    }

    #[test]
    fn reconstruction_hand_value() {
        // Diagonal topics: M diag(w) Mᵀ = diag(w); difference diag(0.1, -0.1).
        let a = TopicModel::stm(DMatrix::identity(2, 2), DVector::from_vec(vec![0.6, 0.4])).unwrap();
        let b = TopicModel::stm(DMatrix::identity(2, 2), DVector::from_vec(vec![0.5, 0.5])).unwrap();
        assert_relative_eq!(err_reconstruction(&a, &b).unwrap(), 0.02f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn variation_ignores_column_order() {
        let m = model();
        assert_eq!(variation(&m, &m.permuted(&[1, 0]).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn summary_statistics() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!(median(&[]).is_nan());
        let x = [1.0, 10.0, 100.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(-0.5)).collect();
        assert_relative_eq!(log_log_slope(&x, &y).unwrap(), -0.5, epsilon = 1e-12);
        assert_relative_eq!(pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]), 1.0, epsilon = 1e-15);
    }
}
