//! Dense linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};

use crate::error::{Error, Result};

/// Singular value decomposition with singular values in nonincreasing order.
#[derive(Debug, Clone)]
pub struct SortedSvd {
    pub u: DMatrix<f64>,
    pub singular_values: DVector<f64>,
    pub v_t: DMatrix<f64>,
}

pub fn svd_sorted(a: &DMatrix<f64>) -> SortedSvd {
    let svd = SVD::new(a.clone(), true, true);
    let (u, s, v_t) = (svd.u.expect("u requested"), svd.singular_values, svd.v_t.expect("v_t requested"));
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&i, &j| s[j].total_cmp(&s[i]).then(i.cmp(&j)));
    SortedSvd {
        u: DMatrix::from_fn(u.nrows(), order.len(), |r, c| u[(r, order[c])]),
        singular_values: DVector::from_fn(order.len(), |i, _| s[order[i]]),
        v_t: DMatrix::from_fn(order.len(), v_t.ncols(), |r, c| v_t[(order[r], c)]),
    }
}

/// SVD of a symmetric matrix through its eigendecomposition: the left
/// singular vectors are the eigenvectors, the singular values are the
/// absolute eigenvalues. Columns are ordered by singular value, descending.
pub fn symmetric_svd(a: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>) {
    let eig = SymmetricEigen::new(a.clone());
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j].abs().total_cmp(&eig.eigenvalues[i].abs()).then(i.cmp(&j))
    });
    let u = DMatrix::from_fn(a.nrows(), n, |r, c| eig.eigenvectors[(r, order[c])]);
    let s = DVector::from_fn(n, |i, _| eig.eigenvalues[order[i]].abs());
    (u, s)
}

/// Flips each column so that its entry of largest magnitude is positive; on
/// ties the lowest row index decides.
pub fn fix_column_signs(m: &mut DMatrix<f64>) {
    for mut col in m.column_iter_mut() {
        let mut best = 0;
        for i in 1..col.len() {
            if col[i].abs() > col[best].abs() {
                best = i;
            }
        }
        if col.len() > 0 && col[best] < 0.0 {
            col.neg_mut();
        }
    }
}

/// Largest asymmetry `max |a_ij - a_ji|`.
pub fn asymmetry(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..i {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst
}

/// Moore–Penrose pseudoinverse of a tall matrix with `k` columns, computed
/// through a thin SVD. Fails if the numerical rank, with relative cutoff
/// `k · ε · σ₁`, is below `k`.
pub fn pinv_full_column_rank(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let k = a.ncols();
    if a.nrows() < k || k == 0 {
        return None;
    }
    let svd = svd_sorted(a);
    let s = &svd.singular_values;
    let tol = k as f64 * f64::EPSILON * s[0];
    if !(s[0] > 0.0) || s[k - 1] <= tol {
        return None;
    }
    // V S⁻¹ Uᵀ with U thin (rows × k).
    let u_thin = svd.u.columns(0, k);
    let mut vs = svd.v_t.transpose();
    for (j, mut col) in vs.column_iter_mut().enumerate() {
        col /= s[j];
    }
    Some(vs * u_thin.transpose())
}

/// Euclidean projection onto the probability simplex (sort-based).
pub fn project_simplex(v: &DVector<f64>) -> DVector<f64> {
    let n = v.len();
    if n == 0 {
        return v.clone();
    }
    let mut sorted: Vec<f64> = v.iter().copied().collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        cumsum += x;
        let t = (cumsum - 1.0) / (i + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    let mut out = v.map(|x| (x - theta).max(0.0));
    let total: f64 = out.sum();
    if total > 0.0 {
        out /= total;
    }
    out
}

/// Nonnegative least squares `min ‖A x − b‖₂ s.t. x ≥ 0` by the
/// Lawson–Hanson active-set method.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let (m, n) = a.shape();
    if b.len() != m {
        return Err(Error::DimensionMismatch(format!("nnls: A is {m}x{n}, b has {}", b.len())));
    }
    let tol = 10.0 * f64::EPSILON * a.norm() * (m.max(n) as f64);
    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    let max_outer = 3 * n + 10;

    for _ in 0..max_outer {
        let w = a.transpose() * (b - a * &x);
        let candidate = (0..n).filter(|&j| !passive[j]).max_by(|&i, &j| w[i].total_cmp(&w[j]).then(j.cmp(&i)));
        let Some(j) = candidate else { break };
        if w[j] <= tol {
            break;
        }
        passive[j] = true;

        loop {
            let idx: Vec<usize> = (0..n).filter(|&i| passive[i]).collect();
            let sub = DMatrix::from_fn(m, idx.len(), |r, c| a[(r, idx[c])]);
            let z_sub = least_squares(&sub, b);
            if z_sub.iter().all(|&z| z > 0.0) {
                x.fill(0.0);
                for (c, &i) in idx.iter().enumerate() {
                    x[i] = z_sub[c];
                }
                break;
            }
            let mut alpha = f64::INFINITY;
            for (c, &i) in idx.iter().enumerate() {
                if z_sub[c] <= 0.0 {
                    let denom = x[i] - z_sub[c];
                    if denom > 0.0 {
                        alpha = alpha.min(x[i] / denom);
                    }
                }
            }
            if !alpha.is_finite() {
                alpha = 0.0;
            }
            for (c, &i) in idx.iter().enumerate() {
                x[i] += alpha * (z_sub[c] - x[i]);
                if x[i] <= tol {
                    x[i] = 0.0;
                    passive[i] = false;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    Ok(x)
}

/// Minimum-norm least-squares solution via the pseudoinverse.
fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let svd = SVD::new(a.clone(), true, true);
    let eps = f64::EPSILON * a.nrows().max(a.ncols()) as f64 * svd.singular_values.max();
    svd.solve(b, eps).unwrap_or_else(|_| DVector::zeros(a.ncols()))
}
