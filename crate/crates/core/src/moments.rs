//! Observable moment estimators for the single topic model and LDA.
//!
//! For a document with count vector `X` and length `c`, the unnormalized
//! second moment counts ordered pairs of distinct word positions,
//! `X Xᵀ − diag(X)`, and the third moment counts ordered triples. Slice `m`
//! of the triple counts factors as `X_m · (Y Yᵀ − diag(Y))` with
//! `Y = X − e_m`: fix one occurrence of word `m`, then count ordered pairs
//! among the remaining positions. All per-document quantities are integers,
//! so the length-weighted estimators are exact integer sums divided by
//! `C₂ = Σ c(c−1)` or `C₃ = Σ c(c−1)(c−2)`.
//!
//! The third moment is never stored as an `n × n × n` array. [`MomentSet`]
//! produces single slices on demand, or their projections `P S_m Pᵀ` onto a
//! `k`-dimensional space directly from the sparse counts.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::model::{TopicModel, TopicWeights};
use crate::par::{map_indexed, Execution};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "flavor", rename_all = "kebab-case")]
pub enum Flavor {
    /// Length-weighted estimators.
    SingleTopic,
    /// Per-document estimators averaged with equal weights.
    UniformAverage,
    /// LDA-adjusted moments for concentration `alpha0`.
    Lda { alpha0: f64 },
}

/// Length statistics `C₁ = Σc`, `C₂ = Σc(c−1)`, `C₃ = Σc(c−1)(c−2)` and the
/// weight concentrations `W₂`, `W₃`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LengthStats {
    pub n_docs: usize,
    pub max_len: u64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub w2: f64,
    pub w3: f64,
}

impl LengthStats {
    pub fn from_lengths(lengths: impl IntoIterator<Item = u64>) -> Self {
        let (mut c1, mut c2, mut c3, mut s2, mut s3) = (0u128, 0u128, 0u128, 0u128, 0u128);
        let (mut n_docs, mut max_len) = (0usize, 0u64);
        for c in lengths {
            let c = c as u128;
            let p2 = c * c.saturating_sub(1);
            let p3 = p2 * c.saturating_sub(2);
            c1 += c;
            c2 += p2;
            c3 += p3;
            s2 += p2 * p2;
            s3 += p3 * p3;
            n_docs += 1;
            max_len = max_len.max(c as u64);
        }
        let ratio = |num: u128, den: u128| if den == 0 { f64::NAN } else { num as f64 / (den as f64 * den as f64) };
        Self {
            n_docs,
            max_len,
            c1: c1 as f64,
            c2: c2 as f64,
            c3: c3 as f64,
            w2: ratio(s2, c2),
            w3: ratio(s3, c3),
        }
    }

    pub fn of(corpus: &Corpus) -> Self {
        Self::from_lengths(corpus.lengths())
    }
}

/// Sparse per-document counts indexed by word, for documents of length ≥ 3.
#[derive(Debug)]
struct TripleCounts {
    n: usize,
    docs: Vec<SparseDoc>,
    /// `postings[w]` lists `(doc, count)` for documents containing `w`.
    postings: Vec<Vec<(u32, f64)>>,
    scale: f64,
}

#[derive(Debug)]
struct SparseDoc {
    words: Vec<usize>,
    counts: Vec<f64>,
    weight: f64,
}

impl TripleCounts {
    fn accumulate_slice(&self, m: usize, out: &mut DMatrix<f64>) {
        for &(d, xm) in &self.postings[m] {
            let doc = &self.docs[d as usize];
            let w = doc.weight * xm;
            for (a, &ha) in doc.words.iter().enumerate() {
                let ya = doc.counts[a] - f64::from(ha == m);
                if ya == 0.0 {
                    continue;
                }
                for (b, &hb) in doc.words.iter().enumerate() {
                    let yb = doc.counts[b] - f64::from(hb == m);
                    out[(ha, hb)] += w * (ya * yb);
                }
                out[(ha, ha)] -= w * ya;
            }
        }
    }

    fn slice(&self, m: usize) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.n, self.n);
        self.accumulate_slice(m, &mut out);
        out * self.scale
    }

    /// `P S_m Pᵀ` from the sparse counts: per document
    /// `x_m · ((P Y)(P Y)ᵀ − Σ_h Y_h p_h p_hᵀ)`.
    fn projected_slice(&self, m: usize, proj: &DMatrix<f64>) -> DMatrix<f64> {
        let k = proj.nrows();
        let mut out = DMatrix::zeros(k, k);
        let mut v = DVector::zeros(k);
        for &(d, xm) in &self.postings[m] {
            let doc = &self.docs[d as usize];
            let w = doc.weight * xm;
            v.fill(0.0);
            for (a, &h) in doc.words.iter().enumerate() {
                let y = doc.counts[a] - f64::from(h == m);
                if y == 0.0 {
                    continue;
                }
                let col = proj.column(h);
                v.axpy(y, &col, 1.0);
                out.ger(-w * y, &col, &col, 1.0);
            }
            out.ger(w, &v, &v, 1.0);
        }
        out * self.scale
    }
}

#[derive(Debug, Clone)]
enum SliceSource {
    Unavailable,
    Empirical(Arc<TripleCounts>),
    /// Slice `m` is `M diag(w ∘ μ_m) Mᵀ`.
    Population { m: DMatrix<f64>, weights: DVector<f64> },
    Explicit(Arc<Vec<DMatrix<f64>>>),
    /// Raw slice minus `a·(M₁,₂)_m` plus `b·m1_m · m1 m1ᵀ`.
    LdaAdjusted { base: Box<SliceSource>, raw_m2: DMatrix<f64>, m1: DVector<f64>, a: f64, b: f64 },
}

/// `dst += c · src`.
fn add_scaled(dst: &mut DMatrix<f64>, c: f64, src: &DMatrix<f64>) {
    dst.zip_apply(src, |d, x| *d += c * x);
}

impl SliceSource {
    fn slice(&self, i: usize) -> Result<DMatrix<f64>> {
        match self {
            SliceSource::Unavailable => Err(Error::ThirdMomentUndefined),
            SliceSource::Empirical(t) => Ok(t.slice(i)),
            SliceSource::Population { m, weights } => {
                let mut scaled = m.clone();
                for (j, mut col) in scaled.column_iter_mut().enumerate() {
                    col *= weights[j] * m[(i, j)];
                }
                Ok(scaled * m.transpose())
            }
            SliceSource::Explicit(s) => Ok(s[i].clone()),
            SliceSource::LdaAdjusted { base, raw_m2, m1, a, b } => {
                let mut s = base.slice(i)?;
                let m2_col = raw_m2.column(i);
                // (M₁,₂)_{h,l,i} = M2_{h,l} m1_i + M2_{l,i} m1_h + M2_{i,h} m1_l
                add_scaled(&mut s, -a * m1[i], raw_m2);
                s.ger(-a, m1, &m2_col, 1.0);
                s.ger(-a, &m2_col, m1, 1.0);
                s.ger(b * m1[i], m1, m1, 1.0);
                Ok(s)
            }
        }
    }

    fn projected(&self, i: usize, proj: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        match self {
            SliceSource::Unavailable => Err(Error::ThirdMomentUndefined),
            SliceSource::Empirical(t) => Ok(t.projected_slice(i, proj)),
            SliceSource::Population { m, weights } => {
                let pm = proj * m;
                let mut scaled = pm.clone();
                for (j, mut col) in scaled.column_iter_mut().enumerate() {
                    col *= weights[j] * m[(i, j)];
                }
                Ok(scaled * pm.transpose())
            }
            SliceSource::Explicit(s) => Ok(proj * &s[i] * proj.transpose()),
            SliceSource::LdaAdjusted { base, raw_m2, m1, a, b } => {
                let mut h = base.projected(i, proj)?;
                let pm1 = proj * m1;
                let pcol = proj * raw_m2.column(i);
                let pm2p = proj * (raw_m2 * proj.transpose());
                add_scaled(&mut h, -a * m1[i], &pm2p);
                h.ger(-a, &pm1, &pcol, 1.0);
                h.ger(-a, &pcol, &pm1, 1.0);
                h.ger(b * m1[i], &pm1, &pm1, 1.0);
                Ok(h)
            }
        }
    }
}

/// First and second moments plus on-demand access to third-moment slices.
#[derive(Debug, Clone)]
pub struct MomentSet {
    flavor: Flavor,
    m1: DVector<f64>,
    m2: DMatrix<f64>,
    stats: Option<LengthStats>,
    source: SliceSource,
}

impl MomentSet {
    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn n(&self) -> usize {
        self.m1.len()
    }

    pub fn m1(&self) -> &DVector<f64> {
        &self.m1
    }

    pub fn m2(&self) -> &DMatrix<f64> {
        &self.m2
    }

    /// Length statistics of the corpus the moments came from; `None` for
    /// population moments.
    pub fn length_stats(&self) -> Option<&LengthStats> {
        self.stats.as_ref()
    }

    pub fn has_third_moment(&self) -> bool {
        !matches!(self.source, SliceSource::Unavailable)
    }

    /// Slice `(M̃₃)_{·,·,i}` as a dense `n × n` matrix.
    pub fn slice(&self, i: usize) -> Result<DMatrix<f64>> {
        self.check_index(i)?;
        self.source.slice(i)
    }

    /// `P · slice(i) · Pᵀ` for a `k × n` matrix `P`, computed without
    /// materializing the slice when the moments are empirical.
    pub fn projected_slice(&self, i: usize, proj: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.check_index(i)?;
        if proj.ncols() != self.n() {
            return Err(Error::DimensionMismatch(format!("projection has {} columns, n = {}", proj.ncols(), self.n())));
        }
        self.source.projected(i, proj)
    }

    /// `M₃(η) = Σ_l η_l · slice(l)`.
    pub fn contract(&self, eta: &DVector<f64>) -> Result<DMatrix<f64>> {
        if eta.len() != self.n() {
            return Err(Error::DimensionMismatch(format!("eta has {} entries, n = {}", eta.len(), self.n())));
        }
        let mut out = DMatrix::zeros(self.n(), self.n());
        for (l, &e) in eta.iter().enumerate() {
            if e != 0.0 {
                add_scaled(&mut out, e, &self.slice(l)?);
            }
        }
        Ok(out)
    }

    /// `P M₃(η) Pᵀ`, summing projected slices.
    pub fn projected_contract(&self, eta: &DVector<f64>, proj: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if eta.len() != self.n() {
            return Err(Error::DimensionMismatch(format!("eta has {} entries, n = {}", eta.len(), self.n())));
        }
        let k = proj.nrows();
        let mut out = DMatrix::zeros(k, k);
        for (l, &e) in eta.iter().enumerate() {
            if e != 0.0 {
                add_scaled(&mut out, e, &self.projected_slice(l, proj)?);
            }
        }
        Ok(out)
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.n() {
            return Err(Error::InvalidArgument(format!("feature {i} out of range for n = {}", self.n())));
        }
        Ok(())
    }

    /// Exact population moments of a model: `M₁ = M w`, `M₂ = M diag(w) Mᵀ`,
    /// `M₃ = Σ w_j μ_j⊗μ_j⊗μ_j` with `w = Ω`. For LDA models these are the
    /// adjusted moments `M₂^α`, `M₃^α` with weights `α_j/((α₀+1)α₀)` and
    /// `2α_j/((α₀+2)(α₀+1)α₀)`, and `M₁ = M α/α₀`.
    pub fn population(model: &TopicModel) -> Self {
        let m = model.m().clone();
        let props = model.topic_proportions();
        let m1 = &m * &props;
        let (flavor, w2, w3) = match model.weights() {
            TopicWeights::Stm { omega } => (Flavor::SingleTopic, omega.clone(), omega.clone()),
            TopicWeights::Lda { alpha, alpha0 } => {
                let a0 = *alpha0;
                (
                    Flavor::Lda { alpha0: a0 },
                    alpha / ((a0 + 1.0) * a0),
                    alpha * (2.0 / ((a0 + 2.0) * (a0 + 1.0) * a0)),
                )
            }
        };
        let mut scaled = m.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= w2[j];
        }
        let m2 = scaled * m.transpose();
        Self { flavor, m1, m2, stats: None, source: SliceSource::Population { m, weights: w3 } }
    }

    /// Moments from explicit arrays; `slices[i]` is `(M₃)_{·,·,i}`.
    pub fn from_parts(flavor: Flavor, m1: DVector<f64>, m2: DMatrix<f64>, slices: Option<Vec<DMatrix<f64>>>) -> Result<Self> {
        let n = m1.len();
        if m2.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!("m2 is {:?}, expected {n}x{n}", m2.shape())));
        }
        let source = match slices {
            None => SliceSource::Unavailable,
            Some(s) => {
                if s.len() != n || s.iter().any(|x| x.shape() != (n, n)) {
                    return Err(Error::DimensionMismatch("slices must be n matrices of size n x n".into()));
                }
                SliceSource::Explicit(Arc::new(s))
            }
        };
        Ok(Self { flavor, m1, m2, stats: None, source })
    }

    pub fn export(&self) -> MomentExport {
        MomentExport {
            flavor: self.flavor,
            n: self.n(),
            m1: self.m1.as_slice().to_vec(),
            m2: self.m2.row_iter().map(|r| r.iter().copied().collect()).collect(),
            lengths: self.stats,
        }
    }
}

/// JSON form of a [`MomentSet`] without its third moment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentExport {
    #[serde(flatten)]
    pub flavor: Flavor,
    pub n: usize,
    pub m1: Vec<f64>,
    pub m2: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lengths: Option<LengthStats>,
}

#[derive(Clone, Copy)]
enum Weighting {
    Length,
    Uniform,
}

/// Length-weighted estimators `M̃₁`, `M̃₂` and slices of `M̃₃`.
///
/// Each moment only uses documents long enough to define it: `c ≥ 2` for
/// `M̃₂`, `c ≥ 3` for `M̃₃`.
pub fn estimate_moments(corpus: &Corpus) -> MomentSet {
    estimate_moments_with(corpus, Execution::default())
}

pub fn estimate_moments_with(corpus: &Corpus, exec: Execution) -> MomentSet {
    estimate(corpus, Weighting::Length, exec)
}

/// Equal-weight average of per-document estimators.
pub fn estimate_moments_uniform(corpus: &Corpus) -> MomentSet {
    estimate_moments_uniform_with(corpus, Execution::default())
}

pub fn estimate_moments_uniform_with(corpus: &Corpus, exec: Execution) -> MomentSet {
    estimate(corpus, Weighting::Uniform, exec)
}

fn estimate(corpus: &Corpus, weighting: Weighting, exec: Execution) -> MomentSet {
    let n = corpus.n_words();
    let stats = LengthStats::of(corpus);
    let docs = corpus.documents();

    // Per-document weights for each order, or zero when the document is too short.
    let weights = |order: u64, c: u64| -> f64 {
        if c < order {
            return 0.0;
        }
        match weighting {
            Weighting::Length => 1.0,
            Weighting::Uniform => 1.0 / (0..order).map(|j| (c - j) as f64).product::<f64>(),
        }
    };
    let eligible = |order: u64| docs.iter().filter(|d| d.length() >= order).count() as f64;
    let scale = |order: u64, c_sum: f64| match weighting {
        Weighting::Length => 1.0 / c_sum,
        Weighting::Uniform => 1.0 / eligible(order),
    };

    let mut m1 = DVector::zeros(n);
    for doc in docs {
        let w = weights(1, doc.length());
        for &(h, x) in doc.counts() {
            m1[h] += w * x as f64;
        }
    }
    m1 *= scale(1, stats.c1);

    let mut postings: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
    for (d, doc) in docs.iter().enumerate() {
        for &(h, x) in doc.counts() {
            postings[h].push((d as u32, x as f64));
        }
    }

    // Row h of the pair counts only involves documents containing h, so rows
    // are computed independently; X_h X_l is formed before weighting so that
    // (h, l) and (l, h) see bitwise identical terms.
    let m2 = if stats.c2 > 0.0 {
        let s2 = scale(2, stats.c2);
        let rows = map_indexed(exec, n, |h| {
            let mut row = vec![0.0; n];
            for &(d, xh) in &postings[h] {
                let doc = &docs[d as usize];
                let w = weights(2, doc.length());
                if w == 0.0 {
                    continue;
                }
                for &(l, xl) in doc.counts() {
                    row[l] += w * (xh * xl as f64);
                }
                row[h] -= w * xh;
            }
            row
        });
        DMatrix::from_fn(n, n, |h, l| rows[h][l] * s2)
    } else {
        DMatrix::zeros(n, n)
    };

    let source = if stats.c3 > 0.0 {
        let mut remap = vec![u32::MAX; docs.len()];
        let mut sparse = Vec::new();
        for (d, doc) in docs.iter().enumerate() {
            if doc.length() >= 3 {
                remap[d] = sparse.len() as u32;
                sparse.push(SparseDoc {
                    words: doc.counts().iter().map(|&(w, _)| w).collect(),
                    counts: doc.counts().iter().map(|&(_, c)| c as f64).collect(),
                    weight: weights(3, doc.length()),
                });
            }
        }
        let postings3 = postings
            .into_iter()
            .map(|p| p.into_iter().filter(|&(d, _)| remap[d as usize] != u32::MAX).map(|(d, x)| (remap[d as usize], x)).collect())
            .collect();
        SliceSource::Empirical(Arc::new(TripleCounts { n, docs: sparse, postings: postings3, scale: scale(3, stats.c3) }))
    } else {
        SliceSource::Unavailable
    };

    let flavor = match weighting {
        Weighting::Length => Flavor::SingleTopic,
        Weighting::Uniform => Flavor::UniformAverage,
    };
    MomentSet { flavor, m1, m2, stats: Some(stats), source }
}

/// LDA adjustment of length-weighted moments:
/// `M̃₂^α = M̃₂ − α₀/(α₀+1) M̃₁⊗M̃₁` and
/// `M̃₃^α = M̃₃ − α₀/(α₀+2) M₁,₂ + 2α₀²/((α₀+2)(α₀+1)) M̃₁⊗M̃₁⊗M̃₁`.
/// `M̃₁` is unchanged.
pub fn lda_adjust(moments: &MomentSet, alpha0: f64) -> Result<MomentSet> {
    if !(alpha0 > 0.0 && alpha0.is_finite()) {
        return Err(Error::InvalidArgument(format!("alpha0 must be positive, got {alpha0}")));
    }
    if moments.flavor != Flavor::SingleTopic {
        return Err(Error::InvalidArgument("lda_adjust expects length-weighted single-topic moments".into()));
    }
    let m1 = moments.m1.clone();
    let mut m2 = moments.m2.clone();
    m2.ger(-alpha0 / (alpha0 + 1.0), &m1, &m1, 1.0);
    let source = match &moments.source {
        SliceSource::Unavailable => SliceSource::Unavailable,
        base => SliceSource::LdaAdjusted {
            base: Box::new(base.clone()),
            raw_m2: moments.m2.clone(),
            m1: m1.clone(),
            a: alpha0 / (alpha0 + 2.0),
            b: 2.0 * alpha0 * alpha0 / ((alpha0 + 2.0) * (alpha0 + 1.0)),
        },
    };
    Ok(MomentSet { flavor: Flavor::Lda { alpha0 }, m1, m2, stats: moments.stats, source })
}

/// Right-hand sides of the sample-accuracy bound for `‖M̃₂ − M₂‖_F` and
/// `‖M̃₃ − M₃‖_F` at confidence `1 − δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleBound {
    pub epsilon2: f64,
    pub epsilon3: f64,
    pub delta: f64,
    pub m2_norm: f64,
    pub m3_norm: f64,
    pub w2: f64,
    pub w3: f64,
}

/// Evaluates
/// `ε₂ = √(W₂(1−‖M₂‖²_F)) + √(log 1/δ) · max_j c_j · √C₁ / C₂` and
/// `ε₃ = √(W₃(1−‖M₃‖²_F)) + √(log 1/δ) · max_j c_j(c_j−1) · √C₁ / C₃`.
/// The population norms are unknown in practice; callers usually pass the
/// plug-in estimates. An order with no eligible document yields `+∞`.
pub fn evaluate_bound(corpus: &Corpus, m2_norm: f64, m3_norm: f64, delta: f64) -> Result<SampleBound> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!("delta must lie in (0, 1), got {delta}")));
    }
    for (name, v) in [("m2_norm", m2_norm), ("m3_norm", m3_norm)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidArgument(format!("{name} must lie in [0, 1], got {v}")));
        }
    }
    let s = LengthStats::of(corpus);
    let log_term = (1.0 / delta).ln().sqrt();
    let cmax = s.max_len as f64;
    let epsilon2 = if s.c2 > 0.0 {
        (s.w2 * (1.0 - m2_norm * m2_norm)).sqrt() + log_term * cmax * s.c1.sqrt() / s.c2
    } else {
        f64::INFINITY
    };
    let epsilon3 = if s.c3 > 0.0 {
        (s.w3 * (1.0 - m3_norm * m3_norm)).sqrt() + log_term * cmax * (cmax - 1.0) * s.c1.sqrt() / s.c3
    } else {
        f64::INFINITY
    };
    Ok(SampleBound { epsilon2, epsilon3, delta, m2_norm, m3_norm, w2: s.w2, w3: s.w3 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Document, Vocabulary};
    use approx::assert_relative_eq;

    fn corpus(n: usize, docs: &[&[u64]]) -> Corpus {
        let docs = docs.iter().enumerate().map(|(i, d)| Document::from_dense(i.to_string(), d).unwrap()).collect();
        Corpus::new(Vocabulary::anonymous(n), docs).unwrap()
    }

    #[test]
    fn single_document_first_and_second_moment() {
        let m = estimate_moments(&corpus(3, &[&[2, 1, 0]]));
        assert_relative_eq!(m.m1(), &DVector::from_vec(vec![2.0 / 3.0, 1.0 / 3.0, 0.0]), epsilon = 1e-15);
        let expected = DMatrix::from_row_slice(3, 3, &[2.0 / 6.0, 2.0 / 6.0, 0.0, 2.0 / 6.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_relative_eq!(m.m2(), &expected, epsilon = 1e-15);
    }

    #[test]
    fn single_document_third_moment_slice() {
        let m = estimate_moments(&corpus(3, &[&[2, 1, 0]]));
        // 1-based (1,1,2) and (1,2,1) in the worked example are (0,0,1) and (0,1,0) here.
        let s1 = m.slice(1).unwrap();
        assert_relative_eq!(s1[(0, 0)], 2.0 / 6.0, epsilon = 1e-15);
        assert_eq!(s1[(1, 1)], 0.0);
        let s0 = m.slice(0).unwrap();
        assert_relative_eq!(s0[(1, 0)], 2.0 / 6.0, epsilon = 1e-15);
        assert_relative_eq!(s0[(0, 1)], 2.0 / 6.0, epsilon = 1e-15);
        assert!(m.slice(2).unwrap().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn absent_word_has_zero_moments() {
        let m = estimate_moments(&corpus(4, &[&[2, 1, 0, 3], &[1, 1, 0, 1]]));
        assert_eq!(m.m1()[2], 0.0);
        assert!(m.m2().row(2).iter().chain(m.m2().column(2).iter()).all(|&x| x == 0.0));
        assert!(m.slice(2).unwrap().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn third_moment_requires_a_long_document() {
        let m = estimate_moments(&corpus(2, &[&[1, 1], &[2, 0]]));
        assert!(!m.has_third_moment());
        assert!(matches!(m.slice(0), Err(Error::ThirdMomentUndefined)));
        assert_eq!(m.slice(0).unwrap_err().to_string(), "third moment undefined");
    }

    #[test]
    fn uniform_average_of_two_documents() {
        let m = estimate_moments_uniform(&corpus(2, &[&[2, 0], &[0, 2]]));
        let expected = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.5]);
        assert_relative_eq!(m.m2(), &expected, epsilon = 1e-15);
        assert_eq!(m.flavor(), Flavor::UniformAverage);
    }

    #[test]
    fn uniform_equals_weighted_on_single_document() {
        let c = corpus(3, &[&[2, 3, 1]]);
        let (a, b) = (estimate_moments(&c), estimate_moments_uniform(&c));
        assert_relative_eq!(a.m1(), b.m1(), epsilon = 1e-15);
        assert_relative_eq!(a.m2(), b.m2(), epsilon = 1e-15);
        for i in 0..3 {
            assert_relative_eq!(a.slice(i).unwrap(), b.slice(i).unwrap(), epsilon = 1e-15);
        }
    }

    #[test]
    fn projected_slice_matches_dense_projection() {
        let c = corpus(4, &[&[2, 1, 0, 3], &[1, 1, 1, 1], &[0, 5, 0, 0], &[1, 0, 0, 1]]);
        let proj = DMatrix::from_row_slice(2, 4, &[0.3, -1.0, 2.0, 0.5, 1.5, 0.2, -0.7, 0.0]);
        for m in [estimate_moments(&c), estimate_moments_uniform(&c), lda_adjust(&estimate_moments(&c), 1.5).unwrap()] {
            for i in 0..4 {
                let dense = &proj * m.slice(i).unwrap() * proj.transpose();
                assert_relative_eq!(m.projected_slice(i, &proj).unwrap(), dense, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn lda_adjust_validates_alpha0() {
        let m = estimate_moments(&corpus(2, &[&[2, 1]]));
        assert!(lda_adjust(&m, 0.0).is_err());
        assert!(lda_adjust(&m, -1.0).is_err());
        let adjusted = lda_adjust(&m, 1.0).unwrap();
        assert!(lda_adjust(&adjusted, 1.0).is_err());
    }

    #[test]
    fn lda_adjust_vanishes_as_alpha0_goes_to_zero() {
        let m = estimate_moments(&corpus(3, &[&[2, 1, 4], &[0, 3, 1]]));
        let a = lda_adjust(&m, 1e-12).unwrap();
        assert_relative_eq!(a.m2(), m.m2(), epsilon = 1e-11);
        assert_relative_eq!(a.slice(1).unwrap(), m.slice(1).unwrap(), epsilon = 1e-11);
    }

    #[test]
    fn lda_adjust_single_topic_identity() {
        // k = 1: M₂ = μμᵀ and M₁ = μ, so M₂^α = μμᵀ/(α₀+1).
        let mu = DVector::from_vec(vec![0.5, 0.3, 0.2]);
        let model = TopicModel::stm(DMatrix::from_column_slice(3, 1, mu.as_slice()), DVector::from_vec(vec![1.0])).unwrap();
        let exact = MomentSet::population(&model);
        for alpha0 in [0.3, 2.0, 7.5] {
            let adj = lda_adjust(&exact, alpha0).unwrap();
            assert_relative_eq!(adj.m2(), &(&mu * mu.transpose() / (alpha0 + 1.0)), epsilon = 1e-15);
        }
    }

    #[test]
    fn bound_arguments_are_validated() {
        let c = corpus(2, &[&[2, 1], &[1, 3]]);
        assert!(evaluate_bound(&c, 0.5, 0.5, 0.0).is_err());
        assert!(evaluate_bound(&c, 0.5, 0.5, 1.0).is_err());
        assert!(evaluate_bound(&c, 1.5, 0.5, 0.5).is_err());
    }

    #[test]
    fn bound_without_confidence_term() {
        let c = corpus(2, &[&[2, 1], &[1, 3]]);
        let b = evaluate_bound(&c, 0.4, 0.2, 1.0 - 1e-15).unwrap();
        let s = LengthStats::of(&c);
        assert_relative_eq!(b.epsilon2, (s.w2 * (1.0 - 0.16)).sqrt(), epsilon = 1e-6);
    }

    #[test]
    fn length_stats_equal_lengths() {
        let s = LengthStats::from_lengths([7, 7, 7, 7]);
        assert_relative_eq!(s.w2, 0.25, epsilon = 1e-15);
        assert_relative_eq!(s.w3, 0.25, epsilon = 1e-15);
        assert_eq!(s.c1, 28.0);
        assert_eq!(s.c2, 4.0 * 42.0);
        assert_eq!(s.c3, 4.0 * 210.0);
    }
}
