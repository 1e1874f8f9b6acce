//! Topic model parameters and the JSON model file.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SIMPLEX_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// Single topic model: one hidden topic per document.
    Stm,
    Lda,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TopicWeights {
    /// Topic probabilities Ω.
    Stm { omega: DVector<f64> },
    /// Dirichlet parameters α with α₀ = Σα.
    Lda { alpha: DVector<f64>, alpha0: f64 },
}

/// Word-by-topic matrix `M` (columns are word distributions) and the topic
/// weights.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicModel {
    m: DMatrix<f64>,
    weights: TopicWeights,
}

impl TopicModel {
    pub fn stm(m: DMatrix<f64>, omega: DVector<f64>) -> Result<Self> {
        check_columns(&m)?;
        if omega.len() != m.ncols() {
            return Err(Error::DimensionMismatch(format!("omega has {} entries for k = {}", omega.len(), m.ncols())));
        }
        if omega.iter().any(|&w| !(w >= 0.0)) || (omega.sum() - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::InvalidArgument("omega must lie on the simplex".into()));
        }
        Ok(Self { m, weights: TopicWeights::Stm { omega } })
    }

    pub fn lda(m: DMatrix<f64>, alpha: DVector<f64>) -> Result<Self> {
        check_columns(&m)?;
        if alpha.len() != m.ncols() {
            return Err(Error::DimensionMismatch(format!("alpha has {} entries for k = {}", alpha.len(), m.ncols())));
        }
        if alpha.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
            return Err(Error::InvalidArgument("alpha entries must be positive".into()));
        }
        let alpha0 = alpha.sum();
        Ok(Self { m, weights: TopicWeights::Lda { alpha, alpha0 } })
    }

    pub fn kind(&self) -> ModelKind {
        match self.weights {
            TopicWeights::Stm { .. } => ModelKind::Stm,
            TopicWeights::Lda { .. } => ModelKind::Lda,
        }
    }

    pub fn n(&self) -> usize {
        self.m.nrows()
    }

    pub fn k(&self) -> usize {
        self.m.ncols()
    }

    pub fn m(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn weights(&self) -> &TopicWeights {
        &self.weights
    }

    /// Ω for the single topic model, α/α₀ for LDA.
    pub fn topic_proportions(&self) -> DVector<f64> {
        match &self.weights {
            TopicWeights::Stm { omega } => omega.clone(),
            TopicWeights::Lda { alpha, alpha0 } => alpha / *alpha0,
        }
    }

    pub fn alpha(&self) -> Option<(&DVector<f64>, f64)> {
        match &self.weights {
            TopicWeights::Lda { alpha, alpha0 } => Some((alpha, *alpha0)),
            TopicWeights::Stm { .. } => None,
        }
    }

    /// `M diag(w) Mᵀ` with `w` the topic proportions.
    pub fn second_moment(&self) -> DMatrix<f64> {
        let w = self.topic_proportions();
        let mut scaled = self.m.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= w[j];
        }
        scaled * self.m.transpose()
    }

    /// Model with columns reordered so that new column `j` is old column `perm[j]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let k = self.k();
        let mut seen = vec![false; k];
        if perm.len() != k || perm.iter().any(|&p| p >= k || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidArgument("not a permutation".into()));
        }
        let m = DMatrix::from_fn(self.n(), k, |r, c| self.m[(r, perm[c])]);
        let pick = |v: &DVector<f64>| DVector::from_fn(k, |j, _| v[perm[j]]);
        let weights = match &self.weights {
            TopicWeights::Stm { omega } => TopicWeights::Stm { omega: pick(omega) },
            TopicWeights::Lda { alpha, alpha0 } => TopicWeights::Lda { alpha: pick(alpha), alpha0: *alpha0 },
        };
        Ok(Self { m, weights })
    }

    /// Indices of the `top` most probable words of topic `j`.
    pub fn top_words(&self, j: usize, top: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.n()).collect();
        idx.sort_by(|&a, &b| self.m[(b, j)].total_cmp(&self.m[(a, j)]).then(a.cmp(&b)));
        idx.truncate(top);
        idx
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ModelFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<ModelFile>(text)?.try_into()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut w, &ModelFile::from(self))?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let file: ModelFile = serde_json::from_reader(BufReader::new(File::open(path)?))?;
        file.try_into()
    }
}

fn check_columns(m: &DMatrix<f64>) -> Result<()> {
    if m.ncols() == 0 || m.nrows() == 0 {
        return Err(Error::InvalidArgument("empty topic matrix".into()));
    }
    for (j, col) in m.column_iter().enumerate() {
        if col.iter().any(|&x| !(x >= 0.0)) || (col.sum() - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::InvalidArgument(format!("column {j} of M is not a distribution")));
        }
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    kind: ModelKind,
    n: usize,
    k: usize,
    #[serde(rename = "M")]
    m: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    omega: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha0: Option<f64>,
}

impl From<&TopicModel> for ModelFile {
    fn from(model: &TopicModel) -> Self {
        let rows = model.m.row_iter().map(|r| r.iter().copied().collect()).collect();
        let (omega, alpha, alpha0) = match &model.weights {
            TopicWeights::Stm { omega } => (Some(omega.as_slice().to_vec()), None, None),
            TopicWeights::Lda { alpha, alpha0 } => (None, Some(alpha.as_slice().to_vec()), Some(*alpha0)),
        };
        ModelFile { kind: model.kind(), n: model.n(), k: model.k(), m: rows, omega, alpha, alpha0 }
    }
}

impl TryFrom<ModelFile> for TopicModel {
    type Error = Error;

    fn try_from(f: ModelFile) -> Result<Self> {
        if f.m.len() != f.n || f.m.iter().any(|r| r.len() != f.k) {
            return Err(Error::DimensionMismatch(format!("M is not {}x{}", f.n, f.k)));
        }
        let m = DMatrix::from_fn(f.n, f.k, |r, c| f.m[r][c]);
        match f.kind {
            ModelKind::Stm => {
                let omega = f.omega.ok_or_else(|| Error::InvalidArgument("stm model without omega".into()))?;
                TopicModel::stm(m, DVector::from_vec(omega))
            }
            ModelKind::Lda => {
                let alpha = f.alpha.ok_or_else(|| Error::InvalidArgument("lda model without alpha".into()))?;
                let model = TopicModel::lda(m, DVector::from_vec(alpha))?;
                if let Some(a0) = f.alpha0 {
                    if (a0 - model.alpha().map_or(0.0, |a| a.1)).abs() > 1e-9 * a0.abs().max(1.0) {
                        return Err(Error::InvalidArgument("alpha0 does not equal the sum of alpha".into()));
                    }
                }
                Ok(model)
            }
        }
    }
}
