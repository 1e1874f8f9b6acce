use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma};
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Document, Vocabulary};
use crate::error::{Error, Result};
use crate::model::{TopicModel, TopicWeights};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum SynthKind {
    Stm,
    /// LDA with the given Dirichlet parameters (length k).
    Lda { alpha: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n: usize,
    pub k: usize,
    pub n_docs: usize,
    pub len_min: u64,
    pub len_max: u64,
    pub kind: SynthKind,
    pub seed: u64,
}

impl SynthSpec {
    /// Single topic data with document lengths between 3 and 100.
    pub fn stm(n: usize, k: usize, n_docs: usize, seed: u64) -> Self {
        Self { n, k, n_docs, len_min: 3, len_max: 100, kind: SynthKind::Stm, seed }
    }

    pub fn with_lengths(mut self, len_min: u64, len_max: u64) -> Self {
        self.len_min = len_min;
        self.len_max = len_max;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_docs(mut self, n_docs: usize) -> Self {
        self.n_docs = n_docs;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if self.k == 0 || self.n < self.k {
            return bad("need n >= k >= 1");
        }
        if self.n_docs == 0 {
            return bad("need at least one document");
        }
        if self.len_min < 3 || self.len_max < self.len_min {
            return bad("need 3 <= len_min <= len_max");
        }
        if let SynthKind::Lda { alpha } = &self.kind {
            if alpha.len() != self.k || alpha.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
                return bad("alpha must have k positive entries");
            }
        }
        Ok(())
    }
}

/// Hidden variables behind one synthetic document.
#[derive(Debug, Clone, PartialEq)]
pub enum Latent {
    Topic(usize),
    Mixture(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct Synthetic {
    pub corpus: Corpus,
    pub model: TopicModel,
    pub latent: Vec<Latent>,
}

fn flat_dirichlet(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= total);
    v
}

fn dirichlet(rng: &mut ChaCha8Rng, alpha: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = alpha
        .iter()
        .map(|&a| Gamma::new(a, 1.0).expect("alpha validated positive").sample(rng))
        .collect();
    let total: f64 = v.iter().sum();
    if total > 0.0 {
        v.iter_mut().for_each(|x| *x /= total);
    } else {
        // Every gamma draw underflowed (tiny alpha): put the mass on the largest parameter.
        let j = (0..alpha.len()).max_by(|&a, &b| alpha[a].total_cmp(&alpha[b]).then(b.cmp(&a))).unwrap_or(0);
        v[j] = 1.0;
    }
    v
}

fn categorical(rng: &mut ChaCha8Rng, p: &[f64]) -> usize {
    let mut u: f64 = rng.random();
    for (i, &w) in p.iter().enumerate() {
        if u < w {
            return i;
        }
        u -= w;
    }
    p.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

/// Draws `(M, Ω)` or `(M, α)` with each column of `M` (and `Ω`) uniform on
/// the simplex, then samples the corpus.
pub fn generate(spec: &SynthSpec) -> Result<(Corpus, TopicModel)> {
    let s = generate_full(spec)?;
    Ok((s.corpus, s.model))
}

pub fn generate_full(spec: &SynthSpec) -> Result<Synthetic> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut cols = Vec::with_capacity(spec.n * spec.k);
    for _ in 0..spec.k {
        cols.extend(flat_dirichlet(&mut rng, spec.n));
    }
    let m = DMatrix::from_column_slice(spec.n, spec.k, &cols);
    let model = match &spec.kind {
        SynthKind::Stm => TopicModel::stm(m, DVector::from_vec(flat_dirichlet(&mut rng, spec.k)))?,
        SynthKind::Lda { alpha } => TopicModel::lda(m, DVector::from_column_slice(alpha))?,
    };
    sample_documents(&model, spec.n_docs, spec.len_min, spec.len_max, &mut rng)
}

/// Samples a corpus from a fixed model with a fresh generator.
pub fn sample_from_model(model: &TopicModel, n_docs: usize, len_min: u64, len_max: u64, seed: u64) -> Result<Synthetic> {
    if n_docs == 0 || len_min == 0 || len_max < len_min {
        return Err(Error::InvalidArgument("need n_docs >= 1 and 1 <= len_min <= len_max".into()));
    }
    sample_documents(model, n_docs, len_min, len_max, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn sample_documents(model: &TopicModel, n_docs: usize, len_min: u64, len_max: u64, rng: &mut ChaCha8Rng) -> Result<Synthetic> {
    let (n, k) = (model.n(), model.k());
    let columns: Vec<Vec<f64>> = (0..k).map(|j| model.m().column(j).iter().copied().collect()).collect();
    let mut docs = Vec::with_capacity(n_docs);
    let mut latent = Vec::with_capacity(n_docs);
    let mut dense = vec![0u64; n];
    for d in 0..n_docs {
        dense.iter_mut().for_each(|x| *x = 0);
        let len = rng.random_range(len_min..=len_max);
        match model.weights() {
            TopicWeights::Stm { omega } => {
                let topic = categorical(rng, omega.as_slice());
                for _ in 0..len {
                    dense[categorical(rng, &columns[topic])] += 1;
                }
                latent.push(Latent::Topic(topic));
            }
            TopicWeights::Lda { alpha, .. } => {
                let h = dirichlet(rng, alpha.as_slice());
                for _ in 0..len {
                    let topic = categorical(rng, &h);
                    dense[categorical(rng, &columns[topic])] += 1;
                }
                latent.push(Latent::Mixture(h));
            }
        }
        docs.push(Document::from_dense(d.to_string(), &dense)?);
    }
    let corpus = Corpus::new(Vocabulary::anonymous(n), docs)?;
    Ok(Synthetic { corpus, model: model.clone(), latent })
}
