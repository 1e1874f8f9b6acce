//! Per-document inference with known parameters: Bayes posterior over
//! topics for the single topic model, Gibbs-sampled topic mixtures for LDA.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::model::{ModelKind, TopicModel};

pub const DEFAULT_ITERATIONS: usize = 1000;
pub const DEFAULT_BURN_IN: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorAssignment {
    pub id: String,
    pub posterior: Vec<f64>,
    pub argmax: usize,
    /// Set when no topic gives the document positive probability; the
    /// posterior is then uniform.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureEstimate {
    pub id: String,
    pub h: Vec<f64>,
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
}

fn check_dims(model: &TopicModel, doc: &Document) -> Result<()> {
    match doc.counts().last() {
        Some(&(w, _)) if w >= model.n() => Err(Error::DimensionMismatch(format!(
            "document {} uses word {w}, model has {} words",
            doc.id(),
            model.n()
        ))),
        _ => Ok(()),
    }
}

/// `P(Y = j | X) ∝ ω_j Π_h μ_{h,j}^{X_h}`, evaluated in the log domain (the
/// multinomial coefficient is common to all topics and cancels).
pub fn assign_stm(model: &TopicModel, doc: &Document) -> Result<PosteriorAssignment> {
    if model.kind() != ModelKind::Stm {
        return Err(Error::InvalidArgument("assign_stm needs a single topic model".into()));
    }
    check_dims(model, doc)?;
    let omega = model.topic_proportions();
    let k = model.k();
    let log_post: Vec<f64> = (0..k)
        .map(|j| {
            let mut lp = omega[j].ln();
            for &(h, x) in doc.counts() {
                lp += x as f64 * model.m()[(h, j)].ln();
            }
            lp
        })
        .collect();
    let max = log_post.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max.is_nan() {
        log::warn!("document {} has zero likelihood under every topic", doc.id());
        return Ok(PosteriorAssignment { id: doc.id().to_string(), posterior: vec![1.0 / k as f64; k], argmax: 0, degenerate: true });
    }
    let weights: Vec<f64> = log_post.iter().map(|&lp| (lp - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    let posterior: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let argmax = argmax_lowest(&posterior);
    Ok(PosteriorAssignment { id: doc.id().to_string(), posterior, argmax, degenerate: false })
}

fn argmax_lowest(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Draws an index with probability proportional to `weights`.
fn sample_index(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if u < w {
            return i;
        }
        u -= w;
    }
    // Rounding can leave u marginally above the last positive weight.
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

/// Partially collapsed Gibbs sampling of the document's topic mixture with
/// `(M, α)` held fixed. Each token's topic is resampled from
/// `μ_{x,j} (n_{−i,j} + α_j)`; the estimate averages
/// `(n_j + α_j)/(c + α₀)` over the iterations after burn-in.
pub fn infer_lda(model: &TopicModel, doc: &Document, iterations: usize, burn_in: usize, seed: u64) -> Result<MixtureEstimate> {
    let (alpha, alpha0) = model
        .alpha()
        .ok_or_else(|| Error::InvalidArgument("infer_lda needs an LDA model".into()))?;
    if iterations <= burn_in {
        return Err(Error::InvalidArgument(format!("iterations ({iterations}) must exceed burn_in ({burn_in})")));
    }
    check_dims(model, doc)?;
    let k = model.k();
    for &(w, _) in doc.counts() {
        if model.m().row(w).iter().all(|&p| p <= 0.0) {
            return Err(Error::OutsideSupport(w));
        }
    }

    let tokens: Vec<usize> = doc.counts().iter().flat_map(|&(w, c)| std::iter::repeat_n(w, c as usize)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut probs = vec![0.0; k];
    let mut counts = vec![0u64; k];
    let mut topic = Vec::with_capacity(tokens.len());
    for &w in &tokens {
        for j in 0..k {
            probs[j] = model.m()[(w, j)] * alpha[j];
        }
        let z = sample_index(&mut rng, &probs);
        counts[z] += 1;
        topic.push(z);
    }

    let mut totals = vec![0u64; k];
    for it in 0..iterations {
        for (t, &w) in tokens.iter().enumerate() {
            counts[topic[t]] -= 1;
            for j in 0..k {
                probs[j] = model.m()[(w, j)] * (counts[j] as f64 + alpha[j]);
            }
            let z = sample_index(&mut rng, &probs);
            counts[z] += 1;
            topic[t] = z;
        }
        if it >= burn_in {
            for j in 0..k {
                totals[j] += counts[j];
            }
        }
    }

    let kept = (iterations - burn_in) as f64;
    let c = tokens.len() as f64;
    let h = (0..k).map(|j| (totals[j] as f64 / kept + alpha[j]) / (c + alpha0)).collect();
    Ok(MixtureEstimate { id: doc.id().to_string(), h, iterations, burn_in, seed })
}
