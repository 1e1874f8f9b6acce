//! Spectral learning of topic models from bag-of-words corpora.
//!
//! The pipeline is `corpus` → `moments` → `decomp` → `inference`, with
//! `bench` providing synthetic data and the experiment harness.
//! Data-parallel kernels use rayon when the `parallel` feature is on;
//! results are identical either way.

pub mod bench;
pub mod corpus;
pub mod decomp;
pub mod error;
pub mod inference;
pub mod linalg;
pub mod model;
pub mod moments;
pub mod par;

pub use corpus::{Corpus, Document, Vocabulary};
pub use decomp::{baseline_random_diag, svtd, DecompositionReport};
pub use error::{Error, ErrorClass, Result};
pub use inference::{assign_stm, infer_lda, MixtureEstimate, PosteriorAssignment};
pub use model::{ModelKind, TopicModel, TopicWeights};
pub use moments::{estimate_moments, estimate_moments_uniform, evaluate_bound, lda_adjust, Flavor, MomentSet};
pub use par::Execution;
