use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::metrics::{err_moments, err_reconstruction, err_second_moment, median, variation};
use super::synth::{generate, SynthSpec};
use super::{BenchResult, BenchRow, StepFailure};
use crate::decomp::{baseline_with_eta, draw_eta, svtd};
use crate::error::{Error, Result};
use crate::model::TopicModel;
use crate::moments::{estimate_moments, estimate_moments_uniform, MomentSet};
use crate::par::{map_indexed, Execution};

pub const DEFAULT_TRIALS: usize = 10;
pub const MIN_TIMING_RUNS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Svtd,
    /// Randomized simultaneous diagonalization with one η per run.
    Baseline,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Svtd => "svtd",
            Algorithm::Baseline => "baseline",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "svtd" => Ok(Algorithm::Svtd),
            "baseline" => Ok(Algorithm::Baseline),
            other => Err(Error::InvalidArgument(format!("unknown algorithm {other:?}"))),
        }
    }
}

fn fit(alg: Algorithm, moments: &MomentSet, k: usize, eta: &nalgebra::DVector<f64>) -> Result<TopicModel> {
    match alg {
        Algorithm::Svtd => svtd(moments, k).map(|r| r.0),
        Algorithm::Baseline => baseline_with_eta(moments, k, eta).map(|r| r.0),
    }
}

/// Err₂ (and Err₃ when `third` is set) of the weighted and uniform
/// estimators over `trials` seeds per corpus size. Trial `t` uses seed
/// `base.seed + t`, which fixes both the model and the corpus.
pub fn moment_error_sweep(base: &SynthSpec, sizes: &[usize], trials: usize, third: bool) -> Result<BenchResult> {
    base.validate()?;
    let cells: Vec<(usize, u64)> = sizes
        .iter()
        .flat_map(|&n| (0..trials as u64).map(move |t| (n, base.seed.wrapping_add(t))))
        .collect();
    let out = map_indexed(Execution::default(), cells.len(), |c| -> Result<Vec<BenchRow>> {
        let (n_docs, seed) = cells[c];
        let (corpus, truth) = generate(&base.clone().with_docs(n_docs).with_seed(seed))?;
        let mut rows = Vec::new();
        for (name, estimate) in [("weighted", estimate_moments as fn(&_) -> _), ("uniform", estimate_moments_uniform)] {
            let start = Instant::now();
            let est = estimate(&corpus);
            let secs = start.elapsed().as_secs_f64();
            if third {
                let (e2, e3) = err_moments(&est, &truth)?;
                rows.push(BenchRow::new("err2", name, n_docs, seed, e2, secs));
                rows.push(BenchRow::new("err3", name, n_docs, seed, e3, secs));
            } else {
                rows.push(BenchRow::new("err2", name, n_docs, seed, err_second_moment(&est, &truth)?, secs));
            }
        }
        Ok(rows)
    });
    let mut result = BenchResult::new("moment_error", base.clone());
    for rows in out {
        result.rows.extend(rows?);
    }
    Ok(result)
}

/// Reconstruction error of SVTD on growing prefixes of one corpus per seed.
pub fn reconstruction_sweep(base: &SynthSpec, sizes: &[usize], seeds: &[u64]) -> Result<BenchResult> {
    base.validate()?;
    let largest = sizes.iter().copied().max().unwrap_or(0);
    if largest == 0 {
        return Err(Error::InvalidArgument("no corpus sizes given".into()));
    }
    let out = map_indexed(Execution::default(), seeds.len(), |s| -> Result<(Vec<BenchRow>, Vec<StepFailure>)> {
        let seed = seeds[s];
        let (corpus, truth) = generate(&base.clone().with_docs(largest).with_seed(seed))?;
        let mut rows = Vec::new();
        let mut failures = Vec::new();
        for &n_docs in sizes {
            let start = Instant::now();
            let fitted = svtd(&estimate_moments(&corpus.prefix(n_docs)?), base.k);
            let secs = start.elapsed().as_secs_f64();
            match fitted {
                Ok((model, _)) => rows.push(BenchRow::new("err", "svtd", n_docs, seed, err_reconstruction(&model, &truth)?, secs)),
                Err(e) => failures.push(StepFailure::new(Algorithm::Svtd, n_docs, seed, &e)),
            }
        }
        Ok((rows, failures))
    });
    let mut result = BenchResult::new("reconstruction", base.clone());
    for cell in out {
        let (rows, failures) = cell?;
        result.rows.extend(rows);
        result.failures.extend(failures);
    }
    Ok(result)
}

/// Grows the corpus one document at a time from `n_start` to `n_end` and
/// records `Var_N` for each algorithm. The baseline keeps one η (drawn from
/// `spec.seed`) for the whole run. Fit failures are recorded and the
/// next step compares against the last successful estimate.
pub fn stability_run(spec: &SynthSpec, n_start: usize, n_end: usize, algorithms: &[Algorithm]) -> Result<BenchResult> {
    if n_start == 0 || n_end < n_start {
        return Err(Error::InvalidArgument("need 1 <= n_start <= n_end".into()));
    }
    let (corpus, _) = generate(&spec.clone().with_docs(n_end))?;
    let eta = draw_eta(spec.n, spec.seed);
    let steps: Vec<usize> = (n_start..=n_end).collect();
    let fits = map_indexed(Execution::default(), steps.len(), |s| -> Result<(MomentSet, f64)> {
        let start = Instant::now();
        let m = estimate_moments(&corpus.prefix(steps[s])?);
        Ok((m, start.elapsed().as_secs_f64()))
    });
    let moments: Vec<(MomentSet, f64)> = fits.into_iter().collect::<Result<_>>()?;

    let mut result = BenchResult::new("var", spec.clone());
    for &alg in algorithms {
        let models = map_indexed(Execution::default(), steps.len(), |s| {
            let start = Instant::now();
            let m = fit(alg, &moments[s].0, spec.k, &eta);
            (m, moments[s].1 + start.elapsed().as_secs_f64())
        });
        let mut previous: Option<TopicModel> = None;
        for (s, (fitted, secs)) in models.into_iter().enumerate() {
            match fitted {
                Ok(model) => {
                    if let Some(prev) = &previous {
                        let v = variation(prev, &model)?;
                        result.rows.push(BenchRow::new("var", alg.name(), steps[s], spec.seed, v, secs));
                    }
                    previous = Some(model);
                }
                Err(e) => result.failures.push(StepFailure::new(alg, steps[s], spec.seed, &e)),
            }
        }
    }
    Ok(result)
}

/// Median wall time of `runs` (at least five) SVTD fits, moments included.
pub fn timing_run(spec: &SynthSpec, runs: usize) -> Result<BenchResult> {
    let (corpus, _) = generate(spec)?;
    let mut times = Vec::new();
    for _ in 0..runs.max(MIN_TIMING_RUNS) {
        let start = Instant::now();
        svtd(&estimate_moments(&corpus), spec.k)?;
        times.push(start.elapsed().as_secs_f64());
    }
    let secs = median(&times);
    let mut result = BenchResult::new("fit_time", spec.clone());
    result.rows.push(BenchRow::new("fit_time", "svtd", spec.n_docs, spec.seed, secs, secs));
    Ok(result)
}
