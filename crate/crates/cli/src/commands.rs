use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use spectral_topics::bench::{
    generate, moment_error_sweep, reconstruction_sweep, stability_run, timing_run, Algorithm, BenchResult, SynthKind,
    SynthSpec,
};
use spectral_topics::corpus::{ingest_text, read_stopwords, IngestOptions};
use spectral_topics::decomp::baseline_random_diag;
use spectral_topics::par::{map_indexed, Execution};
use spectral_topics::{
    assign_stm, estimate_moments, estimate_moments_uniform, evaluate_bound, infer_lda, lda_adjust, svtd, Corpus,
    DecompositionReport, ModelKind, MomentSet, TopicModel,
};

use crate::args::{
    BenchArgs, Cli, Command, CorpusInput, FitArgs, InferArgs, IngestArgs, Method, MomentsArgs, SynthArgs,
};
use crate::manifest::Recorder;
use crate::{CliError, CliResult};

pub fn run(cli: &Cli) -> CliResult<()> {
    let mut rec = Recorder::new();
    let (name, primary) = match &cli.command {
        Command::Ingest(a) => (ingest(a, &mut rec)?, &a.out),
        Command::Moments(a) => (moments(a, &mut rec)?, &a.out),
        Command::FitStm(a) => (fit(a, None, cli.seed, &mut rec)?, &a.out),
        Command::FitLda(a) => (fit(&a.fit, Some(a.alpha0), cli.seed, &mut rec)?, &a.fit.out),
        Command::Infer(a) => (infer(a, cli.seed, &mut rec)?, &a.out),
        Command::Synth(a) => (synth(a, cli.seed, &mut rec)?, &a.out),
        Command::Bench(a) => (bench(a, cli.seed, &mut rec)?, &a.out),
    };
    rec.finish(cli, name, primary)
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Largest word index in a corpus file plus one. Malformed lines are left
/// for the real parser to report.
fn infer_vocab_size(path: &Path) -> CliResult<usize> {
    #[derive(serde::Deserialize)]
    struct Line {
        counts: std::collections::BTreeMap<String, serde_json::Value>,
    }
    let mut n = 0;
    for line in BufReader::new(File::open(path)?).lines() {
        let line = line?;
        if let Ok(parsed) = serde_json::from_str::<Line>(&line) {
            for key in parsed.counts.keys() {
                if let Ok(i) = key.parse::<usize>() {
                    n = n.max(i + 1);
                }
            }
        }
    }
    Ok(n.max(1))
}

/// Fails with an I/O error naming `path` if it is not a readable file.
fn require_file(path: &Path) -> CliResult<()> {
    if path.is_file() {
        Ok(())
    } else {
        let msg = format!("{}: no such file", path.display());
        Err(std::io::Error::new(std::io::ErrorKind::NotFound, msg).into())
    }
}

fn load_corpus(input: &CorpusInput, n_hint: Option<usize>) -> CliResult<Corpus> {
    require_file(&input.corpus)?;
    if let Some(v) = &input.vocab {
        require_file(v)?;
    }
    Ok(match (&input.vocab, n_hint) {
        (Some(v), _) => Corpus::load(&input.corpus, v)?,
        (None, Some(n)) => Corpus::load_anonymous(&input.corpus, n)?,
        (None, None) => Corpus::load_anonymous(&input.corpus, infer_vocab_size(&input.corpus)?)?,
    })
}

fn write_json(path: &Path, value: &impl Serialize) -> CliResult<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn ingest(a: &IngestArgs, rec: &mut Recorder) -> CliResult<&'static str> {
    let mut opts = IngestOptions::new(a.vocab_size);
    opts.min_doc_len = a.min_doc_len;
    if let Some(path) = &a.stopwords {
        require_file(path)?;
        opts = opts.with_stopwords(read_stopwords(BufReader::new(File::open(path)?))?);
    }
    require_file(&a.input)?;
    let lines: Vec<String> = BufReader::new(File::open(&a.input)?).lines().collect::<Result<_, _>>()?;
    let out = rec.time("ingest", || ingest_text(&lines, &opts))?;
    out.corpus.save(&a.out, &a.vocab_out)?;
    rec.artifact(&a.out);
    rec.artifact(&a.vocab_out);
    rec.note("documents", out.corpus.n_docs())?;
    rec.note("vocabulary_size", out.corpus.n_words())?;
    rec.note("dropped", out.dropped)?;
    Ok("ingest")
}

fn moments(a: &MomentsArgs, rec: &mut Recorder) -> CliResult<&'static str> {
    let corpus = load_corpus(&a.input, None)?;
    let raw = rec.time("moments", || if a.uniform { estimate_moments_uniform(&corpus) } else { estimate_moments(&corpus) });
    let mut bound = None;
    if let Some(delta) = a.delta {
        // Plug-in norms from the length-weighted estimator.
        let weighted = if a.uniform { estimate_moments(&corpus) } else { raw.clone() };
        let (m2_norm, m3_norm) = (weighted.m2().norm(), third_moment_norm(&weighted)?);
        bound = Some(evaluate_bound(&corpus, m2_norm.min(1.0), m3_norm.min(1.0), delta)?);
    }
    let m = match a.alpha0 {
        Some(alpha0) => lda_adjust(&raw, alpha0)?,
        None => raw,
    };
    let mut value = serde_json::to_value(m.export())?;
    if let Some(b) = bound {
        value["bound"] = serde_json::to_value(b)?;
    }
    write_json(&a.out, &value)?;
    rec.artifact(&a.out);
    if let (Some(i), Some(path)) = (a.slice, &a.slice_out) {
        let slice = m.slice(i)?;
        let rows: Vec<Vec<f64>> = slice.row_iter().map(|r| r.iter().copied().collect()).collect();
        write_json(path, &rows)?;
        rec.artifact(path);
    }
    Ok("moments")
}

fn third_moment_norm(m: &MomentSet) -> CliResult<f64> {
    let mut sq = 0.0;
    for i in 0..m.n() {
        sq += m.slice(i)?.norm_squared();
    }
    Ok(sq.sqrt())
}

fn decompose(m: &MomentSet, k: usize, method: Method, seed: u64) -> CliResult<(TopicModel, DecompositionReport)> {
    Ok(match method {
        Method::Svtd => svtd(m, k)?,
        Method::Baseline => baseline_random_diag(m, k, seed)?,
    })
}

fn fit(a: &FitArgs, alpha0: Option<f64>, seed: u64, rec: &mut Recorder) -> CliResult<&'static str> {
    let corpus = load_corpus(&a.input, None)?;
    if a.k == 0 || a.k > corpus.n_words() {
        return Err(usage(format!("k must lie in 1..={}, got {}", corpus.n_words(), a.k)));
    }
    let raw = rec.time("moments", || estimate_moments(&corpus));
    let m = match alpha0 {
        Some(a0) => lda_adjust(&raw, a0)?,
        None => raw,
    };
    let (model, report) = rec.time("decomposition", || decompose(&m, a.k, a.method, seed))?;
    model.save(&a.out)?;
    rec.artifact(&a.out);
    if let Some(path) = &a.report {
        report.save(path)?;
        rec.artifact(path);
    }
    rec.note("selected_feature", report.r)?;
    Ok(if alpha0.is_some() { "fit-lda" } else { "fit-stm" })
}

#[derive(Serialize)]
struct Posterior<'a> {
    id: &'a str,
    posterior: &'a [f64],
    argmax: usize,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    degenerate: bool,
}

#[derive(Serialize)]
struct Mixture<'a> {
    id: &'a str,
    h: &'a [f64],
}

fn infer(a: &InferArgs, seed: u64, rec: &mut Recorder) -> CliResult<&'static str> {
    require_file(&a.model)?;
    let model = TopicModel::load(&a.model)?;
    let corpus = load_corpus(&a.input, Some(model.n()))?;
    if corpus.n_words() != model.n() {
        return Err(usage(format!("vocabulary has {} words, model has {}", corpus.n_words(), model.n())));
    }
    let docs = corpus.documents();
    let lines = rec.time("inference", || {
        map_indexed(Execution::default(), docs.len(), |d| -> CliResult<String> {
            let doc = &docs[d];
            Ok(match model.kind() {
                ModelKind::Stm => {
                    let p = assign_stm(&model, doc)?;
                    serde_json::to_string(&Posterior { id: &p.id, posterior: &p.posterior, argmax: p.argmax, degenerate: p.degenerate })?
                }
                ModelKind::Lda => {
                    let e = infer_lda(&model, doc, a.iterations, a.burn_in, seed.wrapping_add(d as u64))?;
                    serde_json::to_string(&Mixture { id: &e.id, h: &e.h })?
                }
            })
        })
    });
    let mut w = BufWriter::new(File::create(&a.out)?);
    for line in lines {
        writeln!(w, "{}", line?)?;
    }
    w.flush()?;
    rec.artifact(&a.out);
    Ok("infer")
}

fn synth(a: &SynthArgs, seed: u64, rec: &mut Recorder) -> CliResult<&'static str> {
    let kind = match a.alpha {
        Some(alpha) => SynthKind::Lda { alpha: vec![alpha; a.shape.k] },
        None => SynthKind::Stm,
    };
    let spec = SynthSpec {
        n: a.shape.n,
        k: a.shape.k,
        n_docs: a.docs,
        len_min: a.shape.len_min,
        len_max: a.shape.len_max,
        kind,
        seed,
    };
    let (corpus, model) = rec.time("generate", || generate(&spec))?;
    let mut w = BufWriter::new(File::create(&a.out)?);
    corpus.write_counts(&mut w)?;
    w.flush()?;
    rec.artifact(&a.out);
    if let Some(path) = &a.vocab_out {
        corpus.vocabulary().save(path)?;
        rec.artifact(path);
    }
    model.save(&a.model_out)?;
    rec.artifact(&a.model_out);
    rec.note("spec", &spec)?;
    Ok("synth")
}

fn bench(a: &BenchArgs, seed: u64, rec: &mut Recorder) -> CliResult<&'static str> {
    let base = SynthSpec::stm(a.shape.n, a.shape.k, 1, seed).with_lengths(a.shape.len_min, a.shape.len_max);
    let e = &a.experiment;
    let result: BenchResult = rec.time("bench", || {
        if e.stability {
            stability_run(&base.clone().with_docs(a.n_end), a.n_start, a.n_end, &[Algorithm::Svtd, Algorithm::Baseline])
        } else if e.moment_error {
            moment_error_sweep(&base, &a.sizes, a.trials, !a.second_only)
        } else if e.reconstruction {
            let seeds: Vec<u64> = (0..a.trials as u64).map(|t| seed.wrapping_add(t)).collect();
            reconstruction_sweep(&base, &a.sizes, &seeds)
        } else {
            timing_run(&base.clone().with_docs(a.docs), a.runs)
        }
    })?;
    result.save_csv(&a.out)?;
    rec.artifact(&a.out);
    rec.note("experiment", &result.experiment)?;
    rec.note("spec", &result.spec)?;
    rec.note("failures", &result.failures)?;
    Ok("bench")
}
