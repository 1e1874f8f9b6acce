use spectral_topics::bench::{generate, SynthKind, SynthSpec};
use spectral_topics::corpus::{ingest_text, IngestOptions};
use spectral_topics::{estimate_moments, svtd, Corpus, TopicModel, Vocabulary};
use tempfile::TempDir;

#[test]
fn corpus_and_vocabulary_survive_a_round_trip() {
    let dir = TempDir::new().unwrap();
    let text = ["The quick brown fox.", "the lazy dog, the fox", "quick quick"];
    let corpus = ingest_text(text, &IngestOptions::new(5)).unwrap().corpus;
    let (c, v) = (dir.path().join("c.jsonl"), dir.path().join("v.tsv"));
    corpus.save(&c, &v).unwrap();
    assert_eq!(Corpus::load(&c, &v).unwrap(), corpus);
    assert_eq!(&Vocabulary::load(&v).unwrap(), corpus.vocabulary());
}

#[test]
fn models_survive_a_round_trip_bit_for_bit() {
    let dir = TempDir::new().unwrap();
    for kind in [SynthKind::Stm, SynthKind::Lda { alpha: vec![0.2, 0.7, 1.9] }] {
        let spec = SynthSpec { kind, ..SynthSpec::stm(25, 3, 300, 11) };
        let (corpus, truth) = generate(&spec).unwrap();
        let path = dir.path().join("truth.json");
        truth.save(&path).unwrap();
        assert_eq!(TopicModel::load(&path).unwrap(), truth);

        let (fitted, report) = svtd(&estimate_moments(&corpus), 3).unwrap();
        let path = dir.path().join("fitted.json");
        fitted.save(&path).unwrap();
        assert_eq!(TopicModel::load(&path).unwrap(), fitted);
        let rpath = dir.path().join("report.json");
        report.save(&rpath).unwrap();
        let saved: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&rpath).unwrap()).unwrap();
        assert_eq!(saved["r"].as_u64(), report.r.map(|r| r as u64));
    }
}
