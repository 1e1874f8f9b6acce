//! Bag-of-words corpora: text ingestion, vocabularies and the JSONL count
//! format.
//!
//! A corpus file holds one JSON object per line,
//! `{"id": "...", "counts": {"<word-index>": <positive int>, ...}}`, and the
//! matching vocabulary file holds `<index>\t<word>` lines with contiguous
//! indices starting at zero.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde_json::Value;

use crate::error::{Error, Result};

/// Ordered list of distinct words; a word's position is its index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
}

impl Vocabulary {
    pub fn new(words: Vec<String>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(words.len());
        for w in &words {
            if w.is_empty() {
                return Err(Error::InvalidArgument("empty vocabulary word".into()));
            }
            if !seen.insert(w.as_str()) {
                return Err(Error::InvalidArgument(format!("duplicate vocabulary word {w:?}")));
            }
        }
        Ok(Self { words })
    }

    /// Placeholder vocabulary `w0, w1, …` for corpora that only carry counts.
    pub fn anonymous(n: usize) -> Self {
        Self { words: (0..n).map(|i| format!("w{i}")).collect() }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn word(&self, index: usize) -> Option<&str> {
        self.words.get(index).map(String::as_str)
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.words.iter().position(|w| w == word)
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn read_tsv<R: BufRead>(reader: R) -> Result<Self> {
        let mut words = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = lineno + 1;
            if line.trim().is_empty() {
                continue;
            }
            let (idx, word) = line.split_once('\t').ok_or_else(|| Error::Parse {
                line: lineno,
                message: "expected <index>\\t<word>".into(),
            })?;
            let idx: usize = idx.trim().parse().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("bad index {idx:?}"),
            })?;
            if idx != words.len() {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("index {idx} out of sequence, expected {}", words.len()),
                });
            }
            words.push(word.to_string());
        }
        Self::new(words)
    }

    pub fn write_tsv<W: Write>(&self, mut w: W) -> Result<()> {
        for (i, word) in self.words.iter().enumerate() {
            writeln!(w, "{i}\t{word}")?;
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_tsv(BufReader::new(File::open(path)?))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_tsv(&mut w)?;
        w.flush()?;
        Ok(())
    }
}

/// One document's word counts, sorted by word index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    id: String,
    counts: Vec<(usize, u64)>,
    length: u64,
}

impl Document {
    /// Builds a document from `(word, count)` pairs. Pairs are sorted and
    /// repeated indices are merged.
    pub fn new(id: impl Into<String>, counts: impl IntoIterator<Item = (usize, u64)>) -> Result<Self> {
        let mut counts: Vec<(usize, u64)> = counts.into_iter().collect();
        if counts.iter().any(|&(_, c)| c == 0) {
            return Err(Error::InvalidArgument("nonpositive count".into()));
        }
        counts.sort_unstable_by_key(|&(w, _)| w);
        counts.dedup_by(|next, prev| {
            if next.0 == prev.0 {
                prev.1 += next.1;
                true
            } else {
                false
            }
        });
        let length = counts.iter().map(|&(_, c)| c).sum();
        if length == 0 {
            return Err(Error::InvalidArgument("empty document".into()));
        }
        Ok(Self { id: id.into(), counts, length })
    }

    /// Builds a document from a dense count vector, skipping zeros.
    pub fn from_dense(id: impl Into<String>, dense: &[u64]) -> Result<Self> {
        Self::new(id, dense.iter().enumerate().filter(|(_, &c)| c > 0).map(|(i, &c)| (i, c)))
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn counts(&self) -> &[(usize, u64)] {
        &self.counts
    }

    pub fn length(&self) -> u64 {
        self.length
    }

    pub fn count(&self, word: usize) -> u64 {
        self.counts
            .binary_search_by_key(&word, |&(w, _)| w)
            .map(|i| self.counts[i].1)
            .unwrap_or(0)
    }

    pub fn to_dense(&self, n: usize) -> Vec<u64> {
        let mut v = vec![0; n];
        for &(w, c) in &self.counts {
            v[w] = c;
        }
        v
    }

    fn max_index(&self) -> Option<usize> {
        self.counts.last().map(|&(w, _)| w)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    vocabulary: Vocabulary,
    documents: Vec<Document>,
}

impl Corpus {
    pub fn new(vocabulary: Vocabulary, documents: Vec<Document>) -> Result<Self> {
        if documents.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let n = vocabulary.len();
        if let Some(doc) = documents.iter().find(|d| d.max_index().is_some_and(|w| w >= n)) {
            return Err(Error::DimensionMismatch(format!(
                "document {} references word {} but vocabulary has {n} words",
                doc.id,
                doc.max_index().unwrap_or_default()
            )));
        }
        Ok(Self { vocabulary, documents })
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    /// Vocabulary size `n`.
    pub fn n_words(&self) -> usize {
        self.vocabulary.len()
    }

    /// Document count `N`.
    pub fn n_docs(&self) -> usize {
        self.documents.len()
    }

    pub fn lengths(&self) -> impl Iterator<Item = u64> + '_ {
        self.documents.iter().map(Document::length)
    }

    /// Corpus made of the first `n_docs` documents.
    pub fn prefix(&self, n_docs: usize) -> Result<Self> {
        Self::new(self.vocabulary.clone(), self.documents[..n_docs.min(self.documents.len())].to_vec())
    }

    pub fn read_counts<R: BufRead>(reader: R, vocabulary: Vocabulary) -> Result<Self> {
        let n = vocabulary.len();
        let mut documents = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = lineno + 1;
            if line.trim().is_empty() {
                continue;
            }
            documents.push(parse_count_line(&line, lineno, n)?);
        }
        Self::new(vocabulary, documents)
    }

    pub fn write_counts<W: Write>(&self, mut w: W) -> Result<()> {
        for doc in &self.documents {
            let mut line = String::with_capacity(16 + 12 * doc.counts.len());
            line.push_str("{\"id\":");
            line.push_str(&serde_json::to_string(&doc.id)?);
            line.push_str(",\"counts\":{");
            for (i, &(word, count)) in doc.counts.iter().enumerate() {
                if i > 0 {
                    line.push(',');
                }
                line.push_str(&format!("\"{word}\":{count}"));
            }
            line.push_str("}}");
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    /// Loads a corpus file together with its vocabulary file.
    pub fn load(counts: impl AsRef<Path>, vocabulary: impl AsRef<Path>) -> Result<Self> {
        let vocab = Vocabulary::load(vocabulary)?;
        Self::read_counts(BufReader::new(File::open(counts)?), vocab)
    }

    /// Loads a corpus file with a placeholder vocabulary of `n` words.
    pub fn load_anonymous(counts: impl AsRef<Path>, n: usize) -> Result<Self> {
        Self::read_counts(BufReader::new(File::open(counts)?), Vocabulary::anonymous(n))
    }

    pub fn save(&self, counts: impl AsRef<Path>, vocabulary: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(counts)?);
        self.write_counts(&mut w)?;
        w.flush()?;
        self.vocabulary.save(vocabulary)
    }
}

fn parse_count_line(line: &str, lineno: usize, n: usize) -> Result<Document> {
    let bad = |message: String| Error::Parse { line: lineno, message };
    let value: Value = serde_json::from_str(line).map_err(|e| bad(e.to_string()))?;
    let id = value
        .get("id")
        .and_then(Value::as_str)
        .ok_or_else(|| bad("missing string field \"id\"".into()))?;
    let counts = value
        .get("counts")
        .and_then(Value::as_object)
        .ok_or_else(|| bad("missing object field \"counts\"".into()))?;
    let mut pairs = Vec::with_capacity(counts.len());
    for (key, count) in counts {
        let word: usize = key.parse().map_err(|_| bad(format!("bad word index {key:?}")))?;
        if word >= n {
            return Err(bad(format!("word index {word} out of range for vocabulary of {n}")));
        }
        let count = count.as_i64().ok_or_else(|| bad(format!("count for {key:?} is not an integer")))?;
        if count <= 0 {
            return Err(Error::NonpositiveCount { line: lineno });
        }
        pairs.push((word, count as u64));
    }
    if pairs.is_empty() {
        return Err(bad("document has no words".into()));
    }
    Document::new(id, pairs)
}

/// Parameters of [`ingest_text`].
#[derive(Debug, Clone, Default)]
pub struct IngestOptions {
    pub vocab_size: usize,
    pub stopwords: HashSet<String>,
    /// Documents with fewer surviving tokens are dropped. Values below 1 act as 1.
    pub min_doc_len: u64,
}

impl IngestOptions {
    pub fn new(vocab_size: usize) -> Self {
        Self { vocab_size, stopwords: HashSet::new(), min_doc_len: 1 }
    }

    pub fn with_stopwords<I, S>(mut self, words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        self.stopwords = words.into_iter().map(|w| w.as_ref().to_lowercase()).collect();
        self
    }
}

#[derive(Debug, Clone)]
pub struct Ingested {
    pub corpus: Corpus,
    /// Input lines that ended up with too few in-vocabulary tokens.
    pub dropped: usize,
}

/// Lowercases and splits on Unicode whitespace and ASCII punctuation.
pub fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| c.is_whitespace() || c.is_ascii_punctuation())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}

/// Builds a corpus from raw text lines, one document per line. The
/// vocabulary keeps the `vocab_size` most frequent tokens (ties broken
/// lexicographically); document ids are the zero-based line numbers.
pub fn ingest_text<I, S>(lines: I, opts: &IngestOptions) -> Result<Ingested>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    if opts.vocab_size < 1 {
        return Err(Error::InvalidVocabSize);
    }
    let docs: Vec<Vec<String>> = lines
        .into_iter()
        .map(|l| tokenize(l.as_ref()).filter(|t| !opts.stopwords.contains(t)).collect())
        .collect();

    let mut freq: HashMap<&str, u64> = HashMap::new();
    for tok in docs.iter().flatten() {
        *freq.entry(tok.as_str()).or_default() += 1;
    }
    if freq.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut ranked: Vec<(&str, u64)> = freq.into_iter().collect();
    ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    ranked.truncate(opts.vocab_size);
    let index: HashMap<&str, usize> = ranked.iter().enumerate().map(|(i, &(w, _))| (w, i)).collect();

    let min_len = opts.min_doc_len.max(1);
    let mut documents = Vec::new();
    let mut dropped = 0;
    for (lineno, tokens) in docs.iter().enumerate() {
        let mut counts: HashMap<usize, u64> = HashMap::new();
        for t in tokens {
            if let Some(&w) = index.get(t.as_str()) {
                *counts.entry(w).or_default() += 1;
            }
        }
        let length: u64 = counts.values().sum();
        if length < min_len {
            dropped += 1;
            continue;
        }
        documents.push(Document::new(lineno.to_string(), counts)?);
    }
    if dropped > 0 {
        log::warn!("dropped {dropped} documents with fewer than {min_len} vocabulary tokens");
    }
    if documents.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let vocabulary = Vocabulary::new(ranked.iter().map(|&(w, _)| w.to_string()).collect())?;
    Ok(Ingested { corpus: Corpus::new(vocabulary, documents)?, dropped })
}

/// Reads a stopword list: whitespace-separated words, lowercased.
pub fn read_stopwords<R: BufRead>(reader: R) -> Result<BTreeSet<String>> {
    let mut out = BTreeSet::new();
    for line in reader.lines() {
        out.extend(line?.split_whitespace().map(str::to_lowercase));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ingest_ties_break_lexicographically() {
        let out = ingest_text(["a a b", "b c"], &IngestOptions::new(2)).unwrap();
        let c = &out.corpus;
        assert_eq!(c.vocabulary().words(), &["a".to_string(), "b".to_string()]);
        assert_eq!(c.documents()[0].counts(), &[(0, 2), (1, 1)]);
        assert_eq!(c.documents()[1].counts(), &[(1, 1)]);
        assert_eq!(c.documents()[0].length(), 3);
        assert_eq!(out.dropped, 0);
    }

    #[test]
    fn ingest_single_token() {
        let out = ingest_text(["x"], &IngestOptions::new(5)).unwrap();
        assert_eq!(out.corpus.n_words(), 1);
        assert_eq!(out.corpus.documents()[0].counts(), &[(0, 1)]);
        assert_eq!(out.corpus.documents()[0].length(), 1);
    }

    #[test]
    fn stopwords_drop_whole_document() {
        let opts = IngestOptions::new(10).with_stopwords(["the"]);
        let out = ingest_text(["the the", "cat sat"], &opts).unwrap();
        assert_eq!(out.dropped, 1);
        assert_eq!(out.corpus.n_docs(), 1);
        assert_eq!(out.corpus.documents()[0].id(), "1");
    }

    #[test]
    fn ingest_errors() {
        assert!(matches!(ingest_text(Vec::<&str>::new(), &IngestOptions::new(3)), Err(Error::EmptyCorpus)));
        assert!(matches!(ingest_text(["  ,. "], &IngestOptions::new(3)), Err(Error::EmptyCorpus)));
        assert!(matches!(ingest_text(["a"], &IngestOptions::new(0)), Err(Error::InvalidVocabSize)));
    }

    #[test]
    fn tokenizer_splits_punctuation_and_lowercases() {
        let toks: Vec<_> = tokenize("Hello, World!  it's\tÜber-cool").collect();
        assert_eq!(toks, ["hello", "world", "it", "s", "über", "cool"]);
    }

    #[test]
    fn parse_count_line_maps_fields() {
        let d = parse_count_line(r#"{"id":"d1","counts":{"0":2,"1":1}}"#, 1, 2).unwrap();
        assert_eq!(d.id(), "d1");
        assert_eq!(d.length(), 3);
    }

    #[test]
    fn read_counts_reports_line_numbers() {
        let text = "{\"id\":\"a\",\"counts\":{\"0\":1}}\n{\"id\":\"b\",\"counts\":{\"5\":1}}\n";
        let err = Corpus::read_counts(text.as_bytes(), Vocabulary::anonymous(3)).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");

        let text = "{\"id\":\"a\",\"counts\":{\"0\":0}}\n";
        let err = Corpus::read_counts(text.as_bytes(), Vocabulary::anonymous(3)).unwrap_err();
        assert!(matches!(err, Error::NonpositiveCount { line: 1 }));
        assert_eq!(err.to_string(), "line 1: nonpositive count");

        let err = Corpus::read_counts("not json\n".as_bytes(), Vocabulary::anonymous(3)).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn vocabulary_tsv_requires_contiguous_indices() {
        assert!(Vocabulary::read_tsv("0\ta\n2\tb\n".as_bytes()).is_err());
        assert!(Vocabulary::read_tsv("0\ta\n1\ta\n".as_bytes()).is_err());
        let v = Vocabulary::read_tsv("0\ta\n1\tb\n".as_bytes()).unwrap();
        assert_eq!(v.index_of("b"), Some(1));
    }

    #[test]
    fn documents_merge_repeated_indices() {
        let d = Document::new("x", [(3, 1), (1, 2), (3, 4)]).unwrap();
        assert_eq!(d.counts(), &[(1, 2), (3, 5)]);
        assert_eq!(d.length(), 7);
        assert_eq!(d.count(3), 5);
        assert_eq!(d.count(2), 0);
    }
}
