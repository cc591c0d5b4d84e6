//! Dataset ingestion, label harmonization, merging and splitting.
//!
//! Each of the seven source datasets is a UTF-8 CSV file with a header row.
//! The columns that matter per source are listed in [`Source::text_column`]
//! and [`Source::label_column`]; any other columns are ignored. Raw labels
//! are mapped onto the three retained classes by [`normalize_label`];
//! everything else is dropped and counted.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;
use thiserror::Error;

use crate::rng::XorShift64Star;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unknown source identifier `{0}`")]
    UnknownSource(String),
    #[error("{path}: missing column `{column}` in header")]
    MissingColumn { path: PathBuf, column: String },
    #[error("{path}: malformed row {row}: {reason}")]
    MalformedRow {
        path: PathBuf,
        row: u64,
        reason: String,
    },
    #[error("cannot split an empty corpus")]
    EmptyCorpus,
    #[error("test fraction {0} is outside (0, 1)")]
    FractionOutOfRange(f64),
    #[error("per-source split needs source tags on every tweet")]
    MissingSourceTags,
}

/// The three retained sentiment classes. The discriminant doubles as the
/// one-hot and confusion-matrix index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SentimentLabel {
    Positive = 0,
    Negative = 1,
    Neutral = 2,
}

impl SentimentLabel {
    pub const ALL: [SentimentLabel; 3] = [
        SentimentLabel::Positive,
        SentimentLabel::Negative,
        SentimentLabel::Neutral,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SentimentLabel::Positive => "positive",
            SentimentLabel::Negative => "negative",
            SentimentLabel::Neutral => "neutral",
        }
    }
}

impl fmt::Display for SentimentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SentimentLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "positive" => Ok(SentimentLabel::Positive),
            "negative" => Ok(SentimentLabel::Negative),
            "neutral" => Ok(SentimentLabel::Neutral),
            other => Err(format!("unknown label `{other}`")),
        }
    }
}

/// The seven public datasets, in canonical (merge) order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Source {
    StsTest,
    Hcr,
    Omd,
    SsTwitter,
    Sanders,
    SemEval,
    StsGold,
}

impl Source {
    pub const ALL: [Source; 7] = [
        Source::StsTest,
        Source::Hcr,
        Source::Omd,
        Source::SsTwitter,
        Source::Sanders,
        Source::SemEval,
        Source::StsGold,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Source::StsTest => "sts-test",
            Source::Hcr => "hcr",
            Source::Omd => "omd",
            Source::SsTwitter => "ss-twitter",
            Source::Sanders => "sanders",
            Source::SemEval => "semeval",
            Source::StsGold => "sts-gold",
        }
    }

    pub fn text_column(self) -> &'static str {
        match self {
            Source::StsTest | Source::SsTwitter | Source::SemEval => "text",
            Source::Hcr | Source::Omd => "content",
            Source::Sanders => "tweettext",
            Source::StsGold => "tweet",
        }
    }

    pub fn label_column(self) -> &'static str {
        match self {
            Source::StsTest | Source::StsGold => "polarity",
            _ => "sentiment",
        }
    }

    /// Published label counts: (positive, negative, neutral, everything else).
    pub fn reference_counts(self) -> LabelCounts {
        let (positive, negative, neutral, dropped) = match self {
            Source::StsTest => (182, 177, 139, 0),
            // The published total for HCR is 2515, one less than the sum of
            // its per-label columns; the columns are used here.
            Source::Hcr => (541, 1381, 470, 45 + 79),
            Source::Omd => (1606, 845, 289, 519),
            Source::SsTwitter => (507, 297, 3438, 0),
            Source::Sanders => (519, 572, 2333, 1689),
            Source::SemEval => (3460, 1441, 2062, 2432),
            Source::StsGold => (632, 1402, 0, 0),
        };
        LabelCounts {
            positive,
            negative,
            neutral,
            dropped,
        }
    }

    fn ordinal(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Source {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        Source::ALL
            .into_iter()
            .find(|src| src.id() == key)
            .ok_or_else(|| CorpusError::UnknownSource(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawRecord {
    pub source: Source,
    pub text: String,
    pub raw_label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabeledTweet {
    pub source: Option<Source>,
    pub text: String,
    pub label: SentimentLabel,
}

pub fn load_dataset(path: impl AsRef<Path>, source: Source) -> Result<Vec<RawRecord>, CorpusError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| CorpusError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    read_dataset(file, source, path)
}

/// Parses an already-open dataset; `origin` is only used in error messages.
pub fn read_dataset<R: Read>(reader: R, source: Source, origin: &Path) -> Result<Vec<RawRecord>, CorpusError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);
    let malformed = |row: u64, reason: String| CorpusError::MalformedRow {
        path: origin.to_path_buf(),
        row,
        reason,
    };
    let headers = rdr.headers().map_err(|e| malformed(1, e.to_string()))?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim().eq_ignore_ascii_case(name))
            .ok_or_else(|| CorpusError::MissingColumn {
                path: origin.to_path_buf(),
                column: name.to_string(),
            })
    };
    let text_idx = find(source.text_column())?;
    let label_idx = find(source.label_column())?;

    let mut out = Vec::new();
    for result in rdr.records() {
        let record = result.map_err(|e| {
            let row = e.position().map(|p| p.line()).unwrap_or(0);
            let reason = match e.kind() {
                csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
                    format!("expected {expected_len} fields, found {len}")
                }
                _ => e.to_string(),
            };
            malformed(row, reason)
        })?;
        let row = record.position().map(|p| p.line()).unwrap_or(0);
        let text = record.get(text_idx).unwrap_or("");
        let label = record.get(label_idx).unwrap_or("");
        if text.trim().is_empty() {
            return Err(malformed(row, "empty tweet text".into()));
        }
        if label.trim().is_empty() {
            return Err(malformed(row, "missing label".into()));
        }
        out.push(RawRecord {
            source,
            text: text.to_string(),
            raw_label: label.to_string(),
        });
    }
    Ok(out)
}

/// Maps a source-specific label onto a retained class; `None` means the
/// record is dropped (irrelevant, other, mixed, objective or unknown).
pub fn normalize_label(raw_label: &str, source: Source) -> Option<SentimentLabel> {
    let label = raw_label.trim().to_ascii_lowercase();
    match source {
        Source::StsTest | Source::StsGold => match label.as_str() {
            "4" | "positive" => Some(SentimentLabel::Positive),
            "0" | "negative" => Some(SentimentLabel::Negative),
            "2" | "neutral" => Some(SentimentLabel::Neutral),
            _ => None,
        },
        Source::SemEval => match label.as_str() {
            "positive" => Some(SentimentLabel::Positive),
            "negative" => Some(SentimentLabel::Negative),
            "neutral" | "objective-or-neutral" => Some(SentimentLabel::Neutral),
            _ => None,
        },
        _ => match label.as_str() {
            "positive" | "pos" => Some(SentimentLabel::Positive),
            "negative" | "neg" => Some(SentimentLabel::Negative),
            "neutral" | "neu" => Some(SentimentLabel::Neutral),
            _ => None,
        },
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct LabelCounts {
    pub positive: u64,
    pub negative: u64,
    pub neutral: u64,
    pub dropped: u64,
}

impl LabelCounts {
    pub fn retained(&self) -> u64 {
        self.positive + self.negative + self.neutral
    }

    pub fn input(&self) -> u64 {
        self.retained() + self.dropped
    }

    fn bump(&mut self, label: Option<SentimentLabel>) {
        match label {
            Some(SentimentLabel::Positive) => self.positive += 1,
            Some(SentimentLabel::Negative) => self.negative += 1,
            Some(SentimentLabel::Neutral) => self.neutral += 1,
            None => self.dropped += 1,
        }
    }

    fn add(&mut self, other: &LabelCounts) {
        self.positive += other.positive;
        self.negative += other.negative;
        self.neutral += other.neutral;
        self.dropped += other.dropped;
    }
}

/// Per-source and total counts of an ingested corpus. Serializes as a JSON
/// object keyed by source id in canonical order, followed by `total`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CorpusManifest {
    per_source: [LabelCounts; 7],
}

impl CorpusManifest {
    pub fn source(&self, source: Source) -> &LabelCounts {
        &self.per_source[source.ordinal()]
    }

    pub fn total(&self) -> LabelCounts {
        let mut total = LabelCounts::default();
        for c in &self.per_source {
            total.add(c);
        }
        total
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    /// Compares every source that contributed input against the published
    /// per-label counts.
    pub fn reconcile(&self) -> Vec<CountMismatch> {
        Source::ALL
            .into_iter()
            .filter(|s| self.source(*s).input() > 0)
            .filter_map(|s| {
                let expected = s.reference_counts();
                let actual = *self.source(s);
                (expected != actual).then_some(CountMismatch {
                    source: s,
                    expected,
                    actual,
                })
            })
            .collect()
    }
}

impl Serialize for CorpusManifest {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(8))?;
        for s in Source::ALL {
            map.serialize_entry(s.id(), self.source(s))?;
        }
        map.serialize_entry("total", &self.total())?;
        map.end()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountMismatch {
    pub source: Source,
    pub expected: LabelCounts,
    pub actual: LabelCounts,
}

impl fmt::Display for CountMismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (e, a) = (&self.expected, &self.actual);
        write!(
            f,
            "{}: expected pos/neg/neu/dropped {}/{}/{}/{}, found {}/{}/{}/{}",
            self.source, e.positive, e.negative, e.neutral, e.dropped, a.positive, a.negative, a.neutral, a.dropped
        )
    }
}

/// Merges records in canonical source order (stable within a source),
/// dropping out-of-scope labels and counting everything.
pub fn build_corpus(records: &[RawRecord]) -> (Vec<LabeledTweet>, CorpusManifest) {
    let mut ordered: Vec<&RawRecord> = records.iter().collect();
    ordered.sort_by_key(|r| r.source.ordinal());

    let mut manifest = CorpusManifest::default();
    let mut tweets = Vec::with_capacity(records.len());
    for r in ordered {
        let label = normalize_label(&r.raw_label, r.source);
        manifest.per_source[r.source.ordinal()].bump(label);
        if let Some(label) = label {
            tweets.push(LabeledTweet {
                source: Some(r.source),
                text: r.text.clone(),
                label,
            });
        }
    }
    (tweets, manifest)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSplit {
    pub train: Vec<LabeledTweet>,
    pub test: Vec<LabeledTweet>,
    pub seed: u64,
    pub test_fraction: f64,
}

fn check_split_args(n: usize, test_fraction: f64) -> Result<(), CorpusError> {
    if n == 0 {
        return Err(CorpusError::EmptyCorpus);
    }
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(CorpusError::FractionOutOfRange(test_fraction));
    }
    Ok(())
}

fn test_size(n: usize, test_fraction: f64) -> usize {
    (test_fraction * n as f64).round() as usize
}

/// Shuffles the whole corpus with the documented PRNG and takes the last
/// `round(test_fraction * N)` tweets as the test set.
pub fn shuffle_split(corpus: &[LabeledTweet], test_fraction: f64, seed: u64) -> Result<DatasetSplit, CorpusError> {
    check_split_args(corpus.len(), test_fraction)?;
    let mut items = corpus.to_vec();
    XorShift64Star::new(seed).shuffle(&mut items);
    let n_test = test_size(items.len(), test_fraction);
    let test = items.split_off(items.len() - n_test);
    Ok(DatasetSplit {
        train: items,
        test,
        seed,
        test_fraction,
    })
}

/// Splits every source separately (each with its own PRNG stream) and
/// concatenates the pieces in canonical source order.
pub fn shuffle_split_per_source(
    corpus: &[LabeledTweet],
    test_fraction: f64,
    seed: u64,
) -> Result<DatasetSplit, CorpusError> {
    check_split_args(corpus.len(), test_fraction)?;
    let mut groups: HashMap<Source, Vec<LabeledTweet>> = HashMap::new();
    for t in corpus {
        let src = t.source.ok_or(CorpusError::MissingSourceTags)?;
        groups.entry(src).or_default().push(t.clone());
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for src in Source::ALL {
        let Some(mut items) = groups.remove(&src) else {
            continue;
        };
        XorShift64Star::with_stream(seed, src.ordinal() as u64).shuffle(&mut items);
        let n_test = test_size(items.len(), test_fraction);
        test.extend(items.split_off(items.len() - n_test));
        train.extend(items);
    }
    Ok(DatasetSplit {
        train,
        test,
        seed,
        test_fraction,
    })
}

/// Writes one tweet per line: `label<TAB>text`, or `label<TAB>source<TAB>text`
/// when `with_source` is set.
pub fn write_corpus<W: Write>(mut out: W, tweets: &[LabeledTweet], with_source: bool) -> std::io::Result<()> {
    for t in tweets {
        match (with_source, t.source) {
            (true, Some(src)) => writeln!(out, "{}\t{}\t{}", t.label, src, t.text)?,
            _ => writeln!(out, "{}\t{}", t.label, t.text)?,
        }
    }
    out.flush()
}

pub fn read_corpus(path: impl AsRef<Path>) -> Result<Vec<LabeledTweet>, CorpusError> {
    let path = path.as_ref();
    let io_err = |e| CorpusError::Io {
        path: path.to_path_buf(),
        source: e,
    };
    let file = File::open(path).map_err(io_err)?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err)?;
        if line.is_empty() {
            continue;
        }
        out.push(parse_corpus_line(&line).map_err(|reason| CorpusError::MalformedRow {
            path: path.to_path_buf(),
            row: i as u64 + 1,
            reason,
        })?);
    }
    Ok(out)
}

fn parse_corpus_line(line: &str) -> Result<LabeledTweet, String> {
    let fields: Vec<&str> = line.split('\t').collect();
    let (label, source, text) = match fields.as_slice() {
        [label, text] => (*label, None, *text),
        [label, source, text] => (*label, Some(source.parse::<Source>().map_err(|e| e.to_string())?), *text),
        _ => return Err("label column missing (expected `label<TAB>text`)".into()),
    };
    Ok(LabeledTweet {
        source,
        text: text.to_string(),
        label: label.parse()?,
    })
}
