//! Lexicon-and-rule sentiment baseline.
//!
//! A simplified valence scorer in the style of VADER. Each whitespace token
//! takes its valence from a user-supplied lexicon, then three adjustments
//! apply in order: a booster word directly before it adds `±B`, a negator
//! within the preceding window multiplies by `N`, and shouting (the token is
//! all caps while the text is not) adds `±C`. The sum gets `±E` per
//! exclamation mark (at most four) and is squashed to
//! `compound = S / sqrt(S² + α)`.
//!
//! Known deviations from the original tool: no idiom table, no "but"
//! clause re-weighting, no emoji map, and only incrementing boosters.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::corpus::{LabeledTweet, SentimentLabel};

const BUILTIN_BOOSTERS: &str = include_str!("../data/boosters.txt");
const BUILTIN_NEGATORS: &str = include_str!("../data/negators.txt");
pub const MAX_VALENCE: f64 = 4.0;

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("{0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error("line {line}: cannot parse valence `{field}`")]
    BadValence { line: usize, field: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RejectedEntry {
    pub line: usize,
    pub token: String,
    pub valence: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Lexicon {
    valences: HashMap<String, f64>,
    rejected: Vec<RejectedEntry>,
}

impl Lexicon {
    /// Parses `token<TAB>valence` lines. Additional tab-separated columns
    /// are ignored, so the original tool's four-column file loads as-is.
    /// Entries outside `[-4, 4]` are rejected and reported; later
    /// duplicates win.
    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut lex = Lexicon::default();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split('\t');
            let token = fields.next().unwrap_or_default().trim();
            let field = fields.next().unwrap_or_default().trim();
            // Some files use a Unicode minus.
            let valence: f64 = field
                .replace('\u{2212}', "-")
                .parse()
                .map_err(|_| LexiconError::BadValence {
                    line: i + 1,
                    field: field.to_string(),
                })?;
            if !valence.is_finite() || valence.abs() > MAX_VALENCE {
                lex.rejected.push(RejectedEntry {
                    line: i + 1,
                    token: token.to_string(),
                    valence,
                });
                continue;
            }
            lex.valences.insert(token.to_lowercase(), valence);
        }
        Ok(lex)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, LexiconError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| LexiconError::Io(path.display().to_string(), e))?;
        Self::parse(&text)
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, f64)>) -> Self {
        Self {
            valences: pairs.into_iter().map(|(t, v)| (t.to_lowercase(), v)).collect(),
            rejected: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.valences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.valences.is_empty()
    }

    pub fn rejected(&self) -> &[RejectedEntry] {
        &self.rejected
    }

    pub fn valence(&self, token: &str) -> Option<f64> {
        self.valences.get(token).copied()
    }

    /// Exact lowercase match first, then with surrounding punctuation removed.
    fn lookup(&self, token: &str) -> f64 {
        let lower = token.to_lowercase();
        if let Some(v) = self.valences.get(&lower) {
            return *v;
        }
        let bare = bare_word(&lower);
        if bare != lower {
            if let Some(v) = self.valences.get(bare) {
                return *v;
            }
        }
        0.0
    }
}

pub fn load_lexicon(path: impl AsRef<Path>) -> Result<Lexicon, LexiconError> {
    Lexicon::load(path)
}

fn bare_word(token: &str) -> &str {
    token.trim_matches(|c: char| !c.is_alphanumeric())
}

fn word_list(text: &str) -> HashSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuleConfig {
    pub booster_increment: f64,
    pub negation_scalar: f64,
    pub caps_increment: f64,
    pub exclamation_increment: f64,
    pub max_exclamations: usize,
    pub alpha: f64,
    pub threshold: f64,
    pub negation_window: usize,
    pub boosters: HashSet<String>,
    pub negators: HashSet<String>,
}

impl Default for RuleConfig {
    fn default() -> Self {
        Self {
            booster_increment: 0.293,
            negation_scalar: -0.74,
            caps_increment: 0.733,
            exclamation_increment: 0.292,
            max_exclamations: 4,
            alpha: 15.0,
            threshold: 0.05,
            negation_window: 3,
            boosters: word_list(BUILTIN_BOOSTERS),
            negators: word_list(BUILTIN_NEGATORS),
        }
    }
}

impl RuleConfig {
    /// Replaces the booster list with the words in a one-per-line file.
    pub fn with_boosters_file(mut self, path: impl AsRef<Path>) -> std::io::Result<Self> {
        self.boosters = word_list(&std::fs::read_to_string(path)?);
        Ok(self)
    }

    pub fn with_negators_file(mut self, path: impl AsRef<Path>) -> std::io::Result<Self> {
        self.negators = word_list(&std::fs::read_to_string(path)?);
        Ok(self)
    }

    fn is_negator(&self, token: &str) -> bool {
        let lower = token.to_lowercase();
        let bare = bare_word(&lower);
        self.negators.contains(bare) || bare.ends_with("n't") || bare.ends_with("n\u{2019}t")
    }

    fn is_booster(&self, token: &str) -> bool {
        self.boosters.contains(bare_word(&token.to_lowercase()))
    }

    pub fn label(&self, compound: f64) -> SentimentLabel {
        if compound >= self.threshold {
            SentimentLabel::Positive
        } else if compound <= -self.threshold {
            SentimentLabel::Negative
        } else {
            SentimentLabel::Neutral
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VaderScore {
    pub compound: f64,
    pub label: SentimentLabel,
}

/// `S / sqrt(S² + α)`.
pub fn compound(sum: f64, alpha: f64) -> f64 {
    sum / (sum * sum + alpha).sqrt()
}

fn is_all_caps(token: &str) -> bool {
    token.chars().any(char::is_alphabetic) && !token.chars().any(char::is_lowercase)
}

fn signum(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Adjusted valence sum before normalization.
pub fn valence_sum(text: &str, lexicon: &Lexicon, rules: &RuleConfig) -> f64 {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    let lettered: Vec<&&str> = tokens.iter().filter(|t| t.chars().any(char::is_alphabetic)).collect();
    let shouting = lettered.iter().any(|t| is_all_caps(t)) && lettered.iter().any(|t| !is_all_caps(t));

    let mut sum = 0.0;
    for (i, token) in tokens.iter().enumerate() {
        let mut v = lexicon.lookup(token);
        if v == 0.0 {
            continue;
        }
        if i > 0 && rules.is_booster(tokens[i - 1]) {
            v += signum(v) * rules.booster_increment;
        }
        let window_start = i.saturating_sub(rules.negation_window);
        if tokens[window_start..i].iter().any(|t| rules.is_negator(t)) {
            v *= rules.negation_scalar;
        }
        if shouting && is_all_caps(token) {
            v += signum(v) * rules.caps_increment;
        }
        sum += v;
    }

    let marks = text.chars().filter(|c| *c == '!').count().min(rules.max_exclamations);
    sum + signum(sum) * rules.exclamation_increment * marks as f64
}

pub fn score(text: &str, lexicon: &Lexicon, rules: &RuleConfig) -> VaderScore {
    let c = compound(valence_sum(text, lexicon, rules), rules.alpha);
    VaderScore {
        compound: c,
        label: rules.label(c),
    }
}

/// Scores each tweet's text (expected to be raw, un-normalized) and pairs
/// the prediction with the gold label, in input order.
pub fn classify_corpus(
    tweets: &[LabeledTweet],
    lexicon: &Lexicon,
    rules: &RuleConfig,
) -> Vec<(SentimentLabel, SentimentLabel)> {
    tweets
        .iter()
        .map(|t| (t.label, score(&t.text, lexicon, rules).label))
        .collect()
}
