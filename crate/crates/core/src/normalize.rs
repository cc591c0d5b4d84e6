//! Rule-based tweet normalization.
//!
//! The pipeline runs in a fixed order: URLs, handles, hashtags, emoticons,
//! repeated-character squeezing, punctuation annotation, lowercasing of
//! everything except the rewritten keywords, and finally whitespace
//! collapsing. The result is idempotent: normalizing normalized text is a
//! no-op.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::OnceLock;

use regex::Regex;

use crate::parallel::{map_slice, Execution};
use thiserror::Error;

const BUILTIN_EMOTICONS: &str = include_str!("../data/emoticons.tsv");

/// Prefixes of keywords produced by the rewrite rules. Tokens carrying
/// them, and the bare `URL` keyword, keep their case.
pub const KEYWORD_PREFIXES: [&str; 4] = ["HASH_", "HNDL_", "EMOT_", "PUNC_"];
pub const URL_KEYWORD: &str = "URL";
pub const EXCLAMATION_KEYWORD: &str = "PUNC_EXCL";
pub const QUESTION_KEYWORD: &str = "PUNC_QUES";

#[derive(Debug, Error)]
pub enum EmoticonTableError {
    #[error("{0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EmoticonClass {
    Smiley,
    Laugh,
    Love,
    Wink,
    Frown,
    Cry,
}

impl EmoticonClass {
    pub const ALL: [EmoticonClass; 6] = [
        EmoticonClass::Smiley,
        EmoticonClass::Laugh,
        EmoticonClass::Love,
        EmoticonClass::Wink,
        EmoticonClass::Frown,
        EmoticonClass::Cry,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            EmoticonClass::Smiley => "EMOT_SMILEY",
            EmoticonClass::Laugh => "EMOT_LAUGH",
            EmoticonClass::Love => "EMOT_LOVE",
            EmoticonClass::Wink => "EMOT_WINK",
            EmoticonClass::Frown => "EMOT_FROWN",
            EmoticonClass::Cry => "EMOT_CRY",
        }
    }
}

impl FromStr for EmoticonClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let s = s.strip_prefix("EMOT_").unwrap_or(s);
        EmoticonClass::ALL
            .into_iter()
            .find(|c| c.keyword()[5..].eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown emoticon class `{s}`"))
    }
}

/// Emoticon → class mappings, kept sorted longest-first so that matching
/// prefers the longest emoticon at any position.
#[derive(Debug, Clone)]
pub struct EmoticonTable {
    entries: Vec<(String, EmoticonClass)>,
}

impl EmoticonTable {
    /// Parses `emoticon<TAB>CLASS` lines; blank lines and lines starting
    /// with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self, EmoticonTableError> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |reason: String| EmoticonTableError::Parse { line: i + 1, reason };
            let (emo, class) = line
                .split_once('\t')
                .ok_or_else(|| parse_err("expected `<emoticon><TAB><CLASS>`".into()))?;
            if emo.is_empty() || emo.chars().any(char::is_whitespace) {
                return Err(parse_err(format!("invalid emoticon `{emo}`")));
            }
            let class = class.parse().map_err(parse_err)?;
            entries.retain(|(e, _)| e != emo);
            entries.push((emo.to_string(), class));
        }
        entries.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)));
        Ok(Self { entries })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, EmoticonTableError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| EmoticonTableError::Io(path.display().to_string(), e))?;
        Self::parse(&text)
    }

    pub fn builtin() -> &'static EmoticonTable {
        static TABLE: OnceLock<EmoticonTable> = OnceLock::new();
        TABLE.get_or_init(|| EmoticonTable::parse(BUILTIN_EMOTICONS).expect("builtin emoticon table is valid"))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lookup(&self, emoticon: &str) -> Option<EmoticonClass> {
        self.entries.iter().find(|(e, _)| e == emoticon).map(|(_, c)| *c)
    }

    /// Longest emoticon starting at byte offset `at`, honoring word
    /// boundaries on any side where the emoticon begins or ends with a
    /// word character (so `xD` never fires inside `boxDrive`).
    fn match_at(&self, text: &str, at: usize) -> Option<(usize, EmoticonClass)> {
        let rest = &text[at..];
        let prev = text[..at].chars().next_back();
        self.entries.iter().find_map(|(emo, class)| {
            if !rest.starts_with(emo.as_str()) {
                return None;
            }
            let first = emo.chars().next()?;
            let last = emo.chars().next_back()?;
            if is_word_char(first) && prev.is_some_and(is_word_char) {
                return None;
            }
            if is_word_char(last) && rest[emo.len()..].chars().next().is_some_and(is_word_char) {
                return None;
            }
            Some((emo.len(), *class))
        })
    }

    /// True when `text` contains any emoticon from the table.
    pub fn contains_emoticon(&self, text: &str) -> bool {
        text.char_indices().any(|(i, _)| self.match_at(text, i).is_some())
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

fn url_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)(?:https?://\S*|\bwww\.\S+)").unwrap())
}

fn handle_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(^|[^\w])@(\w+)").unwrap())
}

fn hashtag_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(^|[^\w])#(\w+)").unwrap())
}

/// `#word` → `HASH_word`, only when `#` starts a word.
pub fn replace_hashtags(text: &str) -> String {
    hashtag_regex().replace_all(text, "${1}HASH_${2}").into_owned()
}

/// `@user` → `HNDL_user`, only when `@` starts a word (`x@y.com` is left alone).
pub fn replace_handles(text: &str) -> String {
    handle_regex().replace_all(text, "${1}HNDL_${2}").into_owned()
}

/// Every `http(s)://…` or `www.…` run of non-whitespace becomes `URL`.
pub fn replace_urls(text: &str) -> String {
    let re = url_regex();
    if !re.is_match(text) {
        return text.to_string();
    }
    // Padded so a keyword never fuses with neighbouring text; whitespace is
    // collapsed at the end of the pipeline.
    re.replace_all(text, " URL ").into_owned()
}

pub fn replace_emoticons(text: &str) -> String {
    replace_emoticons_with(text, EmoticonTable::builtin())
}

pub fn replace_emoticons_with(text: &str, table: &EmoticonTable) -> String {
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    let mut matched = false;
    while i < text.len() {
        if let Some((len, class)) = table.match_at(text, i) {
            out.push(' ');
            out.push_str(class.keyword());
            out.push(' ');
            i += len;
            matched = true;
        } else {
            let c = text[i..].chars().next().unwrap();
            out.push(c);
            i += c.len_utf8();
        }
    }
    if matched {
        out
    } else {
        text.to_string()
    }
}

/// Collapses runs of more than two equal characters to exactly two.
/// Characters are compared case-insensitively so that later lowercasing
/// cannot create a fresh run; the first two characters of a run are kept.
pub fn squeeze_repeats(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut prev: Option<char> = None;
    let mut run = 0usize;
    for c in text.chars() {
        let same = prev.is_some_and(|p| p == c || p.to_lowercase().eq(c.to_lowercase()));
        run = if same { run + 1 } else { 1 };
        if run <= 2 {
            out.push(c);
        }
        prev = Some(c);
    }
    out
}

/// Splits each whitespace-delimited chunk into word runs and punctuation
/// runs. Word runs are kept as-is; a punctuation run becomes one
/// `PUNC_QUES` / `PUNC_EXCL` token per distinct mark present, in order of
/// first appearance, and any other punctuation is dropped. Word characters
/// are alphanumerics and `_`; an apostrophe counts as a word character
/// only between two alphanumerics.
pub fn annotate_punctuation(text: &str) -> String {
    let mut pieces: Vec<String> = Vec::new();
    for chunk in text.split_whitespace() {
        let chars: Vec<char> = chunk.chars().collect();
        let in_word = |k: usize| {
            let c = chars[k];
            is_word_char(c)
                || (is_apostrophe(c)
                    && k > 0
                    && k + 1 < chars.len()
                    && chars[k - 1].is_alphanumeric()
                    && chars[k + 1].is_alphanumeric())
        };
        let mut k = 0;
        while k < chars.len() {
            let word = in_word(k);
            let start = k;
            while k < chars.len() && in_word(k) == word {
                k += 1;
            }
            let run = &chars[start..k];
            if word {
                pieces.push(run.iter().collect());
            } else {
                let mut marks: Vec<char> = Vec::new();
                for &c in run {
                    if (c == '!' || c == '?') && !marks.contains(&c) {
                        marks.push(c);
                    }
                }
                for m in marks {
                    pieces.push(if m == '!' { EXCLAMATION_KEYWORD } else { QUESTION_KEYWORD }.to_string());
                }
            }
        }
    }
    pieces.join(" ")
}

pub fn is_keyword(token: &str) -> bool {
    token == URL_KEYWORD || KEYWORD_PREFIXES.iter().any(|p| token.starts_with(p))
}

fn lowercase_except_keywords(text: &str) -> String {
    text.split_whitespace()
        .map(|t| if is_keyword(t) { t.to_string() } else { t.to_lowercase() })
        .collect::<Vec<_>>()
        .join(" ")
}

fn collapse_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Output of the rewrite pipeline.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct NormalizedText(String);

impl NormalizedText {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }

    /// Wraps text that is already known to be normalized (for example a
    /// line read back from a corpus file).
    pub fn from_normalized(text: impl Into<String>) -> Self {
        Self(text.into())
    }
}

impl fmt::Display for NormalizedText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenSequence(Vec<String>);

impl TokenSequence {
    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }
}

impl<S: Into<String>> FromIterator<S> for TokenSequence {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        Self(
            iter.into_iter()
                .map(Into::into)
                .filter(|t: &String| !t.is_empty() && !t.chars().any(char::is_whitespace))
                .collect(),
        )
    }
}

/// The full pipeline with a configurable emoticon table.
#[derive(Debug, Clone)]
pub struct Normalizer<'a> {
    emoticons: &'a EmoticonTable,
}

impl Default for Normalizer<'static> {
    fn default() -> Self {
        Self {
            emoticons: EmoticonTable::builtin(),
        }
    }
}

impl<'a> Normalizer<'a> {
    pub fn with_emoticons(emoticons: &'a EmoticonTable) -> Self {
        Self { emoticons }
    }

    pub fn normalize(&self, text: &str) -> NormalizedText {
        let s = replace_urls(text);
        let s = replace_handles(&s);
        let s = replace_hashtags(&s);
        let s = replace_emoticons_with(&s, self.emoticons);
        let s = squeeze_repeats(&s);
        let s = annotate_punctuation(&s);
        let s = lowercase_except_keywords(&s);
        NormalizedText(collapse_whitespace(&s))
    }
}

pub fn normalize(text: &str) -> NormalizedText {
    Normalizer::default().normalize(text)
}

/// Normalizes many texts, preserving order.
pub fn normalize_all<S: AsRef<str> + Sync>(texts: &[S], exec: Execution) -> Vec<NormalizedText> {
    map_slice(exec, texts, |t| normalize(t.as_ref()))
}

pub fn tokenize(text: &NormalizedText) -> TokenSequence {
    text.as_str().split(' ').collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hashtags() {
        assert_eq!(replace_hashtags("#Ashes2021 is on"), "HASH_Ashes2021 is on");
        assert_eq!(replace_hashtags("no tags here"), "no tags here");
        assert_eq!(replace_hashtags("#a #b"), "HASH_a HASH_b");
        assert_eq!(replace_hashtags("# alone and a#b"), "# alone and a#b");
    }

    #[test]
    fn handles() {
        assert_eq!(replace_handles("@Cristiano scores"), "HNDL_Cristiano scores");
        assert_eq!(replace_handles("email me at x@y.com"), "email me at x@y.com");
        assert_eq!(replace_handles(""), "");
        assert_eq!(replace_handles("(@a) @b"), "(HNDL_a) HNDL_b");
    }

    #[test]
    fn urls() {
        assert_eq!(collapse_whitespace(&replace_urls("see http://t.co/FCWXoUd8 now")), "see URL now");
        assert_eq!(replace_urls("no links"), "no links");
        assert_eq!(collapse_whitespace(&replace_urls("http://a http://b")), "URL URL");
        assert_eq!(collapse_whitespace(&replace_urls("go www.example.com")), "go URL");
        assert_eq!(replace_urls("awww.nice"), "awww.nice");
    }

    #[test]
    fn emoticons() {
        assert_eq!(collapse_whitespace(&replace_emoticons("great :)")), "great EMOT_SMILEY");
        assert_eq!(collapse_whitespace(&replace_emoticons("sad :-(")), "sad EMOT_FROWN");
        assert_eq!(replace_emoticons("plain text"), "plain text");
        assert_eq!(replace_emoticons("boxDrive"), "boxDrive");
        assert_eq!(collapse_whitespace(&replace_emoticons("lol xD")), "lol EMOT_LAUGH");
        assert_eq!(collapse_whitespace(&replace_emoticons(":'(")), "EMOT_CRY");
    }

    #[test]
    fn emoticon_table_has_six_classes() {
        let t = EmoticonTable::builtin();
        for class in EmoticonClass::ALL {
            assert!(t.entries.iter().any(|(_, c)| *c == class));
        }
        assert_eq!(t.lookup(":]"), Some(EmoticonClass::Smiley));
        assert_eq!(t.lookup(";("), Some(EmoticonClass::Cry));
    }

    #[test]
    fn emoticon_table_parse_errors() {
        assert!(EmoticonTable::parse("# c\n:)\tSMILEY\n").is_ok());
        assert!(matches!(
            EmoticonTable::parse(":)\tGRIN\n"),
            Err(EmoticonTableError::Parse { line: 1, .. })
        ));
        assert!(EmoticonTable::parse("nothing\n").is_err());
    }

    #[test]
    fn punctuation() {
        assert_eq!(annotate_punctuation("wow!!!"), "wow PUNC_EXCL");
        assert_eq!(annotate_punctuation("really?!"), "really PUNC_QUES PUNC_EXCL");
        assert_eq!(annotate_punctuation("plain"), "plain");
        assert_eq!(annotate_punctuation("don't, stop."), "don't stop");
        assert_eq!(annotate_punctuation("'quoted'"), "quoted");
        assert_eq!(annotate_punctuation("HASH_a_b"), "HASH_a_b");
    }

    #[test]
    fn squeeze() {
        assert_eq!(squeeze_repeats("soooo happy"), "soo happy");
        assert_eq!(squeeze_repeats("happy"), "happy");
        assert_eq!(squeeze_repeats("aaaa!!!! "), "aa!! ");
        assert_eq!(squeeze_repeats("AAa"), "AA");
    }

    #[test]
    fn full_pipeline() {
        let n = normalize("@Cristiano WINS!!! #GOAT :) http://t.co/x");
        assert_eq!(n.as_str(), "HNDL_Cristiano wins PUNC_EXCL HASH_GOAT EMOT_SMILEY URL");
        assert_eq!(tokenize(&n).len(), 6);
        assert_eq!(normalize("").as_str(), "");
    }

    #[test]
    fn tokenizer() {
        let t = tokenize(&NormalizedText::from_normalized("a b c"));
        assert_eq!(t.tokens(), ["a", "b", "c"]);
        assert!(tokenize(&NormalizedText::default()).is_empty());
    }
}
