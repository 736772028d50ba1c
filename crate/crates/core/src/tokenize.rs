//! Text normalization and the three character-token schemes.
//!
//! All schemes operate on case-folded text. Only ASCII letters feed the two
//! text schemes; the hashtag scheme reads the bodies of `#tag` runs and also
//! admits digits and underscore.
//!
//! Token ids are dense:
//!
//! * text unigram: `a`..`z` → `0..26`
//! * text bigram: `xy` → `26 * x + y`
//! * hashtag unigram: `a`..`z` → `0..26`, `0`..`9` → `26..36`, `_` → `36`

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Tweet;

const LETTERS: usize = 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TokenScheme {
    TextUnigram,
    TextBigram,
    HashtagUnigram,
}

impl TokenScheme {
    pub const ALL: [TokenScheme; 3] = [
        TokenScheme::TextUnigram,
        TokenScheme::TextBigram,
        TokenScheme::HashtagUnigram,
    ];

    /// Number of distinct tokens in the scheme's alphabet.
    pub const fn vocab_size(self) -> usize {
        match self {
            TokenScheme::TextUnigram => LETTERS,
            TokenScheme::TextBigram => LETTERS * LETTERS,
            TokenScheme::HashtagUnigram => LETTERS + 10 + 1,
        }
    }

    /// Short name used on the command line and in reports.
    pub const fn name(self) -> &'static str {
        match self {
            TokenScheme::TextUnigram => "uni",
            TokenScheme::TextBigram => "bi",
            TokenScheme::HashtagUnigram => "hashtag",
        }
    }

    /// Human readable form of a token id, e.g. `"q"` or `"th"`.
    pub fn label(self, token: usize) -> Option<String> {
        if token >= self.vocab_size() {
            return None;
        }
        let letter = |i: usize| (b'a' + i as u8) as char;
        Some(match self {
            TokenScheme::TextUnigram => letter(token).to_string(),
            TokenScheme::TextBigram => {
                [letter(token / LETTERS), letter(token % LETTERS)].iter().collect()
            }
            TokenScheme::HashtagUnigram => match token {
                t if t < LETTERS => letter(t).to_string(),
                36 => "_".to_string(),
                t => ((b'0' + (t - LETTERS) as u8) as char).to_string(),
            },
        })
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            TokenScheme::TextUnigram => 0,
            TokenScheme::TextBigram => 1,
            TokenScheme::HashtagUnigram => 2,
        }
    }

    pub(crate) fn from_code(code: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.code() == code)
    }
}

impl fmt::Display for TokenScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TokenScheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uni" | "unigram" => Ok(TokenScheme::TextUnigram),
            "bi" | "bigram" => Ok(TokenScheme::TextBigram),
            "hashtag" => Ok(TokenScheme::HashtagUnigram),
            other => Err(format!("unknown token scheme {other:?}")),
        }
    }
}

/// Dense per-token occurrence counts under one scheme.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenCounts {
    scheme: TokenScheme,
    counts: Vec<u64>,
    total: u64,
}

impl TokenCounts {
    pub fn zeros(scheme: TokenScheme) -> Self {
        TokenCounts {
            scheme,
            counts: vec![0; scheme.vocab_size()],
            total: 0,
        }
    }

    /// Builds counts from a raw vector. Returns `None` if the length does not
    /// match the scheme's vocabulary.
    pub fn from_vec(scheme: TokenScheme, counts: Vec<u64>) -> Option<Self> {
        if counts.len() != scheme.vocab_size() {
            return None;
        }
        let total = counts.iter().sum();
        Some(TokenCounts {
            scheme,
            counts,
            total,
        })
    }

    pub fn scheme(&self) -> TokenScheme {
        self.scheme
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn get(&self, token: usize) -> u64 {
        self.counts[token]
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn add_token(&mut self, token: usize) {
        self.counts[token] += 1;
        self.total += 1;
    }

    pub fn add_text(&mut self, text: &str) {
        for_each_token(text, self.scheme, |t| {
            self.counts[t] += 1;
            self.total += 1;
        });
    }

    /// Elementwise sum.
    ///
    /// # Panics
    ///
    /// If the schemes differ.
    pub fn merge(&mut self, other: &TokenCounts) {
        assert_eq!(self.scheme, other.scheme, "merging counts of different schemes");
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.total += other.total;
    }

    /// `(token, count)` for every token with a non-zero count, ascending by token.
    pub fn nonzero(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(t, &c)| (t, c))
    }
}

/// Case-folds `text` and keeps only ASCII `a-z`, `0-9`, `_` and `#`. Every
/// other code point (whitespace included) becomes a separator; runs of
/// separators collapse into one space and leading/trailing separators are
/// dropped.
pub fn normalize(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending_space = false;
    for c in text.chars() {
        for lc in c.to_lowercase() {
            if is_kept(lc) {
                if pending_space && !out.is_empty() {
                    out.push(' ');
                }
                pending_space = false;
                out.push(lc);
            } else {
                pending_space = true;
            }
        }
    }
    out
}

fn is_kept(c: char) -> bool {
    c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' || c == '#'
}

fn is_tag_char(b: u8) -> bool {
    b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_'
}

/// Bodies of all `#[a-z0-9_]+` runs in the normalized text, in order.
pub fn extract_hashtags(text: &str) -> Vec<String> {
    let normalized = normalize(text);
    let mut tags = Vec::new();
    for_each_hashtag(&normalized, |body| tags.push(body.to_string()));
    tags
}

/// `true` if the tweet contains at least one hashtag.
pub fn has_hashtag(text: &str) -> bool {
    let normalized = normalize(text);
    let mut found = false;
    for_each_hashtag(&normalized, |_| found = true);
    found
}

fn for_each_hashtag<'a>(normalized: &'a str, mut f: impl FnMut(&'a str)) {
    let bytes = normalized.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'#' {
            let start = i + 1;
            let mut end = start;
            while end < bytes.len() && is_tag_char(bytes[end]) {
                end += 1;
            }
            if end > start {
                f(&normalized[start..end]);
            }
            i = end.max(start);
        } else {
            i += 1;
        }
    }
}

/// Visits the case-folded letters of `text`. `None` marks a run break (any
/// non-letter after folding).
fn for_each_letter(text: &str, mut f: impl FnMut(Option<u8>)) {
    for c in text.chars() {
        if c.is_ascii() {
            let b = (c as u8).to_ascii_lowercase();
            f(b.is_ascii_lowercase().then(|| b - b'a'));
        } else {
            for lc in c.to_lowercase() {
                f(lc.is_ascii_lowercase().then(|| lc as u8 - b'a'));
            }
        }
    }
}

fn hashtag_token(b: u8) -> usize {
    match b {
        b'a'..=b'z' => (b - b'a') as usize,
        b'0'..=b'9' => LETTERS + (b - b'0') as usize,
        _ => 36,
    }
}

fn for_each_token(text: &str, scheme: TokenScheme, mut emit: impl FnMut(usize)) {
    match scheme {
        TokenScheme::TextUnigram => for_each_letter(text, |l| {
            if let Some(l) = l {
                emit(l as usize);
            }
        }),
        TokenScheme::TextBigram => {
            let mut prev: Option<u8> = None;
            for_each_letter(text, |l| {
                if let (Some(p), Some(c)) = (prev, l) {
                    emit(p as usize * LETTERS + c as usize);
                }
                prev = l;
            });
        }
        TokenScheme::HashtagUnigram => {
            let normalized = normalize(text);
            for_each_hashtag(&normalized, |body| {
                body.bytes().for_each(|b| emit(hashtag_token(b)));
            });
        }
    }
}

/// Token ids of `text` under `scheme`, in order of appearance.
pub fn tokenize(text: &str, scheme: TokenScheme) -> Vec<usize> {
    let mut tokens = Vec::new();
    for_each_token(text, scheme, |t| tokens.push(t));
    tokens
}

/// Total token occurrences over all tweets.
pub fn count<'a, I>(tweets: I, scheme: TokenScheme) -> TokenCounts
where
    I: IntoIterator<Item = &'a Tweet>,
{
    let mut counts = TokenCounts::zeros(scheme);
    for tweet in tweets {
        counts.add_text(&tweet.text);
    }
    counts
}
