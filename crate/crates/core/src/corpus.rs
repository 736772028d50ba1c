//! Tweet corpora: loading, statistics and author-population filters.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::tokenize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tweet {
    pub author: Arc<str>,
    pub text: String,
    /// Informational only; never used by the models.
    pub timestamp: Option<String>,
}

impl Tweet {
    pub fn new(author: impl Into<Arc<str>>, text: impl Into<String>) -> Self {
        Tweet {
            author: author.into(),
            text: text.into(),
            timestamp: None,
        }
    }

    pub fn with_timestamp(mut self, ts: impl Into<String>) -> Self {
        self.timestamp = Some(ts.into());
        self
    }

    /// Retweet by the `"RT @"` convention.
    pub fn is_retweet(&self) -> bool {
        self.text.starts_with("RT @")
    }
}

/// One line of a JSONL tweet file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub user: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ts: Option<String>,
}

/// Tweets grouped by author. Authors iterate in ascending id order; each
/// author's tweets keep their input order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AuthorCorpus {
    authors: BTreeMap<Arc<str>, Vec<Tweet>>,
}

impl AuthorCorpus {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, tweet: Tweet) {
        match self.authors.get_mut(&tweet.author) {
            Some(list) => list.push(tweet),
            None => {
                self.authors.insert(tweet.author.clone(), vec![tweet]);
            }
        }
    }

    /// Appends every author's tweets from `other`; shared ids are concatenated.
    pub fn extend(&mut self, other: AuthorCorpus) {
        for (id, tweets) in other.authors {
            self.authors.entry(id).or_default().extend(tweets);
        }
    }

    pub fn num_authors(&self) -> usize {
        self.authors.len()
    }

    pub fn num_tweets(&self) -> usize {
        self.authors.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.authors.is_empty()
    }

    pub fn tweets(&self, author: &str) -> Option<&[Tweet]> {
        self.authors.get(author).map(Vec::as_slice)
    }

    pub fn author_ids(&self) -> impl Iterator<Item = &str> {
        self.authors.keys().map(|k| &**k)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[Tweet])> {
        self.authors.iter().map(|(k, v)| (&**k, v.as_slice()))
    }

    pub fn into_authors(self) -> impl Iterator<Item = (Arc<str>, Vec<Tweet>)> {
        self.authors.into_iter()
    }

    /// Keeps authors with `min <= count` and, when given, `count <= max`.
    pub fn filter_by_prolificacy(self, min: usize, max: Option<usize>) -> Result<Self> {
        if min == 0 {
            return Err(Error::Config("minimum tweet count must be at least 1".into()));
        }
        if let Some(max) = max {
            if max < min {
                return Err(Error::Config(format!(
                    "maximum tweet count {max} is below minimum {min}"
                )));
            }
        }
        Ok(self.retain(|n| n >= min && max.is_none_or(|m| n <= m)))
    }

    /// Uniform sample of `n` authors without replacement. Ids are shuffled
    /// in ascending order with the seeded Fisher–Yates of [`rng::sample`].
    pub fn sample_authors(mut self, n: usize, seed: u64) -> Result<Self> {
        if n > self.num_authors() {
            return Err(Error::SampleTooLarge {
                requested: n,
                available: self.num_authors(),
            });
        }
        let ids: Vec<Arc<str>> = self.authors.keys().cloned().collect();
        let chosen = rng::sample(&ids, n, seed);
        let mut sampled = BTreeMap::new();
        for id in chosen {
            let tweets = self.authors.remove(&id).expect("sampled id exists");
            sampled.insert(id, tweets);
        }
        Ok(AuthorCorpus { authors: sampled })
    }

    /// Drops tweets without a hashtag, then drops authors left with fewer
    /// than `min_tweets`.
    pub fn filter_hashtag_bearing(mut self, min_tweets: usize) -> Self {
        for tweets in self.authors.values_mut() {
            tweets.retain(|t| tokenize::has_hashtag(&t.text));
        }
        self.retain(|n| n >= min_tweets.max(1))
    }

    /// Removes tweets starting with `"RT @"` and any author left empty.
    pub fn strip_retweets(mut self) -> Self {
        for tweets in self.authors.values_mut() {
            tweets.retain(|t| !t.is_retweet());
        }
        self.retain(|n| n > 0)
    }

    fn retain(mut self, keep: impl Fn(usize) -> bool) -> Self {
        self.authors.retain(|_, tweets| keep(tweets.len()));
        self
    }
}

impl FromIterator<Tweet> for AuthorCorpus {
    fn from_iter<I: IntoIterator<Item = Tweet>>(iter: I) -> Self {
        let mut corpus = AuthorCorpus::new();
        for t in iter {
            corpus.push(t);
        }
        corpus
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

/// Loads a JSONL file of `{"user", "text", "ts"?}` records. Blank lines are
/// skipped; line numbers in errors are 1-based.
pub fn load_jsonl(path: impl AsRef<Path>) -> Result<AuthorCorpus> {
    let path = path.as_ref();
    read_jsonl(open(path)?, path)
}

pub(crate) fn read_jsonl(reader: impl BufRead, path: &Path) -> Result<AuthorCorpus> {
    let mut corpus = AuthorCorpus::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: TweetRecord = serde_json::from_str(&line).map_err(|e| Error::MalformedLine {
            line: idx + 1,
            message: e.to_string(),
        })?;
        if record.user.is_empty() {
            return Err(Error::MalformedLine {
                line: idx + 1,
                message: "empty `user`".into(),
            });
        }
        let mut tweet = Tweet::new(record.user, record.text);
        tweet.timestamp = record.ts;
        corpus.push(tweet);
    }
    Ok(corpus)
}

/// Writes the corpus as JSONL, authors in id order.
pub fn write_jsonl(corpus: &AuthorCorpus, mut out: impl std::io::Write) -> std::io::Result<()> {
    for (_, tweets) in corpus.iter() {
        for t in tweets {
            let record = TweetRecord {
                user: t.author.to_string(),
                text: t.text.clone(),
                ts: t.timestamp.clone(),
            };
            serde_json::to_writer(&mut out, &record)?;
            out.write_all(b"\n")?;
        }
    }
    Ok(())
}

/// Loads the blank-line separated `T`/`U`/`W` block format of the public
/// 2009 Twitter crawl. The author id is the last path segment of the `U`
/// URL. A leading `total number:` header is ignored. Block numbers in errors
/// are 1-based.
pub fn load_snap_blocks(path: impl AsRef<Path>) -> Result<AuthorCorpus> {
    let path = path.as_ref();
    read_snap_blocks(open(path)?, path)
}

#[derive(Default)]
struct Block {
    t: Option<String>,
    u: Option<String>,
    w: Option<String>,
    seen: bool,
}

pub(crate) fn read_snap_blocks(reader: impl BufRead, path: &Path) -> Result<AuthorCorpus> {
    let mut corpus = AuthorCorpus::new();
    let mut block = Block::default();
    let mut index = 0usize;
    let mut first_line = true;

    let flush = |block: &mut Block, index: &mut usize, corpus: &mut AuthorCorpus| -> Result<()> {
        if !block.seen {
            return Ok(());
        }
        *index += 1;
        let b = std::mem::take(block);
        let missing: Vec<&str> = [("T", b.t.is_none()), ("U", b.u.is_none()), ("W", b.w.is_none())]
            .into_iter()
            .filter_map(|(name, absent)| absent.then_some(name))
            .collect();
        if !missing.is_empty() {
            return Err(Error::MalformedBlock {
                block: *index,
                message: format!("missing {} line", missing.join("/")),
            });
        }
        let url = b.u.unwrap();
        let user = url.trim_end_matches('/').rsplit('/').next().unwrap_or("");
        if user.is_empty() {
            return Err(Error::MalformedBlock {
                block: *index,
                message: format!("no user id in {url:?}"),
            });
        }
        corpus.push(Tweet::new(user, b.w.unwrap()).with_timestamp(b.t.unwrap()));
        Ok(())
    };

    for line in reader.lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let trimmed = line.trim_end_matches(['\r', '\n']);
        if first_line {
            first_line = false;
            if trimmed.starts_with("total number:") {
                continue;
            }
        }
        if trimmed.trim().is_empty() {
            flush(&mut block, &mut index, &mut corpus)?;
            continue;
        }
        let tag = trimmed.chars().next().expect("non-empty line");
        let value = trimmed[tag.len_utf8()..]
            .trim_start_matches([' ', '\t'])
            .to_string();
        let slot = match tag {
            'T' => &mut block.t,
            'U' => &mut block.u,
            'W' => &mut block.w,
            _ => {
                return Err(Error::MalformedBlock {
                    block: index + 1,
                    message: format!("unexpected line {trimmed:?}"),
                })
            }
        };
        if slot.is_some() {
            return Err(Error::MalformedBlock {
                block: index + 1,
                message: format!("repeated {tag} line"),
            });
        }
        *slot = Some(value);
        block.seen = true;
    }
    flush(&mut block, &mut index, &mut corpus)?;
    Ok(corpus)
}

/// Summary statistics of a corpus.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusStats {
    pub total_tweets: usize,
    pub total_authors: usize,
    pub max_tweets_per_author: usize,
    pub min_tweets_per_author: usize,
    /// Threshold → fraction of authors with at least that many tweets.
    pub fraction_at_least: BTreeMap<usize, f64>,
}

/// Thresholds reported by the `stats` command.
pub const DEFAULT_STAT_THRESHOLDS: [usize; 6] = [1, 10, 50, 300, 500, 2000];

pub fn corpus_stats(corpus: &AuthorCorpus, thresholds: &[usize]) -> CorpusStats {
    let sizes: Vec<usize> = corpus.iter().map(|(_, t)| t.len()).collect();
    let total_authors = sizes.len();
    let fraction_at_least = thresholds
        .iter()
        .map(|&t| {
            let n = sizes.iter().filter(|&&s| s >= t).count();
            let frac = if total_authors == 0 {
                0.0
            } else {
                n as f64 / total_authors as f64
            };
            (t, frac)
        })
        .collect();
    CorpusStats {
        total_tweets: sizes.iter().sum(),
        total_authors,
        max_tweets_per_author: sizes.iter().copied().max().unwrap_or(0),
        min_tweets_per_author: sizes.iter().copied().min().unwrap_or(0),
        fraction_at_least,
    }
}
