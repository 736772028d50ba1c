//! Per-author Naive Bayes profiles and log-likelihood ranking.
//!
//! Every author gets a smoothed categorical distribution over the scheme's
//! vocabulary,
//!
//! ```text
//! P(t | U) = (count(t, U) + 1) / (total(U) + V)
//! ```
//!
//! with `V` the vocabulary size. A batch of anonymous tokens is scored as
//! `Σ_t n_t · ln P(t | U)` under a uniform prior, summed in ascending token
//! order, and authors are ranked by descending score with ties going to the
//! smaller author id.
//!
//! Floating-point sums can split an exact tie by an ulp. Scores that agree
//! to within rounding are therefore compared exactly: the likelihood ratio of
//! two authors is a product of prime powers, so it equals one exactly when
//! every integer exponent cancels.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;

use crate::corpus::Tweet;
use crate::error::{Error, Result};
use crate::tokenize::{self, TokenCounts, TokenScheme};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuthorProfile {
    pub author: Arc<str>,
    pub counts: TokenCounts,
}

/// Immutable collection of author profiles for one token scheme.
///
/// Profiles are kept sorted by author id, so an author's position doubles as
/// its tie-break rank.
#[derive(Debug, Clone)]
pub struct NbModel {
    scheme: TokenScheme,
    profiles: Vec<AuthorProfile>,
    index: HashMap<Arc<str>, usize>,
    /// `ln P(t | U)` laid out token-major: `log_probs[t * n_authors + u]`.
    log_probs: Vec<f64>,
}

impl PartialEq for NbModel {
    fn eq(&self, other: &Self) -> bool {
        self.scheme == other.scheme && self.profiles == other.profiles
    }
}

/// `ln` of the add-one smoothed token probability.
#[inline]
fn smoothed_log_prob(count: u64, total: u64, vocab_size: usize) -> f64 {
    ((count + 1) as f64 / (total + vocab_size as u64) as f64).ln()
}

impl NbModel {
    /// Tokenizes and counts every author's tweets.
    pub fn build<'a, I>(authors: I, scheme: TokenScheme) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, &'a [Tweet])>,
    {
        let authors: Vec<(&str, &[Tweet])> = authors.into_iter().collect();
        let profiles = authors
            .par_iter()
            .map(|&(id, tweets)| AuthorProfile {
                author: Arc::from(id),
                counts: tokenize::count(tweets, scheme),
            })
            .collect();
        Self::from_profiles(scheme, profiles)
    }

    pub fn from_profiles(scheme: TokenScheme, mut profiles: Vec<AuthorProfile>) -> Result<Self> {
        if profiles.is_empty() {
            return Err(Error::EmptyModel);
        }
        if let Some(p) = profiles.iter().find(|p| p.counts.scheme() != scheme) {
            return Err(Error::SchemeMismatch {
                expected: scheme,
                actual: p.counts.scheme(),
            });
        }
        profiles.sort_by(|a, b| a.author.cmp(&b.author));
        if let Some(w) = profiles.windows(2).find(|w| w[0].author == w[1].author) {
            return Err(Error::DuplicateAuthor(w[0].author.to_string()));
        }

        let n = profiles.len();
        let vocab = scheme.vocab_size();
        let mut log_probs = vec![0.0; vocab * n];
        for (u, p) in profiles.iter().enumerate() {
            let total = p.counts.total();
            for (t, &c) in p.counts.counts().iter().enumerate() {
                log_probs[t * n + u] = smoothed_log_prob(c, total, vocab);
            }
        }
        let index = profiles
            .iter()
            .enumerate()
            .map(|(i, p)| (p.author.clone(), i))
            .collect();
        Ok(NbModel {
            scheme,
            profiles,
            index,
            log_probs,
        })
    }

    pub fn scheme(&self) -> TokenScheme {
        self.scheme
    }

    pub fn vocab_size(&self) -> usize {
        self.scheme.vocab_size()
    }

    pub fn num_authors(&self) -> usize {
        self.profiles.len()
    }

    pub fn profiles(&self) -> &[AuthorProfile] {
        &self.profiles
    }

    /// Author id at `position` in id order.
    pub fn author(&self, position: usize) -> &Arc<str> {
        &self.profiles[position].author
    }

    pub fn position(&self, author: &str) -> Option<usize> {
        self.index.get(author).copied()
    }

    pub fn same_authors(&self, other: &NbModel) -> bool {
        self.profiles.len() == other.profiles.len()
            && self
                .profiles
                .iter()
                .zip(&other.profiles)
                .all(|(a, b)| a.author == b.author)
    }

    /// Natural log of the smoothed `P(token | author)`.
    pub fn token_log_prob(&self, author: &str, token: usize) -> Result<f64> {
        let u = self
            .position(author)
            .ok_or_else(|| Error::UnknownAuthor(author.to_string()))?;
        if token >= self.vocab_size() {
            return Err(Error::UnknownToken {
                token,
                vocab_size: self.vocab_size(),
            });
        }
        Ok(self.log_probs[token * self.num_authors() + u])
    }

    fn check_scheme(&self, tokens: &TokenCounts) -> Result<()> {
        if tokens.scheme() != self.scheme {
            return Err(Error::SchemeMismatch {
                expected: self.scheme,
                actual: tokens.scheme(),
            });
        }
        Ok(())
    }

    /// Log-likelihood of `tokens` under every author, indexed by position.
    pub fn score(&self, tokens: &TokenCounts) -> Result<Vec<f64>> {
        self.check_scheme(tokens)?;
        let n = self.num_authors();
        let mut scores = vec![0.0; n];
        for (t, c) in tokens.nonzero() {
            let c = c as f64;
            let row = &self.log_probs[t * n..(t + 1) * n];
            for (s, lp) in scores.iter_mut().zip(row) {
                *s += c * lp;
            }
        }
        Ok(scores)
    }

    /// [`score`](Self::score) keyed by author id.
    pub fn score_by_author(&self, tokens: &TokenCounts) -> Result<BTreeMap<Arc<str>, f64>> {
        let scores = self.score(tokens)?;
        Ok(self
            .profiles
            .iter()
            .map(|p| p.author.clone())
            .zip(scores)
            .collect())
    }

    pub fn rank(&self, tokens: &TokenCounts) -> Result<Ranking> {
        let scores = self.score(tokens)?;
        Ok(Ranking::build(&[Evidence::new(self, tokens)], scores))
    }

    /// 0-based rank of the author at `target`, without sorting everyone.
    pub fn rank_position(&self, tokens: &TokenCounts, target: usize) -> Result<usize> {
        let scores = self.score(tokens)?;
        Ok(rank_position(&[Evidence::new(self, tokens)], &scores, target))
    }

    /// Serializes the model. See [`NbModel::read_from`] for the layout.
    pub fn write_to(&self, mut out: impl Write) -> Result<()> {
        let mut buf = Vec::with_capacity(32 + self.profiles.len() * (16 + 8 * self.vocab_size()));
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        buf.push(self.scheme.code());
        buf.extend_from_slice(&(self.vocab_size() as u32).to_le_bytes());
        buf.extend_from_slice(&(self.profiles.len() as u64).to_le_bytes());
        for p in &self.profiles {
            let id = p.author.as_bytes();
            buf.extend_from_slice(&(id.len() as u32).to_le_bytes());
            buf.extend_from_slice(id);
            for &c in p.counts.counts() {
                buf.extend_from_slice(&c.to_le_bytes());
            }
            buf.extend_from_slice(&p.counts.total().to_le_bytes());
        }
        out.write_all(&buf)
            .map_err(|e| Error::ModelFormat(format!("write failed: {e}")))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut v = Vec::new();
        self.write_to(&mut v).expect("writing to a Vec cannot fail");
        v
    }

    /// Reads a model written by [`NbModel::write_to`].
    ///
    /// Layout, all integers little-endian:
    ///
    /// ```text
    /// magic       8 bytes  "TLNBMDL\0"
    /// version     u32      1
    /// scheme      u8       0 = uni, 1 = bi, 2 = hashtag
    /// vocab_size  u32
    /// n_authors   u64
    /// n_authors × { id_len u32, id utf-8, counts vocab_size × u64, total u64 }
    /// ```
    pub fn read_from(mut input: impl Read) -> Result<Self> {
        let mut r = ByteReader(&mut input);
        let mut magic = [0u8; 8];
        r.exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::ModelFormat("bad magic".into()));
        }
        let version = r.u32()?;
        if version != FORMAT_VERSION {
            return Err(Error::ModelFormat(format!("unsupported version {version}")));
        }
        let code = r.u8()?;
        let scheme = TokenScheme::from_code(code)
            .ok_or_else(|| Error::ModelFormat(format!("unknown scheme code {code}")))?;
        let vocab = r.u32()? as usize;
        if vocab != scheme.vocab_size() {
            return Err(Error::ModelFormat(format!(
                "vocab size {vocab} does not match scheme {scheme}"
            )));
        }
        let n = r.u64()?;
        let mut profiles = Vec::new();
        let mut prev: Option<Arc<str>> = None;
        for _ in 0..n {
            let len = r.u32()? as usize;
            let mut id = vec![0u8; len];
            r.exact(&mut id)?;
            let id: Arc<str> = String::from_utf8(id)
                .map_err(|_| Error::ModelFormat("author id is not UTF-8".into()))?
                .into();
            if prev.as_ref().is_some_and(|p| *p >= id) {
                return Err(Error::ModelFormat("author ids not strictly ascending".into()));
            }
            let mut counts = Vec::with_capacity(vocab);
            for _ in 0..vocab {
                counts.push(r.u64()?);
            }
            let total = r.u64()?;
            let counts = TokenCounts::from_vec(scheme, counts).expect("length checked");
            if counts.total() != total {
                return Err(Error::ModelFormat(format!("total mismatch for {id:?}")));
            }
            prev = Some(id.clone());
            profiles.push(AuthorProfile { author: id, counts });
        }
        let mut trailing = [0u8; 1];
        if input.read(&mut trailing).map_err(|e| Error::ModelFormat(e.to_string()))? != 0 {
            return Err(Error::ModelFormat("trailing bytes".into()));
        }
        Self::from_profiles(scheme, profiles)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.write_to(&mut w)?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(BufReader::new(file))
    }
}

const MAGIC: &[u8; 8] = b"TLNBMDL\0";
const FORMAT_VERSION: u32 = 1;

struct ByteReader<'a, R: Read>(&'a mut R);

impl<R: Read> ByteReader<'_, R> {
    fn exact(&mut self, buf: &mut [u8]) -> Result<()> {
        self.0
            .read_exact(buf)
            .map_err(|_| Error::ModelFormat("truncated file".into()))
    }

    fn u8(&mut self) -> Result<u8> {
        let mut b = [0u8; 1];
        self.exact(&mut b)?;
        Ok(b[0])
    }

    fn u32(&mut self) -> Result<u32> {
        let mut b = [0u8; 4];
        self.exact(&mut b)?;
        Ok(u32::from_le_bytes(b))
    }

    fn u64(&mut self) -> Result<u64> {
        let mut b = [0u8; 8];
        self.exact(&mut b)?;
        Ok(u64::from_le_bytes(b))
    }
}

/// Query tokens weighed against one model.
#[derive(Debug, Clone, Copy)]
pub struct Evidence<'a> {
    pub model: &'a NbModel,
    pub tokens: &'a TokenCounts,
    pub weight: f64,
}

impl<'a> Evidence<'a> {
    pub fn new(model: &'a NbModel, tokens: &'a TokenCounts) -> Self {
        Evidence {
            model,
            tokens,
            weight: 1.0,
        }
    }

    /// Exponents of `L_a / L_b` by prime, or empty when the ratio is one.
    fn ratio_exponents(&self, a: usize, b: usize) -> BTreeMap<u64, i64> {
        let pa = &self.model.profiles[a].counts;
        let pb = &self.model.profiles[b].counts;
        let mut exps = BTreeMap::new();
        for (t, k) in self.tokens.nonzero() {
            add_factors(&mut exps, pa.get(t) + 1, k as i64);
            add_factors(&mut exps, pb.get(t) + 1, -(k as i64));
        }
        let v = self.model.vocab_size() as u64;
        let k = self.tokens.total() as i64;
        add_factors(&mut exps, pa.total() + v, -k);
        add_factors(&mut exps, pb.total() + v, k);
        exps.retain(|_, e| *e != 0);
        exps
    }
}

fn add_factors(exps: &mut BTreeMap<u64, i64>, mut x: u64, times: i64) {
    let mut p = 2;
    while p * p <= x {
        while x.is_multiple_of(p) {
            *exps.entry(p).or_default() += times;
            x /= p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if x > 1 {
        *exps.entry(x).or_default() += times;
    }
}

/// Relative gap below which two scores are settled exactly. Rounding in a
/// sum of at most 676 same-signed terms stays several orders below this.
const NEAR_TIE: f64 = 1e-10;

/// `Less` when author `a` ranks ahead of author `b`.
fn compare(sources: &[Evidence], scores: &[f64], a: usize, b: usize) -> Ordering {
    let (sa, sb) = (scores[a], scores[b]);
    let scale = sa.abs().max(sb.abs()).max(1.0);
    let by_score = if (sa - sb).abs() > NEAR_TIE * scale {
        sb.partial_cmp(&sa).expect("scores are finite")
    } else {
        let mut log_ratio = 0.0;
        for src in sources.iter().filter(|s| s.weight != 0.0) {
            let d: f64 = src
                .ratio_exponents(a, b)
                .into_iter()
                .map(|(p, e)| e as f64 * (p as f64).ln())
                .sum();
            log_ratio += src.weight * d;
        }
        0.0.partial_cmp(&log_ratio).expect("finite ratio")
    };
    by_score.then(a.cmp(&b))
}

/// 0-based rank the author at `target` would get from [`Ranking::build`].
pub fn rank_position(sources: &[Evidence], scores: &[f64], target: usize) -> usize {
    (0..scores.len())
        .filter(|&i| i != target && compare(sources, scores, i, target) == Ordering::Less)
        .count()
}

/// Candidate authors in decreasing order of likelihood.
#[derive(Debug, Clone, PartialEq)]
pub struct Ranking {
    pub entries: Vec<(Arc<str>, f64)>,
}

impl Ranking {
    /// Orders authors by `scores` (the weighted sum of every source's scores,
    /// indexed by model position). All sources must share one author list.
    pub fn build(sources: &[Evidence], scores: Vec<f64>) -> Self {
        let model = sources.first().expect("at least one source").model;
        let mut order: Vec<usize> = (0..scores.len()).collect();
        order.sort_by(|&a, &b| compare(sources, &scores, a, b));
        Ranking {
            entries: order
                .into_iter()
                .map(|i| (model.author(i).clone(), scores[i]))
                .collect(),
        }
    }

    /// 0-based rank of `author`, if present.
    pub fn position_of(&self, author: &str) -> Option<usize> {
        self.entries.iter().position(|(a, _)| &**a == author)
    }

    pub fn top(&self, k: usize) -> &[(Arc<str>, f64)] {
        &self.entries[..k.min(self.entries.len())]
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Weight of the text log-likelihood when blending it with hashtag evidence.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct BetaWeight(f64);

impl BetaWeight {
    pub const TEXT_ONLY: BetaWeight = BetaWeight(1.0);
    pub const HASHTAG_ONLY: BetaWeight = BetaWeight(0.0);

    pub fn new(beta: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&beta) {
            Ok(BetaWeight(beta))
        } else {
            Err(Error::InvalidBeta(beta))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `beta · text + (1 − beta) · hashtag`, elementwise.
    pub fn combine(self, text: &[f64], hashtag: &[f64]) -> Vec<f64> {
        let b = self.0;
        text.iter()
            .zip(hashtag)
            .map(|(t, h)| b * t + (1.0 - b) * h)
            .collect()
    }

    /// The two weighted sources behind [`combine`](Self::combine).
    pub fn sources<'a>(
        self,
        text_model: &'a NbModel,
        text_tokens: &'a TokenCounts,
        hashtag_model: &'a NbModel,
        hashtag_tokens: &'a TokenCounts,
    ) -> [Evidence<'a>; 2] {
        [
            Evidence {
                model: text_model,
                tokens: text_tokens,
                weight: self.0,
            },
            Evidence {
                model: hashtag_model,
                tokens: hashtag_tokens,
                weight: 1.0 - self.0,
            },
        ]
    }
}

/// Checks that a text and a hashtag model can be blended.
pub fn check_combinable(text_model: &NbModel, hashtag_model: &NbModel) -> Result<()> {
    if hashtag_model.scheme() != TokenScheme::HashtagUnigram {
        return Err(Error::SchemeMismatch {
            expected: TokenScheme::HashtagUnigram,
            actual: hashtag_model.scheme(),
        });
    }
    if text_model.scheme() == TokenScheme::HashtagUnigram {
        return Err(Error::SchemeMismatch {
            expected: TokenScheme::TextUnigram,
            actual: text_model.scheme(),
        });
    }
    if !text_model.same_authors(hashtag_model) {
        return Err(Error::AuthorSetMismatch);
    }
    Ok(())
}

/// Ranks authors by the β-weighted sum of text and hashtag log-likelihoods.
pub fn rank_combined(
    text_model: &NbModel,
    hashtag_model: &NbModel,
    text_tokens: &TokenCounts,
    hashtag_tokens: &TokenCounts,
    beta: BetaWeight,
) -> Result<Ranking> {
    check_combinable(text_model, hashtag_model)?;
    let text = text_model.score(text_tokens)?;
    let hashtag = hashtag_model.score(hashtag_tokens)?;
    let sources = beta.sources(text_model, text_tokens, hashtag_model, hashtag_tokens);
    Ok(Ranking::build(&sources, beta.combine(&text, &hashtag)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const UNI: TokenScheme = TokenScheme::TextUnigram;

    fn tweets(author: &str, texts: &[&str]) -> Vec<Tweet> {
        texts.iter().map(|t| Tweet::new(author, *t)).collect()
    }

    fn toy() -> NbModel {
        let u1 = tweets("u1", &["aa"]);
        let u2 = tweets("u2", &["b"]);
        NbModel::build([("u1", &u1[..]), ("u2", &u2[..])], UNI).unwrap()
    }

    fn counts(scheme: TokenScheme, pairs: &[(usize, u64)]) -> TokenCounts {
        let mut v = vec![0; scheme.vocab_size()];
        for &(t, c) in pairs {
            v[t] = c;
        }
        TokenCounts::from_vec(scheme, v).unwrap()
    }

    #[test]
    fn build_counts_profiles() {
        let m = toy();
        assert_eq!(m.profiles()[0].counts.get(0), 2);
        assert_eq!(m.profiles()[0].counts.total(), 2);
        assert_eq!(m.profiles()[1].counts.get(1), 1);
        assert_eq!(m.profiles()[1].counts.total(), 1);
        assert_eq!(toy(), m);
    }

    #[test]
    fn build_rejects_empty_and_duplicates() {
        let none: Vec<(&str, &[Tweet])> = vec![];
        assert!(matches!(NbModel::build(none, UNI), Err(Error::EmptyModel)));
        let t = tweets("a", &["x"]);
        assert!(matches!(
            NbModel::build([("a", &t[..]), ("a", &t[..])], UNI),
            Err(Error::DuplicateAuthor(_))
        ));
    }

    #[test]
    fn zero_token_author_is_legal() {
        let t = tweets("digits", &["12345", "678"]);
        let m = NbModel::build([("digits", &t[..])], UNI).unwrap();
        assert_eq!(m.profiles()[0].counts.total(), 0);
        for tok in 0..26 {
            let p = m.token_log_prob("digits", tok).unwrap().exp();
            assert!((p - 1.0 / 26.0).abs() < 1e-15);
        }
    }

    #[test]
    fn token_log_prob_matches_formula() {
        let t = tweets("u", &["aaab"]);
        let m = NbModel::build([("u", &t[..])], UNI).unwrap();
        // (3 + 1) / (4 + 26)
        let expected = (4.0f64 / 30.0).ln();
        assert!((m.token_log_prob("u", 0).unwrap() - expected).abs() < 1e-15);
        assert!((m.token_log_prob("u", 0).unwrap().exp() - 0.133_333_333_333_333_3).abs() < 1e-12);
        assert!(matches!(m.token_log_prob("v", 0), Err(Error::UnknownAuthor(_))));
        assert!(matches!(m.token_log_prob("u", 26), Err(Error::UnknownToken { .. })));
    }

    #[test]
    fn toy_scores_and_ranking() {
        let m = toy();
        let ar = counts(UNI, &[(0, 2)]);
        let s = m.score_by_author(&ar).unwrap();
        // u1: P(a) = 3/28; u2: P(a) = 1/27
        let u1 = 2.0 * (3.0f64 / 28.0).ln();
        let u2 = 2.0 * (1.0f64 / 27.0).ln();
        assert!((s["u1"] - u1).abs() < 1e-12);
        assert!((s["u2"] - u2).abs() < 1e-12);
        let r = m.rank(&ar).unwrap();
        let ids: Vec<&str> = r.entries.iter().map(|(a, _)| &**a).collect();
        assert_eq!(ids, ["u1", "u2"]);
    }

    #[test]
    fn empty_tokens_tie_break_by_id() {
        let t: Vec<Vec<Tweet>> = ["c", "a", "b"].iter().map(|a| tweets(a, &["zz"])).collect();
        let m = NbModel::build([("c", &t[0][..]), ("a", &t[1][..]), ("b", &t[2][..])], UNI).unwrap();
        let r = m.rank(&TokenCounts::zeros(UNI)).unwrap();
        let ids: Vec<&str> = r.entries.iter().map(|(a, _)| &**a).collect();
        assert_eq!(ids, ["a", "b", "c"]);
        assert!(r.entries.iter().all(|(_, s)| *s == 0.0));
    }

    #[test]
    fn disjoint_support_wins() {
        let x = tweets("x", &["qqqq"]);
        let y = tweets("y", &["zzzz"]);
        let m = NbModel::build([("x", &x[..]), ("y", &y[..])], UNI).unwrap();
        let r = m.rank(&counts(UNI, &[(25, 3)])).unwrap();
        assert_eq!(&*r.entries[0].0, "y");
        let r = m.rank(&counts(UNI, &[(16, 1)])).unwrap();
        assert_eq!(&*r.entries[0].0, "x");
    }

    #[test]
    fn scheme_mismatch_is_rejected() {
        let m = toy();
        let err = m.score(&TokenCounts::zeros(TokenScheme::TextBigram)).unwrap_err();
        assert!(matches!(err, Error::SchemeMismatch { .. }));
    }

    #[test]
    fn exact_ties_survive_rounding() {
        // 2·3 and 6·1 over the same denominator: equal likelihoods whose
        // log sums need not agree to the last bit.
        let mut x = TokenCounts::zeros(UNI);
        let mut w = TokenCounts::zeros(UNI);
        x.add_text("abbcc");
        w.add_text("aaaaa");
        let m = NbModel::from_profiles(
            UNI,
            vec![
                AuthorProfile { author: "x".into(), counts: x },
                AuthorProfile { author: "w".into(), counts: w },
            ],
        )
        .unwrap();
        let q = counts(UNI, &[(0, 1), (1, 1)]);
        let r = m.rank(&q).unwrap();
        assert_eq!(&*r.entries[0].0, "w");
        assert_eq!(m.rank_position(&q, m.position("w").unwrap()).unwrap(), 0);
        assert_eq!(m.rank_position(&q, m.position("x").unwrap()).unwrap(), 1);
    }

    #[test]
    fn beta_bounds() {
        assert!(BetaWeight::new(0.6).is_ok());
        assert!(BetaWeight::new(-0.1).is_err());
        assert!(BetaWeight::new(1.01).is_err());
        assert!(BetaWeight::new(f64::NAN).is_err());
    }

    #[test]
    fn combined_rejects_mismatched_authors() {
        let a = tweets("a", &["#x"]);
        let b = tweets("b", &["#y"]);
        let text = NbModel::build([("a", &a[..])], UNI).unwrap();
        let tags = NbModel::build([("b", &b[..])], TokenScheme::HashtagUnigram).unwrap();
        let err = rank_combined(
            &text,
            &tags,
            &TokenCounts::zeros(UNI),
            &TokenCounts::zeros(TokenScheme::HashtagUnigram),
            BetaWeight::new(0.5).unwrap(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::AuthorSetMismatch));
    }

    #[test]
    fn serialization_rejects_garbage() {
        let bytes = toy().to_bytes();
        assert!(NbModel::read_from(&bytes[..bytes.len() - 1]).is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(NbModel::read_from(&extra[..]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(NbModel::read_from(&bad[..]).is_err());
    }

    fn arb_model(scheme: TokenScheme) -> impl Strategy<Value = NbModel> {
        let vocab = scheme.vocab_size();
        prop::collection::vec(prop::collection::vec(0u64..50, vocab), 1..6).prop_map(move |rows| {
            let profiles = rows
                .into_iter()
                .enumerate()
                .map(|(i, c)| AuthorProfile {
                    author: format!("author{i}").into(),
                    counts: TokenCounts::from_vec(scheme, c).unwrap(),
                })
                .collect();
            NbModel::from_profiles(scheme, profiles).unwrap()
        })
    }

    fn arb_tokens(scheme: TokenScheme) -> impl Strategy<Value = TokenCounts> {
        prop::collection::vec(0u64..6, scheme.vocab_size())
            .prop_map(move |v| TokenCounts::from_vec(scheme, v).unwrap())
    }

    proptest! {
        #[test]
        fn probabilities_sum_to_one(m in arb_model(TokenScheme::HashtagUnigram)) {
            for p in m.profiles() {
                let sum: f64 = (0..m.vocab_size())
                    .map(|t| m.token_log_prob(&p.author, t).unwrap().exp())
                    .sum();
                prop_assert!((sum - 1.0).abs() < 1e-9);
            }
        }

        #[test]
        fn scores_are_additive((m, a, b) in arb_model(UNI).prop_flat_map(|m| (Just(m), arb_tokens(UNI), arb_tokens(UNI)))) {
            let mut ab = a.clone();
            ab.merge(&b);
            let sa = m.score(&a).unwrap();
            let sb = m.score(&b).unwrap();
            let sab = m.score(&ab).unwrap();
            for i in 0..m.num_authors() {
                prop_assert!((sa[i] + sb[i] - sab[i]).abs() <= 1e-9 * sab[i].abs().max(1.0));
            }
        }

        #[test]
        fn rank_position_agrees_with_sort((m, a) in arb_model(UNI).prop_flat_map(|m| (Just(m), arb_tokens(UNI)))) {
            let r = m.rank(&a).unwrap();
            for (i, p) in m.profiles().iter().enumerate() {
                prop_assert_eq!(m.rank_position(&a, i).unwrap(), r.position_of(&p.author).unwrap());
            }
        }

        #[test]
        fn beta_endpoints_reproduce_single_scheme(
            (text, tags, tt, ht) in (1usize..5).prop_flat_map(|n| {
                let names = move || (0..n).map(|i| format!("a{i}"));
                (
                    prop::collection::vec(prop::collection::vec(0u64..20, 26), n),
                    prop::collection::vec(prop::collection::vec(0u64..20, 37), n),
                    arb_tokens(UNI),
                    arb_tokens(TokenScheme::HashtagUnigram),
                ).prop_map(move |(tc, hc, tt, ht)| {
                    let mk = |scheme, rows: Vec<Vec<u64>>| NbModel::from_profiles(scheme, names().zip(rows).map(|(a, c)| AuthorProfile {
                        author: a.into(), counts: TokenCounts::from_vec(scheme, c).unwrap(),
                    }).collect()).unwrap();
                    (mk(UNI, tc), mk(TokenScheme::HashtagUnigram, hc), tt, ht)
                })
            })
        ) {
            let one = rank_combined(&text, &tags, &tt, &ht, BetaWeight::TEXT_ONLY).unwrap();
            prop_assert_eq!(one, text.rank(&tt).unwrap());
            let zero = rank_combined(&text, &tags, &tt, &ht, BetaWeight::HASHTAG_ONLY).unwrap();
            prop_assert_eq!(zero, tags.rank(&ht).unwrap());
        }

        #[test]
        fn serialization_round_trips(m in arb_model(TokenScheme::TextBigram)) {
            let bytes = m.to_bytes();
            let back = NbModel::read_from(&bytes[..]).unwrap();
            prop_assert_eq!(&back, &m);
            prop_assert_eq!(back.to_bytes(), bytes);
        }
    }
}
