//! The linkage evaluation protocol.
//!
//! Each author's tweets are shuffled and split into an identified record (IR,
//! used to train the model) and a pool of held-out tweets from which
//! anonymous records (ARs) of increasing size are taken as nested prefixes.
//! A linkability ratio at `k` is the fraction of ARs whose true author ranks
//! within the first `k` candidates.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::Gamma;
use rayon::prelude::*;
use serde::Deserialize;

use crate::corpus::{AuthorCorpus, Tweet};
use crate::error::{Error, Result};
use crate::model::{check_combinable, rank_position, BetaWeight, NbModel};
use crate::rng::{self, SeededRng};
use crate::tokenize::{self, TokenScheme};

pub const DEFAULT_HOLDOUT: usize = 100;
pub const DEFAULT_AR_SIZES: [usize; 5] = [5, 10, 20, 50, 100];
/// Size of the inner AR carved from each IR when training β.
pub const DEFAULT_INNER_AR: usize = 50;
pub const DEFAULT_BETA: f64 = 0.6;
/// Largest AR size used for dual-account owners.
pub const DUAL_MAX_AR: usize = 50;
pub const TOP_KS: [usize; 3] = [1, 5, 10];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitConfig {
    holdout: usize,
    ar_sizes: Vec<usize>,
    seed: u64,
}

impl SplitConfig {
    pub fn new(holdout: usize, ar_sizes: Vec<usize>, seed: u64) -> Result<Self> {
        if holdout == 0 {
            return Err(Error::Config("holdout must be at least 1".into()));
        }
        if ar_sizes.is_empty() {
            return Err(Error::Config("at least one AR size is required".into()));
        }
        if let Some(&bad) = ar_sizes.iter().find(|&&s| s == 0 || s > holdout) {
            return Err(Error::Config(format!(
                "AR size {bad} must lie in 1..={holdout} (the holdout)"
            )));
        }
        Ok(SplitConfig {
            holdout,
            ar_sizes,
            seed,
        })
    }

    /// Holdout 100 and AR sizes 5, 10, 20, 50, 100.
    pub fn standard(seed: u64) -> Self {
        Self::new(DEFAULT_HOLDOUT, DEFAULT_AR_SIZES.to_vec(), seed).expect("valid defaults")
    }

    pub fn holdout(&self) -> usize {
        self.holdout
    }

    pub fn ar_sizes(&self) -> &[usize] {
        &self.ar_sizes
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// One author's identified record and anonymous-record pool.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordPair {
    pub author: Arc<str>,
    pub ir: Vec<Tweet>,
    pub ar_pool: Vec<Tweet>,
}

impl RecordPair {
    /// The AR of `size` tweets: a prefix of the pool, shorter if the pool is.
    pub fn ar(&self, size: usize) -> &[Tweet] {
        &self.ar_pool[..size.min(self.ar_pool.len())]
    }
}

/// Shuffles each author's tweets with a per-author seeded stream; the last
/// `holdout` tweets form the AR pool and the rest the IR.
pub fn split(corpus: AuthorCorpus, cfg: &SplitConfig) -> Result<Vec<RecordPair>> {
    if let Some((author, tweets)) = corpus.iter().find(|(_, t)| t.len() <= cfg.holdout) {
        return Err(Error::TooFewTweets {
            author: author.to_string(),
            count: tweets.len(),
            needed: cfg.holdout,
        });
    }
    let authors: Vec<(Arc<str>, Vec<Tweet>)> = corpus.into_authors().collect();
    Ok(authors
        .into_par_iter()
        .map(|(author, mut tweets)| {
            rng::shuffle(&mut tweets, &mut rng::substream(cfg.seed, &author));
            let ar_pool = tweets.split_off(tweets.len() - cfg.holdout);
            RecordPair {
                author,
                ir: tweets,
                ar_pool,
            }
        })
        .collect())
}

/// Scoring rule used by a report row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Single(TokenScheme),
    /// Text-unigram and hashtag log-likelihoods blended by β.
    Combined(BetaWeight),
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Single(s) => s.name(),
            Method::Combined(_) => "combined",
        }
    }

    pub fn beta(&self) -> Option<f64> {
        match self {
            Method::Single(_) => None,
            Method::Combined(b) => Some(b.value()),
        }
    }
}

/// Integer tallies behind one report row.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Hits {
    /// Successes at k = 1, 5, 10.
    pub within: [u64; 3],
    pub n_ars: u64,
    pub n_empty: u64,
}

impl Hits {
    /// Records one AR; `None` means it carried no usable tokens and counts as
    /// a miss at every k.
    fn record(position: Option<usize>) -> Hits {
        let mut h = Hits {
            n_ars: 1,
            ..Hits::default()
        };
        match position {
            Some(p) => {
                for (slot, k) in h.within.iter_mut().zip(TOP_KS) {
                    *slot = (p < k) as u64;
                }
            }
            None => h.n_empty = 1,
        }
        h
    }

    fn add(mut self, other: Hits) -> Hits {
        for (a, b) in self.within.iter_mut().zip(other.within) {
            *a += b;
        }
        self.n_ars += other.n_ars;
        self.n_empty += other.n_empty;
        self
    }

    pub fn ratio(&self, k_index: usize) -> f64 {
        if self.n_ars == 0 {
            0.0
        } else {
            self.within[k_index] as f64 / self.n_ars as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub method: Method,
    pub user_count: usize,
    pub ar_size: usize,
    pub hits: Hits,
}

impl ReportRow {
    pub fn top1(&self) -> f64 {
        self.hits.ratio(0)
    }

    pub fn top5(&self) -> f64 {
        self.hits.ratio(1)
    }

    pub fn top10(&self) -> f64 {
        self.hits.ratio(2)
    }
}

/// Linkability ratios keyed by (method, user count, AR size).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinkabilityReport {
    pub rows: Vec<ReportRow>,
}

pub const REPORT_HEADER: [&str; 9] = [
    "scheme",
    "user_count",
    "ar_size",
    "beta",
    "top1",
    "top5",
    "top10",
    "n_ars",
    "n_empty_ars",
];

impl LinkabilityReport {
    pub fn extend(&mut self, other: LinkabilityReport) {
        self.rows.extend(other.rows);
    }

    pub fn row(&self, method_name: &str, user_count: usize, ar_size: usize) -> Option<&ReportRow> {
        self.rows.iter().find(|r| {
            r.method.name() == method_name && r.user_count == user_count && r.ar_size == ar_size
        })
    }

    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(REPORT_HEADER)?;
        for r in &self.rows {
            w.write_record([
                r.method.name().to_string(),
                r.user_count.to_string(),
                r.ar_size.to_string(),
                r.method.beta().map(|b| b.to_string()).unwrap_or_default(),
                format!("{:.6}", r.top1()),
                format!("{:.6}", r.top5()),
                format!("{:.6}", r.top10()),
                r.hits.n_ars.to_string(),
                r.hits.n_empty.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::Csv(e.into()))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("in-memory CSV");
        String::from_utf8(buf).expect("CSV is UTF-8")
    }

    /// Fixed-width table restricted to the requested k values.
    pub fn table(&self, ks: &[usize]) -> String {
        let mut s = format!("{:<9} {:>6} {:>7} {:>5}", "scheme", "users", "ar_size", "beta");
        for &k in ks {
            s.push_str(&format!(" {:>7}", format!("top{k}")));
        }
        s.push_str(&format!(" {:>7} {:>6}\n", "n_ars", "empty"));
        for r in &self.rows {
            s.push_str(&format!(
                "{:<9} {:>6} {:>7} {:>5}",
                r.method.name(),
                r.user_count,
                r.ar_size,
                r.method.beta().map(|b| format!("{b:.2}")).unwrap_or_else(|| "-".into())
            ));
            for &k in ks {
                let idx = TOP_KS.iter().position(|&x| x == k).expect("validated k");
                s.push_str(&format!(" {:>7.4}", r.hits.ratio(idx)));
            }
            s.push_str(&format!(" {:>7} {:>6}\n", r.hits.n_ars, r.hits.n_empty));
        }
        s
    }
}

impl fmt::Display for LinkabilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.table(&TOP_KS))
    }
}

/// Models trained on a set of IRs for one scoring method.
enum Scorer {
    Single(NbModel),
    Combined {
        text: NbModel,
        tags: NbModel,
        beta: BetaWeight,
    },
}

impl Scorer {
    fn build(pairs: &[&RecordPair], method: Method) -> Result<Self> {
        let irs = || pairs.iter().map(|p| (&*p.author, &p.ir[..]));
        Ok(match method {
            Method::Single(scheme) => Scorer::Single(NbModel::build(irs(), scheme)?),
            Method::Combined(beta) => Scorer::Combined {
                text: NbModel::build(irs(), TokenScheme::TextUnigram)?,
                tags: NbModel::build(irs(), TokenScheme::HashtagUnigram)?,
                beta,
            },
        })
    }

    fn position(&self, author: &str) -> usize {
        match self {
            Scorer::Single(m) | Scorer::Combined { text: m, .. } => {
                m.position(author).expect("author trained")
            }
        }
    }

    /// Rank of the author at `target`, or `None` when the AR has no evidence.
    fn rank(&self, ar: &[Tweet], target: usize) -> Option<usize> {
        match self {
            Scorer::Single(m) => {
                let tokens = tokenize::count(ar, m.scheme());
                (!tokens.is_empty()).then(|| m.rank_position(&tokens, target).expect("scheme matches"))
            }
            Scorer::Combined { text, tags, beta } => {
                let tt = tokenize::count(ar, text.scheme());
                let ht = tokenize::count(ar, tags.scheme());
                if !has_evidence(*beta, tt.is_empty(), ht.is_empty()) {
                    return None;
                }
                let ts = text.score(&tt).expect("scheme matches");
                let hs = tags.score(&ht).expect("scheme matches");
                let sources = beta.sources(text, &tt, tags, &ht);
                Some(rank_position(&sources, &beta.combine(&ts, &hs), target))
            }
        }
    }
}

/// An AR counts as empty when every token it has carries zero weight.
fn has_evidence(beta: BetaWeight, text_empty: bool, tags_empty: bool) -> bool {
    (beta.value() > 0.0 && !text_empty) || (beta.value() < 1.0 && !tags_empty)
}

/// Trains on every pair's IR and links the ARs of `targets` (all pairs when
/// `None`).
fn evaluate_subset(
    pairs: &[&RecordPair],
    targets: Option<&BTreeSet<String>>,
    method: Method,
    ar_sizes: &[usize],
) -> Result<LinkabilityReport> {
    if pairs.is_empty() {
        return Err(Error::Config("evaluation needs at least one author".into()));
    }
    let scorer = Scorer::build(pairs, method)?;
    let queried: Vec<&RecordPair> = pairs
        .iter()
        .copied()
        .filter(|p| targets.is_none_or(|t| t.contains(&*p.author)))
        .collect();
    let rows = ar_sizes
        .iter()
        .map(|&ar_size| {
            let hits = queried
                .par_iter()
                .map(|p| {
                    Hits::record(scorer.rank(p.ar(ar_size), scorer.position(&p.author)))
                })
                .reduce(Hits::default, Hits::add);
            ReportRow {
                method,
                user_count: pairs.len(),
                ar_size,
                hits,
            }
        })
        .collect();
    Ok(LinkabilityReport { rows })
}

/// Builds one model from all IRs and links every AR at each size.
pub fn evaluate(pairs: &[RecordPair], method: Method, ar_sizes: &[usize]) -> Result<LinkabilityReport> {
    let refs: Vec<&RecordPair> = pairs.iter().collect();
    evaluate_subset(&refs, None, method, ar_sizes)
}

/// Repeats [`evaluate`] on seeded author subsets of each size. Subsets come
/// from one shuffle of the sorted ids, so smaller sets nest in larger ones.
pub fn vary_users(
    pairs: &[RecordPair],
    sizes: &[usize],
    method: Method,
    ar_sizes: &[usize],
    seed: u64,
) -> Result<LinkabilityReport> {
    if let Some(&bad) = sizes.iter().find(|&&s| s > pairs.len() || s == 0) {
        return Err(Error::SampleTooLarge {
            requested: bad,
            available: pairs.len(),
        });
    }
    let mut by_id: Vec<&RecordPair> = pairs.iter().collect();
    by_id.sort_by(|a, b| a.author.cmp(&b.author));
    let mut report = LinkabilityReport::default();
    for &size in sizes {
        let subset = rng::sample(&by_id, size, seed);
        report.extend(evaluate_subset(&subset, None, method, ar_sizes)?);
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TopK {
    #[default]
    Top1,
    Top5,
    Top10,
}

impl TopK {
    fn index(self) -> usize {
        match self {
            TopK::Top1 => 0,
            TopK::Top5 => 1,
            TopK::Top10 => 2,
        }
    }
}

impl FromStr for TopK {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "1" | "top1" => Ok(TopK::Top1),
            "5" | "top5" => Ok(TopK::Top5),
            "10" | "top10" => Ok(TopK::Top10),
            other => Err(format!("unknown metric {other:?}; use top1, top5 or top10")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BetaGridRow {
    pub beta: BetaWeight,
    pub hits: Hits,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BetaTrainResult {
    pub grid: Vec<BetaGridRow>,
    pub chosen: BetaWeight,
}

impl BetaTrainResult {
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["beta", "top1", "top5", "top10", "n_ars", "n_empty_ars", "chosen"])?;
        for row in &self.grid {
            w.write_record([
                row.beta.value().to_string(),
                format!("{:.6}", row.hits.ratio(0)),
                format!("{:.6}", row.hits.ratio(1)),
                format!("{:.6}", row.hits.ratio(2)),
                row.hits.n_ars.to_string(),
                row.hits.n_empty.to_string(),
                (row.beta == self.chosen).to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::Csv(e.into()))?;
        Ok(())
    }
}

/// β values `0, step, 2·step, …, 1`, computed as `i / n` so both endpoints
/// are exact.
pub fn beta_grid(step: f64) -> Result<Vec<BetaWeight>> {
    let n = (1.0 / step).round();
    if !(step > 0.0 && step <= 1.0) || (n * step - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!("grid step {step} does not divide 1")));
    }
    let n = n as usize;
    (0..=n).map(|i| BetaWeight::new(i as f64 / n as f64)).collect()
}

/// Learns β using IRs only. The last `inner_ar` tweets of every IR become an
/// inner AR, the rest an inner IR; each grid value is scored on that split
/// and the best by `metric` is chosen, ties going to the larger β.
pub fn train_beta(
    pairs: &[RecordPair],
    inner_ar: usize,
    grid_step: f64,
    metric: TopK,
) -> Result<BetaTrainResult> {
    let grid = beta_grid(grid_step)?;
    train_beta_on_grid(pairs, inner_ar, &grid, metric)
}

pub fn train_beta_on_grid(
    pairs: &[RecordPair],
    inner_ar: usize,
    grid: &[BetaWeight],
    metric: TopK,
) -> Result<BetaTrainResult> {
    if pairs.is_empty() {
        return Err(Error::Config("β training needs at least one author".into()));
    }
    if grid.is_empty() {
        return Err(Error::Config("empty β grid".into()));
    }
    if let Some(p) = pairs.iter().find(|p| p.ir.len() <= inner_ar) {
        return Err(Error::TooFewTweets {
            author: p.author.to_string(),
            count: p.ir.len(),
            needed: inner_ar,
        });
    }
    let cut = |p: &RecordPair| p.ir.len() - inner_ar;
    let inner_irs = || pairs.iter().map(|p| (&*p.author, &p.ir[..cut(p)]));
    let text = NbModel::build(inner_irs(), TokenScheme::TextUnigram)?;
    let tags = NbModel::build(inner_irs(), TokenScheme::HashtagUnigram)?;
    check_combinable(&text, &tags)?;

    let per_beta = pairs
        .par_iter()
        .map(|p| {
            let ar = &p.ir[cut(p)..];
            let tt = tokenize::count(ar, text.scheme());
            let ht = tokenize::count(ar, tags.scheme());
            let ts = text.score(&tt).expect("scheme matches");
            let hs = tags.score(&ht).expect("scheme matches");
            let target = text.position(&p.author).expect("author trained");
            grid.iter()
                .map(|&beta| {
                    let pos = has_evidence(beta, tt.is_empty(), ht.is_empty())
                        .then(|| {
                            let sources = beta.sources(&text, &tt, &tags, &ht);
                            rank_position(&sources, &beta.combine(&ts, &hs), target)
                        });
                    Hits::record(pos)
                })
                .collect::<Vec<_>>()
        })
        .reduce(
            || vec![Hits::default(); grid.len()],
            |a, b| a.into_iter().zip(b).map(|(x, y)| x.add(y)).collect(),
        );

    let rows: Vec<BetaGridRow> = grid
        .iter()
        .zip(per_beta)
        .map(|(&beta, hits)| BetaGridRow { beta, hits })
        .collect();
    let mut chosen = rows[0].beta;
    let mut best = 0;
    for row in &rows {
        let v = row.hits.within[metric.index()];
        if v >= best && (v > best || row.beta >= chosen) {
            best = v;
            chosen = row.beta;
        }
    }
    Ok(BetaTrainResult { grid: rows, chosen })
}

/// Two accounts known to belong to the same owner.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualAccount {
    pub owner: Arc<str>,
    pub first: Vec<Tweet>,
    pub second: Vec<Tweet>,
}

/// Appends one pair per dual-account owner. A seeded coin picks which account
/// serves as IR; the other is shuffled and its first `min(holdout, len)`
/// tweets become the AR pool.
pub fn merge_dual(
    mut base: Vec<RecordPair>,
    duals: Vec<DualAccount>,
    holdout: usize,
    seed: u64,
) -> Result<Vec<RecordPair>> {
    if holdout == 0 {
        return Err(Error::Config("holdout must be at least 1".into()));
    }
    let mut taken: BTreeSet<Arc<str>> = base.iter().map(|p| p.author.clone()).collect();
    for d in &duals {
        if !taken.insert(d.owner.clone()) {
            return Err(Error::IdCollision(d.owner.to_string()));
        }
        if d.first.is_empty() || d.second.is_empty() {
            return Err(Error::Config(format!(
                "dual-account owner {:?} has an empty account",
                d.owner
            )));
        }
    }
    for d in duals {
        let mut rng = rng::substream(seed, &d.owner);
        let (ir, mut ar) = if rng.random_bool(0.5) {
            (d.first, d.second)
        } else {
            (d.second, d.first)
        };
        rng::shuffle(&mut ar, &mut rng);
        ar.truncate(holdout);
        let relabel = |tweets: Vec<Tweet>| -> Vec<Tweet> {
            tweets
                .into_iter()
                .map(|t| Tweet {
                    author: d.owner.clone(),
                    ..t
                })
                .collect()
        };
        base.push(RecordPair {
            author: d.owner.clone(),
            ir: relabel(ir),
            ar_pool: relabel(ar),
        });
    }
    Ok(base)
}

/// Links dual owners' ARs against the full merged candidate set.
pub fn evaluate_dual(
    merged: &[RecordPair],
    dual_ids: &BTreeSet<String>,
    method: Method,
    ar_sizes: &[usize],
) -> Result<LinkabilityReport> {
    if dual_ids.is_empty() {
        return Err(Error::Config("no dual-account owners to evaluate".into()));
    }
    if let Some(&bad) = ar_sizes.iter().find(|&&s| s == 0 || s > DUAL_MAX_AR) {
        return Err(Error::Config(format!(
            "dual-account AR size {bad} must lie in 1..={DUAL_MAX_AR}"
        )));
    }
    let known: BTreeSet<&str> = merged.iter().map(|p| &*p.author).collect();
    if let Some(missing) = dual_ids.iter().find(|id| !known.contains(id.as_str())) {
        return Err(Error::UnknownAuthor(missing.clone()));
    }
    let refs: Vec<&RecordPair> = merged.iter().collect();
    evaluate_subset(&refs, Some(dual_ids), method, ar_sizes)
}

#[derive(Deserialize)]
struct DualRecord {
    owner: String,
    user: String,
    text: String,
    #[serde(default)]
    ts: Option<String>,
}

/// Reads dual-account tweets from JSONL records `{"owner", "user", "text",
/// "ts"?}`. Owners with more than two accounts keep their two most prolific
/// (ties to the smaller account id); owners with fewer are an error.
pub fn load_dual_jsonl(path: impl AsRef<Path>) -> Result<Vec<DualAccount>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut owners: BTreeMap<String, BTreeMap<String, Vec<Tweet>>> = BTreeMap::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let r: DualRecord = serde_json::from_str(&line).map_err(|e| Error::MalformedLine {
            line: idx + 1,
            message: e.to_string(),
        })?;
        if r.owner.is_empty() || r.user.is_empty() {
            return Err(Error::MalformedLine {
                line: idx + 1,
                message: "empty `owner` or `user`".into(),
            });
        }
        let mut tweet = Tweet::new(r.user.as_str(), r.text);
        tweet.timestamp = r.ts;
        owners
            .entry(r.owner)
            .or_default()
            .entry(r.user)
            .or_default()
            .push(tweet);
    }
    owners
        .into_iter()
        .map(|(owner, accounts)| {
            if accounts.len() < 2 {
                return Err(Error::Config(format!(
                    "owner {owner:?} has {} account(s), needs two",
                    accounts.len()
                )));
            }
            let mut accounts: Vec<(String, Vec<Tweet>)> = accounts.into_iter().collect();
            accounts.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then(a.0.cmp(&b.0)));
            let mut it = accounts.into_iter();
            let first = it.next().expect("two accounts").1;
            let second = it.next().expect("two accounts").1;
            Ok(DualAccount {
                owner: owner.into(),
                first,
                second,
            })
        })
        .collect()
}

/// Parameters of the synthetic corpus generator.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n_authors: usize,
    pub tweets_per_author: usize,
    /// Characters per tweet, spaces and hashtags included.
    pub tweet_len: usize,
    /// Symmetric Dirichlet concentration of each author's letter distribution.
    pub concentration: f64,
    /// Probability that a word is written as a hashtag.
    pub hashtag_rate: f64,
    pub seed: u64,
}

impl SynthConfig {
    pub fn new(n_authors: usize, tweets_per_author: usize, tweet_len: usize, concentration: f64, seed: u64) -> Self {
        SynthConfig {
            n_authors,
            tweets_per_author,
            tweet_len,
            concentration,
            hashtag_rate: 0.0,
            seed,
        }
    }

    pub fn with_hashtag_rate(mut self, rate: f64) -> Self {
        self.hashtag_rate = rate;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n_authors == 0 || self.tweets_per_author == 0 || self.tweet_len == 0 {
            return Err(Error::Config("synthetic corpus sizes must be at least 1".into()));
        }
        if !(self.concentration > 0.0 && self.concentration.is_finite()) {
            return Err(Error::Config("concentration must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.hashtag_rate) {
            return Err(Error::Config("hashtag rate must lie in [0, 1]".into()));
        }
        Ok(())
    }

    fn author_id(&self, i: usize) -> String {
        let width = (self.n_authors - 1).to_string().len();
        format!("a{i:0width$}")
    }
}

const WORD_LEN: std::ops::RangeInclusive<usize> = 2..=9;
const TAG_ALPHABET: &[u8; 37] = b"abcdefghijklmnopqrstuvwxyz0123456789_";

/// Per-author writing style: a letter distribution and a hashtag-character
/// distribution.
struct Style {
    letters: WeightedIndex<f64>,
    tags: WeightedIndex<f64>,
}

impl Style {
    fn draw(concentration: f64, rng: &mut SeededRng) -> Style {
        Style {
            letters: dirichlet(26, concentration, rng),
            tags: dirichlet(37, concentration, rng),
        }
    }

    fn tweet(&self, len: usize, hashtag_rate: f64, rng: &mut SeededRng) -> String {
        let mut s = String::with_capacity(len);
        let mut word_left = 0usize;
        let mut in_tag = false;
        while s.len() < len {
            if word_left == 0 {
                if !s.is_empty() {
                    s.push(' ');
                    if s.len() == len {
                        break;
                    }
                }
                word_left = rng.random_range(WORD_LEN);
                in_tag = hashtag_rate > 0.0 && len - s.len() >= 2 && rng.random_bool(hashtag_rate);
                if in_tag {
                    s.push('#');
                    continue;
                }
            }
            let c = if in_tag {
                TAG_ALPHABET[self.tags.sample(rng)]
            } else {
                b'a' + self.letters.sample(rng) as u8
            };
            s.push(c as char);
            word_left -= 1;
        }
        s
    }
}

/// Normalized Gamma(concentration, 1) draws; uniform if all underflow.
fn dirichlet(k: usize, concentration: f64, rng: &mut SeededRng) -> WeightedIndex<f64> {
    let gamma = Gamma::new(concentration, 1.0).expect("positive concentration");
    let mut w: Vec<f64> = (0..k).map(|_| gamma.sample(rng)).collect();
    if w.iter().all(|&x| x == 0.0 || !x.is_finite()) {
        w = vec![1.0; k];
    }
    WeightedIndex::new(&w).expect("non-negative weights with positive sum")
}

/// Seeded stand-in corpus: authors `a000…` each write i.i.d. characters from
/// their own Dirichlet-drawn distribution, split into words of 2 to 9 chars.
pub fn synth_corpus(cfg: &SynthConfig) -> Result<AuthorCorpus> {
    cfg.validate()?;
    let authors: Vec<Vec<Tweet>> = (0..cfg.n_authors)
        .into_par_iter()
        .map(|i| {
            let id: Arc<str> = cfg.author_id(i).into();
            let mut rng = rng::substream(cfg.seed, &id);
            let style = Style::draw(cfg.concentration, &mut rng);
            (0..cfg.tweets_per_author)
                .map(|_| Tweet::new(id.clone(), style.tweet(cfg.tweet_len, cfg.hashtag_rate, &mut rng)))
                .collect()
        })
        .collect();
    Ok(authors.into_iter().flatten().collect())
}

/// Dual-account owners `dual00…` whose two accounts share one style.
pub fn synth_dual_accounts(cfg: &SynthConfig) -> Result<Vec<DualAccount>> {
    cfg.validate()?;
    let width = (cfg.n_authors - 1).to_string().len();
    Ok((0..cfg.n_authors)
        .map(|i| {
            let owner: Arc<str> = format!("dual{i:0width$}").into();
            let mut rng = rng::substream(cfg.seed, &owner);
            let style = Style::draw(cfg.concentration, &mut rng);
            let mut account = |suffix: &str| -> Vec<Tweet> {
                let id: Arc<str> = format!("{owner}_{suffix}").into();
                (0..cfg.tweets_per_author)
                    .map(|_| Tweet::new(id.clone(), style.tweet(cfg.tweet_len, cfg.hashtag_rate, &mut rng)))
                    .collect()
            };
            let first = account("a");
            let second = account("b");
            DualAccount { owner, first, second }
        })
        .collect())
}
