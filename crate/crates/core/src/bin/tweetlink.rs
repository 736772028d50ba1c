use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use tweetlink::corpus::{self, AuthorCorpus, Tweet};
use tweetlink::experiment::{
    self, BetaTrainResult, LinkabilityReport, Method, SplitConfig, SynthConfig, TopK,
};
use tweetlink::model::{BetaWeight, NbModel};
use tweetlink::tokenize::{self, TokenScheme};
use tweetlink::Error;

#[derive(Parser)]
#[command(name = "tweetlink", version, about = "Authorship linkage for tweet corpora")]
struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print corpus statistics.
    Stats(StatsArgs),
    /// Filter and sample a corpus, writing JSONL.
    Prepare(PrepareArgs),
    /// Generate a synthetic corpus as JSONL.
    Synth(SynthArgs),
    /// Run the IR/AR linkability sweep.
    Evaluate(EvaluateArgs),
    /// Grid-search β on IR-internal splits.
    TrainBeta(TrainBetaArgs),
    /// Merge dual-account owners into a base population and evaluate them.
    Dual(DualArgs),
    /// Build and save a model from every tweet of every author.
    BuildModel(BuildModelArgs),
    /// Rank the authors of a saved model for a batch of query tweets.
    Link(LinkArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Jsonl,
    Snap,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    Uni,
    Bi,
    Hashtag,
    Combined,
}

impl SchemeArg {
    fn token_scheme(self) -> Option<TokenScheme> {
        match self {
            SchemeArg::Uni => Some(TokenScheme::TextUnigram),
            SchemeArg::Bi => Some(TokenScheme::TextBigram),
            SchemeArg::Hashtag => Some(TokenScheme::HashtagUnigram),
            SchemeArg::Combined => None,
        }
    }
}

#[derive(Args)]
struct InputArgs {
    /// Input corpus files; authors appearing in several files are concatenated.
    #[arg(long, required = true, num_args = 1..)]
    input: Vec<PathBuf>,

    #[arg(long, value_enum, default_value = "jsonl")]
    format: Format,

    /// Drop tweets starting with "RT @".
    #[arg(long)]
    strip_retweets: bool,
}

#[derive(Args)]
struct PopulationArgs {
    /// Keep authors with at least this many tweets.
    #[arg(long, default_value_t = 1)]
    min_tweets: usize,

    /// Keep authors with at most this many tweets.
    #[arg(long)]
    max_tweets: Option<usize>,

    /// Randomly keep this many authors after the tweet-count filter.
    #[arg(long)]
    sample_n: Option<usize>,

    /// Keep only hashtag-bearing tweets, then authors with at least this many.
    #[arg(long)]
    hashtag_min: Option<usize>,
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    input: InputArgs,

    /// Also write the statistics as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PrepareArgs {
    #[command(flatten)]
    input: InputArgs,

    #[command(flatten)]
    population: PopulationArgs,

    #[arg(long)]
    seed: u64,

    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    authors: usize,

    #[arg(long)]
    tweets: usize,

    #[arg(long, default_value_t = 120)]
    tweet_len: usize,

    #[arg(long, default_value_t = 0.3)]
    concentration: f64,

    /// Probability that a word is written as a hashtag.
    #[arg(long, default_value_t = 0.0)]
    hashtag_rate: f64,

    #[arg(long)]
    seed: u64,

    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SplitArgs {
    /// Tweets held out per author as the AR pool.
    #[arg(long, default_value_t = experiment::DEFAULT_HOLDOUT)]
    holdout: usize,

    #[arg(long, value_delimiter = ',', default_values_t = experiment::DEFAULT_AR_SIZES)]
    ar_sizes: Vec<usize>,

    /// Top-k columns shown in the printed table (subset of 1,5,10).
    #[arg(long, value_delimiter = ',', default_values_t = experiment::TOP_KS)]
    topk: Vec<usize>,

    #[arg(long)]
    seed: u64,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    input: InputArgs,

    #[command(flatten)]
    population: PopulationArgs,

    #[command(flatten)]
    split: SplitArgs,

    #[arg(long, value_enum, value_delimiter = ',', default_value = "uni")]
    scheme: Vec<SchemeArg>,

    /// β for the combined scheme: a number in [0, 1] or `train`.
    #[arg(long, default_value = "0.6")]
    beta: String,

    /// Also evaluate on seeded author subsets of these sizes.
    #[arg(long, value_delimiter = ',')]
    user_sizes: Vec<usize>,

    /// CSV report path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainBetaArgs {
    #[command(flatten)]
    input: InputArgs,

    #[command(flatten)]
    population: PopulationArgs,

    #[arg(long, default_value_t = experiment::DEFAULT_HOLDOUT)]
    holdout: usize,

    #[arg(long, default_value_t = experiment::DEFAULT_INNER_AR)]
    inner_ar: usize,

    #[arg(long, default_value_t = 0.1)]
    grid_step: f64,

    #[arg(long, default_value = "top1")]
    metric: TopK,

    #[arg(long)]
    seed: u64,

    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DualArgs {
    #[command(flatten)]
    input: InputArgs,

    #[command(flatten)]
    population: PopulationArgs,

    /// JSONL of dual-account tweets with fields owner, user, text.
    #[arg(long)]
    dual: PathBuf,

    #[arg(long, default_value_t = experiment::DEFAULT_HOLDOUT)]
    holdout: usize,

    #[arg(long, value_delimiter = ',', default_values_t = [5, 10, 20, 50])]
    ar_sizes: Vec<usize>,

    #[arg(long, value_enum, default_value = "bi")]
    scheme: SchemeArg,

    #[arg(long)]
    seed: u64,

    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BuildModelArgs {
    #[command(flatten)]
    input: InputArgs,

    #[arg(long, value_enum)]
    scheme: SchemeArg,

    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum QueryFormat {
    /// One tweet per line.
    Text,
    Jsonl,
    Snap,
}

#[derive(Args)]
struct LinkArgs {
    #[arg(long)]
    model: PathBuf,

    #[arg(long)]
    query: PathBuf,

    #[arg(long, value_enum, default_value = "text")]
    query_format: QueryFormat,

    /// Expected scheme of the model.
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,

    /// Number of candidates printed.
    #[arg(long, default_value_t = 10)]
    top: usize,
}

/// An error annotated with the pipeline stage it came from.
struct Failure {
    stage: &'static str,
    error: Error,
}

type CliResult<T> = std::result::Result<T, Failure>;

trait Stage<T> {
    fn stage(self, stage: &'static str) -> CliResult<T>;
}

impl<T> Stage<T> for tweetlink::Result<T> {
    fn stage(self, stage: &'static str) -> CliResult<T> {
        self.map_err(|error| Failure { stage, error })
    }
}

fn config_error(msg: impl Into<String>) -> Failure {
    Failure {
        stage: "config",
        error: Error::Config(msg.into()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };

    if let Some(n) = cli.workers {
        if n == 0 {
            eprintln!("error: config: --workers must be at least 1");
            return ExitCode::from(1);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .expect("global pool configured once");
    }

    let result = match cli.command {
        Command::Stats(a) => cmd_stats(a),
        Command::Prepare(a) => cmd_prepare(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::TrainBeta(a) => cmd_train_beta(a),
        Command::Dual(a) => cmd_dual(a),
        Command::BuildModel(a) => cmd_build_model(a),
        Command::Link(a) => cmd_link(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}: {}", f.stage, f.error);
            ExitCode::from(if f.error.is_config_error() { 1 } else { 2 })
        }
    }
}

fn load(args: &InputArgs) -> CliResult<AuthorCorpus> {
    let mut corpus = AuthorCorpus::new();
    for path in &args.input {
        let part = match args.format {
            Format::Jsonl => corpus::load_jsonl(path),
            Format::Snap => corpus::load_snap_blocks(path),
        }
        .stage("load")?;
        corpus.extend(part);
    }
    if args.strip_retweets {
        corpus = corpus.strip_retweets();
    }
    Ok(corpus)
}

fn select(corpus: AuthorCorpus, p: &PopulationArgs, seed: u64) -> CliResult<AuthorCorpus> {
    let mut corpus = corpus
        .filter_by_prolificacy(p.min_tweets, p.max_tweets)
        .stage("filter")?;
    if let Some(n) = p.sample_n {
        corpus = corpus.sample_authors(n, seed).stage("sample")?;
    }
    if let Some(min) = p.hashtag_min {
        corpus = corpus.filter_hashtag_bearing(min);
    }
    Ok(corpus)
}

fn create(path: &Path, stage: &'static str) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| Failure {
            stage,
            error: Error::Io {
                path: path.to_path_buf(),
                source,
            },
        })
}

fn io_failure<'a>(path: &'a Path, stage: &'static str) -> impl FnOnce(std::io::Error) -> Failure + 'a {
    move |source| Failure {
        stage,
        error: Error::Io {
            path: path.to_path_buf(),
            source,
        },
    }
}

fn check_topk(ks: &[usize]) -> CliResult<()> {
    match ks.iter().find(|k| !experiment::TOP_KS.contains(k)) {
        Some(k) => Err(config_error(format!("--topk {k} is not one of 1, 5, 10"))),
        None => Ok(()),
    }
}

fn cmd_stats(args: StatsArgs) -> CliResult<()> {
    let corpus = load(&args.input)?;
    let stats = corpus::corpus_stats(&corpus, &corpus::DEFAULT_STAT_THRESHOLDS);
    println!("total_tweets           {}", stats.total_tweets);
    println!("total_authors          {}", stats.total_authors);
    println!("max_tweets_per_author  {}", stats.max_tweets_per_author);
    println!("min_tweets_per_author  {}", stats.min_tweets_per_author);
    for (t, f) in &stats.fraction_at_least {
        println!("authors_with_>={t:<6}   {:.4}%", f * 100.0);
    }
    if let Some(out) = &args.out {
        let mut w = create(out, "write")?;
        let mut lines = vec![
            format!("total_tweets,{}", stats.total_tweets),
            format!("total_authors,{}", stats.total_authors),
            format!("max_tweets_per_author,{}", stats.max_tweets_per_author),
            format!("min_tweets_per_author,{}", stats.min_tweets_per_author),
        ];
        lines.extend(
            stats
                .fraction_at_least
                .iter()
                .map(|(t, f)| format!("fraction_at_least_{t},{f:.6}")),
        );
        writeln!(w, "metric,value\n{}", lines.join("\n"))
            .and_then(|_| w.flush())
            .map_err(io_failure(out, "write"))?;
    }
    Ok(())
}

fn cmd_prepare(args: PrepareArgs) -> CliResult<()> {
    let corpus = select(load(&args.input)?, &args.population, args.seed)?;
    let mut w = create(&args.out, "write")?;
    corpus::write_jsonl(&corpus, &mut w)
        .and_then(|_| w.flush())
        .map_err(io_failure(&args.out, "write"))?;
    println!(
        "wrote {} tweets from {} authors to {}",
        corpus.num_tweets(),
        corpus.num_authors(),
        args.out.display()
    );
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> CliResult<()> {
    let cfg = SynthConfig::new(args.authors, args.tweets, args.tweet_len, args.concentration, args.seed)
        .with_hashtag_rate(args.hashtag_rate);
    let corpus = experiment::synth_corpus(&cfg).stage("synth")?;
    let mut w = create(&args.out, "write")?;
    corpus::write_jsonl(&corpus, &mut w)
        .and_then(|_| w.flush())
        .map_err(io_failure(&args.out, "write"))?;
    Ok(())
}

fn parse_beta(s: &str) -> CliResult<Option<BetaWeight>> {
    if s == "train" {
        return Ok(None);
    }
    let v: f64 = s
        .parse()
        .map_err(|_| config_error(format!("--beta must be a number or `train`, got {s:?}")))?;
    BetaWeight::new(v).map(Some).stage("config")
}

fn write_report(report: &LinkabilityReport, out: Option<&Path>, ks: &[usize]) -> CliResult<()> {
    print!("{}", report.table(ks));
    if let Some(out) = out {
        let mut w = create(out, "write")?;
        report.write_csv(&mut w).stage("write")?;
        w.flush().map_err(io_failure(out, "write"))?;
    }
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs) -> CliResult<()> {
    let split_cfg = SplitConfig::new(args.split.holdout, args.split.ar_sizes.clone(), args.split.seed)
        .stage("config")?;
    check_topk(&args.split.topk)?;
    let beta = parse_beta(&args.beta)?;
    if args.user_sizes.contains(&0) {
        return Err(config_error("--user-sizes entries must be at least 1"));
    }

    let corpus = select(load(&args.input)?, &args.population, args.split.seed)?;
    let pairs = experiment::split(corpus, &split_cfg).stage("split")?;
    if pairs.is_empty() {
        return Err(Failure {
            stage: "split",
            error: Error::Config("no authors left after filtering".into()),
        });
    }

    let mut report = LinkabilityReport::default();
    for &scheme in &args.scheme {
        let method = match scheme.token_scheme() {
            Some(s) => Method::Single(s),
            None => {
                let beta = match beta {
                    Some(b) => b,
                    None => {
                        let trained = experiment::train_beta(
                            &pairs,
                            experiment::DEFAULT_INNER_AR,
                            0.1,
                            TopK::Top1,
                        )
                        .stage("train-beta")?;
                        println!("trained beta = {}", trained.chosen.value());
                        trained.chosen
                    }
                };
                Method::Combined(beta)
            }
        };
        report.extend(experiment::evaluate(&pairs, method, split_cfg.ar_sizes()).stage("evaluate")?);
        if !args.user_sizes.is_empty() {
            report.extend(
                experiment::vary_users(
                    &pairs,
                    &args.user_sizes,
                    method,
                    split_cfg.ar_sizes(),
                    split_cfg.seed(),
                )
                .stage("vary-users")?,
            );
        }
    }
    write_report(&report, args.out.as_deref(), &args.split.topk)
}

fn cmd_train_beta(args: TrainBetaArgs) -> CliResult<()> {
    let split_cfg = SplitConfig::new(args.holdout, vec![args.holdout], args.seed).stage("config")?;
    experiment::beta_grid(args.grid_step).stage("config")?;
    let mut population = args.population;
    population.hashtag_min.get_or_insert(3 * args.holdout);
    let corpus = select(load(&args.input)?, &population, args.seed)?;
    if corpus.num_authors() < 2 {
        return Err(Failure {
            stage: "filter",
            error: Error::TooFewAuthors {
                found: corpus.num_authors(),
                needed: 2,
            },
        });
    }
    let pairs = experiment::split(corpus, &split_cfg).stage("split")?;
    let result: BetaTrainResult =
        experiment::train_beta(&pairs, args.inner_ar, args.grid_step, args.metric).stage("train-beta")?;
    println!("{:>5} {:>8} {:>8} {:>8}", "beta", "top1", "top5", "top10");
    for row in &result.grid {
        println!(
            "{:>5.2} {:>8.4} {:>8.4} {:>8.4}",
            row.beta.value(),
            row.hits.ratio(0),
            row.hits.ratio(1),
            row.hits.ratio(2)
        );
    }
    println!("chosen beta = {}", result.chosen.value());
    if let Some(out) = &args.out {
        let mut w = create(out, "write")?;
        result.write_csv(&mut w).stage("write")?;
        w.flush().map_err(io_failure(out, "write"))?;
    }
    Ok(())
}

fn cmd_dual(args: DualArgs) -> CliResult<()> {
    let split_cfg = SplitConfig::new(args.holdout, vec![args.holdout], args.seed).stage("config")?;
    if let Some(&bad) = args.ar_sizes.iter().find(|&&s| s == 0 || s > experiment::DUAL_MAX_AR) {
        return Err(config_error(format!(
            "dual AR size {bad} must lie in 1..={}",
            experiment::DUAL_MAX_AR
        )));
    }
    let method = match args.scheme.token_scheme() {
        Some(s) => Method::Single(s),
        None => Method::Combined(BetaWeight::new(experiment::DEFAULT_BETA).expect("valid")),
    };
    let corpus = select(load(&args.input)?, &args.population, args.seed)?;
    let base = experiment::split(corpus, &split_cfg).stage("split")?;
    let duals = experiment::load_dual_jsonl(&args.dual).stage("load-dual")?;
    let dual_ids: BTreeSet<String> = duals.iter().map(|d| d.owner.to_string()).collect();
    let merged = experiment::merge_dual(base, duals, args.holdout, args.seed).stage("merge")?;
    println!("{} candidates, {} dual-account owners", merged.len(), dual_ids.len());
    let report =
        experiment::evaluate_dual(&merged, &dual_ids, method, &args.ar_sizes).stage("evaluate")?;
    write_report(&report, args.out.as_deref(), &experiment::TOP_KS)
}

fn cmd_build_model(args: BuildModelArgs) -> CliResult<()> {
    let scheme = args
        .scheme
        .token_scheme()
        .ok_or_else(|| config_error("a saved model uses a single scheme; `combined` is not supported"))?;
    let corpus = load(&args.input)?;
    let model = NbModel::build(corpus.iter(), scheme).stage("build")?;
    model.save(&args.out).stage("write")?;
    println!("{} profiles ({scheme}) written to {}", model.num_authors(), args.out.display());
    Ok(())
}

fn read_query(path: &Path, format: QueryFormat) -> CliResult<Vec<Tweet>> {
    let tweets: Vec<Tweet> = match format {
        QueryFormat::Jsonl => corpus::load_jsonl(path)
            .stage("load-query")?
            .into_authors()
            .flat_map(|(_, t)| t)
            .collect(),
        QueryFormat::Snap => corpus::load_snap_blocks(path)
            .stage("load-query")?
            .into_authors()
            .flat_map(|(_, t)| t)
            .collect(),
        QueryFormat::Text => {
            let file = File::open(path).map_err(io_failure(path, "load-query"))?;
            let mut tweets = Vec::new();
            for line in BufReader::new(file).lines() {
                let line = line.map_err(io_failure(path, "load-query"))?;
                if !line.trim().is_empty() {
                    tweets.push(Tweet::new("query", line));
                }
            }
            tweets
        }
    };
    Ok(tweets)
}

fn cmd_link(args: LinkArgs) -> CliResult<()> {
    let model = NbModel::load(&args.model).stage("load-model")?;
    if let Some(flag) = args.scheme {
        let expected = flag
            .token_scheme()
            .ok_or_else(|| config_error("`combined` cannot be used with a saved model"))?;
        if expected != model.scheme() {
            return Err(Failure {
                stage: "config",
                error: Error::SchemeMismatch {
                    expected,
                    actual: model.scheme(),
                },
            });
        }
    }
    let query = read_query(&args.query, args.query_format)?;
    let tokens = tokenize::count(&query, model.scheme());
    if tokens.is_empty() {
        eprintln!("warning: query has no {} tokens; ranking is by author id only", model.scheme());
    }
    let ranking = model.rank(&tokens).stage("rank")?;
    println!(
        "# scheme={} authors={} query_tweets={} empty_tokens={}",
        model.scheme(),
        model.num_authors(),
        query.len(),
        tokens.is_empty()
    );
    for (i, (author, score)) in ranking.top(args.top).iter().enumerate() {
        println!("{}\t{}\t{:.6}", i + 1, author, score);
    }
    Ok(())
}
