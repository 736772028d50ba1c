mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_tweetlink");
const GOLDEN: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/cli_evaluate_seed42.csv");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SYNTH: [&str; 12] = [
    "synth", "--authors", "100", "--tweets", "150", "--tweet-len", "40", "--concentration", "20", "--seed", "42",
    "--out",
];

/// The shared 100-author synthetic fixture: short tweets and flat styles, so
/// linkability still grows with AR size.
fn synth(dir: &Path) -> PathBuf {
    let out = dir.join("synth.jsonl");
    let o = Command::new(BIN).args(SYNTH).arg(&out).output().unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    out
}

fn stat(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| {
            let mut parts = l.split_whitespace();
            (parts.next() == Some(key)).then(|| parts.next().unwrap().to_string())
        })
        .unwrap_or_else(|| panic!("no {key} in\n{text}"))
}

#[test]
fn stats_on_jsonl() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(
        dir.path(),
        "three.jsonl",
        "{\"user\":\"a\",\"text\":\"one\"}\n{\"user\":\"a\",\"text\":\"two\"}\n{\"user\":\"b\",\"text\":\"three\"}\n",
    );
    let csv = dir.path().join("stats.csv");
    let o = run(&["stats", "--input", s(&input), "--out", s(&csv)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stat(&stdout(&o), "total_tweets"), "3");
    assert_eq!(stat(&stdout(&o), "total_authors"), "2");
    let csv = std::fs::read_to_string(csv).unwrap();
    assert!(csv.starts_with("metric,value\n"));
    assert!(csv.contains("total_tweets,3\n"));
}

#[test]
fn stats_on_snap() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(
        dir.path(),
        "two.txt",
        "T\t2009-06-11 16:56:42\nU\thttp://twitter.com/alpha\nW\tfirst tweet\n\n\
         T\t2009-06-11 16:57:00\nU\thttp://twitter.com/beta\nW\tsecond tweet\n",
    );
    let o = run(&["stats", "--input", s(&input), "--format", "snap"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stat(&stdout(&o), "total_tweets"), "2");
}

#[test]
fn unreadable_input_is_a_data_error() {
    let o = run(&["stats", "--input", "/nonexistent/tweets.jsonl"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/nonexistent/tweets.jsonl"));
}

#[test]
fn malformed_input_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "bad.jsonl", "{\"user\":\"a\",\"text\":\"ok\"}\nnot json\n");
    let o = run(&["stats", "--input", s(&input)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn evaluate_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    let input = synth(dir.path());
    let out = dir.path().join("report.csv");
    let o = run(&["evaluate", "--input", s(&input), "--scheme", "uni,bi", "--seed", "42", "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let got = std::fs::read_to_string(&out).unwrap();
    let golden = std::fs::read_to_string(GOLDEN).unwrap();
    assert_eq!(got, golden);
    // header plus five AR sizes per scheme
    assert_eq!(got.lines().count(), 1 + 2 * 5);
}

/// Re-derives every golden row with the brute-force scorer on the library's
/// split of the same fixture.
#[test]
fn golden_agrees_with_brute_force() {
    use tweetlink::experiment::{split, SplitConfig};

    let dir = tempfile::tempdir().unwrap();
    let corpus = tweetlink::corpus::load_jsonl(synth(dir.path())).unwrap();
    let pairs = split(corpus, &SplitConfig::standard(42)).unwrap();
    let golden = std::fs::read_to_string(GOLDEN).unwrap();
    for row in golden.lines().skip(1) {
        let f: Vec<&str> = row.split(',').collect();
        let scheme = match f[0] {
            "uni" => common::Scheme::Uni,
            "bi" => common::Scheme::Bi,
            other => panic!("unexpected scheme {other}"),
        };
        let ar: usize = f[2].parse().unwrap();
        let authors: Vec<(String, Vec<String>, Vec<String>)> = pairs
            .iter()
            .map(|p| {
                let texts = |t: &[tweetlink::corpus::Tweet]| t.iter().map(|t| t.text.clone()).collect();
                (p.author.to_string(), texts(&p.ir), texts(p.ar(ar)))
            })
            .collect();
        let hits = common::link_hits(&authors, scheme);
        let expected: Vec<String> = hits.iter().map(|&h| format!("{:.6}", h as f64 / 100.0)).collect();
        assert_eq!(f[4..7], expected[..], "row {row}");
    }
}

#[test]
fn evaluate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let input = synth(dir.path());
    let again = dir.path().join("again.jsonl");
    let o = Command::new(BIN).args(SYNTH).arg(&again).output().unwrap();
    assert!(o.status.success());
    assert_eq!(std::fs::read(&input).unwrap(), std::fs::read(&again).unwrap());

    let args = |out: &Path| {
        vec![
            "evaluate".to_string(),
            "--input".into(),
            s(&input).into(),
            "--scheme".into(),
            "uni,hashtag".into(),
            "--sample-n".into(),
            "60".into(),
            "--user-sizes".into(),
            "20,40".into(),
            "--seed".into(),
            "7".into(),
            "--out".into(),
            s(out).into(),
        ]
    };
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    let oa = Command::new(BIN).args(args(&a)).args(["--workers", "1"]).output().unwrap();
    let ob = Command::new(BIN).args(args(&b)).args(["--workers", "3"]).output().unwrap();
    assert!(oa.status.success() && ob.status.success(), "{}", stderr(&oa));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(stdout(&oa), stdout(&ob));
    // Hashtag-free synthetic tweets leave every hashtag AR empty.
    let csv = std::fs::read_to_string(&a).unwrap();
    assert!(csv.contains("hashtag,60,5,,0.000000,0.000000,0.000000,60,60\n"), "{csv}");
    assert!(csv.contains("uni,20,"));
}

#[test]
fn oversized_ar_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = synth(dir.path());
    let o = run(&["evaluate", "--input", s(&input), "--ar-sizes", "5,200", "--holdout", "100", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("200"));
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(run(&["evaluate", "--input", "x.jsonl"]).status.code(), Some(1)); // no seed
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    let o = run(&["evaluate", "--input", "x.jsonl", "--seed", "1", "--topk", "3"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn too_few_tweets_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "tiny.jsonl", "{\"user\":\"a\",\"text\":\"one\"}\n");
    let o = run(&["evaluate", "--input", s(&input), "--seed", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("split"), "{}", stderr(&o));
}

#[test]
fn train_beta_grid() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("tags.jsonl");
    let o = run(&[
        "synth", "--authors", "12", "--tweets", "200", "--hashtag-rate", "0.3", "--seed", "5", "--out", s(&input),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = dir.path().join("beta.csv");
    let o = run(&[
        "train-beta", "--input", s(&input), "--hashtag-min", "160", "--seed", "5", "--out", s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 11, "{csv}");
    assert!(rows[0].starts_with("0,") && rows[10].starts_with("1,"));
    assert_eq!(rows.iter().filter(|r| r.ends_with(",true")).count(), 1);
}

#[test]
fn train_beta_needs_two_authors() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("tags.jsonl");
    run(&["synth", "--authors", "3", "--tweets", "200", "--hashtag-rate", "0.3", "--seed", "5", "--out", s(&input)]);
    // no author has 10,000 hashtag tweets
    let o = run(&["train-beta", "--input", s(&input), "--hashtag-min", "10000", "--seed", "5"]);
    assert_eq!(o.status.code(), Some(2));
}

/// Three authors writing disjoint alphabets.
fn link_fixture(dir: &Path) -> PathBuf {
    let mut body = String::new();
    for (user, words) in [("abe", ["abba", "baba ab"]), ("cid", ["cdc", "dcdc cd"]), ("efi", ["fee", "efef fe"])] {
        for w in words {
            body.push_str(&format!("{{\"user\":\"{user}\",\"text\":\"{w}\"}}\n"));
        }
    }
    let corpus = write(dir, "link.jsonl", &body);
    let model = dir.join("uni.model");
    let o = run(&["build-model", "--input", s(&corpus), "--scheme", "uni", "--out", s(&model)]);
    assert!(o.status.success(), "{}", stderr(&o));
    model
}

fn ranked(out: &str) -> Vec<String> {
    out.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split('\t').nth(1).unwrap().to_string())
        .collect()
}

#[test]
fn link_puts_the_author_first() {
    let dir = tempfile::tempdir().unwrap();
    let model = link_fixture(dir.path());
    let query = write(dir.path(), "q.txt", "dcd\ncc dd\n");
    let o = run(&["link", "--model", s(&model), "--query", s(&query), "--top", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("# scheme=uni authors=3 query_tweets=2 empty_tokens=false\n"), "{out}");
    let ranked = ranked(&out);
    assert_eq!((ranked.len(), ranked[0].as_str()), (2, "cid"));
    assert!(out.lines().nth(1).unwrap().starts_with("1\tcid\t-"));
}

#[test]
fn link_empty_query_and_large_k() {
    let dir = tempfile::tempdir().unwrap();
    let model = link_fixture(dir.path());
    let query = write(dir.path(), "empty.txt", "");
    let o = run(&["link", "--model", s(&model), "--query", s(&query), "--top", "50"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("empty_tokens=true"));
    assert!(stderr(&o).contains("warning"));
    assert_eq!(ranked(&stdout(&o)), ["abe", "cid", "efi"]);
}

#[test]
fn link_scheme_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let model = link_fixture(dir.path());
    let query = write(dir.path(), "q.txt", "abab\n");
    let o = run(&["link", "--model", s(&model), "--query", s(&query), "--scheme", "bi"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("scheme"));
}

#[test]
fn prepare_applies_filters() {
    let dir = tempfile::tempdir().unwrap();
    let input = synth(dir.path());
    let out = dir.path().join("sample.jsonl");
    let o = run(&["prepare", "--input", s(&input), "--sample-n", "10", "--seed", "3", "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = run(&["stats", "--input", s(&out)]);
    assert_eq!(stat(&stdout(&o), "total_authors"), "10");
    assert_eq!(stat(&stdout(&o), "total_tweets"), "1500");
}

#[test]
fn dual_subcommand_runs() {
    let dir = tempfile::tempdir().unwrap();
    let input = synth(dir.path());
    let mut body = String::new();
    for (owner, letter) in [("own1", 'q'), ("own2", 'x')] {
        for acct in ["a", "b"] {
            for i in 0..120 {
                let word: String = std::iter::repeat_n(letter, 2 + i % 5).collect();
                body.push_str(&format!(
                    "{{\"owner\":\"{owner}\",\"user\":\"{owner}_{acct}\",\"text\":\"{word} {word}k\"}}\n"
                ));
            }
        }
    }
    let duals = write(dir.path(), "duals.jsonl", &body);
    let out = dir.path().join("dual.csv");
    let o = run(&["dual", "--input", s(&input), "--dual", s(&duals), "--seed", "42", "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 5, "{csv}");
    assert!(csv.contains("bi,102,50,,1.000000,1.000000,1.000000,2,0\n"), "{csv}");
}
