//! Brute-force reference implementation used to check the library.
//!
//! Everything here is written from the smoothing formula directly, with its
//! own ASCII-only tokenizer and hash-map profiles. It shares no code with the
//! library's tokenizer or scorer. Inputs must be ASCII.

#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::HashMap;

use num_bigint::BigUint;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    Uni,
    Bi,
    Tag,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Uni, Scheme::Bi, Scheme::Tag];

    pub fn vocab(self) -> u64 {
        match self {
            Scheme::Uni => 26,
            Scheme::Bi => 676,
            Scheme::Tag => 37,
        }
    }
}

/// Token strings (`"a"`, `"th"`, `"_"`) in order of appearance.
pub fn tokens(text: &str, scheme: Scheme) -> Vec<String> {
    assert!(text.is_ascii(), "oracle handles ASCII only");
    let lower = text.to_ascii_lowercase();
    match scheme {
        Scheme::Uni => lower
            .chars()
            .filter(|c| c.is_ascii_alphabetic())
            .map(String::from)
            .collect(),
        Scheme::Bi => lower
            .split(|c: char| !c.is_ascii_alphabetic())
            .flat_map(|word| {
                let chars: Vec<char> = word.chars().collect();
                chars
                    .windows(2)
                    .map(|w| format!("{}{}", w[0], w[1]))
                    .collect::<Vec<_>>()
            })
            .collect(),
        Scheme::Tag => {
            let chars: Vec<char> = lower.chars().collect();
            let mut out = Vec::new();
            let mut i = 0;
            while i < chars.len() {
                if chars[i] == '#' {
                    let mut j = i + 1;
                    while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                        out.push(chars[j].to_string());
                        j += 1;
                    }
                    i = j.max(i + 1);
                } else {
                    i += 1;
                }
            }
            out
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Profile {
    pub counts: HashMap<String, u64>,
    pub total: u64,
}

impl Profile {
    pub fn from_texts<'a>(texts: impl IntoIterator<Item = &'a str>, scheme: Scheme) -> Self {
        let mut p = Profile::default();
        for t in texts {
            for tok in tokens(t, scheme) {
                *p.counts.entry(tok).or_default() += 1;
                p.total += 1;
            }
        }
        p
    }

    pub fn prob(&self, token: &str, vocab: u64) -> f64 {
        let c = self.counts.get(token).copied().unwrap_or(0);
        (c + 1) as f64 / (self.total + vocab) as f64
    }
}

/// Σ over every token occurrence of ln P(token | profile).
pub fn score(profile: &Profile, query: &[String], vocab: u64) -> f64 {
    query.iter().map(|t| profile.prob(t, vocab).ln()).sum()
}

/// The likelihood Π P(t | profile) as an exact fraction.
pub fn exact_likelihood(profile: &Profile, query: &[String], vocab: u64) -> (BigUint, BigUint) {
    let mut multiplicity: HashMap<&str, u32> = HashMap::new();
    for t in query {
        *multiplicity.entry(t.as_str()).or_default() += 1;
    }
    let mut num = BigUint::from(1u32);
    for (t, n) in multiplicity {
        num *= BigUint::from(profile.counts.get(t).copied().unwrap_or(0) + 1).pow(n);
    }
    let den = BigUint::from(profile.total + vocab).pow(query.len() as u32);
    (num, den)
}

/// Author ids ranked by exact likelihood, ties to the smaller id.
pub fn exact_ranking(profiles: &[(String, Profile)], query: &[String], vocab: u64) -> Vec<String> {
    let lik: Vec<(BigUint, BigUint)> = profiles
        .iter()
        .map(|(_, p)| exact_likelihood(p, query, vocab))
        .collect();
    let mut order: Vec<usize> = (0..profiles.len()).collect();
    order.sort_by(|&a, &b| {
        let (na, da) = &lik[a];
        let (nb, db) = &lik[b];
        // a before b when L_a > L_b
        (nb * da)
            .cmp(&(na * db))
            .then_with(|| profiles[a].0.cmp(&profiles[b].0))
    });
    order.into_iter().map(|i| profiles[i].0.clone()).collect()
}

/// 0-based exact rank of `target`: authors with a strictly larger
/// likelihood, plus tied authors with a smaller id.
pub fn exact_rank_of(profiles: &[(String, Profile)], query: &[String], vocab: u64, target: &str) -> usize {
    let lik: Vec<(BigUint, BigUint)> = profiles
        .iter()
        .map(|(_, p)| exact_likelihood(p, query, vocab))
        .collect();
    let t = profiles.iter().position(|(a, _)| a == target).expect("target profiled");
    let (nt, dt) = &lik[t];
    (0..profiles.len())
        .filter(|&i| {
            let (ni, di) = &lik[i];
            match (ni * dt).cmp(&(nt * di)) {
                Ordering::Greater => true,
                Ordering::Equal => profiles[i].0 < profiles[t].0,
                Ordering::Less => false,
            }
        })
        .count()
}

/// Success counts within top 1/5/10 for a brute-force evaluation where every
/// author's IR trains a profile and their AR is linked against all profiles.
/// ARs without tokens count as misses.
pub fn link_hits(authors: &[(String, Vec<String>, Vec<String>)], scheme: Scheme) -> [u64; 3] {
    let vocab = scheme.vocab();
    let profiles: Vec<(String, Profile)> = authors
        .iter()
        .map(|(id, ir, _)| (id.clone(), Profile::from_texts(ir.iter().map(String::as_str), scheme)))
        .collect();
    let mut hits = [0u64; 3];
    for (id, _, ar) in authors {
        let query: Vec<String> = ar.iter().flat_map(|t| tokens(t, scheme)).collect();
        if query.is_empty() {
            continue;
        }
        let r = exact_rank_of(&profiles, &query, vocab, id);
        for (slot, k) in hits.iter_mut().zip([1, 5, 10]) {
            *slot += (r < k) as u64;
        }
    }
    hits
}
