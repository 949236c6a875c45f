//! Tokenization and distinctive-bigram detection.
//!
//! Text is lowercased and split on every character that is not a letter or
//! digit. Bigrams are scored with a discounted co-occurrence ratio
//!
//! ```text
//! score(a, b) = (count(a b) - discount) * total_tokens / (count(a) * count(b))
//! ```
//!
//! and kept when they beat mean + 2 std of the same score over randomly
//! paired corpus tokens. Kept pairs are merged into `a_b` tokens.

use std::collections::{BTreeSet, HashMap};
use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::par::{self, Strategy};

/// Joiner placed between the two halves of a merged bigram.
pub const BIGRAM_JOINER: char = '_';

pub const DEFAULT_DISCOUNT: u64 = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenStream {
    pub doc_id: String,
    pub tokens: Vec<String>,
}

impl TokenStream {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// A token together with the byte range of the original text it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSpan {
    pub term: String,
    pub range: Range<usize>,
}

fn is_token_char(c: char, keep_joiner: bool) -> bool {
    c.is_alphanumeric() || (keep_joiner && c == BIGRAM_JOINER)
}

fn spans_impl(text: &str, keep_joiner: bool) -> Vec<TokenSpan> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut start = 0;
    let mut end = 0;
    for (pos, ch) in text.char_indices() {
        for lc in ch.to_lowercase() {
            if is_token_char(lc, keep_joiner) {
                if current.is_empty() {
                    start = pos;
                }
                current.push(lc);
                end = pos + ch.len_utf8();
            } else if !current.is_empty() {
                out.push(TokenSpan {
                    term: std::mem::take(&mut current),
                    range: start..end,
                });
            }
        }
    }
    if !current.is_empty() {
        out.push(TokenSpan {
            term: current,
            range: start..end,
        });
    }
    out
}

/// Lowercased alphanumeric tokens of `text` with their source byte ranges.
pub fn token_spans(text: &str) -> Vec<TokenSpan> {
    spans_impl(text, false)
}

pub fn normalize_tokenize(text: &str) -> Vec<String> {
    token_spans(text).into_iter().map(|s| s.term).collect()
}

/// Like [`normalize_tokenize`] but keeps the bigram joiner inside tokens,
/// so already-processed token streams survive a round trip through text.
pub fn retokenize(text: &str) -> Vec<String> {
    spans_impl(text, true).into_iter().map(|s| s.term).collect()
}

pub fn tokenize_corpus(corpus: &Corpus) -> Vec<TokenStream> {
    tokenize_corpus_with(corpus, Strategy::default())
}

pub fn tokenize_corpus_with(corpus: &Corpus, strategy: Strategy) -> Vec<TokenStream> {
    par::map_slice(strategy, corpus.docs(), |d| TokenStream {
        doc_id: d.id.clone(),
        tokens: normalize_tokenize(&d.text),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BigramCandidate {
    pub first: String,
    pub second: String,
    pub joint_count: u64,
    pub score: f64,
}

/// Corpus-wide unigram and adjacent-pair counts. Adjacency never crosses
/// document boundaries.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BigramStats {
    pub unigrams: HashMap<String, u64>,
    pub pairs: HashMap<(String, String), u64>,
    pub total_tokens: u64,
}

impl BigramStats {
    pub fn from_streams(streams: &[TokenStream]) -> Self {
        Self::from_streams_with(streams, Strategy::default())
    }

    pub fn from_streams_with(streams: &[TokenStream], strategy: Strategy) -> Self {
        par::map_slice(strategy, streams, Self::from_stream)
            .into_iter()
            .fold(BigramStats::default(), BigramStats::merge)
    }

    fn from_stream(stream: &TokenStream) -> Self {
        let mut stats = BigramStats::default();
        for t in &stream.tokens {
            *stats.unigrams.entry(t.clone()).or_default() += 1;
        }
        for w in stream.tokens.windows(2) {
            *stats.pairs.entry((w[0].clone(), w[1].clone())).or_default() += 1;
        }
        stats.total_tokens = stream.tokens.len() as u64;
        stats
    }

    /// Commutative merge of two count tables.
    pub fn merge(mut self, other: BigramStats) -> Self {
        for (k, v) in other.unigrams {
            *self.unigrams.entry(k).or_default() += v;
        }
        for (k, v) in other.pairs {
            *self.pairs.entry(k).or_default() += v;
        }
        self.total_tokens += other.total_tokens;
        self
    }

    fn unigram(&self, t: &str) -> u64 {
        self.unigrams.get(t).copied().unwrap_or(0)
    }

    fn joint(&self, a: &str, b: &str) -> u64 {
        // HashMap<(String, String)> cannot be queried by (&str, &str)
        self.pairs.get(&(a.to_string(), b.to_string())).copied().unwrap_or(0)
    }
}

/// `(joint - discount) * total / (count_a * count_b)`.
pub fn bigram_score(joint: u64, count_a: u64, count_b: u64, total: u64, discount: u64) -> f64 {
    (joint as f64 - discount as f64) * total as f64 / (count_a as f64 * count_b as f64)
}

/// Scores every adjacent pair whose joint count exceeds `discount`.
/// Sorted by (first, second).
pub fn score_bigrams(streams: &[TokenStream], discount: u64) -> Vec<BigramCandidate> {
    score_from_stats(&BigramStats::from_streams(streams), discount)
}

pub fn score_from_stats(stats: &BigramStats, discount: u64) -> Vec<BigramCandidate> {
    let mut out: Vec<BigramCandidate> = stats
        .pairs
        .iter()
        .filter(|(_, &joint)| joint > discount)
        .map(|((a, b), &joint)| BigramCandidate {
            first: a.clone(),
            second: b.clone(),
            joint_count: joint,
            score: bigram_score(joint, stats.unigram(a), stats.unigram(b), stats.total_tokens, discount),
        })
        .collect();
    out.sort_by(|x, y| (&x.first, &x.second).cmp(&(&y.first, &y.second)));
    out
}

/// Outcome of bigram selection, with the parameters that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct BigramSelection {
    pub selected: Vec<BigramCandidate>,
    pub threshold: f64,
    pub n_random: usize,
    pub seed: u64,
}

impl BigramSelection {
    pub fn pairs(&self) -> BTreeSet<(String, String)> {
        self.selected
            .iter()
            .map(|c| (c.first.clone(), c.second.clone()))
            .collect()
    }

    /// `first,second,score` lines with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("first,second,score\n");
        for c in &self.selected {
            out.push_str(&format!("{},{},{}\n", c.first, c.second, c.score));
        }
        out
    }
}

/// Mean and population standard deviation of the undiscounted score over
/// `n_random` pairs of tokens drawn independently and uniformly from all
/// token positions in the corpus.
pub fn random_baseline(stats: &BigramStats, streams: &[TokenStream], n_random: usize, seed: u64) -> (f64, f64) {
    let positions: Vec<&str> = streams
        .iter()
        .flat_map(|s| s.tokens.iter().map(String::as_str))
        .collect();
    if positions.is_empty() || n_random == 0 {
        return (0.0, 0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scores: Vec<f64> = (0..n_random)
        .map(|_| {
            let a = positions[rng.random_range(0..positions.len())];
            let b = positions[rng.random_range(0..positions.len())];
            bigram_score(
                stats.joint(a, b),
                stats.unigram(a),
                stats.unigram(b),
                stats.total_tokens,
                0,
            )
        })
        .collect();
    crate::stats::mean_pop_std(&scores)
}

/// Keeps candidates scoring above mean + 2 std of the random baseline.
/// `n_random` defaults to ten times the number of candidates.
pub fn select_bigrams(
    candidates: &[BigramCandidate],
    streams: &[TokenStream],
    n_random: Option<usize>,
    seed: u64,
) -> BigramSelection {
    let n_random = n_random.unwrap_or(10 * candidates.len());
    let stats = BigramStats::from_streams(streams);
    let empty = BigramSelection {
        selected: Vec::new(),
        threshold: f64::INFINITY,
        n_random,
        seed,
    };
    if stats.unigrams.len() < 2 || candidates.is_empty() {
        return empty;
    }
    let (mean, std) = random_baseline(&stats, streams, n_random, seed);
    let threshold = mean + 2.0 * std;
    let mut selected: Vec<BigramCandidate> = candidates.iter().filter(|c| c.score > threshold).cloned().collect();
    selected.sort_by(|x, y| (&x.first, &x.second).cmp(&(&y.first, &y.second)));
    BigramSelection {
        selected,
        threshold,
        n_random,
        seed,
    }
}

/// Scores and selects bigrams in one go.
pub fn learn_bigrams(streams: &[TokenStream], discount: u64, seed: u64) -> BigramSelection {
    let candidates = score_bigrams(streams, discount);
    select_bigrams(&candidates, streams, None, seed)
}

/// Greedy left-to-right merge of selected adjacent pairs. A token that was
/// consumed by a merge cannot start another one.
pub fn apply_bigrams(stream: &TokenStream, selected: &BTreeSet<(String, String)>) -> TokenStream {
    let toks = &stream.tokens;
    let mut out = Vec::with_capacity(toks.len());
    let mut i = 0;
    while i < toks.len() {
        if i + 1 < toks.len() && selected.contains(&(toks[i].clone(), toks[i + 1].clone())) {
            out.push(format!("{}{BIGRAM_JOINER}{}", toks[i], toks[i + 1]));
            i += 2;
        } else {
            out.push(toks[i].clone());
            i += 1;
        }
    }
    TokenStream {
        doc_id: stream.doc_id.clone(),
        tokens: out,
    }
}

pub fn apply_bigrams_all(streams: &[TokenStream], selected: &BTreeSet<(String, String)>) -> Vec<TokenStream> {
    par::map_slice(Strategy::default(), streams, |s| apply_bigrams(s, selected))
}
