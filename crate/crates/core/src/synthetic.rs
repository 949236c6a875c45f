//! Seeded synthetic corpora with planted structure, used by the test
//! suites and benchmarks.

use chrono::{Duration, TimeZone, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, Document};

#[derive(Debug, Clone)]
pub struct PlantedTopics {
    pub n_topics: usize,
    pub docs_per_topic: usize,
    pub keywords_per_topic: usize,
    /// Keyword tokens per document, drawn with replacement from the
    /// document's topic keywords.
    pub keyword_tokens: usize,
    pub filler_vocab: usize,
    pub filler_per_doc: usize,
    pub seed: u64,
}

impl Default for PlantedTopics {
    fn default() -> Self {
        PlantedTopics {
            n_topics: 3,
            docs_per_topic: 15,
            keywords_per_topic: 10,
            keyword_tokens: 25,
            filler_vocab: 50,
            filler_per_doc: 50,
            seed: 2017,
        }
    }
}

impl PlantedTopics {
    pub fn keyword(topic: usize, i: usize) -> String {
        format!("topic{topic}kw{i}")
    }

    pub fn keywords(&self, topic: usize) -> Vec<String> {
        (0..self.keywords_per_topic).map(|i| Self::keyword(topic, i)).collect()
    }

    /// Documents interleaved across topics (doc k belongs to topic
    /// `k % n_topics`), each a shuffled bag of topic keywords and filler.
    pub fn generate(&self) -> (Corpus, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let n = self.n_topics * self.docs_per_topic;
        let mut docs = Vec::with_capacity(n);
        let mut topics = Vec::with_capacity(n);
        for k in 0..n {
            let topic = k % self.n_topics;
            let mut words: Vec<String> = (0..self.filler_per_doc)
                .map(|_| format!("filler{}", rng.random_range(0..self.filler_vocab)))
                .collect();
            words.extend(
                (0..self.keyword_tokens).map(|_| Self::keyword(topic, rng.random_range(0..self.keywords_per_topic))),
            );
            words.shuffle(&mut rng);
            docs.push(Document::new(format!("doc{k:03}"), words.join(" ")));
            topics.push(topic);
        }
        (
            Corpus::new(docs, "synthetic planted topics").expect("valid corpus"),
            topics,
        )
    }
}

#[derive(Debug, Clone)]
pub struct TrendingPeriods {
    pub docs_per_period: usize,
    pub trending: Vec<String>,
    /// Probability that a later-period document carries each trending word.
    pub trending_rate: f64,
    pub filler_vocab: usize,
    pub filler_per_doc: usize,
    pub seed: u64,
}

impl Default for TrendingPeriods {
    fn default() -> Self {
        TrendingPeriods {
            docs_per_period: 60,
            trending: ["inauguration", "protest", "march", "devos", "avalanche"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            trending_rate: 0.35,
            filler_vocab: 300,
            filler_per_doc: 30,
            seed: 16,
        }
    }
}

impl TrendingPeriods {
    /// First period spans the three weeks from 2016-12-26, the second the
    /// week from 2017-01-16 (the returned boundary).
    pub fn generate(&self) -> (Corpus, chrono::DateTime<Utc>) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let before_start = Utc.with_ymd_and_hms(2016, 12, 26, 9, 0, 0).unwrap();
        let boundary = Utc.with_ymd_and_hms(2017, 1, 16, 0, 0, 0).unwrap();
        let mut docs = Vec::with_capacity(2 * self.docs_per_period);
        for period in 0..2 {
            for k in 0..self.docs_per_period {
                let ts = if period == 0 {
                    before_start + Duration::hours((k * 21 * 24 / self.docs_per_period) as i64)
                } else {
                    boundary + Duration::hours(6 + (k * 7 * 24 / self.docs_per_period) as i64)
                };
                let mut words: Vec<String> = (0..self.filler_per_doc)
                    .map(|_| format!("w{}", rng.random_range(0..self.filler_vocab)))
                    .collect();
                if period == 1 {
                    for t in &self.trending {
                        if rng.random_bool(self.trending_rate) {
                            words.push(t.clone());
                        }
                    }
                }
                words.shuffle(&mut rng);
                docs.push(Document::new(format!("p{period}d{k:03}"), words.join(" ")).with_timestamp(ts));
            }
        }
        (
            Corpus::new(docs, "synthetic two periods").expect("valid corpus"),
            boundary,
        )
    }
}
