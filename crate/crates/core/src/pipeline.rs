//! End-to-end pipeline and its persisted artifacts.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::clustering::{self, ClusterAssignment, DistanceMatrix, Label};
use crate::corpus::{Corpus, GROUP_AFTER, GROUP_BEFORE};
use crate::embedding::{self, Embedding, KpcaModel};
use crate::error::{Error, Result};
use crate::features::{self, FeatureMatrix, Vocabulary};
use crate::fsutil::write_atomic;
use crate::relevance::{self, RelevanceTable};
use crate::text::{self, BigramSelection, TokenStream};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const LABELS_FILE: &str = "labels.csv";
pub const TOKENS_FILE: &str = "tokens.jsonl";
pub const BIGRAMS_FILE: &str = "bigrams.csv";
pub const EMBEDDING_FILE: &str = "embedding.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub min_df: usize,
    pub bigram_discount: u64,
    pub bigram_seed: u64,
    pub kpca_components: usize,
    pub eps: f64,
    pub min_pts: usize,
    pub epsilon: f64,
    pub top_k: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            min_df: 1,
            bigram_discount: text::DEFAULT_DISCOUNT,
            bigram_seed: 0,
            kpca_components: embedding::DEFAULT_COMPONENTS,
            eps: clustering::DEFAULT_EPS,
            min_pts: clustering::DEFAULT_MIN_PTS,
            epsilon: relevance::DEFAULT_EPSILON,
            top_k: crate::report::DEFAULT_TOP_K,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if !(self.eps > 0.0 && self.eps < 2.0) {
            return bad("eps must lie in (0, 2)");
        }
        if self.min_pts < 1 {
            return bad("min_pts must be at least 1");
        }
        if self.kpca_components < 1 {
            return bad("kpca_components must be at least 1");
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return bad("epsilon must be positive");
        }
        if self.min_df < 1 {
            return bad("min_df must be at least 1");
        }
        Ok(())
    }
}

/// Tokens with selected bigrams merged, plus the selection itself.
pub fn preprocess(corpus: &Corpus, config: &PipelineConfig) -> (Vec<TokenStream>, BigramSelection) {
    let raw = text::tokenize_corpus(corpus);
    let bigrams = text::learn_bigrams(&raw, config.bigram_discount, config.bigram_seed);
    let merged = text::apply_bigrams_all(&raw, &bigrams.pairs());
    (merged, bigrams)
}

#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub config: PipelineConfig,
    pub doc_ids: Vec<String>,
    pub bigrams: BigramSelection,
    pub streams: Vec<TokenStream>,
    pub features: FeatureMatrix,
    pub model: KpcaModel,
    pub embedding: Embedding,
    pub distances: DistanceMatrix,
    pub assignment: ClusterAssignment,
}

impl PipelineRun {
    pub fn vocab(&self) -> &Vocabulary {
        self.features.vocab()
    }

    pub fn relevance(&self) -> Result<RelevanceTable> {
        relevance::cluster_relevance(&self.streams, &self.assignment, self.vocab(), self.config.epsilon)
    }
}

/// tokenize → bigrams → tf-idf → kernel PCA → DBSCAN.
pub fn run(corpus: &Corpus, config: &PipelineConfig) -> Result<PipelineRun> {
    config.validate()?;
    let (streams, bigrams) = preprocess(corpus, config);
    let vocab = Vocabulary::build(&streams, config.min_df)?;
    let features = features::vectorize(&streams, &vocab);
    let (model, embedding) = embedding::fit_transform(&features, config.kpca_components)?;
    let distances = clustering::pairwise_distances(&embedding);
    let assignment = clustering::dbscan(&distances, config.eps, config.min_pts)?;
    Ok(PipelineRun {
        config: config.clone(),
        doc_ids: corpus.docs().iter().map(|d| d.id.clone()).collect(),
        bigrams,
        streams,
        features,
        model,
        embedding,
        distances,
        assignment,
    })
}

/// Relevance of the documents at/after `boundary` (first group) against
/// those before it (second group).
pub fn contrast(corpus: &Corpus, boundary: DateTime<Utc>, config: &PipelineConfig) -> Result<RelevanceTable> {
    config.validate()?;
    let split = corpus.split_by_period(boundary)?;
    let (streams, _) = preprocess(&split, config);
    let vocab = Vocabulary::build(&streams, config.min_df)?;
    let groups: Vec<Option<String>> = split.docs().iter().map(|d| d.group.clone()).collect();
    relevance::contrast_relevance(&streams, &groups, GROUP_AFTER, GROUP_BEFORE, &vocab, config.epsilon)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub config: PipelineConfig,
    pub corpus_hash: String,
    pub n_docs: usize,
    pub n_terms: usize,
    pub embedding_dim: usize,
    pub n_clusters: usize,
    pub n_noise: usize,
    pub bigram_threshold: Option<f64>,
    pub bigram_samples: usize,
    pub artifacts: Vec<String>,
}

impl Manifest {
    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let s = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        Ok(serde_json::from_str(&s)?)
    }

    /// Fails when `corpus` is not the corpus the artifacts were built from.
    pub fn check_corpus(&self, corpus: &Corpus) -> Result<()> {
        if self.corpus_hash != corpus.content_hash() {
            return Err(Error::InvalidParameter("stale artifacts; rerun cluster".into()));
        }
        Ok(())
    }
}

/// Writes labels, merged tokens, selected bigrams, the embedding and the
/// manifest into `dir`.
pub fn write_run(run: &PipelineRun, corpus: &Corpus, dir: &Path) -> Result<Manifest> {
    let artifacts = [LABELS_FILE, TOKENS_FILE, BIGRAMS_FILE, EMBEDDING_FILE];
    write_atomic(&dir.join(LABELS_FILE), run.assignment.to_csv(&run.doc_ids).as_bytes())?;
    let mut tokens = String::new();
    for s in &run.streams {
        tokens.push_str(&serde_json::to_string(s)?);
        tokens.push('\n');
    }
    write_atomic(&dir.join(TOKENS_FILE), tokens.as_bytes())?;
    write_atomic(&dir.join(BIGRAMS_FILE), run.bigrams.to_csv().as_bytes())?;
    write_atomic(&dir.join(EMBEDDING_FILE), run.embedding.to_csv().as_bytes())?;
    let manifest = Manifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config: run.config.clone(),
        corpus_hash: corpus.content_hash(),
        n_docs: corpus.len(),
        n_terms: run.vocab().len(),
        embedding_dim: run.embedding.dim(),
        n_clusters: run.assignment.n_clusters,
        n_noise: run.assignment.noise_count(),
        bigram_threshold: run.bigrams.threshold.is_finite().then_some(run.bigrams.threshold),
        bigram_samples: run.bigrams.n_random,
        artifacts: artifacts.iter().map(|s| s.to_string()).collect(),
    };
    let mut json = serde_json::to_string_pretty(&manifest)?;
    json.push('\n');
    write_atomic(&dir.join(MANIFEST_FILE), json.as_bytes())?;
    Ok(manifest)
}

/// Artifacts of an earlier `write_run`, checked against `corpus`.
#[derive(Debug, Clone)]
pub struct StoredRun {
    pub manifest: Manifest,
    pub streams: Vec<TokenStream>,
    pub assignment: ClusterAssignment,
    pub vocab: Vocabulary,
}

impl StoredRun {
    pub fn load(dir: &Path, corpus: &Corpus) -> Result<Self> {
        let manifest = Manifest::read(dir)?;
        manifest.check_corpus(corpus)?;
        let path = dir.join(TOKENS_FILE);
        let raw = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let streams = raw
            .lines()
            .enumerate()
            .map(|(i, l)| {
                serde_json::from_str::<TokenStream>(l).map_err(|e| Error::MalformedLine {
                    line: i + 1,
                    message: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let path = dir.join(LABELS_FILE);
        let raw = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let assignment = parse_labels_csv(&raw, &corpus.docs().iter().map(|d| d.id.clone()).collect::<Vec<_>>())?;
        if streams.len() != corpus.len() || streams.iter().zip(corpus.docs()).any(|(s, d)| s.doc_id != d.id) {
            return Err(Error::InvalidParameter("stale artifacts; rerun cluster".into()));
        }
        let vocab = Vocabulary::build(&streams, manifest.config.min_df)?;
        Ok(StoredRun {
            manifest,
            streams,
            assignment,
            vocab,
        })
    }

    pub fn relevance(&self) -> Result<RelevanceTable> {
        relevance::cluster_relevance(
            &self.streams,
            &self.assignment,
            &self.vocab,
            self.manifest.config.epsilon,
        )
    }
}

/// Parses `doc_id,label` rows (header required) in corpus order.
pub fn parse_labels_csv(input: &str, doc_ids: &[String]) -> Result<ClusterAssignment> {
    let mut by_id: HashMap<String, Label> = HashMap::new();
    for (i, line) in input.lines().enumerate().skip(1) {
        let (id, label) = line.rsplit_once(',').ok_or(Error::MalformedLine {
            line: i + 1,
            message: "expected doc_id,label".into(),
        })?;
        let id = unquote(id);
        let label: i64 = label.trim().parse().map_err(|_| Error::MalformedLine {
            line: i + 1,
            message: format!("bad label `{label}`"),
        })?;
        by_id.insert(id, Label::from_i64(label));
    }
    let labels = doc_ids
        .iter()
        .map(|id| {
            by_id
                .get(id)
                .copied()
                .ok_or_else(|| Error::InvalidParameter("stale artifacts; rerun cluster".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    let n_clusters = labels.iter().filter_map(|l| l.cluster()).max().map_or(0, |m| m + 1);
    Ok(ClusterAssignment { labels, n_clusters })
}

fn unquote(s: &str) -> String {
    match s.strip_prefix('"').and_then(|s| s.strip_suffix('"')) {
        Some(inner) => inner.replace("\"\"", "\""),
        None => s.to_string(),
    }
}
