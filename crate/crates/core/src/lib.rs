//! Topic discovery and relevant-word extraction for unlabeled text.
//!
//! Documents are tokenized (with distinctive bigrams merged), turned into
//! tf-idf vectors, reduced with linear kernel PCA and clustered with
//! cosine-distance DBSCAN. Each cluster is then summarized by the words
//! whose document-occurrence rate inside the cluster stands out against
//! the other clusters, rendered as word clouds or highlighted documents.
//!
//! ```no_run
//! use relwords::{corpus, pipeline::{self, PipelineConfig}};
//!
//! let corpus = corpus::load_jsonl("corpus.jsonl".as_ref())?;
//! let run = pipeline::run(&corpus, &PipelineConfig::default())?;
//! for c in 0..run.assignment.n_clusters {
//!     let top = run.relevance()?.rank_terms(c, 10)?;
//!     println!("{c}: {:?}", top.iter().map(|t| &t.term).collect::<Vec<_>>());
//! }
//! # Ok::<(), relwords::Error>(())
//! ```

pub mod clustering;
pub mod corpus;
pub mod embedding;
pub mod error;
pub mod features;
mod fsutil;
pub mod par;
pub mod pipeline;
pub mod relevance;
pub mod report;
mod stats;
pub mod synthetic;
pub mod text;

pub use error::{Error, Result};
pub use fsutil::write_atomic;
pub use stats::mean_pop_std;
