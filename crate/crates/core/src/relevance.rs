//! Relevant-word scoring.
//!
//! For a target cluster `c` and term `t`:
//!
//! ```text
//! TPR    = share of c's documents containing t
//! FPR    = mean + population std of t's TPR over all other clusters
//! r_diff = max(TPR - FPR, 0)
//! z      = TPR / max(FPR, ε)
//! r_quot = (min(max(z, 1), 4) - 1) / 3
//! r      = (r_diff + r_quot) / 2
//! ```
//!
//! Noise documents belong to no cluster and are ignored entirely.

use std::cmp::Ordering;
use std::collections::HashSet;

use crate::clustering::{ClusterAssignment, Label};
use crate::error::{Error, Result};
use crate::features::Vocabulary;
use crate::stats::mean_pop_std;
use crate::text::TokenStream;

pub const DEFAULT_EPSILON: f64 = 1e-8;

/// Per-cluster document counts and per-(cluster, term) counts of documents
/// containing the term.
#[derive(Debug, Clone, PartialEq)]
pub struct OccurrenceIndex {
    names: Vec<String>,
    terms: Vec<String>,
    cluster_sizes: Vec<usize>,
    /// `[cluster][term]`
    contains: Vec<Vec<usize>>,
}

impl OccurrenceIndex {
    /// `labels[k]` is the group of document `k`, `None` for unassigned.
    /// `names` gives one display name per group.
    pub fn build(
        streams: &[TokenStream],
        labels: &[Option<usize>],
        names: Vec<String>,
        vocab: &Vocabulary,
    ) -> Result<Self> {
        if streams.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: streams.len(),
                actual: labels.len(),
            });
        }
        let n_groups = names.len();
        let mut cluster_sizes = vec![0; n_groups];
        let mut contains = vec![vec![0; vocab.len()]; n_groups];
        for (stream, label) in streams.iter().zip(labels) {
            let Some(c) = *label else { continue };
            if c >= n_groups {
                return Err(Error::UnknownCluster(c));
            }
            cluster_sizes[c] += 1;
            let present: HashSet<usize> = stream.tokens.iter().filter_map(|t| vocab.index_of(t)).collect();
            for i in present {
                contains[c][i] += 1;
            }
        }
        Ok(OccurrenceIndex {
            names,
            terms: vocab.terms().to_vec(),
            cluster_sizes,
            contains,
        })
    }

    /// Index over DBSCAN clusters, named by their numeric id.
    pub fn from_assignment(
        streams: &[TokenStream],
        assignment: &ClusterAssignment,
        vocab: &Vocabulary,
    ) -> Result<Self> {
        let labels: Vec<Option<usize>> = assignment.labels.iter().map(|l| Label::cluster(*l)).collect();
        let names = (0..assignment.n_clusters).map(|c| c.to_string()).collect();
        Self::build(streams, &labels, names, vocab)
    }

    pub fn n_clusters(&self) -> usize {
        self.names.len()
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn cluster_size(&self, c: usize) -> usize {
        self.cluster_sizes[c]
    }

    pub fn contained(&self, c: usize, t: usize) -> usize {
        self.contains[c][t]
    }
}

fn check_cluster(index: &OccurrenceIndex, c: usize) -> Result<()> {
    if c >= index.n_clusters() {
        return Err(Error::UnknownCluster(c));
    }
    if index.cluster_sizes[c] == 0 {
        return Err(Error::EmptyCluster(c));
    }
    Ok(())
}

pub fn tpr(index: &OccurrenceIndex, c: usize, t: usize) -> Result<f64> {
    check_cluster(index, c)?;
    Ok(index.contains[c][t] as f64 / index.cluster_sizes[c] as f64)
}

/// Mean plus population standard deviation of the other clusters' rates;
/// 0 when there are none.
pub fn fpr_from_rates(others: &[f64]) -> f64 {
    // sorted so the result does not depend on cluster numbering
    let mut sorted = others.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (mean, std) = mean_pop_std(&sorted);
    mean + std
}

/// Unclamped FPR of term `t` for cluster `c`.
pub fn fpr(index: &OccurrenceIndex, c: usize, t: usize) -> Result<f64> {
    check_cluster(index, c)?;
    let others = (0..index.n_clusters())
        .filter(|&l| l != c)
        .map(|l| tpr(index, l, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(fpr_from_rates(&others))
}

pub fn score_diff(tpr: f64, fpr: f64) -> f64 {
    (tpr - fpr).max(0.0)
}

pub fn score_quot(tpr: f64, fpr: f64, epsilon: f64) -> f64 {
    let z = tpr / fpr.max(epsilon);
    (z.clamp(1.0, 4.0) - 1.0) / 3.0
}

pub fn score_final(tpr: f64, fpr: f64, epsilon: f64) -> f64 {
    0.5 * (score_diff(tpr, fpr) + score_quot(tpr, fpr, epsilon))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TermScore {
    pub tpr: f64,
    /// FPR clamped to at most 1.
    pub fpr: f64,
    /// FPR as used in the scores; mean + std may exceed 1.
    pub fpr_raw: f64,
    pub r_diff: f64,
    pub r_quot: f64,
    pub r: f64,
}

impl TermScore {
    pub fn new(tpr: f64, fpr_raw: f64, epsilon: f64) -> Self {
        let r_diff = score_diff(tpr, fpr_raw);
        let r_quot = score_quot(tpr, fpr_raw, epsilon);
        TermScore {
            tpr,
            fpr: fpr_raw.min(1.0),
            fpr_raw,
            r_diff,
            r_quot,
            r: 0.5 * (r_diff + r_quot),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedTerm {
    pub term: String,
    pub r: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelevanceTable {
    names: Vec<String>,
    terms: Vec<String>,
    /// `[cluster][term]`
    scores: Vec<Vec<TermScore>>,
}

impl RelevanceTable {
    pub fn build(index: &OccurrenceIndex, epsilon: f64) -> Result<Self> {
        if epsilon.is_nan() || epsilon <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        for c in 0..index.n_clusters() {
            check_cluster(index, c)?;
        }
        if index.n_clusters() == 1 {
            log::warn!("only one cluster: FPR is 0 and scores reduce to occurrence rates");
        }
        let k = index.n_clusters();
        let t_count = index.n_terms();
        // rates[c][t]
        let rates: Vec<Vec<f64>> = (0..k)
            .map(|c| {
                let size = index.cluster_sizes[c] as f64;
                index.contains[c].iter().map(|&n| n as f64 / size).collect()
            })
            .collect();
        let mut scores = vec![Vec::with_capacity(t_count); k];
        let mut others = Vec::with_capacity(k.saturating_sub(1));
        #[allow(clippy::needless_range_loop)]
        for t in 0..t_count {
            for (c, row) in scores.iter_mut().enumerate() {
                others.clear();
                others.extend((0..k).filter(|&l| l != c).map(|l| rates[l][t]));
                row.push(TermScore::new(rates[c][t], fpr_from_rates(&others), epsilon));
            }
        }
        Ok(RelevanceTable {
            names: index.names.clone(),
            terms: index.terms.clone(),
            scores,
        })
    }

    pub fn n_clusters(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn score(&self, c: usize, t: usize) -> &TermScore {
        &self.scores[c][t]
    }

    pub fn cluster_scores(&self, c: usize) -> &[TermScore] {
        &self.scores[c]
    }

    pub fn score_of(&self, c: usize, term: &str) -> Option<&TermScore> {
        let t = self.terms.binary_search_by(|x| x.as_str().cmp(term)).ok()?;
        Some(&self.scores[c][t])
    }

    fn ordered_terms(&self, c: usize) -> Vec<usize> {
        let s = &self.scores[c];
        let mut idx: Vec<usize> = (0..self.terms.len()).collect();
        idx.sort_by(|&a, &b| {
            s[b].r
                .total_cmp(&s[a].r)
                .then(s[b].tpr.total_cmp(&s[a].tpr))
                .then_with(|| self.terms[a].cmp(&self.terms[b]))
        });
        idx
    }

    /// Top `k` terms of cluster `c` by r, then TPR, then term; zero scores
    /// are never returned.
    pub fn rank_terms(&self, c: usize, k: usize) -> Result<Vec<RankedTerm>> {
        if c >= self.n_clusters() {
            return Err(Error::UnknownCluster(c));
        }
        Ok(self
            .ordered_terms(c)
            .into_iter()
            .take_while(|&t| self.scores[c][t].r > 0.0)
            .take(k)
            .map(|t| RankedTerm {
                term: self.terms[t].clone(),
                r: self.scores[c][t].r,
                tpr: self.scores[c][t].tpr,
            })
            .collect())
    }

    /// `cluster,term,tpr,fpr,r_diff,r_quot,r` for every term occurring in
    /// the cluster, ordered by cluster and then by rank.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("cluster,term,tpr,fpr,r_diff,r_quot,r\n");
        for c in 0..self.n_clusters() {
            for t in self.ordered_terms(c) {
                let s = &self.scores[c][t];
                if s.tpr <= 0.0 {
                    continue;
                }
                out.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    crate::report::csv_field(&self.names[c]),
                    self.terms[t],
                    s.tpr,
                    s.fpr,
                    s.r_diff,
                    s.r_quot,
                    s.r
                ));
            }
        }
        out
    }
}

pub fn cluster_relevance(
    streams: &[TokenStream],
    assignment: &ClusterAssignment,
    vocab: &Vocabulary,
    epsilon: f64,
) -> Result<RelevanceTable> {
    let index = OccurrenceIndex::from_assignment(streams, assignment, vocab)?;
    RelevanceTable::build(&index, epsilon)
}

/// Relevance between two manually defined document groups. Every
/// document must belong to `group_a` or `group_b`; the table has the two
/// groups in that order.
pub fn contrast_relevance(
    streams: &[TokenStream],
    doc_groups: &[Option<String>],
    group_a: &str,
    group_b: &str,
    vocab: &Vocabulary,
    epsilon: f64,
) -> Result<RelevanceTable> {
    if group_a == group_b {
        return Err(Error::InvalidContrast("groups must differ".into()));
    }
    let labels = doc_groups
        .iter()
        .map(|g| match g.as_deref() {
            Some(g) if g == group_a => Ok(Some(0)),
            Some(g) if g == group_b => Ok(Some(1)),
            Some(other) => Err(Error::InvalidContrast(format!("unexpected group `{other}`"))),
            None => Err(Error::InvalidContrast("document without group".into())),
        })
        .collect::<Result<Vec<_>>>()?;
    for (c, name) in [group_a, group_b].iter().enumerate() {
        if !labels.contains(&Some(c)) {
            return Err(Error::InvalidContrast(format!("group `{name}` is empty")));
        }
    }
    let index = OccurrenceIndex::build(streams, &labels, vec![group_a.to_string(), group_b.to_string()], vocab)?;
    RelevanceTable::build(&index, epsilon)
}

/// Orders ranked terms the same way [`RelevanceTable::rank_terms`] does.
pub fn compare_ranked(a: &RankedTerm, b: &RankedTerm) -> Ordering {
    b.r.total_cmp(&a.r)
        .then(b.tpr.total_cmp(&a.tpr))
        .then_with(|| a.term.cmp(&b.term))
}
