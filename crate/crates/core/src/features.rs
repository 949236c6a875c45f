//! Vocabulary and sparse tf-idf document vectors.
//!
//! `tf` is the term count divided by the document's token count and
//! `idf(t) = ln(N / df(t))` with no smoothing, so terms present in every
//! document get weight exactly zero.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{self, Strategy};
use crate::text::TokenStream;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    /// Strictly increasing term indices.
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseVector {
    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn get(&self, index: usize) -> f64 {
        match self.indices.binary_search(&index) {
            Ok(p) => self.values[p],
            Err(_) => 0.0,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (mut i, mut j) = (0, 0);
        let mut acc = 0.0;
        while i < self.indices.len() && j < other.indices.len() {
            match self.indices[i].cmp(&other.indices[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += self.values[i] * other.values[j];
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    pub fn to_dense(&self, dim: usize) -> Vec<f64> {
        let mut out = vec![0.0; dim];
        for (i, v) in self.iter() {
            out[i] = v;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    terms: Vec<String>,
    doc_freq: Vec<usize>,
    n_docs: usize,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Terms with document frequency ≥ `min_df`, in lexicographic order.
    pub fn build(streams: &[TokenStream], min_df: usize) -> Result<Self> {
        if streams.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut df: BTreeMap<&str, usize> = BTreeMap::new();
        for s in streams {
            let distinct: HashSet<&str> = s.tokens.iter().map(String::as_str).collect();
            for t in distinct {
                *df.entry(t).or_default() += 1;
            }
        }
        let (terms, doc_freq): (Vec<String>, Vec<usize>) = df
            .into_iter()
            .filter(|&(_, n)| n >= min_df.max(1))
            .map(|(t, n)| (t.to_string(), n))
            .unzip();
        if terms.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        Ok(Self::from_parts(terms, doc_freq, streams.len()))
    }

    fn from_parts(terms: Vec<String>, doc_freq: Vec<usize>, n_docs: usize) -> Self {
        let index = terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Vocabulary {
            terms,
            doc_freq,
            n_docs,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn term(&self, i: usize) -> &str {
        &self.terms[i]
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn doc_freq(&self) -> &[usize] {
        &self.doc_freq
    }

    /// Number of documents the vocabulary was built from.
    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn idf(&self) -> Vec<f64> {
        idf(&self.doc_freq, self.n_docs)
    }
}

/// `ln(n_docs / df)` per term.
pub fn idf(doc_freq: &[usize], n_docs: usize) -> Vec<f64> {
    doc_freq.iter().map(|&df| (n_docs as f64 / df as f64).ln()).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: Vec<SparseVector>,
    doc_ids: Vec<String>,
    vocab: Vocabulary,
    /// Documents that ended up with no in-vocabulary token.
    empty_docs: Vec<String>,
}

impl FeatureMatrix {
    pub fn rows(&self) -> &[SparseVector] {
        &self.rows
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn n_docs(&self) -> usize {
        self.rows.len()
    }

    pub fn n_terms(&self) -> usize {
        self.vocab.len()
    }

    pub fn empty_docs(&self) -> &[String] {
        &self.empty_docs
    }

    /// Sparse triplets `doc_id,term,weight`, zero weights omitted.
    pub fn to_triplet_csv(&self) -> String {
        let mut out = String::from("doc_id,term,weight\n");
        for (id, row) in self.doc_ids.iter().zip(&self.rows) {
            for (i, w) in row.iter() {
                out.push_str(&format!(
                    "{},{},{}\n",
                    crate::report::csv_field(id),
                    self.vocab.term(i),
                    w
                ));
            }
        }
        out
    }
}

/// Length-normalized term frequencies of in-vocabulary tokens.
pub fn term_frequencies(stream: &TokenStream, vocab: &Vocabulary) -> SparseVector {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for t in &stream.tokens {
        if let Some(i) = vocab.index_of(t) {
            *counts.entry(i).or_default() += 1;
        }
    }
    let len = stream.tokens.len() as f64;
    let (indices, values) = counts.into_iter().map(|(i, c)| (i, c as f64 / len)).unzip();
    SparseVector { indices, values }
}

pub fn vectorize(streams: &[TokenStream], vocab: &Vocabulary) -> FeatureMatrix {
    vectorize_with(streams, vocab, Strategy::default())
}

pub fn vectorize_with(streams: &[TokenStream], vocab: &Vocabulary, strategy: Strategy) -> FeatureMatrix {
    let idf = vocab.idf();
    let rows = par::map_slice(strategy, streams, |s| {
        let tf = term_frequencies(s, vocab);
        let (indices, values) = tf
            .iter()
            .map(|(i, f)| (i, f * idf[i]))
            .filter(|&(_, w)| w != 0.0)
            .unzip();
        SparseVector { indices, values }
    });
    let empty_docs: Vec<String> = streams
        .iter()
        .filter(|s| !s.tokens.iter().any(|t| vocab.index_of(t).is_some()))
        .map(|s| s.doc_id.clone())
        .collect();
    if !empty_docs.is_empty() {
        log::warn!(
            "{} document(s) have no in-vocabulary tokens: {}",
            empty_docs.len(),
            empty_docs.join(", ")
        );
    }
    FeatureMatrix {
        rows,
        doc_ids: streams.iter().map(|s| s.doc_id.clone()).collect(),
        vocab: vocab.clone(),
        empty_docs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn stream(id: &str, toks: &[&str]) -> TokenStream {
        TokenStream {
            doc_id: id.into(),
            tokens: toks.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn vocabulary_counts() {
        let docs = [stream("1", &["a", "b"]), stream("2", &["b", "c"])];
        let v = Vocabulary::build(&docs, 1).unwrap();
        assert_eq!(v.terms(), ["a", "b", "c"]);
        assert_eq!(v.doc_freq(), [1, 2, 1]);
        let v = Vocabulary::build(&docs, 2).unwrap();
        assert_eq!(v.terms(), ["b"]);
        assert!(matches!(Vocabulary::build(&docs, 3), Err(Error::EmptyVocabulary)));
        assert!(matches!(Vocabulary::build(&[], 1), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn idf_values() {
        assert!((idf(&[2], 4)[0] - std::f64::consts::LN_2).abs() < 1e-12);
        assert_eq!(idf(&[4], 4)[0], 0.0);
        assert!((idf(&[1], 1000)[0] - 6.907755278982137).abs() < 1e-12);
    }

    #[test]
    fn vectorize_hand_example() {
        let docs = [stream("1", &["a", "a", "b"]), stream("2", &["b"])];
        let v = Vocabulary::build(&docs, 1).unwrap();
        let m = vectorize(&docs, &v);
        let row = m.rows()[0].to_dense(2);
        assert!((row[0] - 2.0 / 3.0 * std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(row[1], 0.0);
        assert_eq!(m.rows()[1].nnz(), 0);
    }

    #[test]
    fn single_unique_token() {
        let docs = [stream("1", &["t"]), stream("2", &["u"]), stream("3", &["u"])];
        let m = vectorize(&docs, &Vocabulary::build(&docs, 1).unwrap());
        assert_eq!(m.rows()[0].indices, [0]);
        assert!((m.rows()[0].values[0] - 3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn empty_stream_flagged() {
        let docs = [stream("1", &["a"]), stream("2", &[]), stream("3", &["b"])];
        let m = vectorize(&docs, &Vocabulary::build(&docs, 1).unwrap());
        assert_eq!(m.rows()[1].nnz(), 0);
        assert_eq!(m.empty_docs(), ["2"]);
    }

    #[test]
    fn triplet_dump() {
        let docs = [stream("1", &["a"]), stream("2", &["b"])];
        let m = vectorize(&docs, &Vocabulary::build(&docs, 1).unwrap());
        let ln2 = std::f64::consts::LN_2;
        assert_eq!(
            m.to_triplet_csv(),
            format!("doc_id,term,weight\n1,a,{ln2}\n2,b,{ln2}\n")
        );
    }

    #[test]
    fn sparse_dot_matches_dense() {
        let a = SparseVector {
            indices: vec![0, 3, 5],
            values: vec![1.0, 2.0, 3.0],
        };
        let b = SparseVector {
            indices: vec![1, 3, 5, 7],
            values: vec![4.0, 5.0, 6.0, 7.0],
        };
        assert_eq!(a.dot(&b), 2.0 * 5.0 + 3.0 * 6.0);
    }

    fn docs_strategy() -> impl proptest::strategy::Strategy<Value = Vec<Vec<String>>> {
        proptest::collection::vec(proptest::collection::vec("[a-f]", 0..12), 1..10)
    }

    proptest! {
        #[test]
        fn tf_sums_to_at_most_one(docs in docs_strategy(), min_df in 1usize..3) {
            let streams: Vec<TokenStream> = docs.into_iter().enumerate()
                .map(|(i, t)| TokenStream { doc_id: i.to_string(), tokens: t }).collect();
            if let Ok(v) = Vocabulary::build(&streams, min_df) {
                for s in &streams {
                    let tf = term_frequencies(s, &v);
                    let sum: f64 = tf.values.iter().sum();
                    prop_assert!(sum <= 1.0 + 1e-12);
                    if !s.tokens.is_empty() && s.tokens.iter().all(|t| v.index_of(t).is_some()) {
                        prop_assert!((sum - 1.0).abs() < 1e-12);
                    }
                }
            }
        }

        #[test]
        fn zero_entries_iff_absent_or_ubiquitous(docs in docs_strategy()) {
            let streams: Vec<TokenStream> = docs.into_iter().enumerate()
                .map(|(i, t)| TokenStream { doc_id: i.to_string(), tokens: t }).collect();
            if let Ok(v) = Vocabulary::build(&streams, 1) {
                let m = vectorize(&streams, &v);
                for (s, row) in streams.iter().zip(m.rows()) {
                    for (i, term) in v.terms().iter().enumerate() {
                        let present = s.tokens.contains(term);
                        let ubiquitous = v.doc_freq()[i] == streams.len();
                        prop_assert_eq!(row.get(i) == 0.0, !present || ubiquitous);
                        prop_assert!(row.get(i) >= 0.0);
                    }
                }
            }
        }

        #[test]
        fn permuting_documents_permutes_rows(docs in docs_strategy(), rot in 0usize..10) {
            let streams: Vec<TokenStream> = docs.into_iter().enumerate()
                .map(|(i, t)| TokenStream { doc_id: i.to_string(), tokens: t }).collect();
            if let Ok(v) = Vocabulary::build(&streams, 1) {
                let mut rotated = streams.clone();
                let k = rot % streams.len();
                rotated.rotate_left(k);
                let v2 = Vocabulary::build(&rotated, 1).unwrap();
                prop_assert_eq!(v.terms(), v2.terms());
                let a = vectorize(&streams, &v);
                let b = vectorize(&rotated, &v2);
                for (j, row) in b.rows().iter().enumerate() {
                    prop_assert_eq!(row, &a.rows()[(j + k) % streams.len()]);
                }
            }
        }
    }
}
