//! Cosine-distance DBSCAN over a precomputed distance matrix.
//!
//! A point is a core point when at least `min_pts` points (itself
//! included) lie within `eps`. Points are visited in index order; a border
//! point reachable from several clusters joins the first one discovered.

use std::collections::VecDeque;
use std::fmt;

use crate::embedding::Embedding;
use crate::error::{Error, Result};
use crate::par::{self, Strategy};

pub const DEFAULT_EPS: f64 = 0.45;
pub const DEFAULT_MIN_PTS: usize = 3;

/// Norms below this are treated as zero vectors.
pub const ZERO_NORM: f64 = 1e-12;

/// `1 - cos(a, b)`, clamped to `[0, 2]`. A (near) zero vector is at
/// distance 1 from everything.
pub fn cosine_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    Ok(cosine_distance_unchecked(a, b))
}

fn cosine_distance_unchecked(a: &[f64], b: &[f64]) -> f64 {
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na.sqrt() < ZERO_NORM || nb.sqrt() < ZERO_NORM {
        return 1.0;
    }
    // sqrt(x * x) == x exactly, so parallel vectors give exactly 0 or 2
    let mut denom = (na * nb).sqrt();
    if !denom.is_finite() {
        denom = na.sqrt() * nb.sqrt();
    }
    (1.0 - dot / denom).clamp(0.0, 2.0)
}

/// Symmetric `n × n` distance matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    /// Builds from a full row-major matrix. Rejects non-square input,
    /// asymmetry, nonzero diagonal and values outside `[0, 2]`.
    pub fn from_dense(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                actual: data.len(),
            });
        }
        for i in 0..n {
            if data[i * n + i] != 0.0 {
                return Err(Error::InvalidParameter(format!("nonzero diagonal at {i}")));
            }
            for j in 0..n {
                let v = data[i * n + j];
                if !(0.0..=2.0).contains(&v) || v != data[j * n + i] {
                    return Err(Error::InvalidParameter(format!("invalid distance at ({i}, {j})")));
                }
            }
        }
        Ok(DistanceMatrix { n, data })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    fn neighbors(&self, i: usize, eps: f64) -> impl Iterator<Item = usize> + '_ {
        self.row(i)
            .iter()
            .enumerate()
            .filter(move |(_, &d)| d <= eps)
            .map(|(j, _)| j)
    }
}

pub fn pairwise_distances(emb: &Embedding) -> DistanceMatrix {
    pairwise_distances_with(emb, Strategy::default())
}

/// Each unordered pair is evaluated once and mirrored.
pub fn pairwise_distances_with(emb: &Embedding, strategy: Strategy) -> DistanceMatrix {
    let n = emb.n_rows();
    let upper: Vec<Vec<f64>> = par::map_range(strategy, n, |i| {
        (i + 1..n)
            .map(|j| cosine_distance_unchecked(emb.row(i), emb.row(j)))
            .collect()
    });
    let mut data = vec![0.0; n * n];
    for (i, row) in upper.into_iter().enumerate() {
        for (off, d) in row.into_iter().enumerate() {
            let j = i + 1 + off;
            data[i * n + j] = d;
            data[j * n + i] = d;
        }
    }
    DistanceMatrix { n, data }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Noise,
    Cluster(usize),
}

impl Label {
    pub fn cluster(self) -> Option<usize> {
        match self {
            Label::Noise => None,
            Label::Cluster(c) => Some(c),
        }
    }

    /// Numeric form used in CSV output; noise is -1.
    pub fn as_i64(self) -> i64 {
        match self {
            Label::Noise => -1,
            Label::Cluster(c) => c as i64,
        }
    }

    pub fn from_i64(v: i64) -> Self {
        if v < 0 {
            Label::Noise
        } else {
            Label::Cluster(v as usize)
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_i64())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterAssignment {
    pub labels: Vec<Label>,
    pub n_clusters: usize,
}

impl ClusterAssignment {
    pub fn noise_count(&self) -> usize {
        self.labels.iter().filter(|l| **l == Label::Noise).count()
    }

    pub fn members(&self, cluster: usize) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, l)| **l == Label::Cluster(cluster))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_clusters];
        for l in &self.labels {
            if let Label::Cluster(c) = l {
                sizes[*c] += 1;
            }
        }
        sizes
    }

    /// `doc_id,label` lines with a header; noise is written as -1.
    pub fn to_csv(&self, doc_ids: &[String]) -> String {
        let mut out = String::from("doc_id,label\n");
        for (id, l) in doc_ids.iter().zip(&self.labels) {
            out.push_str(&format!("{},{}\n", crate::report::csv_field(id), l));
        }
        out
    }
}

pub fn dbscan(dist: &DistanceMatrix, eps: f64, min_pts: usize) -> Result<ClusterAssignment> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    if min_pts == 0 {
        return Err(Error::InvalidParameter("min_pts must be at least 1".into()));
    }
    let n = dist.len();
    let is_core: Vec<bool> = (0..n).map(|i| dist.neighbors(i, eps).count() >= min_pts).collect();
    let mut labels = vec![Label::Noise; n];
    let mut assigned = vec![false; n];
    let mut n_clusters = 0;
    let mut queue = VecDeque::new();
    for seed in 0..n {
        if assigned[seed] || !is_core[seed] {
            continue;
        }
        let cluster = Label::Cluster(n_clusters);
        n_clusters += 1;
        assigned[seed] = true;
        labels[seed] = cluster;
        queue.push_back(seed);
        while let Some(p) = queue.pop_front() {
            for q in dist.neighbors(p, eps) {
                if assigned[q] {
                    continue;
                }
                assigned[q] = true;
                labels[q] = cluster;
                if is_core[q] {
                    queue.push_back(q);
                }
            }
        }
    }
    Ok(ClusterAssignment { labels, n_clusters })
}
