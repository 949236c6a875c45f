//! Linear-kernel PCA.
//!
//! The Gram matrix `K = X Xᵀ` of the tf-idf rows is double-centered,
//! `K' = K - 1K/N - K1/N + 1K1/N²`, and eigendecomposed. Each kept
//! eigenvector `v` with eigenvalue `λ` becomes a dual coefficient column
//! `α = v / √λ`, so that `λ (α·α) = 1` and the embedding of the training
//! set is `Y = K' A` with `Y Yᵀ ≈ K'`.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, SparseVector};
use crate::par::{self, Strategy};

pub const DEFAULT_COMPONENTS: usize = 250;

/// Components whose eigenvalue is at most this fraction of the largest are
/// treated as numerically zero.
pub const RELATIVE_EIGEN_CUTOFF: f64 = 1e-10;

/// Dense row-major `n × n` Gram matrix of pairwise dot products.
pub fn gram_matrix(rows: &[SparseVector]) -> Vec<f64> {
    gram_matrix_with(rows, Strategy::default())
}

pub fn gram_matrix_with(rows: &[SparseVector], strategy: Strategy) -> Vec<f64> {
    let n = rows.len();
    let mut k = vec![0.0; n * n];
    par::for_each_row_mut(strategy, &mut k, n, |i, out| {
        for (j, v) in out.iter_mut().enumerate() {
            *v = rows[i].dot(&rows[j]);
        }
    });
    k
}

/// Column means and grand mean of a symmetric row-major matrix.
fn centering_terms(k: &[f64], n: usize) -> (Vec<f64>, f64) {
    let mut means = vec![0.0; n];
    for row in k.chunks(n) {
        for (m, v) in means.iter_mut().zip(row) {
            *m += v;
        }
    }
    means.iter_mut().for_each(|m| *m /= n as f64);
    let grand = means.iter().sum::<f64>() / n as f64;
    (means, grand)
}

/// `K - 1K/N - K1/N + 1K1/N²`, row-major.
pub fn double_center(k: &[f64], n: usize) -> Vec<f64> {
    let (means, grand) = centering_terms(k, n);
    let mut out = k.to_vec();
    for (i, row) in out.chunks_mut(n).enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = *v - means[i] - means[j] + grand;
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct KpcaModel {
    column_means: Vec<f64>,
    grand_mean: f64,
    eigenvalues: Vec<f64>,
    /// Row-major `n_train × dim`.
    dual: Vec<f64>,
    training: Vec<SparseVector>,
    n_terms: usize,
}

impl KpcaModel {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn n_train(&self) -> usize {
        self.training.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn column_means(&self) -> &[f64] {
        &self.column_means
    }

    pub fn grand_mean(&self) -> f64 {
        self.grand_mean
    }

    /// Column `d` of the dual coefficients.
    pub fn dual_column(&self, d: usize) -> Vec<f64> {
        self.dual.chunks(self.dim()).map(|r| r[d]).collect()
    }

    /// Fits on the rows of `matrix`, keeping at most `max_components`.
    pub fn fit(matrix: &FeatureMatrix, max_components: usize) -> Result<Self> {
        Self::fit_rows(matrix.rows(), matrix.n_terms(), max_components, Strategy::default())
    }

    pub fn fit_rows(rows: &[SparseVector], n_terms: usize, max_components: usize, strategy: Strategy) -> Result<Self> {
        let n = rows.len();
        if n < 2 {
            return Err(Error::TooFewDocuments(n));
        }
        if max_components == 0 {
            return Err(Error::InvalidParameter("max_components must be at least 1".into()));
        }
        let k = gram_matrix_with(rows, strategy);
        let (column_means, grand_mean) = centering_terms(&k, n);
        let centered = double_center(&k, n);
        let scale = k.iter().fold(0.0f64, |m, v| m.max(v.abs()));

        let eig = SymmetricEigen::new(DMatrix::from_row_slice(n, n, &centered));
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let top = eig.eigenvalues[order[0]];
        if !top.is_finite() || top <= f64::EPSILON * n as f64 * scale {
            return Err(Error::DegenerateCorpus);
        }
        let cutoff = RELATIVE_EIGEN_CUTOFF * top;
        let kept: Vec<usize> = order
            .into_iter()
            .take_while(|&i| eig.eigenvalues[i] > cutoff)
            .take(max_components)
            .collect();
        let dim = kept.len();

        let mut dual = vec![0.0; n * dim];
        let mut eigenvalues = Vec::with_capacity(dim);
        for (d, &col) in kept.iter().enumerate() {
            let lambda = eig.eigenvalues[col];
            let v = eig.eigenvectors.column(col);
            // sign convention: largest-magnitude entry positive (first on ties)
            let pivot = v
                .iter()
                .enumerate()
                .fold(
                    (0, 0.0f64),
                    |(bi, bv), (i, &x)| if x.abs() > bv { (i, x.abs()) } else { (bi, bv) },
                )
                .0;
            let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
            let inv = sign / lambda.sqrt();
            for i in 0..n {
                dual[i * dim + d] = v[i] * inv;
            }
            eigenvalues.push(lambda);
        }

        Ok(KpcaModel {
            column_means,
            grand_mean,
            eigenvalues,
            dual,
            training: rows.to_vec(),
            n_terms,
        })
    }

    pub fn transform(&self, matrix: &FeatureMatrix) -> Result<Embedding> {
        if matrix.n_terms() != self.n_terms {
            return Err(Error::DimensionMismatch {
                expected: self.n_terms,
                actual: matrix.n_terms(),
            });
        }
        let mut emb = self.transform_rows(matrix.rows(), Strategy::default());
        emb.doc_ids = matrix.doc_ids().to_vec();
        Ok(emb)
    }

    pub fn transform_rows(&self, rows: &[SparseVector], strategy: Strategy) -> Embedding {
        let n = self.n_train();
        let dim = self.dim();
        let mut coords = vec![0.0; rows.len() * dim];
        par::for_each_row_mut(strategy, &mut coords, dim, |r, out| {
            let kernel: Vec<f64> = self.training.iter().map(|t| rows[r].dot(t)).collect();
            let mean = kernel.iter().sum::<f64>() / n as f64;
            for (j, kv) in kernel.iter().enumerate() {
                let centered = kv - mean - self.column_means[j] + self.grand_mean;
                let alpha = &self.dual[j * dim..(j + 1) * dim];
                for (o, a) in out.iter_mut().zip(alpha) {
                    *o += a * centered;
                }
            }
        });
        Embedding {
            doc_ids: (0..rows.len()).map(|i| i.to_string()).collect(),
            dim,
            coords,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    doc_ids: Vec<String>,
    dim: usize,
    /// Row-major `n × dim`.
    coords: Vec<f64>,
}

impl Embedding {
    pub fn from_rows(doc_ids: Vec<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: bad.len(),
            });
        }
        if doc_ids.len() != rows.len() {
            return Err(Error::DimensionMismatch {
                expected: rows.len(),
                actual: doc_ids.len(),
            });
        }
        Ok(Embedding {
            doc_ids,
            dim,
            coords: rows.concat(),
        })
    }

    pub fn n_rows(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.n_rows()).map(|i| self.row(i))
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    /// Row-major `Y Yᵀ`.
    pub fn gram(&self) -> Vec<f64> {
        let n = self.n_rows();
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = self.row(i).iter().zip(self.row(j)).map(|(a, b)| a * b).sum();
            }
        }
        out
    }

    /// `doc_id,pc1,...,pcD` with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("doc_id");
        for d in 1..=self.dim {
            out.push_str(&format!(",pc{d}"));
        }
        out.push('\n');
        for (i, id) in self.doc_ids.iter().enumerate() {
            out.push_str(&crate::report::csv_field(id));
            for v in self.row(i) {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}

pub fn fit_transform(matrix: &FeatureMatrix, max_components: usize) -> Result<(KpcaModel, Embedding)> {
    let model = KpcaModel::fit(matrix, max_components)?;
    let emb = model.transform(matrix)?;
    Ok((model, emb))
}
