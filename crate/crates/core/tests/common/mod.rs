//! Reference implementations that the library is checked against. They
//! share no code with the library paths they verify.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relwords::clustering::{DistanceMatrix, Label};
use relwords::features::SparseVector;

/// DBSCAN by definition: core points, connected components of the core
/// graph, borders attached to the earliest-discovered adjacent component.
pub fn dbscan_oracle(n: usize, dist: &dyn Fn(usize, usize) -> f64, eps: f64, min_pts: usize) -> Vec<Option<usize>> {
    let core: Vec<bool> = (0..n)
        .map(|i| (0..n).filter(|&j| dist(i, j) <= eps).count() >= min_pts)
        .collect();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut x = x;
        while p[x] != r {
            let nx = p[x];
            p[x] = r;
            x = nx;
        }
        r
    }
    for i in 0..n {
        for j in 0..n {
            if core[i] && core[j] && dist(i, j) <= eps {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    // component id = smallest core index in it; clusters numbered by that
    let mut min_core = vec![usize::MAX; n];
    for i in (0..n).filter(|&i| core[i]) {
        let r = find(&mut parent, i);
        min_core[r] = min_core[r].min(i);
    }
    let mut roots: Vec<usize> = (0..n).filter(|&r| min_core[r] != usize::MAX).collect();
    roots.sort_by_key(|&r| min_core[r]);
    let cluster_of_root = |r: usize| roots.iter().position(|&x| x == r).unwrap();
    let mut labels = vec![None; n];
    for i in 0..n {
        if core[i] {
            labels[i] = Some(cluster_of_root(find(&mut parent, i)));
        }
    }
    for i in 0..n {
        if core[i] {
            continue;
        }
        labels[i] = (0..n)
            .filter(|&j| core[j] && dist(i, j) <= eps)
            .map(|j| cluster_of_root(find(&mut parent, j)))
            .min();
    }
    labels
}

/// Relabels clusters in order of first appearance so partitions can be
/// compared up to renaming.
pub fn canonical(labels: &[Option<usize>]) -> Vec<Option<usize>> {
    let mut map = std::collections::HashMap::new();
    labels
        .iter()
        .map(|l| {
            l.map(|c| {
                let next = map.len();
                *map.entry(c).or_insert(next)
            })
        })
        .collect()
}

pub fn label_options(labels: &[Label]) -> Vec<Option<usize>> {
    labels.iter().map(|l| l.cluster()).collect()
}

/// Cosine distance computed directly, clamped to [0, 2].
pub fn cosine_dist_ref(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na < 1e-12 || nb < 1e-12 {
        return 1.0;
    }
    (1.0 - dot / (na * nb)).clamp(0.0, 2.0)
}

/// A random distance matrix: even seeds use cosine distances between
/// clustered random points, odd seeds use independent uniform entries.
pub fn random_distance_matrix(seed: u64) -> (usize, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=200);
    let mut d = vec![0.0; n * n];
    if seed.is_multiple_of(2) {
        let dim = rng.random_range(2..=6);
        let k = rng.random_range(1..=8);
        let centers: Vec<Vec<f64>> = (0..k)
            .map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let spread = rng.random_range(0.05..0.8);
        let pts: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let c = &centers[rng.random_range(0..k)];
                c.iter().map(|x| x + rng.random_range(-spread..spread)).collect()
            })
            .collect();
        for i in 0..n {
            for j in i + 1..n {
                let v = cosine_dist_ref(&pts[i], &pts[j]);
                d[i * n + j] = v;
                d[j * n + i] = v;
            }
        }
    } else {
        let scale = rng.random_range(0.5..8.0);
        for i in 0..n {
            for j in i + 1..n {
                let v: f64 = (rng.random_range(0.0..1.0f64) * scale).min(2.0);
                d[i * n + j] = v;
                d[j * n + i] = v;
            }
        }
    }
    (n, d)
}

pub fn matrix(n: usize, d: Vec<f64>) -> DistanceMatrix {
    DistanceMatrix::from_dense(n, d).expect("valid distance matrix")
}

/// Dense, independently centered Gram matrix of sparse rows.
pub fn centered_gram_ref(rows: &[SparseVector], dim: usize) -> Vec<Vec<f64>> {
    let dense: Vec<Vec<f64>> = rows.iter().map(|r| r.to_dense(dim)).collect();
    let n = dense.len();
    let k: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| dense[i].iter().zip(&dense[j]).map(|(a, b)| a * b).sum())
                .collect()
        })
        .collect();
    let row_mean: Vec<f64> = k.iter().map(|r| r.iter().sum::<f64>() / n as f64).collect();
    let all = row_mean.iter().sum::<f64>() / n as f64;
    (0..n)
        .map(|i| (0..n).map(|j| k[i][j] - row_mean[i] - row_mean[j] + all).collect())
        .collect()
}

pub fn frobenius_rel_error(approx: &[Vec<f64>], exact: &[Vec<f64>]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (ra, re) in approx.iter().zip(exact) {
        for (a, e) in ra.iter().zip(re) {
            num += (a - e).powi(2);
            den += e * e;
        }
    }
    (num / den).sqrt()
}

/// Random bag-of-words documents over a vocabulary of `vocab` words.
pub fn random_docs(rng: &mut ChaCha8Rng, n: usize, vocab: usize, len: std::ops::Range<usize>) -> Vec<Vec<String>> {
    (0..n)
        .map(|_| {
            let l = rng.random_range(len.clone());
            (0..l).map(|_| format!("t{}", rng.random_range(0..vocab))).collect()
        })
        .collect()
}
