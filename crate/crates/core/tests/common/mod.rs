#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tradeprop_core::{Distance, FeatureMatrix, SimilarityGraph};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_features(rng: &mut impl Rng, n: usize, m: usize) -> FeatureMatrix {
    let values = (0..n * m).map(|_| rng.gen_range(-2.0..2.0)).collect();
    FeatureMatrix::new(n, m, values).unwrap()
}

/// Random connected weighted graph: a ring plus random chords, weights in (0, 1].
pub fn random_graph(rng: &mut impl Rng, n: usize, extra_edges: usize) -> SimilarityGraph {
    let mut edges = std::collections::BTreeMap::new();
    for i in 0..n {
        let j = (i + 1) % n;
        if i != j {
            edges.insert((i.min(j), i.max(j)), rng.gen_range(0.05..=1.0));
        }
    }
    for _ in 0..extra_edges {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        if i != j {
            edges.insert((i.min(j), i.max(j)), rng.gen_range(0.05..=1.0));
        }
    }
    let list: Vec<_> = edges.into_iter().map(|((i, j), w)| (i, j, w)).collect();
    SimilarityGraph::from_edges(n, &list).unwrap()
}

pub fn dense_w(g: &SimilarityGraph) -> DMatrix<f64> {
    let n = g.n();
    let mut w = DMatrix::zeros(n, n);
    for (i, j, v) in g.weights().iter() {
        w[(i, j)] = v;
    }
    w
}

pub fn dense_degrees(w: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_iterator(w.nrows(), w.row_iter().map(|r| r.sum()))
}

pub fn dense_rw(w: &DMatrix<f64>) -> DMatrix<f64> {
    let d = dense_degrees(w);
    DMatrix::from_fn(w.nrows(), w.ncols(), |i, j| w[(i, j)] / d[i])
}

pub fn dense_sym(w: &DMatrix<f64>) -> DMatrix<f64> {
    let d = dense_degrees(w);
    DMatrix::from_fn(w.nrows(), w.ncols(), |i, j| {
        w[(i, j)] / (d[i] * d[j]).sqrt()
    })
}

pub fn dense_laplacian(w: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_diagonal(&dense_degrees(w)) - w
}

/// `(1 - α)(I - α S)⁻¹ y` by explicit inversion.
pub fn oracle_propagation(s: &DMatrix<f64>, y: &[f64], alpha: f64) -> Vec<f64> {
    let n = s.nrows();
    let inv = (DMatrix::identity(n, n) - s * alpha).try_inverse().unwrap();
    (inv * DVector::from_column_slice(y) * (1.0 - alpha))
        .as_slice()
        .to_vec()
}

/// `γ (L + γ I)⁻¹ y` by explicit inversion.
pub fn oracle_unnormalized(l: &DMatrix<f64>, y: &[f64], gamma: f64) -> Vec<f64> {
    let n = l.nrows();
    let inv = (l + DMatrix::identity(n, n) * gamma).try_inverse().unwrap();
    (inv * DVector::from_column_slice(y) * gamma)
        .as_slice()
        .to_vec()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Exhaustive union k-NN edge set: `j` is a neighbour of `i` iff fewer than
/// `k` other points precede it in (distance, index) order.
pub fn brute_force_edges(x: &FeatureMatrix, k: usize, distance: Distance) -> Vec<(usize, usize)> {
    let n = x.rows();
    let dist = |a: usize, b: usize| distance.eval(x.row(a), x.row(b));
    let is_nbr = |i: usize, j: usize| {
        let dij = dist(i, j);
        let ahead = (0..n)
            .filter(|&l| l != i && l != j)
            .filter(|&l| {
                let dil = dist(i, l);
                dil < dij || (dil == dij && l < j)
            })
            .count();
        ahead < k
    };
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if is_nbr(i, j) || is_nbr(j, i) {
                edges.push((i, j));
            }
        }
    }
    edges
}
