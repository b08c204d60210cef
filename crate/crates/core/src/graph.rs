//! Weighted k-nearest-neighbour similarity graphs built from transaction features.
//!
//! An edge `{i, j}` is present when either endpoint is among the other's `k`
//! nearest neighbours (the union rule), weighted by the Gaussian similarity
//! `exp(-d(x_i, x_j) / t)`. Ties at the `k`-th neighbour are broken toward the
//! lower node index and a node is never its own neighbour.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Row-major `n × m` matrix of finite features, one row per transaction.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows < 2 {
            return Err(Error::Validation(format!(
                "feature matrix needs at least 2 rows, got {rows}"
            )));
        }
        if cols == 0 {
            return Err(Error::Validation(
                "feature matrix needs at least 1 column".into(),
            ));
        }
        if values.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} values supplied for a {rows}x{cols} matrix",
                values.len()
            )));
        }
        if let Some(p) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Validation(format!(
                "non-finite feature at row {}, column {}",
                p / cols,
                p % cols
            )));
        }
        Ok(Self { rows, cols, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(i) = rows.iter().position(|r| r.len() != cols) {
            return Err(Error::Dimension(format!(
                "row {i} has {} columns, expected {cols}",
                rows[i].len()
            )));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    /// Rows reordered so that new row `r` is old row `order[r]`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.rows {
            return Err(Error::Dimension(
                "permutation length differs from row count".into(),
            ));
        }
        let values = order
            .iter()
            .flat_map(|&i| self.row(i).iter().copied())
            .collect();
        Self::new(self.rows, self.cols, values)
    }

    /// Column-wise z-scores. Constant columns are centred only.
    pub fn standardized(&self) -> Self {
        let n = self.rows as f64;
        let mut values = self.values.clone();
        for c in 0..self.cols {
            let mean = (0..self.rows)
                .map(|r| self.values[r * self.cols + c])
                .sum::<f64>()
                / n;
            let var = (0..self.rows)
                .map(|r| (self.values[r * self.cols + c] - mean).powi(2))
                .sum::<f64>()
                / n;
            let sd = var.sqrt();
            for r in 0..self.rows {
                let v = &mut values[r * self.cols + c];
                *v -= mean;
                if sd > 0.0 {
                    *v /= sd;
                }
            }
        }
        Self {
            rows: self.rows,
            cols: self.cols,
            values,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distance {
    #[default]
    SquaredEuclidean,
    Euclidean,
}

impl Distance {
    pub fn eval(self, a: &[f64], b: &[f64]) -> f64 {
        let sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
        match self {
            Distance::SquaredEuclidean => sq,
            Distance::Euclidean => sq.sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphConfig {
    /// Neighbour count `k`.
    pub k: usize,
    /// Gaussian bandwidth `t`.
    pub bandwidth: f64,
    pub distance: Distance,
    /// Z-score each feature column before measuring distances.
    pub standardize: bool,
}

impl Default for GraphConfig {
    fn default() -> Self {
        Self {
            k: 5,
            bandwidth: 1.0,
            distance: Distance::SquaredEuclidean,
            standardize: false,
        }
    }
}

impl GraphConfig {
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.k == 0 || self.k >= n {
            return Err(Error::Validation(format!(
                "k = {} must lie in [1, {}] for {n} nodes",
                self.k,
                n.saturating_sub(1)
            )));
        }
        if !(self.bandwidth > 0.0 && self.bandwidth.is_finite()) {
            return Err(Error::Validation(format!(
                "bandwidth must be positive and finite, got {}",
                self.bandwidth
            )));
        }
        Ok(())
    }
}

/// `exp(-d(xi, xj) / t)`, floored at `f64::MIN_POSITIVE` so that distant pairs
/// keep a strictly positive weight instead of underflowing to zero.
pub fn gaussian_similarity(xi: &[f64], xj: &[f64], t: f64, distance: Distance) -> Result<f64> {
    if xi.len() != xj.len() {
        return Err(Error::Dimension(format!(
            "rows have lengths {} and {}",
            xi.len(),
            xj.len()
        )));
    }
    if xi.iter().chain(xj).any(|v| !v.is_finite()) {
        return Err(Error::Validation("feature rows must be finite".into()));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Validation(format!(
            "bandwidth must be positive, got {t}"
        )));
    }
    Ok(kernel(xi, xj, t, distance))
}

fn kernel(xi: &[f64], xj: &[f64], t: f64, distance: Distance) -> f64 {
    (-distance.eval(xi, xj) / t).exp().max(f64::MIN_POSITIVE)
}

/// Sparse symmetric weight matrix `W` with zero diagonal, plus degrees `d_i = Σ_j W_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityGraph {
    weights: CsrMatrix,
    degrees: Vec<f64>,
}

impl SimilarityGraph {
    /// Wraps an externally supplied weight matrix after checking symmetry,
    /// zero diagonal and that every stored weight lies in `(0, 1]`.
    pub fn from_weights(weights: CsrMatrix) -> Result<Self> {
        for (i, j, w) in weights.iter() {
            if i == j {
                return Err(Error::Validation(format!("self-loop at node {i}")));
            }
            if !(w > 0.0 && w <= 1.0) {
                return Err(Error::Validation(format!(
                    "weight W[{i},{j}] = {w} outside (0, 1]"
                )));
            }
            if weights.get(j, i) != w {
                return Err(Error::Validation(format!("W[{i},{j}] != W[{j},{i}]")));
            }
        }
        let degrees = weights.row_sums();
        Ok(Self { weights, degrees })
    }

    /// Graph from undirected edges `(i, j, w)`; each pair listed once.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let triplets: Vec<_> = edges
            .iter()
            .flat_map(|&(i, j, w)| [(i, j, w), (j, i, w)])
            .collect();
        Self::from_weights(CsrMatrix::from_triplets(n, &triplets)?)
    }

    pub fn n(&self) -> usize {
        self.weights.dim()
    }

    pub fn weights(&self) -> &CsrMatrix {
        &self.weights
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    /// Undirected edges `(i, j, w)` with `i < j`.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        self.weights.iter().filter(|&(i, j, _)| i < j).collect()
    }

    pub fn write_edge_list<W: Write>(&self, mut out: W) -> io::Result<()> {
        for (i, j, w) in self.edges() {
            writeln!(out, "{i}\t{j}\t{w:e}")?;
        }
        Ok(())
    }
}

/// Indices of the `k` nearest neighbours of every row, nearest first.
pub fn knn_lists(x: &FeatureMatrix, k: usize, distance: Distance) -> Vec<Vec<usize>> {
    (0..x.rows())
        .into_par_iter()
        .map(|i| {
            let xi = x.row(i);
            let mut cand: Vec<(f64, usize)> = (0..x.rows())
                .filter(|&j| j != i)
                .map(|j| (distance.eval(xi, x.row(j)), j))
                .collect();
            let by_dist =
                |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
            if k < cand.len() {
                cand.select_nth_unstable_by(k, by_dist);
                cand.truncate(k);
            }
            cand.sort_unstable_by(by_dist);
            cand.into_iter().map(|(_, j)| j).collect()
        })
        .collect()
}

/// Builds the union k-NN graph with Gaussian edge weights.
pub fn build_knn_graph(x: &FeatureMatrix, cfg: &GraphConfig) -> Result<SimilarityGraph> {
    cfg.validate(x.rows())?;
    let scaled;
    let x = if cfg.standardize {
        scaled = x.standardized();
        &scaled
    } else {
        x
    };

    let n = x.rows();
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, nbrs) in knn_lists(x, cfg.k, cfg.distance).into_iter().enumerate() {
        for j in nbrs {
            adjacency[i].push(j);
            adjacency[j].push(i);
        }
    }

    let rows: Vec<Vec<(usize, f64)>> = adjacency
        .into_par_iter()
        .enumerate()
        .map(|(i, mut nbrs)| {
            nbrs.sort_unstable();
            nbrs.dedup();
            nbrs.into_iter()
                .map(|j| {
                    // Evaluate each pair in a fixed argument order so W is bitwise symmetric.
                    let (a, b) = (i.min(j), i.max(j));
                    (j, kernel(x.row(a), x.row(b), cfg.bandwidth, cfg.distance))
                })
                .collect()
        })
        .collect();

    let weights = CsrMatrix::from_sorted_rows(rows);
    let degrees = weights.row_sums();
    Ok(SimilarityGraph { weights, degrees })
}
