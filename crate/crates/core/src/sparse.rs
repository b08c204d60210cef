//! Compressed sparse row storage for square matrices.

use std::io::{self, Write};

use crate::error::{Error, Result};

/// Square sparse matrix in CSR layout with column indices sorted within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<f64>,
}

impl CsrMatrix {
    /// Builds an `n × n` matrix from `(row, col, value)` triplets. Duplicate
    /// coordinates are summed.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut sorted = triplets.to_vec();
        for &(i, j, _) in &sorted {
            if i >= n || j >= n {
                return Err(Error::Dimension(format!(
                    "entry ({i}, {j}) outside a {n}x{n} matrix"
                )));
            }
        }
        sorted.sort_by_key(|&(i, j, _)| (i, j));

        let mut indptr = vec![0usize; n + 1];
        let mut indices = Vec::with_capacity(sorted.len());
        let mut data: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in sorted {
            if last == Some((i, j)) {
                *data.last_mut().unwrap() += v;
                continue;
            }
            indices.push(j);
            data.push(v);
            indptr[i + 1] += 1;
            last = Some((i, j));
        }
        for i in 0..n {
            indptr[i + 1] += indptr[i];
        }
        Ok(Self {
            n,
            indptr,
            indices,
            data,
        })
    }

    /// Builds a matrix from per-row `(col, value)` lists that are already sorted by column.
    pub(crate) fn from_sorted_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n = rows.len();
        let mut indptr = Vec::with_capacity(n + 1);
        indptr.push(0);
        let nnz = rows.iter().map(Vec::len).sum();
        let mut indices = Vec::with_capacity(nnz);
        let mut data = Vec::with_capacity(nnz);
        for row in rows {
            for (j, v) in row {
                debug_assert!(j < n);
                indices.push(j);
                data.push(v);
            }
            indptr.push(indices.len());
        }
        Self {
            n,
            indptr,
            indices,
            data,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_sorted_rows((0..n).map(|i| vec![(i, 1.0)]).collect())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let span = self.indptr[i]..self.indptr[i + 1];
        (&self.indices[span.clone()], &self.data[span])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(p) => vals[p],
            Err(_) => 0.0,
        }
    }

    /// Iterates over stored `(row, col, value)` entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).1.iter().sum()).collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.mul_vec_into(x, &mut out);
        out
    }

    pub fn mul_vec_into(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(out.len(), self.n);
        for (i, o) in out.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            *o = cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum();
        }
    }

    /// Returns `a·I + b·self`, keeping a full diagonal in the pattern.
    pub fn shifted(&self, a: f64, b: f64) -> Self {
        let rows = (0..self.n)
            .map(|i| {
                let (cols, vals) = self.row(i);
                let mut row: Vec<(usize, f64)> = Vec::with_capacity(cols.len() + 1);
                let mut placed = false;
                for (&j, &v) in cols.iter().zip(vals) {
                    if !placed && j >= i {
                        if j == i {
                            row.push((j, a + b * v));
                            placed = true;
                            continue;
                        }
                        row.push((i, a));
                        placed = true;
                    }
                    row.push((j, b * v));
                }
                if !placed {
                    row.push((i, a));
                }
                row
            })
            .collect();
        Self::from_sorted_rows(rows)
    }

    /// Maximum absolute difference between `self` and its transpose.
    pub fn asymmetry(&self) -> f64 {
        self.iter()
            .map(|(i, j, v)| (v - self.get(j, i)).abs())
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.n]; self.n];
        for (i, j, v) in self.iter() {
            dense[i][j] = v;
        }
        dense
    }

    /// Writes stored entries as `row col value` lines (0-based).
    pub fn write_coo<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "# {} {} {}", self.n, self.n, self.nnz())?;
        for (i, j, v) in self.iter() {
            writeln!(out, "{i} {j} {v:e}")?;
        }
        Ok(())
    }
}
