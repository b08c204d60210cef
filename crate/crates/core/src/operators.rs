//! Propagation operators derived from a similarity graph:
//! `S_rw = D⁻¹W`, `S_sym = D^(-1/2) W D^(-1/2)` and `L = D - W`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::SimilarityGraph;
use crate::sparse::CsrMatrix;

/// Ranking method, identified by the operator it propagates with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OperatorKind {
    #[serde(rename = "unnorm")]
    Unnormalized,
    #[serde(rename = "rw")]
    RandomWalk,
    #[serde(rename = "sym")]
    SymmetricNormalized,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; 3] = [
        OperatorKind::Unnormalized,
        OperatorKind::RandomWalk,
        OperatorKind::SymmetricNormalized,
    ];

    pub fn short_name(self) -> &'static str {
        match self {
            OperatorKind::Unnormalized => "unnorm",
            OperatorKind::RandomWalk => "rw",
            OperatorKind::SymmetricNormalized => "sym",
        }
    }

    pub fn is_normalized(self) -> bool {
        !matches!(self, OperatorKind::Unnormalized)
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OperatorKind::Unnormalized => "Un-normalized",
            OperatorKind::RandomWalk => "Random Walk",
            OperatorKind::SymmetricNormalized => "Symmetric Normalized",
        })
    }
}

impl FromStr for OperatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unnorm" => Ok(OperatorKind::Unnormalized),
            "rw" => Ok(OperatorKind::RandomWalk),
            "sym" => Ok(OperatorKind::SymmetricNormalized),
            other => Err(Error::Validation(format!("unknown method '{other}'"))),
        }
    }
}

/// A materialized operator together with the degrees it was built from.
#[derive(Debug, Clone)]
pub struct PropagationOperator {
    kind: OperatorKind,
    matrix: CsrMatrix,
    degrees: Vec<f64>,
}

impl PropagationOperator {
    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

pub fn make_operator(graph: &SimilarityGraph, kind: OperatorKind) -> Result<PropagationOperator> {
    let w = graph.weights();
    let d = graph.degrees();
    if kind.is_normalized() {
        if let Some(node) = d.iter().position(|&di| !(di > 0.0)) {
            return Err(Error::DegenerateDegree { node });
        }
    }

    let rows = (0..w.dim())
        .map(|i| {
            let (cols, vals) = w.row(i);
            let scaled = cols.iter().zip(vals).map(|(&j, &wij)| match kind {
                OperatorKind::RandomWalk => (j, wij / d[i]),
                OperatorKind::SymmetricNormalized => (j, wij / (d[i] * d[j]).sqrt()),
                OperatorKind::Unnormalized => (j, -wij),
            });
            match kind {
                OperatorKind::Unnormalized => {
                    // W has a zero diagonal, so the degree slots in at position i.
                    let mut row: Vec<(usize, f64)> = scaled.collect();
                    let at = row.partition_point(|&(j, _)| j < i);
                    row.insert(at, (i, d[i]));
                    row
                }
                _ => scaled.collect(),
            }
        })
        .collect();

    Ok(PropagationOperator {
        kind,
        matrix: CsrMatrix::from_sorted_rows(rows),
        degrees: d.to_vec(),
    })
}
