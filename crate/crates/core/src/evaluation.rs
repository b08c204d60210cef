//! Leave-one-out seed recovery and top-k accuracy.
//!
//! Each seed is held out in turn, the remaining seeds act as queries, and the
//! held-out node is located in the ranking of all non-query nodes.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::SimilarityGraph;
use crate::operators::{make_operator, OperatorKind};
use crate::solvers::{rank_order, solve, InitialRanking, SeedSet, SolverConfig};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LooRun {
    pub left_out: usize,
    pub queries: SeedSet,
    /// 1-based position of `left_out` among the candidates.
    pub rank_position: usize,
    /// Number of ranked candidates, `n - |queries|`.
    pub pool_size: usize,
}

pub fn run_leave_one_out(
    graph: &SimilarityGraph,
    seeds: &SeedSet,
    method: OperatorKind,
    cfg: &SolverConfig,
) -> Result<Vec<LooRun>> {
    if seeds.len() < 2 {
        return Err(Error::Validation(format!(
            "leave-one-out needs at least 2 seeds, got {}",
            seeds.len()
        )));
    }
    cfg.validate()?;
    let n = graph.n();
    let op = make_operator(graph, method)?;

    seeds
        .indices()
        .par_iter()
        .map(|&left_out| {
            let queries = seeds.without(left_out).expect("at least one query remains");
            let y = InitialRanking::from_seeds(&queries, n);
            let f = solve(&op, &y, cfg).map_err(|e| Error::Run {
                left_out,
                source: Box::new(e),
            })?;
            let order = rank_order(&f.scores, queries.indices());
            let rank_position = order
                .iter()
                .position(|&i| i == left_out)
                .expect("held-out seed is a candidate")
                + 1;
            Ok(LooRun {
                left_out,
                pool_size: order.len(),
                queries,
                rank_position,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub method: OperatorKind,
    pub runs: Vec<LooRun>,
    pub k_values: Vec<usize>,
    /// Percentage of runs recovering the held-out seed within the top `k`, to two decimals.
    pub accuracy_at_k: BTreeMap<usize, f64>,
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

pub fn accuracy_at_k(
    method: OperatorKind,
    runs: Vec<LooRun>,
    k_values: &[usize],
) -> Result<EvalReport> {
    if runs.is_empty() {
        return Err(Error::Validation("no leave-one-out runs to score".into()));
    }
    if k_values.contains(&0) {
        return Err(Error::Validation("k values must be positive".into()));
    }
    let total = runs.len() as f64;
    let accuracy_at_k = k_values
        .iter()
        .map(|&k| {
            let hits = runs.iter().filter(|r| r.rank_position <= k).count();
            (k, round2(100.0 * hits as f64 / total))
        })
        .collect();
    Ok(EvalReport {
        method,
        runs,
        k_values: k_values.to_vec(),
        accuracy_at_k,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }

    /// Tallies predicted against known labels.
    pub fn from_labels(known: &[bool], predicted: &[bool]) -> Result<Self> {
        if known.len() != predicted.len() {
            return Err(Error::Dimension(format!(
                "{} known labels vs {} predictions",
                known.len(),
                predicted.len()
            )));
        }
        let mut c = Self::default();
        for (&k, &p) in known.iter().zip(predicted) {
            match (k, p) {
                (true, true) => c.tp += 1,
                (true, false) => c.fn_ += 1,
                (false, true) => c.fp += 1,
                (false, false) => c.tn += 1,
            }
        }
        Ok(c)
    }
}

/// `Q = (TP + TN) / (TP + TN + FP + FN)`.
pub fn q_measure(c: &ConfusionCounts) -> Result<f64> {
    let total = c.total();
    if total == 0 {
        return Err(Error::Validation("confusion counts are all zero".into()));
    }
    Ok((c.tp + c.tn) as f64 / total as f64)
}
