//! Seed-based ranking by graph propagation.
//!
//! The two normalized methods have both an iterative form,
//! `F ← α S F + (1 - α) y` started from `F = y`, and the closed form
//! `(I - α S) F = (1 - α) y` it converges to. The un-normalized method only has
//! the closed form `(L + γ I) F = γ y`.
//!
//! All closed-form solves go through conjugate gradients. The random-walk
//! system is nonsymmetric, so it is solved as the equivalent symmetric system
//! `(D - α W) F = (1 - α) D y`. Every closed-form result is checked against
//! `‖A F - b‖∞ <= 1e-10 · max(1, ‖y‖∞)` on the original system.

use serde::{Deserialize, Serialize};

use crate::cg::{pcg, CgOptions};
use crate::error::{Error, Result};
use crate::operators::{OperatorKind, PropagationOperator};
use crate::sparse::CsrMatrix;

/// Relative bound on the closed-form linear-system residual.
pub const RESIDUAL_BOUND: f64 = 1e-10;

const REFINEMENT_ROUNDS: usize = 4;

/// Query nodes, kept sorted and free of duplicates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedSet {
    indices: Vec<usize>,
}

impl SeedSet {
    pub fn new(indices: impl IntoIterator<Item = usize>, n: usize) -> Result<Self> {
        let mut indices: Vec<usize> = indices.into_iter().collect();
        if indices.is_empty() {
            return Err(Error::Validation("seed set is empty".into()));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= n) {
            return Err(Error::Validation(format!(
                "seed index {bad} out of range for {n} nodes"
            )));
        }
        indices.sort_unstable();
        if let Some(w) = indices.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Validation(format!("duplicate seed index {}", w[0])));
        }
        Ok(Self { indices })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    /// The seed set with `node` removed, or `None` if that would leave it empty.
    pub fn without(&self, node: usize) -> Option<Self> {
        let indices: Vec<usize> = self
            .indices
            .iter()
            .copied()
            .filter(|&i| i != node)
            .collect();
        (!indices.is_empty()).then_some(Self { indices })
    }
}

/// The initial ranking vector `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialRanking(Vec<f64>);

impl InitialRanking {
    /// `y_i = 1` for seeds and `0` elsewhere.
    pub fn from_seeds(seeds: &SeedSet, n: usize) -> Self {
        let mut y = vec![0.0; n];
        for &i in seeds.indices() {
            y[i] = 1.0;
        }
        Self(y)
    }

    /// Arbitrary finite initial scores.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("initial ranking must be finite".into()));
        }
        Ok(Self(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn sup_norm(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMode {
    Iterative,
    #[default]
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Propagation weight, `0 <= alpha < 1`.
    pub alpha: f64,
    /// Regularization strength for the un-normalized method, `gamma > 0`.
    pub gamma: f64,
    /// Stop threshold on `‖F(t+1) - F(t)‖∞` for iterative propagation.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub mode: SolveMode,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            alpha: 0.85,
            gamma: 1.0,
            tolerance: 1e-9,
            max_iterations: 10_000,
            mode: SolveMode::Direct,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        check_gamma(self.gamma)?;
        if !(self.tolerance > 0.0) {
            return Err(Error::Validation(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::Validation(
                "max_iterations must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::Validation(format!(
            "alpha must lie in [0, 1), got {alpha}"
        )));
    }
    Ok(())
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::Validation(format!(
            "gamma must be positive, got {gamma}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Iterations {
    Direct,
    Steps(usize),
}

/// Estimated ranking `F*`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankingVector {
    pub scores: Vec<f64>,
    pub method: OperatorKind,
    pub iterations: Iterations,
    /// Final step norm for iterative runs, linear-system residual for direct solves.
    pub residual: f64,
}

fn expect_kind(op: &PropagationOperator, kinds: &[OperatorKind]) -> Result<()> {
    if kinds.contains(&op.kind()) {
        Ok(())
    } else {
        Err(Error::Validation(format!(
            "operator {:?} cannot be used here (expected one of {kinds:?})",
            op.kind()
        )))
    }
}

fn expect_len(op: &PropagationOperator, y: &InitialRanking) -> Result<()> {
    if op.dim() != y.len() {
        return Err(Error::Dimension(format!(
            "initial ranking has length {}, operator is {}x{}",
            y.len(),
            op.dim(),
            op.dim()
        )));
    }
    Ok(())
}

/// Runs `F(t+1) = α S F(t) + (1 - α) y` from `F(0) = y` until successive
/// iterates differ by less than `cfg.tolerance` in the max norm.
pub fn propagate_iterative(
    op: &PropagationOperator,
    y: &InitialRanking,
    cfg: &SolverConfig,
) -> Result<RankingVector> {
    expect_kind(
        op,
        &[OperatorKind::RandomWalk, OperatorKind::SymmetricNormalized],
    )?;
    expect_len(op, y)?;
    cfg.validate()?;

    let s = op.matrix();
    let y = y.as_slice();
    let alpha = cfg.alpha;
    let mut f = y.to_vec();
    let mut next = vec![0.0; f.len()];
    let mut step = f64::INFINITY;
    for it in 1..=cfg.max_iterations {
        s.mul_vec_into(&f, &mut next);
        step = 0.0;
        for ((ni, fi), yi) in next.iter_mut().zip(&f).zip(y) {
            *ni = alpha * *ni + (1.0 - alpha) * yi;
            step = f64::max(step, (*ni - fi).abs());
        }
        std::mem::swap(&mut f, &mut next);
        if step < cfg.tolerance {
            return Ok(RankingVector {
                scores: f,
                method: op.kind(),
                iterations: Iterations::Steps(it),
                residual: step,
            });
        }
    }
    Err(Error::NotConverged {
        iterations: cfg.max_iterations,
        residual: step,
        last_iterate: f,
    })
}

/// `‖(I - α S) f - (1 - α) y‖∞`.
fn propagation_residual(s: &CsrMatrix, alpha: f64, f: &[f64], y: &[f64]) -> f64 {
    let sf = s.mul_vec(f);
    f.iter()
        .zip(&sf)
        .zip(y)
        .map(|((fi, sfi), yi)| (fi - alpha * sfi - (1.0 - alpha) * yi).abs())
        .fold(0.0, f64::max)
}

/// Runs CG with restarts until `residual(x) <= bound` on the caller's system.
fn solve_checked(
    a: &CsrMatrix,
    b: &[f64],
    weights: &[f64],
    bound: f64,
    residual: impl Fn(&[f64]) -> f64,
) -> Result<Vec<f64>> {
    let n = a.dim();
    // Jacobi starting guess; exact when `a` is diagonal.
    let mut x: Vec<f64> = a
        .diagonal()
        .iter()
        .zip(b)
        .map(|(&aii, &bi)| if aii > 0.0 { bi / aii } else { 0.0 })
        .collect();
    let opts = CgOptions {
        atol: bound * 1e-3,
        max_iterations: 10 * n + 1000,
    };
    let mut last = f64::INFINITY;
    for _ in 0..REFINEMENT_ROUNDS {
        pcg(a, b, &mut x, weights, opts)?;
        last = residual(&x);
        if last <= bound {
            return Ok(x);
        }
    }
    Err(Error::Numeric {
        residual: last,
        bound,
    })
}

/// One fixed-point sweep `F ← α S F⁺ + (1 - α) y`. For `y >= 0` this keeps the
/// result non-negative when CG leaves rounding-level negatives on nodes whose
/// true score is far below solver precision.
fn polish(s: &CsrMatrix, alpha: f64, f: &[f64], y: &[f64]) -> Vec<f64> {
    let nonneg = y.iter().all(|&v| v >= 0.0);
    let src: Vec<f64> = if nonneg {
        f.iter().map(|&v| v.max(0.0)).collect()
    } else {
        f.to_vec()
    };
    let mut out = s.mul_vec(&src);
    for (o, yi) in out.iter_mut().zip(y) {
        *o = alpha * *o + (1.0 - alpha) * yi;
    }
    out
}

fn normalized_solve(
    op: &PropagationOperator,
    y: &InitialRanking,
    alpha: f64,
    kind: OperatorKind,
) -> Result<RankingVector> {
    expect_kind(op, &[kind])?;
    expect_len(op, y)?;
    check_alpha(alpha)?;

    let s = op.matrix();
    let yv = y.as_slice();
    let bound = RESIDUAL_BOUND * y.sup_norm().max(1.0);
    let residual = |f: &[f64]| propagation_residual(s, alpha, f, yv);

    let f = match kind {
        OperatorKind::RandomWalk => {
            // (D - αW) F = (1 - α) D y, with D S_rw = W.
            let d = op.degrees();
            let rows = (0..s.dim())
                .map(|i| {
                    let (cols, vals) = s.row(i);
                    let mut row: Vec<(usize, f64)> = cols
                        .iter()
                        .zip(vals)
                        .map(|(&j, &v)| (j, -alpha * d[i] * v))
                        .collect();
                    let at = row.partition_point(|&(j, _)| j < i);
                    row.insert(at, (i, d[i]));
                    row
                })
                .collect();
            let a = CsrMatrix::from_sorted_rows(rows);
            let b: Vec<f64> = yv
                .iter()
                .zip(d)
                .map(|(yi, di)| (1.0 - alpha) * di * yi)
                .collect();
            let inv_d: Vec<f64> = d.iter().map(|di| 1.0 / di).collect();
            solve_checked(&a, &b, &inv_d, bound, residual)?
        }
        _ => {
            let a = s.shifted(1.0, -alpha);
            let b: Vec<f64> = yv.iter().map(|yi| (1.0 - alpha) * yi).collect();
            solve_checked(&a, &b, &vec![1.0; s.dim()], bound, residual)?
        }
    };

    let polished = polish(s, alpha, &f, yv);
    let r = residual(&polished);
    let (scores, r) = if r <= bound {
        (polished, r)
    } else {
        (f.clone(), residual(&f))
    };
    Ok(RankingVector {
        scores,
        method: kind,
        iterations: Iterations::Direct,
        residual: r,
    })
}

/// Closed-form random-walk ranking: solves `(I - α S_rw) F = (1 - α) y`.
pub fn solve_random_walk(
    op: &PropagationOperator,
    y: &InitialRanking,
    alpha: f64,
) -> Result<RankingVector> {
    normalized_solve(op, y, alpha, OperatorKind::RandomWalk)
}

/// Closed-form symmetric-normalized ranking: solves `(I - α S_sym) F = (1 - α) y`.
pub fn solve_symmetric_normalized(
    op: &PropagationOperator,
    y: &InitialRanking,
    alpha: f64,
) -> Result<RankingVector> {
    normalized_solve(op, y, alpha, OperatorKind::SymmetricNormalized)
}

/// Symmetric-normalized ranking as the minimizer of
/// `Σ W_ij (F_i/√d_i - F_j/√d_j)² + γ Σ (F_i - y_i)²`, i.e. the solution of
/// `((1 + γ) I - S_sym) F = γ y`. Equal to [`solve_symmetric_normalized`] with
/// `α = 1 / (1 + γ)`.
pub fn solve_symmetric_regularized(
    op: &PropagationOperator,
    y: &InitialRanking,
    gamma: f64,
) -> Result<RankingVector> {
    expect_kind(op, &[OperatorKind::SymmetricNormalized])?;
    expect_len(op, y)?;
    check_gamma(gamma)?;

    let s = op.matrix();
    let yv = y.as_slice();
    let a = s.shifted(1.0 + gamma, -1.0);
    let b: Vec<f64> = yv.iter().map(|yi| gamma * yi).collect();
    let bound = RESIDUAL_BOUND * (gamma * y.sup_norm()).max(1.0);
    let residual = |f: &[f64]| {
        let af = a.mul_vec(f);
        af.iter()
            .zip(&b)
            .map(|(l, r)| (l - r).abs())
            .fold(0.0, f64::max)
    };
    let scores = solve_checked(&a, &b, &vec![1.0; s.dim()], bound, residual)?;
    let r = residual(&scores);
    Ok(RankingVector {
        scores,
        method: OperatorKind::SymmetricNormalized,
        iterations: Iterations::Direct,
        residual: r,
    })
}

/// Closed-form un-normalized ranking: solves `(L + γ I) F = γ y`.
pub fn solve_unnormalized(
    op: &PropagationOperator,
    y: &InitialRanking,
    gamma: f64,
) -> Result<RankingVector> {
    expect_kind(op, &[OperatorKind::Unnormalized])?;
    expect_len(op, y)?;
    check_gamma(gamma)?;

    let a = op.matrix().shifted(gamma, 1.0);
    let yv = y.as_slice();
    let b: Vec<f64> = yv.iter().map(|yi| gamma * yi).collect();
    let bound = RESIDUAL_BOUND * y.sup_norm().max(1.0);
    let residual = |f: &[f64]| {
        let af = a.mul_vec(f);
        af.iter()
            .zip(&b)
            .map(|(l, r)| (l - r).abs())
            .fold(0.0, f64::max)
    };
    let scores = solve_checked(&a, &b, &vec![1.0; a.dim()], bound, residual)?;
    let r = residual(&scores);
    Ok(RankingVector {
        scores,
        method: OperatorKind::Unnormalized,
        iterations: Iterations::Direct,
        residual: r,
    })
}

/// Ranks with the method implied by `op.kind()` under `cfg`. The
/// un-normalized method has no iterative form and is always solved directly.
pub fn solve(
    op: &PropagationOperator,
    y: &InitialRanking,
    cfg: &SolverConfig,
) -> Result<RankingVector> {
    cfg.validate()?;
    match (op.kind(), cfg.mode) {
        (OperatorKind::Unnormalized, _) => solve_unnormalized(op, y, cfg.gamma),
        (_, SolveMode::Iterative) => propagate_iterative(op, y, cfg),
        (OperatorKind::RandomWalk, SolveMode::Direct) => solve_random_walk(op, y, cfg.alpha),
        (OperatorKind::SymmetricNormalized, SolveMode::Direct) => {
            solve_symmetric_normalized(op, y, cfg.alpha)
        }
    }
}

/// Node indices outside `exclude`, by descending score with ties broken by
/// ascending index.
pub fn rank_order(scores: &[f64], exclude: &[usize]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).filter(|i| !exclude.contains(i)).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order
}
