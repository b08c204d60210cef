//! Seed-based ranking of transactions with graph-Laplacian semi-supervised methods.
//!
//! Transactions are nodes of a union k-nearest-neighbour graph with Gaussian
//! edge weights. Starting from a set of known irregular transactions (seeds),
//! rank mass is propagated through one of three operators:
//!
//! | Method | Operator | Closed form |
//! |--------|----------|-------------|
//! | Un-normalized | `L = D - W` | `F = γ (L + γI)⁻¹ y` |
//! | Random walk | `S_rw = D⁻¹W` | `F = (1 - α)(I - α S_rw)⁻¹ y` |
//! | Symmetric normalized | `S_sym = D^(-1/2) W D^(-1/2)` | `F = (1 - α)(I - α S_sym)⁻¹ y` |
//!
//! Candidates are ordered by descending score. [`evaluation`] holds the
//! leave-one-out harness used to compare methods.

mod cg;
pub mod error;
pub mod evaluation;
pub mod graph;
pub mod io;
pub mod operators;
pub mod solvers;
pub mod sparse;
pub mod synthetic;

pub use error::{Error, Result};
pub use evaluation::{
    accuracy_at_k, q_measure, run_leave_one_out, ConfusionCounts, EvalReport, LooRun,
};
pub use graph::{
    build_knn_graph, gaussian_similarity, Distance, FeatureMatrix, GraphConfig, SimilarityGraph,
};
pub use operators::{make_operator, OperatorKind, PropagationOperator};
pub use solvers::{
    propagate_iterative, rank_order, solve, solve_random_walk, solve_symmetric_normalized,
    solve_symmetric_regularized, solve_unnormalized, InitialRanking, Iterations, RankingVector,
    SeedSet, SolveMode, SolverConfig,
};
pub use sparse::CsrMatrix;
pub use synthetic::{gen_synthetic, SyntheticData};
