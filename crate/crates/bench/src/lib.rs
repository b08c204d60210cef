//! Shared fixtures for the criterion benchmarks.

use tradeprop_core::{gen_synthetic, FeatureMatrix, SeedSet};

/// Desk-scale input: 390 five-feature transactions in three planted clusters.
pub fn desk_scale() -> (FeatureMatrix, SeedSet) {
    let data = gen_synthetic(130, 3, 6.0, 2024).expect("valid generator arguments");
    let seeds = SeedSet::new([4, 52, 368], data.features.rows()).expect("seeds in range");
    (data.features, seeds)
}
