//! Planted-cluster transaction data for experiments without the original dataset.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::graph::FeatureMatrix;

/// Feature dimension of generated transactions.
pub const SYNTHETIC_DIM: usize = 5;

#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub features: FeatureMatrix,
    /// Cluster label per row; rows are grouped by cluster.
    pub labels: Vec<usize>,
}

/// Gaussian blobs with unit within-cluster spread. Cluster `c` is centred at
/// `c * separation` along the first axis, so neighbouring clusters are
/// `separation` apart. Output is a pure function of the arguments.
pub fn gen_synthetic(
    n_per_cluster: usize,
    n_clusters: usize,
    separation: f64,
    rng_seed: u64,
) -> Result<SyntheticData> {
    if n_per_cluster == 0 || n_clusters == 0 {
        return Err(Error::Validation(
            "cluster counts must be at least 1".into(),
        ));
    }
    if !(separation >= 0.0 && separation.is_finite()) {
        return Err(Error::Validation(format!(
            "separation must be finite and non-negative, got {separation}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let n = n_per_cluster * n_clusters;
    let mut values = Vec::with_capacity(n * SYNTHETIC_DIM);
    let mut labels = Vec::with_capacity(n);
    for c in 0..n_clusters {
        for _ in 0..n_per_cluster {
            for d in 0..SYNTHETIC_DIM {
                let z: f64 = StandardNormal.sample(&mut rng);
                values.push(if d == 0 { z + c as f64 * separation } else { z });
            }
            labels.push(c);
        }
    }
    Ok(SyntheticData {
        features: FeatureMatrix::new(n, SYNTHETIC_DIM, values)?,
        labels,
    })
}
