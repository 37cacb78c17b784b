//! K-Means over composite embeddings and the t-distribution soft assignment.
//!
//! Clustering runs in the full composite space; no dimensionality reduction
//! is applied anywhere. Initialization is k-means++ from an explicit seed,
//! empty clusters are repaired by reseeding them to the point farthest from
//! its current centroid, so `k` never shrinks.

use crate::scalar::{sq_dist, Scalar};
use ndarray::{Array2, ArrayView2};
use rand::distr::weighted::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ClusterError {
    #[error("need at least {k} points for k={k}, got {n}")]
    TooFewPoints { n: usize, k: usize },
    #[error("k must be >= 2, got {0}")]
    BadK(usize),
    #[error("alpha must be > 0")]
    BadAlpha,
    #[error("embeddings contain a non-finite value at row {0}")]
    NonFinite(usize),
    #[error("dimension mismatch: centroids are {centroid_dim}, embeddings are {embedding_dim}")]
    DimensionMismatch {
        centroid_dim: usize,
        embedding_dim: usize,
    },
}

/// Result of a k-means run plus the soft-assignment temperature.
#[derive(Debug, Clone)]
pub struct ClusterState<F: Scalar> {
    /// K × d centroid matrix.
    pub centroids: Array2<F>,
    /// Cluster index per document, in `[0, k)`.
    pub hard_assign: Vec<usize>,
    pub k: usize,
    /// Degrees of freedom of the soft-assignment t-kernel.
    pub alpha: F,
    /// Sum of squared distances to assigned centroids.
    pub inertia: F,
}

impl<F: Scalar> ClusterState<F> {
    /// Members of each cluster, in document order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut members = vec![Vec::new(); self.k];
        for (doc, &c) in self.hard_assign.iter().enumerate() {
            members[c].push(doc);
        }
        members
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.k];
        for &c in &self.hard_assign {
            sizes[c] += 1;
        }
        sizes
    }
}

/// Row-stochastic n × K membership probabilities.
#[derive(Debug, Clone)]
pub struct SoftAssignment<F: Scalar> {
    pub probs: Array2<F>,
}

impl<F: Scalar> SoftAssignment<F> {
    pub fn argmax_rows(&self) -> Vec<usize> {
        self.probs
            .rows()
            .into_iter()
            .map(|row| {
                let mut best = 0;
                let mut best_p = row[0];
                for (i, &p) in row.iter().enumerate().skip(1) {
                    if p > best_p {
                        best = i;
                        best_p = p;
                    }
                }
                best
            })
            .collect()
    }
}

fn check_finite<F: Scalar>(embeddings: &ArrayView2<F>) -> Result<(), ClusterError> {
    for (i, row) in embeddings.rows().into_iter().enumerate() {
        if row.iter().any(|v| !v.is_finite()) {
            return Err(ClusterError::NonFinite(i));
        }
    }
    Ok(())
}

fn nearest_centroid<F: Scalar>(point: &[F], centroids: &Array2<F>) -> (usize, F) {
    let mut best = 0;
    let mut best_d = sq_dist(point, centroids.row(0).to_slice().unwrap());
    for (i, c) in centroids.rows().into_iter().enumerate().skip(1) {
        let d = sq_dist(point, c.to_slice().unwrap());
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    (best, best_d)
}

fn kmeans_pp_init<F: Scalar>(
    embeddings: &ArrayView2<F>,
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Array2<F> {
    let (n, d) = embeddings.dim();
    let mut centroids = Array2::zeros((k, d));
    let first = rng.random_range(0..n);
    centroids.row_mut(0).assign(&embeddings.row(first));

    let mut min_d2: Vec<f64> = (0..n)
        .map(|i| {
            sq_dist(
                embeddings.row(i).to_slice().unwrap(),
                centroids.row(0).to_slice().unwrap(),
            )
            .to_f64_cfg()
        })
        .collect();

    for c in 1..k {
        let total: f64 = min_d2.iter().sum();
        let choice = if total > 0.0 {
            let dist = WeightedIndex::new(&min_d2).expect("nonnegative weights");
            dist.sample(rng)
        } else {
            // All remaining mass at the chosen centroids; any point works.
            rng.random_range(0..n)
        };
        centroids.row_mut(c).assign(&embeddings.row(choice));
        for i in 0..n {
            let d = sq_dist(
                embeddings.row(i).to_slice().unwrap(),
                centroids.row(c).to_slice().unwrap(),
            )
            .to_f64_cfg();
            if d < min_d2[i] {
                min_d2[i] = d;
            }
        }
    }
    centroids
}

/// Assigns every point to its nearest centroid, then reseeds any empty
/// cluster to the point farthest from its current centroid. Returns the
/// assignment and the post-repair inertia.
fn assign_with_repair<F: Scalar>(
    embeddings: &ArrayView2<F>,
    centroids: &mut Array2<F>,
) -> (Vec<usize>, F) {
    let n = embeddings.nrows();
    let k = centroids.nrows();
    let mut assign = vec![0usize; n];
    let mut dist = vec![F::zero(); n];
    for i in 0..n {
        let (c, d) = nearest_centroid(embeddings.row(i).to_slice().unwrap(), centroids);
        assign[i] = c;
        dist[i] = d;
    }
    let mut sizes = vec![0usize; k];
    for &c in &assign {
        sizes[c] += 1;
    }
    for empty in 0..k {
        if sizes[empty] > 0 {
            continue;
        }
        // Farthest point whose donor cluster keeps at least one member.
        let mut farthest: Option<usize> = None;
        for i in 0..n {
            if sizes[assign[i]] < 2 {
                continue;
            }
            if farthest.map_or(true, |f| dist[i] > dist[f]) {
                farthest = Some(i);
            }
        }
        let i = farthest.expect("some cluster has >= 2 members when one is empty");
        sizes[assign[i]] -= 1;
        centroids.row_mut(empty).assign(&embeddings.row(i));
        assign[i] = empty;
        dist[i] = F::zero();
        sizes[empty] = 1;
    }
    let inertia = dist.iter().copied().fold(F::zero(), |a, b| a + b);
    (assign, inertia)
}

/// Seeded k-means: k-means++ initialization, Lloyd iterations until the
/// largest centroid shift drops below `tol` or `max_iter` is reached.
pub fn kmeans<F: Scalar>(
    embeddings: ArrayView2<F>,
    k: usize,
    alpha: F,
    seed: u64,
    max_iter: usize,
    tol: F,
) -> Result<ClusterState<F>, ClusterError> {
    if k < 2 {
        return Err(ClusterError::BadK(k));
    }
    if alpha <= F::zero() {
        return Err(ClusterError::BadAlpha);
    }
    let n = embeddings.nrows();
    if n < k {
        return Err(ClusterError::TooFewPoints { n, k });
    }
    check_finite(&embeddings)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = kmeans_pp_init(&embeddings, k, &mut rng);

    for _ in 0..max_iter {
        let (assign, _) = assign_with_repair(&embeddings, &mut centroids);

        let mut new_centroids: Array2<F> = Array2::zeros(centroids.dim());
        let mut counts = vec![0usize; k];
        for (doc, &c) in assign.iter().enumerate() {
            counts[c] += 1;
            let mut row = new_centroids.row_mut(c);
            for (acc, &v) in row.iter_mut().zip(embeddings.row(doc)) {
                *acc += v;
            }
        }
        for (c, &count) in counts.iter().enumerate() {
            let inv = F::one() / F::from_usize(count).unwrap();
            for v in new_centroids.row_mut(c) {
                *v *= inv;
            }
        }

        let mut shift = F::zero();
        for c in 0..k {
            let d = sq_dist(
                centroids.row(c).to_slice().unwrap(),
                new_centroids.row(c).to_slice().unwrap(),
            )
            .sqrt();
            if d > shift {
                shift = d;
            }
        }
        centroids = new_centroids;
        if shift < tol {
            break;
        }
    }
    // Synchronize the assignment with the final centroids.
    let (assign, inertia) = assign_with_repair(&embeddings, &mut centroids);

    Ok(ClusterState {
        centroids,
        hard_assign: assign,
        k,
        alpha,
        inertia,
    })
}

/// Soft cluster membership under a Student-t kernel:
/// `P(μ_i | h) ∝ (1 + ‖h − μ_i‖²/α)^(−(α+1)/2)`, rows normalized to 1.
pub fn soft_assign<F: Scalar>(
    state: &ClusterState<F>,
    embeddings: ArrayView2<F>,
) -> Result<SoftAssignment<F>, ClusterError> {
    if embeddings.ncols() != state.centroids.ncols() {
        return Err(ClusterError::DimensionMismatch {
            centroid_dim: state.centroids.ncols(),
            embedding_dim: embeddings.ncols(),
        });
    }
    check_finite(&embeddings)?;
    let n = embeddings.nrows();
    let k = state.k;
    let exponent = -(state.alpha + F::one()) / F::from_f64_cfg(2.0);
    let mut probs = Array2::zeros((n, k));
    for i in 0..n {
        let point = embeddings.row(i);
        let point = point.to_slice().unwrap();
        let mut total = F::zero();
        for c in 0..k {
            let d2 = sq_dist(point, state.centroids.row(c).to_slice().unwrap());
            let w = (F::one() + d2 / state.alpha).powf(exponent);
            probs[[i, c]] = w;
            total += w;
        }
        for c in 0..k {
            probs[[i, c]] /= total;
        }
    }
    Ok(SoftAssignment { probs })
}
