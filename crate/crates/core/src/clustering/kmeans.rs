//! Lloyd's k-means with k-means++ seeding.
//!
//! Identical rows are collapsed into one weighted point before fitting, and
//! the distinct points are put in lexicographic order. Weighted Lloyd on the
//! collapsed points is the same objective as plain Lloyd on the full matrix,
//! but vote matrices are heavily duplicated so this is much cheaper, and the
//! canonical order makes the result independent of input row order.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::distance::squared_euclidean;
use crate::math::stream_seed;
use crate::model::{Partition, VoteMatrix};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMeansConfig {
    pub k: usize,
    pub seed: u64,
    pub max_iterations: usize,
    /// Stop once no centroid moves further than this.
    pub tolerance: f64,
    pub n_init: usize,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        KMeansConfig { k: 3, seed: 42, max_iterations: 300, tolerance: 1e-6, n_init: 10 }
    }
}

impl KMeansConfig {
    pub fn with_k(k: usize) -> Self {
        KMeansConfig { k, ..Default::default() }
    }

    fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Parameter("k must be at least 1".into()));
        }
        if self.n_init == 0 {
            return Err(Error::Parameter("n_init must be at least 1".into()));
        }
        if !(self.tolerance >= 0.0) {
            return Err(Error::Parameter("tolerance must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringOutcome {
    pub partition: Partition,
    /// Cluster index of each input row.
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    /// Sum of squared distances from each row to its centroid.
    pub inertia: f64,
    pub iterations_run: usize,
    /// Number of clusters actually produced (≤ k when rows are duplicated).
    pub effective_k: usize,
    /// Inertia after every assignment step of the winning restart.
    pub inertia_trace: Vec<f64>,
}

impl ClusteringOutcome {
    pub fn cluster_sizes(&self) -> Vec<usize> {
        self.partition.blocs().iter().map(|b| b.len()).collect()
    }
}

/// Clusters the rows of `matrix`; blocs are labelled by account.
pub fn kmeans(matrix: &VoteMatrix, config: &KMeansConfig) -> Result<ClusteringOutcome> {
    if matrix.rows() == 0 {
        return Err(Error::Empty("matrix has no rows"));
    }
    cluster_rows(matrix, config)
}

/// Same as [`kmeans`]; kept as the name the pipeline uses for ternary
/// voting histories.
pub fn cluster_vote_matrix(matrix: &VoteMatrix, config: &KMeansConfig) -> Result<ClusteringOutcome> {
    kmeans(matrix, config)
}

fn cluster_rows(matrix: &VoteMatrix, config: &KMeansConfig) -> Result<ClusteringOutcome> {
    config.validate()?;
    let dim = matrix.cols();
    if dim == 0 {
        return Err(Error::Empty("matrix has no columns"));
    }
    let points = Points::collapse(matrix);
    let k = config.k.min(points.len());

    let mut best: Option<Fit> = None;
    for restart in 0..config.n_init {
        let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(config.seed, restart as u64));
        let fit = lloyd(&points, dim, k, config, &mut rng);
        // strict: ties keep the earlier restart
        if best.as_ref().map_or(true, |b| fit.inertia < b.inertia) {
            best = Some(fit);
        }
    }
    let fit = best.expect("n_init >= 1");

    // Relabel clusters compactly, dropping any left empty.
    let k = fit.centroids.len() / dim;
    let mut relabel = vec![usize::MAX; k];
    let mut centroids = Vec::new();
    for c in 0..k {
        if fit.labels.iter().any(|l| *l == c) {
            relabel[c] = centroids.len();
            centroids.push(fit.centroids[c * dim..(c + 1) * dim].to_vec());
        }
    }
    let assignments: Vec<usize> = points.owner.iter().map(|p| relabel[fit.labels[*p]]).collect();
    let mut blocs = vec![Vec::new(); centroids.len()];
    for (a, c) in matrix.accounts.iter().zip(&assignments) {
        blocs[*c].push(a.clone());
    }
    let partition = Partition::new(blocs)?;

    Ok(ClusteringOutcome {
        partition,
        effective_k: centroids.len(),
        assignments,
        centroids,
        inertia: fit.inertia,
        iterations_run: fit.iterations,
        inertia_trace: fit.trace,
    })
}

/// SplitMix64 finalizer over (seed, restart) so restarts get unrelated streams.
/// Distinct rows in lexicographic order with multiplicities.
struct Points {
    data: Vec<f64>,
    weight: Vec<f64>,
    /// For each input row, the index of its distinct point.
    owner: Vec<usize>,
}

impl Points {
    fn collapse(matrix: &VoteMatrix) -> Self {
        let n = matrix.rows();
        // +0.0 folds -0.0 into 0.0 so total_cmp treats them as equal
        let row = |i: usize| matrix.row(i).iter().map(|v| v + 0.0);
        let cmp = |a: usize, b: usize| -> Ordering {
            row(a)
                .zip(row(b))
                .map(|(x, y)| x.total_cmp(&y))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
        };
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|a, b| cmp(*a, *b));

        let mut data = Vec::new();
        let mut weight: Vec<f64> = Vec::new();
        let mut owner = vec![0; n];
        let mut prev: Option<usize> = None;
        for &i in &order {
            if prev.map_or(true, |p| cmp(p, i) != Ordering::Equal) {
                data.extend(row(i));
                weight.push(0.0);
            }
            let slot = weight.len() - 1;
            weight[slot] += 1.0;
            owner[i] = slot;
            prev = Some(i);
        }
        Points { data, weight, owner }
    }

    fn len(&self) -> usize {
        self.weight.len()
    }

    fn point(&self, i: usize, dim: usize) -> &[f64] {
        &self.data[i * dim..(i + 1) * dim]
    }
}

struct Fit {
    centroids: Vec<f64>,
    labels: Vec<usize>,
    inertia: f64,
    iterations: usize,
    trace: Vec<f64>,
}

fn lloyd(points: &Points, dim: usize, k: usize, config: &KMeansConfig, rng: &mut ChaCha8Rng) -> Fit {
    let n = points.len();
    let mut centroids = seed_plus_plus(points, dim, k, rng);
    let k = centroids.len() / dim;
    let mut labels = vec![0usize; n];
    let mut dist = vec![0.0; n];
    let mut trace = Vec::new();
    let mut iterations = 0;

    for _ in 0..config.max_iterations {
        let inertia = assign(points, dim, &centroids, &mut labels, &mut dist);
        trace.push(inertia);
        iterations += 1;

        let mut next = vec![0.0; k * dim];
        let mut mass = vec![0.0; k];
        for p in 0..n {
            let c = labels[p];
            mass[c] += points.weight[p];
            for (acc, x) in next[c * dim..(c + 1) * dim].iter_mut().zip(points.point(p, dim)) {
                *acc += points.weight[p] * x;
            }
        }
        for c in 0..k {
            if mass[c] > 0.0 {
                for v in &mut next[c * dim..(c + 1) * dim] {
                    *v /= mass[c];
                }
            }
        }
        repair_empty(points, dim, &mut next, &mass, &labels);

        let shift = (0..k)
            .map(|c| squared_euclidean(&centroids[c * dim..(c + 1) * dim], &next[c * dim..(c + 1) * dim]))
            .fold(0.0, f64::max);
        centroids = next;
        if shift <= config.tolerance * config.tolerance {
            break;
        }
    }
    let inertia = assign(points, dim, &centroids, &mut labels, &mut dist);
    trace.push(inertia);
    Fit { centroids, labels, inertia, iterations, trace }
}

/// Reseeds each empty cluster at the point farthest from its own centroid.
fn repair_empty(points: &Points, dim: usize, centroids: &mut [f64], mass: &[f64], labels: &[usize]) {
    let k = mass.len();
    let mut taken = vec![false; points.len()];
    for c in 0..k {
        if mass[c] > 0.0 {
            continue;
        }
        let mut far = None;
        let mut far_d = 0.0;
        for p in 0..points.len() {
            if taken[p] {
                continue;
            }
            let own = labels[p];
            let d = squared_euclidean(points.point(p, dim), &centroids[own * dim..(own + 1) * dim]);
            if d > far_d {
                far_d = d;
                far = Some(p);
            }
        }
        if let Some(p) = far {
            taken[p] = true;
            centroids[c * dim..(c + 1) * dim].copy_from_slice(points.point(p, dim));
        }
    }
}

/// Nearest-centroid assignment, ties to the lowest index. Returns inertia.
fn assign(points: &Points, dim: usize, centroids: &[f64], labels: &mut [usize], dist: &mut [f64]) -> f64 {
    let k = centroids.len() / dim;
    let mut inertia = 0.0;
    for p in 0..points.len() {
        let x = points.point(p, dim);
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for c in 0..k {
            let d = squared_euclidean(x, &centroids[c * dim..(c + 1) * dim]);
            if d < best_d {
                best_d = d;
                best = c;
            }
        }
        labels[p] = best;
        dist[p] = best_d;
        inertia += points.weight[p] * best_d;
    }
    inertia
}

fn seed_plus_plus(points: &Points, dim: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = points.len();
    let mut centroids = Vec::with_capacity(k * dim);
    let first = sample(&points.weight, rng).unwrap_or(0);
    centroids.extend_from_slice(points.point(first, dim));
    let mut d2: Vec<f64> = (0..n).map(|p| squared_euclidean(points.point(p, dim), points.point(first, dim))).collect();
    for _ in 1..k {
        let scores: Vec<f64> = (0..n).map(|p| points.weight[p] * d2[p]).collect();
        // k never exceeds the number of distinct points, so some score is positive
        let Some(next) = sample(&scores, rng) else { break };
        centroids.extend_from_slice(points.point(next, dim));
        for p in 0..n {
            let d = squared_euclidean(points.point(p, dim), points.point(next, dim));
            if d < d2[p] {
                d2[p] = d;
            }
        }
    }
    centroids
}

fn sample(scores: &[f64], rng: &mut ChaCha8Rng) -> Option<usize> {
    let total: f64 = scores.iter().sum();
    if !(total > 0.0) {
        return None;
    }
    let target = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last = None;
    for (i, s) in scores.iter().enumerate() {
        if *s <= 0.0 {
            continue;
        }
        acc += s;
        last = Some(i);
        if target < acc {
            return Some(i);
        }
    }
    last
}
