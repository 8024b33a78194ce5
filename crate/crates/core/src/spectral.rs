//! Dense symmetric eigendecomposition, k-means, and spectral clustering on
//! plain and regularized normalized Laplacians.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{normalized_laplacian, regularized_laplacian, Graph, GraphError};
use crate::matrix::DenseSymMatrix;
use crate::partition::Partition;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectralError {
    #[error("eigensolver did not converge within {0} iterations")]
    NoConvergence(usize),
    #[error("asked for {k} clusters or eigenpairs from {n} items")]
    TooManyClusters { k: usize, n: usize },
    #[error("k must be positive")]
    ZeroClusters,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Leading eigenpairs, largest eigenvalue first.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    /// `n × k`, orthonormal columns. The first coordinate of each column
    /// that is not negligibly small is positive.
    pub vectors: DMatrix<f64>,
}

/// Top `k` eigenpairs by algebraic value.
pub fn sym_eigs_topk(m: &DenseSymMatrix, k: usize) -> Result<EigenPairs, SpectralError> {
    let n = m.n();
    if k > n {
        return Err(SpectralError::TooManyClusters { k, n });
    }
    let max_iters = 100 * n.max(1);
    let eig = SymmetricEigen::try_new(m.as_matrix().clone(), f64::EPSILON, max_iters)
        .ok_or(SpectralError::NoConvergence(max_iters))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let mut vectors = DMatrix::zeros(n, k);
    let mut values = Vec::with_capacity(k);
    for (t, &idx) in order.iter().take(k).enumerate() {
        values.push(eig.eigenvalues[idx]);
        let mut v = eig.eigenvectors.column(idx).into_owned();
        let scale = v.amax();
        if let Some(first) = v.iter().find(|x| x.abs() > 1e-10 * scale) {
            if *first < 0.0 {
                v.neg_mut();
            }
        }
        vectors.set_column(t, &v);
    }
    Ok(EigenPairs { values, vectors })
}

#[derive(Debug, Clone, PartialEq)]
pub struct KmeansResult {
    pub partition: Partition,
    pub centroids: DMatrix<f64>,
    /// Within-cluster sum of squares of the best restart.
    pub inertia: f64,
    /// Inertia after each assignment step of the best restart.
    pub inertia_trace: Vec<f64>,
}

const LLOYD_MAX_ITERS: usize = 300;

/// k-means on the rows of `points`: k-means++ seeding, Lloyd iterations,
/// best of `restarts` runs by inertia (earliest run wins ties). All runs
/// draw from one ChaCha8 stream seeded with `seed`.
///
/// A cluster that empties is re-seeded at the point farthest from its
/// centroid. When every point coincides with some centroid there is nothing
/// to move, and the result may have empty clusters (for instance `k = 2` on
/// identical points).
pub fn kmeans(points: &DMatrix<f64>, k: usize, seed: u64, restarts: usize) -> Result<KmeansResult, SpectralError> {
    let n = points.nrows();
    if k == 0 {
        return Err(SpectralError::ZeroClusters);
    }
    if k > n {
        return Err(SpectralError::TooManyClusters { k, n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<KmeansResult> = None;
    for _ in 0..restarts.max(1) {
        let run = lloyd(points, kmeans_pp(points, k, &mut rng));
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

fn sq_dist(points: &DMatrix<f64>, i: usize, centroids: &DMatrix<f64>, c: usize) -> f64 {
    points
        .row(i)
        .iter()
        .zip(centroids.row(c).iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum()
}

fn kmeans_pp(points: &DMatrix<f64>, k: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let n = points.nrows();
    let mut centroids = DMatrix::zeros(k, points.ncols());
    centroids.set_row(0, &points.row(rng.gen_range(0..n)));
    let mut nearest: Vec<f64> = (0..n).map(|i| sq_dist(points, i, &centroids, 0)).collect();
    for c in 1..k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &d) in nearest.iter().enumerate() {
                if target < d {
                    chosen = i;
                    break;
                }
                target -= d;
            }
            chosen
        } else {
            rng.gen_range(0..n)
        };
        centroids.set_row(c, &points.row(pick));
        for (i, d) in nearest.iter_mut().enumerate() {
            *d = d.min(sq_dist(points, i, &centroids, c));
        }
    }
    centroids
}

fn lloyd(points: &DMatrix<f64>, mut centroids: DMatrix<f64>) -> KmeansResult {
    let (n, k) = (points.nrows(), centroids.nrows());
    let mut labels = vec![usize::MAX; n];
    let mut trace = Vec::new();
    for _ in 0..LLOYD_MAX_ITERS {
        let mut changed = false;
        let mut inertia = 0.0;
        let mut dist = vec![0.0; n];
        for i in 0..n {
            let (mut best_c, mut best_d) = (0, f64::INFINITY);
            for c in 0..k {
                let d = sq_dist(points, i, &centroids, c);
                if d < best_d {
                    best_c = c;
                    best_d = d;
                }
            }
            if labels[i] != best_c {
                labels[i] = best_c;
                changed = true;
            }
            dist[i] = best_d;
            inertia += best_d;
        }
        trace.push(inertia);
        if !changed {
            break;
        }

        let mut sums = DMatrix::zeros(k, points.ncols());
        let mut counts = vec![0usize; k];
        for (i, &c) in labels.iter().enumerate() {
            let mut row = sums.row_mut(c);
            row += points.row(i);
            counts[c] += 1;
        }
        for c in 0..k {
            if counts[c] > 0 {
                centroids.set_row(c, &(sums.row(c) / counts[c] as f64));
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                continue;
            }
            let far = (0..n).max_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(b.cmp(&a)));
            if let Some(far) = far.filter(|&i| dist[i] > 0.0) {
                centroids.set_row(c, &points.row(far));
                dist[far] = 0.0;
            }
        }
    }
    let inertia = *trace.last().unwrap_or(&0.0);
    KmeansResult {
        partition: Partition::new(labels),
        centroids,
        inertia,
        inertia_trace: trace,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralVariant {
    /// Top eigenvectors of `D^{-1/2} A D^{-1/2}`, k-means on raw rows.
    Plain,
    /// Top eigenvectors of `D_τ^{-1/2} A D_τ^{-1/2}`, rows scaled to unit
    /// length before k-means.
    Regularized,
    /// As `Regularized` without the row scaling.
    RegularizedNoProjection,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralOptions {
    pub seed: u64,
    pub restarts: usize,
    /// Regularizer for the regularized variants; `None` means the average
    /// degree.
    pub tau: Option<f64>,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            restarts: 20,
            tau: None,
        }
    }
}

/// Top-`k` eigenvectors of `m`, optionally with rows scaled to unit length
/// (zero rows stay zero), clustered by k-means.
pub fn spectral_partition(
    m: &DenseSymMatrix,
    k: usize,
    normalize_rows: bool,
    seed: u64,
    restarts: usize,
) -> Result<Partition, SpectralError> {
    if k == 0 {
        return Err(SpectralError::ZeroClusters);
    }
    let mut embedding = sym_eigs_topk(m, k)?.vectors;
    if normalize_rows {
        for mut row in embedding.row_iter_mut() {
            let norm = row.norm();
            if norm > 0.0 {
                row /= norm;
            }
        }
    }
    Ok(kmeans(&embedding, k, seed, restarts)?.partition)
}

pub fn spectral_clustering(
    g: &Graph,
    k: usize,
    variant: SpectralVariant,
    opts: &SpectralOptions,
) -> Result<Partition, SpectralError> {
    let (m, normalize_rows) = match variant {
        SpectralVariant::Plain => (normalized_laplacian(g)?, false),
        SpectralVariant::Regularized | SpectralVariant::RegularizedNoProjection => {
            let tau = opts.tau.unwrap_or_else(|| g.average_degree());
            (regularized_laplacian(g, tau), variant == SpectralVariant::Regularized)
        }
    };
    spectral_partition(&m, k, normalize_rows, opts.seed, opts.restarts)
}

/// Indicator matrix of `p` plus `offset`, columns scaled to unit norm.
///
/// # Panics
///
/// If a label is `>= k`.
pub fn nmf_init_from_partition(p: &Partition, k: usize, offset: f64) -> DMatrix<f64> {
    let mut h = DMatrix::from_element(p.len(), k, offset);
    for (i, &label) in p.labels().iter().enumerate() {
        assert!(label < k, "label {label} of node {i} is not below k = {k}");
        h[(i, label)] += 1.0;
    }
    for mut col in h.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col /= norm;
        }
    }
    h
}
