//! Stochastic block models: parameters, population matrices, sampling and
//! the presets used by the simulation harness.
//!
//! Population matrices include the diagonal (`𝓐_ii = B_qq` or
//! `θ_i² B′_qq`), so population degrees are plain row sums. Sampled graphs
//! never have self loops.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Pareto};

use crate::graph::Graph;
use crate::matrix::DenseSymMatrix;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("membership of node {node} is {label}, but the model has {k} blocks")]
    LabelOutOfRange { node: usize, label: usize, k: usize },
    #[error("block {0} has no nodes")]
    EmptyCommunity(usize),
    #[error("connectivity matrix must be square and symmetric")]
    NotSymmetric,
    #[error("connectivity entry ({row}, {col}) = {value} is outside the allowed range")]
    EntryOutOfRange { row: usize, col: usize, value: f64 },
    #[error("theta has {theta} entries for {n} nodes")]
    LengthMismatch { theta: usize, n: usize },
    #[error("theta[{0}] must be finite and positive")]
    NonPositiveTheta(usize),
    #[error("degree parameters of block {block} sum to {sum}, expected 1")]
    NotIdentifiable { block: usize, sum: f64 },
    #[error("expected edge probability ({row}, {col}) = {value} exceeds 1")]
    DcsbmEntryOutOfRange { row: usize, col: usize, value: f64 },
    #[error("node {0} has zero expected degree")]
    ZeroExpectedDegree(usize),
    #[error("mean degree {target} is unreachable: {reason}")]
    InfeasibleDegree { target: f64, reason: String },
    #[error("invalid preset parameter: {0}")]
    InvalidParameter(String),
}

/// `𝓐 = Z B Zᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SbmParams {
    z: Vec<usize>,
    b: DMatrix<f64>,
}

/// `𝓐 = Θ Z B′ Zᵀ Θ` with the degree parameters of every block summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct DcsbmParams {
    z: Vec<usize>,
    b_prime: DMatrix<f64>,
    theta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BlockModel {
    Sbm(SbmParams),
    Dcsbm(DcsbmParams),
}

fn check_memberships(z: &[usize], k: usize) -> Result<(), ModelError> {
    let mut sizes = vec![0usize; k];
    for (node, &label) in z.iter().enumerate() {
        if label >= k {
            return Err(ModelError::LabelOutOfRange { node, label, k });
        }
        sizes[label] += 1;
    }
    match sizes.iter().position(|&s| s == 0) {
        Some(q) => Err(ModelError::EmptyCommunity(q)),
        None => Ok(()),
    }
}

fn check_connectivity(b: &DMatrix<f64>, upper: f64) -> Result<(), ModelError> {
    if b.nrows() != b.ncols() {
        return Err(ModelError::NotSymmetric);
    }
    for row in 0..b.nrows() {
        for col in 0..b.ncols() {
            let value = b[(row, col)];
            if !(0.0..=upper).contains(&value) {
                return Err(ModelError::EntryOutOfRange { row, col, value });
            }
            if value != b[(col, row)] {
                return Err(ModelError::NotSymmetric);
            }
        }
    }
    Ok(())
}

impl SbmParams {
    /// Probabilities must lie in `[0, 1]` and every block must be nonempty.
    pub fn new(z: Vec<usize>, b: DMatrix<f64>) -> Result<Self, ModelError> {
        check_connectivity(&b, 1.0)?;
        check_memberships(&z, b.nrows())?;
        Ok(Self { z, b })
    }

    pub fn z(&self) -> &[usize] {
        &self.z
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }
}

impl DcsbmParams {
    pub fn new(z: Vec<usize>, b_prime: DMatrix<f64>, theta: Vec<f64>) -> Result<Self, ModelError> {
        check_connectivity(&b_prime, f64::INFINITY)?;
        let k = b_prime.nrows();
        check_memberships(&z, k)?;
        if theta.len() != z.len() {
            return Err(ModelError::LengthMismatch {
                theta: theta.len(),
                n: z.len(),
            });
        }
        if let Some(i) = theta.iter().position(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(ModelError::NonPositiveTheta(i));
        }
        let mut sums = vec![0.0; k];
        for (&q, &t) in z.iter().zip(&theta) {
            sums[q] += t;
        }
        if let Some((block, &sum)) = sums.iter().enumerate().find(|(_, s)| (**s - 1.0).abs() > 1e-9) {
            return Err(ModelError::NotIdentifiable { block, sum });
        }
        Ok(Self { z, b_prime, theta })
    }

    pub fn z(&self) -> &[usize] {
        &self.z
    }

    pub fn b_prime(&self) -> &DMatrix<f64> {
        &self.b_prime
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }
}

impl From<SbmParams> for BlockModel {
    fn from(p: SbmParams) -> Self {
        BlockModel::Sbm(p)
    }
}

impl From<DcsbmParams> for BlockModel {
    fn from(p: DcsbmParams) -> Self {
        BlockModel::Dcsbm(p)
    }
}

impl BlockModel {
    pub fn memberships(&self) -> &[usize] {
        match self {
            BlockModel::Sbm(p) => &p.z,
            BlockModel::Dcsbm(p) => &p.z,
        }
    }

    pub fn n(&self) -> usize {
        self.memberships().len()
    }

    pub fn k(&self) -> usize {
        match self {
            BlockModel::Sbm(p) => p.b.nrows(),
            BlockModel::Dcsbm(p) => p.b_prime.nrows(),
        }
    }

    fn entry(&self, i: usize, j: usize) -> f64 {
        match self {
            BlockModel::Sbm(p) => p.b[(p.z[i], p.z[j])],
            BlockModel::Dcsbm(p) => p.theta[i] * p.theta[j] * p.b_prime[(p.z[i], p.z[j])],
        }
    }

    /// `E(A)` under the model, diagonal included.
    pub fn population_adjacency(&self) -> DenseSymMatrix {
        DenseSymMatrix::from_upper_fn(self.n(), |i, j| self.entry(i, j))
    }

    /// Row sums of the population adjacency.
    pub fn expected_degrees(&self) -> Vec<f64> {
        let m = self.population_adjacency();
        m.as_matrix().row_iter().map(|r| r.sum()).collect()
    }

    /// `D^{-1/2} 𝓐 D^{-1/2}` from the block-level closed forms: for the SBM
    /// `Z D_B^{-1/2} B D_B^{-1/2} Zᵀ` with `D_B = diag(B Zᵀ 1)`, for the
    /// DCSBM `Θ^{1/2} Z D′^{-1/2} B′ D′^{-1/2} Zᵀ Θ^{1/2}` where `D′` holds
    /// the row sums of `B′`.
    pub fn population_laplacian(&self) -> Result<DenseSymMatrix, ModelError> {
        let (z, block_degree, conn): (&[usize], Vec<f64>, &DMatrix<f64>) = match self {
            BlockModel::Sbm(p) => {
                let sizes = block_sizes(&p.z, self.k());
                let d = (0..self.k())
                    .map(|q| (0..self.k()).map(|l| p.b[(q, l)] * sizes[l] as f64).sum())
                    .collect();
                (&p.z, d, &p.b)
            }
            BlockModel::Dcsbm(p) => {
                let d = p.b_prime.row_iter().map(|r| r.sum()).collect();
                (&p.z, d, &p.b_prime)
            }
        };
        if let Some(i) = z.iter().position(|&q| block_degree[q] <= 0.0) {
            return Err(ModelError::ZeroExpectedDegree(i));
        }
        let node_scale: Vec<f64> = match self {
            BlockModel::Sbm(_) => vec![1.0; self.n()],
            BlockModel::Dcsbm(p) => p.theta.iter().map(|t| t.sqrt()).collect(),
        };
        Ok(DenseSymMatrix::from_upper_fn(self.n(), |i, j| {
            let (q, l) = (z[i], z[j]);
            node_scale[i] * node_scale[j] * conn[(q, l)] / (block_degree[q] * block_degree[l]).sqrt()
        }))
    }

    /// Edge probabilities for sampling; a DCSBM entry above 1 is an error.
    pub fn probability_matrix(&self) -> Result<DenseSymMatrix, ModelError> {
        let m = self.population_adjacency();
        for j in 0..m.n() {
            for i in 0..j {
                let value = m.get(i, j);
                if value > 1.0 {
                    return Err(ModelError::DcsbmEntryOutOfRange { row: i, col: j, value });
                }
            }
        }
        Ok(m)
    }

    /// Edge probabilities with entries above 1 clipped to 1, and the clipped
    /// fraction of off-diagonal pairs. Clipping is logged, as a warning once
    /// it affects more than 5% of the pairs.
    pub fn clipped_probabilities(&self) -> (DenseSymMatrix, f64) {
        let n = self.n();
        let mut clipped = 0usize;
        let m = DenseSymMatrix::from_upper_fn(n, |i, j| {
            let v = self.entry(i, j);
            if v > 1.0 {
                if i != j {
                    clipped += 1;
                }
                1.0
            } else {
                v
            }
        });
        let pairs = n * n.saturating_sub(1) / 2;
        let fraction = if pairs == 0 { 0.0 } else { clipped as f64 / pairs as f64 };
        if clipped > 0 {
            let level = if fraction > 0.05 { log::Level::Warn } else { log::Level::Debug };
            log::log!(
                level,
                "clipped {clipped} of {pairs} edge probabilities to 1 ({:.3}%)",
                100.0 * fraction
            );
        }
        (m, fraction)
    }

    /// One Bernoulli draw per node pair `i < j`, visited row by row, from a
    /// ChaCha8 stream seeded with `seed`.
    pub fn sample_graph(&self, seed: u64) -> Graph {
        let (p, _) = self.clipped_probabilities();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.n();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.gen::<f64>() < p.get(i, j) {
                    edges.push((i, j));
                }
            }
        }
        Graph::new(n, edges).expect("sampled edges are valid")
    }
}

pub fn population_adjacency(model: &BlockModel) -> DenseSymMatrix {
    model.population_adjacency()
}

pub fn population_laplacian(model: &BlockModel) -> Result<DenseSymMatrix, ModelError> {
    model.population_laplacian()
}

pub fn sample_graph(model: &BlockModel, seed: u64) -> Graph {
    model.sample_graph(seed)
}

pub fn block_sizes(z: &[usize], k: usize) -> Vec<usize> {
    let mut sizes = vec![0; k];
    for &q in z {
        sizes[q] += 1;
    }
    sizes
}

/// Contiguous blocks whose sizes differ by at most one; the first `n mod k`
/// blocks get the extra node.
pub fn balanced_memberships(n: usize, k: usize) -> Vec<usize> {
    let (base, extra) = (n / k, n % k);
    (0..k)
        .flat_map(|q| std::iter::repeat_n(q, base + usize::from(q < extra)))
        .collect()
}

fn planted_matrix(k: usize, within: f64, between: f64) -> DMatrix<f64> {
    DMatrix::from_fn(k, k, |q, l| if q == l { within } else { between })
}

fn check_sizes(n: usize, k: usize) -> Result<(), ModelError> {
    if k == 0 || n < k {
        return Err(ModelError::InvalidParameter(format!("need 1 <= k <= n, got n={n}, k={k}")));
    }
    Ok(())
}

/// Balanced SBM with `B = p·(snr on the diagonal, 1 elsewhere)` and `p`
/// chosen so that the population mean degree `Σ_ij 𝓐_ij / n` equals
/// `target_avg_degree`.
pub fn sbm_snr_preset(n: usize, k: usize, snr: f64, target_avg_degree: f64) -> Result<SbmParams, ModelError> {
    check_sizes(n, k)?;
    if !(snr.is_finite() && snr > 0.0) || !(target_avg_degree.is_finite() && target_avg_degree >= 0.0) {
        return Err(ModelError::InvalidParameter(format!(
            "snr {snr} and target degree {target_avg_degree} must be finite and positive"
        )));
    }
    let z = balanced_memberships(n, k);
    let sizes = block_sizes(&z, k);
    let within_pairs: f64 = sizes.iter().map(|&s| (s * s) as f64).sum();
    let between_pairs = (n * n) as f64 - within_pairs;
    let p = target_avg_degree * n as f64 / (snr * within_pairs + between_pairs);
    let largest = p * snr.max(1.0);
    if largest > 1.0 {
        return Err(ModelError::InfeasibleDegree {
            target: target_avg_degree,
            reason: format!("requires an edge probability of {largest:.4}"),
        });
    }
    SbmParams::new(z, planted_matrix(k, p * snr, p))
}

/// `k` blocks of `size` nodes with within-block probability `within` and
/// between-block probability `between`.
pub fn planted_partition(k: usize, size: usize, within: f64, between: f64) -> Result<SbmParams, ModelError> {
    check_sizes(k * size, k)?;
    SbmParams::new(balanced_memberships(k * size, k), planted_matrix(k, within, between))
}

/// Balanced DCSBM with power-law degree parameters.
///
/// Raw `θ` are drawn from a power law with density `∝ x^{-beta}` on
/// `x ≥ 1`, i.e. a Pareto with scale 1 and shape `beta − 1` (finite mean
/// needs `beta > 2`), then divided by their block sum. `beta = ∞` gives
/// uniform `θ`. `B′ = c·(snr on the diagonal, 1 elsewhere)`, with `c`
/// chosen by bisection so the mean degree of the clipped probability matrix
/// equals `target_avg_degree`.
pub fn dcsbm_powerlaw_preset(
    n: usize,
    k: usize,
    snr: f64,
    target_avg_degree: f64,
    beta: f64,
    seed: u64,
) -> Result<DcsbmParams, ModelError> {
    check_sizes(n, k)?;
    if !(beta > 2.0) {
        return Err(ModelError::InvalidParameter(format!("power-law exponent {beta} must exceed 2")));
    }
    if !(snr.is_finite() && snr > 0.0) || !(target_avg_degree.is_finite() && target_avg_degree > 0.0) {
        return Err(ModelError::InvalidParameter(format!(
            "snr {snr} and target degree {target_avg_degree} must be finite and positive"
        )));
    }
    let z = balanced_memberships(n, k);
    let mut theta: Vec<f64> = if beta.is_infinite() {
        vec![1.0; n]
    } else {
        let pareto = Pareto::new(1.0, beta - 1.0).expect("valid Pareto parameters");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| pareto.sample(&mut rng)).collect()
    };
    let mut sums = vec![0.0; k];
    for (&q, &t) in z.iter().zip(&theta) {
        sums[q] += t;
    }
    for (t, &q) in theta.iter_mut().zip(&z) {
        *t /= sums[q];
    }

    let shape = planted_matrix(k, snr, 1.0);
    let clipped_mean_degree = |c: f64| {
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                total += (c * theta[i] * theta[j] * shape[(z[i], z[j])]).min(1.0);
            }
        }
        total / n as f64
    };
    // every entry at probability 1 is the ceiling
    if target_avg_degree >= n as f64 {
        return Err(ModelError::InfeasibleDegree {
            target: target_avg_degree,
            reason: format!("exceeds the complete-graph mean degree {n}"),
        });
    }
    // Without clipping the mean degree is c·Σ_ql shape_ql / n, a lower bound
    // for the c we need.
    let mut lo = target_avg_degree * n as f64 / shape.sum();
    let mut hi = lo;
    while clipped_mean_degree(hi) < target_avg_degree {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(ModelError::InfeasibleDegree {
                target: target_avg_degree,
                reason: "no scaling of B′ reaches it".into(),
            });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if clipped_mean_degree(mid) < target_avg_degree {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi {
            break;
        }
    }
    DcsbmParams::new(z, shape * hi, theta)
}
