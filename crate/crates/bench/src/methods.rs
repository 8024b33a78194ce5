use std::cell::OnceCell;
use std::fmt;
use std::str::FromStr;

use blockfactor::graph::{
    normalized_laplacian, normalized_laplacian_zeroing_isolated, regularized_laplacian, Graph,
};
use blockfactor::matrix::DenseSymMatrix;
use blockfactor::nmf::{
    assign_communities, assign_communities_or_zero, exactness_diagnostics, osntf, snmf, SolverConfig,
};
use blockfactor::partition::Partition;
use blockfactor::spectral::{nmf_init_from_partition, spectral_partition};
use serde::{Deserialize, Serialize};

use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Snmf,
    Osntf,
    Spectral,
    RegSpectral,
    SpectralWp,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Snmf,
        Method::Osntf,
        Method::Spectral,
        Method::RegSpectral,
        Method::SpectralWp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Snmf => "snmf",
            Method::Osntf => "osntf",
            Method::Spectral => "spectral",
            Method::RegSpectral => "reg-spectral",
            Method::SpectralWp => "spectral-wp",
        }
    }

    /// Column heading for printed tables.
    pub fn title(self) -> &'static str {
        match self {
            Method::Snmf => "SNMF",
            Method::Osntf => "OSNTF",
            Method::Spectral => "Spectral",
            Method::RegSpectral => "Reg. Spectral",
            Method::SpectralWp => "Spectral-wp",
        }
    }

    pub fn is_nmf(self) -> bool {
        matches!(self, Method::Snmf | Method::Osntf)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s.to_ascii_lowercase())
            .ok_or_else(|| format!("unknown method {s:?} (snmf, osntf, spectral, reg-spectral, spectral-wp)"))
    }
}

/// Matrix the NMF methods factorize. The spectral baselines always use
/// their own Laplacians.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixKind {
    #[default]
    Laplacian,
    Adjacency,
}

impl FromStr for MatrixKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "laplacian" => Ok(MatrixKind::Laplacian),
            "adjacency" => Ok(MatrixKind::Adjacency),
            other => Err(format!("unknown matrix {other:?} (laplacian, adjacency)")),
        }
    }
}

/// Partition the NMF start is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitKind {
    /// k-means on the top eigenvectors of the matrix being factorized.
    Spectral,
    /// Regularized spectral clustering with row projection.
    #[default]
    RegSpectral,
}

impl FromStr for InitKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "spectral" => Ok(InitKind::Spectral),
            "reg-spectral" => Ok(InitKind::RegSpectral),
            other => Err(format!("unknown init {other:?} (spectral, reg-spectral)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodOptions {
    pub matrix: MatrixKind,
    pub init: InitKind,
    pub solver: SolverConfig,
    pub kmeans_restarts: usize,
    /// `None` means the average degree.
    pub tau: Option<f64>,
    pub seed: u64,
    /// Tolerate isolated nodes: zero their Laplacian rows and give them
    /// label 0 when a factor row vanishes. Used for sampled graphs.
    pub lenient: bool,
}

impl Default for MethodOptions {
    fn default() -> Self {
        Self {
            matrix: MatrixKind::Laplacian,
            init: InitKind::RegSpectral,
            solver: SolverConfig::default(),
            kmeans_restarts: 20,
            tau: None,
            seed: 0,
            lenient: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodOutcome {
    pub partition: Partition,
    pub iterations: Option<usize>,
    pub orthogonality_drift: Option<f64>,
    pub relative_residual: Option<f64>,
    pub row_sparsity: Option<f64>,
    pub converged: Option<bool>,
}

impl MethodOutcome {
    fn baseline(partition: Partition) -> Self {
        Self {
            partition,
            iterations: None,
            orthogonality_drift: None,
            relative_residual: None,
            row_sparsity: None,
            converged: None,
        }
    }
}

/// Runs methods on one graph, sharing the Laplacians and the NMF start
/// between them.
pub struct MethodRunner<'a> {
    graph: &'a Graph,
    k: usize,
    opts: &'a MethodOptions,
    laplacian: OnceCell<DenseSymMatrix>,
    regularized: OnceCell<DenseSymMatrix>,
    adjacency: OnceCell<DenseSymMatrix>,
    init: OnceCell<Partition>,
}

impl<'a> MethodRunner<'a> {
    pub fn new(graph: &'a Graph, k: usize, opts: &'a MethodOptions) -> Self {
        Self {
            graph,
            k,
            opts,
            laplacian: OnceCell::new(),
            regularized: OnceCell::new(),
            adjacency: OnceCell::new(),
            init: OnceCell::new(),
        }
    }

    fn laplacian(&self) -> Result<&DenseSymMatrix, HarnessError> {
        if let Some(l) = self.laplacian.get() {
            return Ok(l);
        }
        let l = if self.opts.lenient {
            normalized_laplacian_zeroing_isolated(self.graph)
        } else {
            normalized_laplacian(self.graph)?
        };
        Ok(self.laplacian.get_or_init(|| l))
    }

    fn regularized(&self) -> &DenseSymMatrix {
        self.regularized.get_or_init(|| {
            let tau = self.opts.tau.unwrap_or_else(|| self.graph.average_degree());
            regularized_laplacian(self.graph, tau)
        })
    }

    fn factorized_matrix(&self) -> Result<&DenseSymMatrix, HarnessError> {
        match self.opts.matrix {
            MatrixKind::Laplacian => self.laplacian(),
            MatrixKind::Adjacency => Ok(self.adjacency.get_or_init(|| self.graph.adjacency_matrix())),
        }
    }

    fn spectral(&self, m: &DenseSymMatrix, normalize_rows: bool) -> Result<Partition, HarnessError> {
        Ok(spectral_partition(
            m,
            self.k,
            normalize_rows,
            self.opts.seed,
            self.opts.kmeans_restarts,
        )?)
    }

    fn init_partition(&self) -> Result<&Partition, HarnessError> {
        if let Some(p) = self.init.get() {
            return Ok(p);
        }
        let p = match self.opts.init {
            InitKind::Spectral => self.spectral(self.factorized_matrix()?, false)?,
            InitKind::RegSpectral => self.spectral(self.regularized(), true)?,
        };
        Ok(self.init.get_or_init(|| p))
    }

    pub fn run(&self, method: Method) -> Result<MethodOutcome, HarnessError> {
        match method {
            Method::Spectral => Ok(MethodOutcome::baseline(self.spectral(self.laplacian()?, false)?)),
            Method::RegSpectral => Ok(MethodOutcome::baseline(self.spectral(self.regularized(), true)?)),
            Method::SpectralWp => Ok(MethodOutcome::baseline(self.spectral(self.regularized(), false)?)),
            Method::Snmf | Method::Osntf => {
                let x = self.factorized_matrix()?;
                let h0 = nmf_init_from_partition(self.init_partition()?, self.k, self.opts.solver.init_offset);
                let f = if method == Method::Snmf {
                    snmf(x, self.k, &h0, &self.opts.solver)?
                } else {
                    osntf(x, self.k, &h0, &self.opts.solver)?
                };
                let partition = if self.opts.lenient {
                    assign_communities_or_zero(&f.h)
                } else {
                    assign_communities(&f.h)?
                };
                let report = exactness_diagnostics(x, &f);
                Ok(MethodOutcome {
                    partition,
                    iterations: Some(f.iterations),
                    orthogonality_drift: f.orthogonality_drift,
                    relative_residual: Some(report.relative_residual),
                    row_sparsity: Some(report.row_sparsity),
                    converged: Some(f.converged),
                })
            }
        }
    }
}

pub fn run_method(g: &Graph, k: usize, method: Method, opts: &MethodOptions) -> Result<MethodOutcome, HarnessError> {
    MethodRunner::new(g, k, opts).run(method)
}
