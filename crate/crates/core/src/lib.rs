//! Community detection in undirected graphs by symmetric non-negative matrix
//! factorization.
//!
//! Two factorizations of a non-negative symmetric matrix `X` (usually the
//! normalized Laplacian `D^{-1/2} A D^{-1/2}`) are provided:
//!
//! * [`nmf::snmf`]: `X ≈ H Hᵀ` with `H ≥ 0`;
//! * [`nmf::osntf`]: `X ≈ H S Hᵀ` with `H ≥ 0`, `S ≥ 0`, `HᵀH ≈ I`.
//!
//! Node `i` is assigned to the column holding the largest entry of row `i`
//! of `H` ([`nmf::assign_communities`]). Spectral-clustering baselines (which
//! also provide the solver initializations), stochastic block model
//! generators, and partition agreement metrics live alongside.

pub mod block_models;
pub mod graph;
pub mod io;
pub mod matrix;
pub mod metrics;
pub mod nmf;
pub mod partition;
pub mod spectral;

pub use block_models::{BlockModel, DcsbmParams, ModelError, SbmParams};
pub use graph::{Graph, GraphError};
pub use matrix::DenseSymMatrix;
pub use nmf::{Factorization, NmfError, SolverConfig};
pub use partition::Partition;
pub use spectral::{EigenPairs, SpectralError, SpectralVariant};
