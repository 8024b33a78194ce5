//! Benchmark harness for the `blockfactor` community detection methods:
//! simulation sweeps over block-model generators, real-network tables,
//! best-method tallies, and single-graph factorization.

use std::path::{Path, PathBuf};

pub mod evaluate;
pub mod factorize;
pub mod methods;
pub mod realdata;
pub mod simulate;
pub mod spec;
pub mod verify;
pub mod winners;

pub use methods::{InitKind, MatrixKind, Method, MethodOptions, MethodOutcome};
pub use simulate::{run_experiment, ResultRow};
pub use spec::ExperimentSpec;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("experiment spec: {0}")]
    Spec(String),
    #[error("fixture {path} not found. {instructions}")]
    MissingFixture { path: String, instructions: String },
    #[error(transparent)]
    Load(#[from] blockfactor::io::IoError),
    #[error(transparent)]
    Graph(#[from] blockfactor::GraphError),
    #[error(transparent)]
    Model(#[from] blockfactor::ModelError),
    #[error(transparent)]
    Nmf(#[from] blockfactor::NmfError),
    #[error(transparent)]
    Spectral(#[from] blockfactor::SpectralError),
    #[error(transparent)]
    Metric(#[from] blockfactor::metrics::MetricError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Invalid(String),
}

impl HarnessError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

pub const DATA_DIR_ENV: &str = "BLOCKFACTOR_DATA_DIR";

/// Fixture directory: `$BLOCKFACTOR_DATA_DIR`, else `./data` when it exists,
/// else the repository's `data/` directory.
pub fn data_dir() -> PathBuf {
    if let Some(dir) = std::env::var_os(DATA_DIR_ENV) {
        return PathBuf::from(dir);
    }
    let local = PathBuf::from("data");
    if local.is_dir() {
        return local;
    }
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

/// Independent sub-seed `stream` of `seed` (SplitMix64 finalizer), so the
/// degree parameters, the sampled edges and k-means of one replicate never
/// share a random stream.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
