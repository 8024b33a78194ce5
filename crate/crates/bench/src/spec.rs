//! Experiment specification files.
//!
//! ```toml
//! spec_version = 1
//! id = "sbm-degree"
//! replicates = 32              # default 32
//! base_seed = 7                # replicate r uses base_seed + r
//! matrix = "laplacian"         # or "adjacency"; what the NMF methods factorize
//! methods = ["snmf", "osntf", "spectral", "reg-spectral"]
//! kmeans_restarts = 20         # default 20
//! # tau = 12.0                 # regularizer; default is the average degree
//!
//! [generator]
//! model = "sbm"                # sbm | planted | dcsbm
//! n = 800
//! k = 3
//! snr = 3.0
//! avg_degree = 10.0
//!
//! [sweep]
//! parameter = "avg_degree"     # avg_degree | n | beta | snr | within | between
//! values = [10, 15, 20, 25, 30]
//!
//! [nmf]                        # all optional
//! init = "reg-spectral"        # or "spectral"
//! max_iters = 500
//! rel_tol = 1e-6
//! ```

use std::fs;
use std::path::Path;

use blockfactor::block_models::{dcsbm_powerlaw_preset, planted_partition, sbm_snr_preset, BlockModel};
use blockfactor::nmf::SolverConfig;
use serde::{Deserialize, Serialize};

use crate::methods::{InitKind, MatrixKind, Method, MethodOptions};
use crate::HarnessError;

pub const SPEC_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub spec_version: u32,
    pub id: String,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub matrix: MatrixKind,
    pub methods: Vec<Method>,
    #[serde(default = "default_restarts")]
    pub kmeans_restarts: usize,
    #[serde(default)]
    pub tau: Option<f64>,
    pub generator: GeneratorSpec,
    pub sweep: SweepSpec,
    #[serde(default)]
    pub nmf: NmfSpec,
}

fn default_replicates() -> usize {
    32
}

fn default_restarts() -> usize {
    20
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GeneratorSpec {
    /// Balanced SBM, `B ∝ (snr on the diagonal, 1 elsewhere)` scaled to the
    /// target mean degree.
    Sbm { n: usize, k: usize, snr: f64, avg_degree: f64 },
    /// Balanced SBM with fixed within- and between-block probabilities;
    /// `n` must be a multiple of `k`.
    Planted { n: usize, k: usize, within: f64, between: f64 },
    /// Balanced DCSBM with power-law degree parameters of exponent `beta`.
    Dcsbm {
        n: usize,
        k: usize,
        snr: f64,
        avg_degree: f64,
        beta: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    AvgDegree,
    N,
    Beta,
    Snr,
    Within,
    Between,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::AvgDegree => "avg_degree",
            SweepParameter::N => "n",
            SweepParameter::Beta => "beta",
            SweepParameter::Snr => "snr",
            SweepParameter::Within => "within",
            SweepParameter::Between => "between",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NmfSpec {
    pub init: InitKind,
    pub max_iters: usize,
    pub rel_tol: f64,
    pub denom_guard: f64,
    pub init_offset: f64,
}

impl Default for NmfSpec {
    fn default() -> Self {
        let cfg = SolverConfig::default();
        Self {
            init: InitKind::default(),
            max_iters: cfg.max_iters,
            rel_tol: cfg.rel_tol,
            denom_guard: cfg.denom_guard,
            init_offset: cfg.init_offset,
        }
    }
}

impl GeneratorSpec {
    pub fn n(&self) -> usize {
        match *self {
            GeneratorSpec::Sbm { n, .. } | GeneratorSpec::Planted { n, .. } | GeneratorSpec::Dcsbm { n, .. } => n,
        }
    }

    pub fn k(&self) -> usize {
        match *self {
            GeneratorSpec::Sbm { k, .. } | GeneratorSpec::Planted { k, .. } | GeneratorSpec::Dcsbm { k, .. } => k,
        }
    }

    /// Copy with the swept parameter set to `value`.
    pub fn with(&self, parameter: SweepParameter, value: f64) -> Result<GeneratorSpec, HarnessError> {
        let mut g = *self;
        let unsupported = || {
            HarnessError::Spec(format!(
                "sweep parameter {} does not apply to this generator",
                parameter.name()
            ))
        };
        match (&mut g, parameter) {
            (
                GeneratorSpec::Sbm { n, .. } | GeneratorSpec::Planted { n, .. } | GeneratorSpec::Dcsbm { n, .. },
                SweepParameter::N,
            ) => {
                if value < 1.0 || value.fract() != 0.0 {
                    return Err(HarnessError::Spec(format!("node count {value} is not a positive integer")));
                }
                *n = value as usize;
            }
            (
                GeneratorSpec::Sbm { avg_degree, .. } | GeneratorSpec::Dcsbm { avg_degree, .. },
                SweepParameter::AvgDegree,
            ) => *avg_degree = value,
            (GeneratorSpec::Sbm { snr, .. } | GeneratorSpec::Dcsbm { snr, .. }, SweepParameter::Snr) => *snr = value,
            (GeneratorSpec::Dcsbm { beta, .. }, SweepParameter::Beta) => *beta = value,
            (GeneratorSpec::Planted { within, .. }, SweepParameter::Within) => *within = value,
            (GeneratorSpec::Planted { between, .. }, SweepParameter::Between) => *between = value,
            _ => return Err(unsupported()),
        }
        Ok(g)
    }

    /// The block model for one replicate; `seed` drives the DCSBM degree
    /// parameters.
    pub fn build(&self, seed: u64) -> Result<BlockModel, HarnessError> {
        Ok(match *self {
            GeneratorSpec::Sbm { n, k, snr, avg_degree } => sbm_snr_preset(n, k, snr, avg_degree)?.into(),
            GeneratorSpec::Planted { n, k, within, between } => {
                if k == 0 || n % k != 0 {
                    return Err(HarnessError::Spec(format!("planted model needs n = {n} divisible by k = {k}")));
                }
                planted_partition(k, n / k, within, between)?.into()
            }
            GeneratorSpec::Dcsbm {
                n,
                k,
                snr,
                avg_degree,
                beta,
            } => dcsbm_powerlaw_preset(n, k, snr, avg_degree, beta, seed)?.into(),
        })
    }
}

impl ExperimentSpec {
    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        let spec: ExperimentSpec = toml::from_str(text).map_err(|e| HarnessError::Spec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let fail = |msg: String| Err(HarnessError::Spec(msg));
        if self.spec_version != SPEC_VERSION {
            return fail(format!(
                "spec_version {} is not supported (expected {SPEC_VERSION})",
                self.spec_version
            ));
        }
        if self.replicates == 0 {
            return fail("replicates must be at least 1".into());
        }
        if self.methods.is_empty() {
            return fail("methods must not be empty".into());
        }
        let mut seen = self.methods.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.methods.len() {
            return fail("methods must not repeat".into());
        }
        if self.sweep.values.is_empty() {
            return fail("sweep values must not be empty".into());
        }
        for &v in &self.sweep.values {
            self.generator.with(self.sweep.parameter, v)?;
        }
        self.method_options(0).solver.validate()?;
        Ok(())
    }

    pub fn method_options(&self, seed: u64) -> MethodOptions {
        MethodOptions {
            matrix: self.matrix,
            init: self.nmf.init,
            solver: SolverConfig {
                max_iters: self.nmf.max_iters,
                rel_tol: self.nmf.rel_tol,
                denom_guard: self.nmf.denom_guard,
                init_offset: self.nmf.init_offset,
                ..SolverConfig::default()
            },
            kmeans_restarts: self.kmeans_restarts,
            tau: self.tau,
            seed,
            lenient: true,
        }
    }
}
