//! Simulation sweeps: for every sweep value and replicate, sample one graph
//! and run every requested method on it.
//!
//! CSV columns, in order:
//!
//! | column | meaning |
//! |---|---|
//! | `experiment` | spec `id` |
//! | `sweep_parameter`, `sweep_value` | swept generator parameter |
//! | `method` | `snmf`, `osntf`, `spectral`, `reg-spectral`, `spectral-wp` |
//! | `replicate`, `seed` | replicate index and `base_seed + replicate` |
//! | `n`, `k` | graph size and number of communities |
//! | `nmi` | arithmetic-normalized NMI against the planted partition |
//! | `misclustering_rate`, `misclustered` | permutation-minimized disagreement |
//! | `iterations`, `orthogonality_drift`, `relative_residual` | NMF diagnostics, empty for baselines |
//! | `wall_time_ms` | empty unless timing was requested |
//! | `truth`, `labels` | space-separated planted and found labels |

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::evaluate::{evaluate, full_truth};
use crate::methods::{Method, MethodRunner};
use crate::spec::ExperimentSpec;
use crate::{derive_seed, HarnessError};

use blockfactor::metrics::NmiVariant;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub sweep_parameter: String,
    pub sweep_value: f64,
    pub method: Method,
    pub replicate: usize,
    pub seed: u64,
    pub n: usize,
    pub k: usize,
    pub nmi: f64,
    pub misclustering_rate: f64,
    pub misclustered: usize,
    pub iterations: Option<usize>,
    pub orthogonality_drift: Option<f64>,
    pub relative_residual: Option<f64>,
    pub wall_time_ms: Option<f64>,
    pub truth: String,
    pub labels: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Fill `wall_time_ms`. Off by default so repeated runs give identical
    /// bytes.
    pub record_wall_time: bool,
}

const THETA_STREAM: u64 = 1;
const GRAPH_STREAM: u64 = 2;
const KMEANS_STREAM: u64 = 3;

fn run_cell(
    spec: &ExperimentSpec,
    sweep_value: f64,
    replicate: usize,
    opts: RunOptions,
) -> Result<Vec<ResultRow>, HarnessError> {
    let seed = spec.base_seed.wrapping_add(replicate as u64);
    let generator = spec.generator.with(spec.sweep.parameter, sweep_value)?;
    let model = generator.build(derive_seed(seed, THETA_STREAM))?;
    let graph = model.sample_graph(derive_seed(seed, GRAPH_STREAM));
    let k = generator.k();
    let truth = model.memberships().to_vec();
    let truth_labels = full_truth(&truth);
    let truth_string = blockfactor::Partition::new(truth).to_string();
    let method_opts = spec.method_options(derive_seed(seed, KMEANS_STREAM));
    let runner = MethodRunner::new(&graph, k, &method_opts);
    spec.methods
        .iter()
        .map(|&method| {
            let start = Instant::now();
            let outcome = runner.run(method)?;
            let elapsed = start.elapsed().as_secs_f64() * 1e3;
            let eval = evaluate(&truth_labels, &outcome.partition)?;
            Ok(ResultRow {
                experiment: spec.id.clone(),
                sweep_parameter: spec.sweep.parameter.name().to_string(),
                sweep_value,
                method,
                replicate,
                seed,
                n: graph.n(),
                k,
                nmi: eval.nmi(NmiVariant::Arithmetic),
                misclustering_rate: eval.rate,
                misclustered: eval.misclustered,
                iterations: outcome.iterations,
                orthogonality_drift: outcome.orthogonality_drift,
                relative_residual: outcome.relative_residual,
                wall_time_ms: opts.record_wall_time.then_some(elapsed),
                truth: truth_string.clone(),
                labels: outcome.partition.to_string(),
            })
        })
        .collect()
}

/// All rows of the experiment, ordered by (sweep value, method, replicate)
/// in spec order whatever order the parallel workers finish in.
pub fn run_experiment(spec: &ExperimentSpec, opts: RunOptions) -> Result<Vec<ResultRow>, HarnessError> {
    spec.validate()?;
    let cells: Vec<(usize, usize)> = (0..spec.sweep.values.len())
        .flat_map(|s| (0..spec.replicates).map(move |r| (s, r)))
        .collect();
    let results: Vec<Vec<ResultRow>> = cells
        .par_iter()
        .map(|&(s, r)| run_cell(spec, spec.sweep.values[s], r, opts))
        .collect::<Result<_, _>>()?;

    let methods = spec.methods.len();
    let mut rows = Vec::with_capacity(results.len() * methods);
    for s in 0..spec.sweep.values.len() {
        for m in 0..methods {
            for r in 0..spec.replicates {
                rows.push(results[s * spec.replicates + r][m].clone());
            }
        }
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(CSV_HEADER)?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| HarnessError::Io {
        path: "<csv output>".into(),
        source: e,
    })?;
    Ok(())
}

pub const CSV_HEADER: [&str; 17] = [
    "experiment",
    "sweep_parameter",
    "sweep_value",
    "method",
    "replicate",
    "seed",
    "n",
    "k",
    "nmi",
    "misclustering_rate",
    "misclustered",
    "iterations",
    "orthogonality_drift",
    "relative_residual",
    "wall_time_ms",
    "truth",
    "labels",
];

pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<ResultRow>, HarnessError> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<Result<Vec<ResultRow>, _>>()?)
}

/// Mean of `value` over replicates for each (sweep value, method).
pub fn mean_by_cell(rows: &[ResultRow], value: impl Fn(&ResultRow) -> f64) -> Vec<(f64, Method, f64)> {
    let mut out: Vec<(f64, Method, f64, usize)> = Vec::new();
    for row in rows {
        match out.iter_mut().find(|(s, m, _, _)| *s == row.sweep_value && *m == row.method) {
            Some(cell) => {
                cell.2 += value(row);
                cell.3 += 1;
            }
            None => out.push((row.sweep_value, row.method, value(row), 1)),
        }
    }
    out.into_iter().map(|(s, m, total, count)| (s, m, total / count as f64)).collect()
}

/// Mean NMI table: one line per sweep value, one column per method.
pub fn summary_table(rows: &[ResultRow]) -> String {
    let means = mean_by_cell(rows, |r| r.nmi);
    let mut methods: Vec<Method> = Vec::new();
    let mut sweeps: Vec<f64> = Vec::new();
    for &(s, m, _) in &means {
        if !methods.contains(&m) {
            methods.push(m);
        }
        if !sweeps.contains(&s) {
            sweeps.push(s);
        }
    }
    let parameter = rows.first().map_or("sweep", |r| r.sweep_parameter.as_str());
    let mut out = format!("mean NMI\n{parameter:>12}");
    for m in &methods {
        out.push_str(&format!(" {:>14}", m.title()));
    }
    out.push('\n');
    for s in sweeps {
        out.push_str(&format!("{s:>12}"));
        for m in &methods {
            let v = means.iter().find(|c| c.0 == s && c.1 == *m).map(|c| c.2);
            match v {
                Some(v) => out.push_str(&format!(" {v:>14.4}")),
                None => out.push_str(&format!(" {:>14}", "-")),
            }
        }
        out.push('\n');
    }
    out
}
