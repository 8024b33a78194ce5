//! Real-network benchmarks against published ground truth.
//!
//! | dataset | files in the data directory | preprocessing |
//! |---|---|---|
//! | `karate` | `karate.gml` (`value` = club after the split) | none |
//! | `dolphins` | `dolphins.gml`, ground truth in `value` or `dolphins_groups.tsv` | none; nodes without a group are not scored |
//! | `polblogs` | `polblogs.gml` (`value` = leaning) | symmetrized, largest connected component |

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use blockfactor::graph::{largest_connected_component, Graph};
use blockfactor::io::{load_graph, parse_labels, GraphFormat};
use blockfactor::metrics::NmiVariant;
use serde::Serialize;

use crate::evaluate::{evaluate, Evaluation};
use crate::methods::{Method, MethodOptions, MethodRunner};
use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dataset {
    Karate,
    Dolphins,
    Polblogs,
}

impl Dataset {
    pub const ALL: [Dataset; 3] = [Dataset::Karate, Dataset::Dolphins, Dataset::Polblogs];

    pub fn name(self) -> &'static str {
        match self {
            Dataset::Karate => "karate",
            Dataset::Dolphins => "dolphins",
            Dataset::Polblogs => "polblogs",
        }
    }

    pub fn k(self) -> usize {
        2
    }
}

impl fmt::Display for Dataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Dataset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Dataset::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| format!("unknown dataset {s:?} (karate, dolphins, polblogs)"))
    }
}

const FETCH_HINT: &str = "Run `python3 scripts/fetch_fixtures.py` to download it, or point BLOCKFACTOR_DATA_DIR at a directory that has it.";

/// A graph with its (possibly partial) ground truth, ready for scoring.
#[derive(Debug, Clone)]
pub struct Benchmark {
    pub dataset: Dataset,
    pub graph: Graph,
    pub truth: Vec<Option<usize>>,
}

fn require(path: PathBuf, instructions: &str) -> Result<PathBuf, HarnessError> {
    if path.is_file() {
        Ok(path)
    } else {
        Err(HarnessError::MissingFixture {
            path: path.display().to_string(),
            instructions: instructions.to_string(),
        })
    }
}

pub fn load_benchmark(dataset: Dataset, data_dir: &Path) -> Result<Benchmark, HarnessError> {
    match dataset {
        Dataset::Karate => {
            let loaded = load_graph(&require(data_dir.join("karate.gml"), FETCH_HINT)?, GraphFormat::Gml)?;
            let truth = loaded
                .labels
                .ok_or_else(|| HarnessError::Invalid("karate.gml carries no `value` labels".into()))?;
            Ok(Benchmark {
                dataset,
                graph: loaded.graph,
                truth,
            })
        }
        Dataset::Dolphins => {
            let loaded = load_graph(&require(data_dir.join("dolphins.gml"), FETCH_HINT)?, GraphFormat::Gml)?;
            let truth = match loaded.labels {
                Some(labels) => labels,
                None => {
                    let groups = require(
                        data_dir.join("dolphins_groups.tsv"),
                        "The dolphin network file has no group labels; provide `name<TAB>group` lines for the 61 \
                         dolphins remaining after SN100 left (SN100 itself omitted).",
                    )?;
                    let text = fs::read_to_string(&groups).map_err(|e| HarnessError::io(&groups, e))?;
                    parse_labels(&text, &loaded.graph)?
                }
            };
            Ok(Benchmark {
                dataset,
                graph: loaded.graph,
                truth,
            })
        }
        Dataset::Polblogs => {
            let loaded = load_graph(&require(data_dir.join("polblogs.gml"), FETCH_HINT)?, GraphFormat::Gml)?;
            let labels = loaded
                .labels
                .ok_or_else(|| HarnessError::Invalid("polblogs.gml carries no `value` labels".into()))?;
            let (graph, map) = largest_connected_component(&loaded.graph)?;
            let mut truth = vec![None; graph.n()];
            for (old, new) in map.iter().enumerate() {
                if let Some(new) = new {
                    truth[*new] = labels[old];
                }
            }
            Ok(Benchmark { dataset, graph, truth })
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealDataRow {
    pub dataset: Dataset,
    pub method: Method,
    pub seed: u64,
    pub evaluation: Evaluation,
    /// Node names (or indices) of the misclustered nodes.
    pub misfits: Vec<String>,
}

pub fn run_benchmark(
    bench: &Benchmark,
    methods: &[Method],
    opts: &MethodOptions,
) -> Result<Vec<RealDataRow>, HarnessError> {
    let runner = MethodRunner::new(&bench.graph, bench.dataset.k(), opts);
    methods
        .iter()
        .map(|&method| {
            let outcome = runner.run(method)?;
            let evaluation = evaluate(&bench.truth, &outcome.partition)?;
            let misfits = evaluation
                .misfits
                .iter()
                .map(|&i| bench.graph.node_name(i).map_or_else(|| i.to_string(), str::to_string))
                .collect();
            Ok(RealDataRow {
                dataset: bench.dataset,
                method,
                seed: opts.seed,
                evaluation,
                misfits,
            })
        })
        .collect()
}

/// Aligned table with the NMI under `variant`; misfits listed when there are
/// at most ten.
pub fn format_table(rows: &[RealDataRow], variant: NmiVariant) -> String {
    let mut out = format!(
        "{:<10} {:<14} {:>6} {:>12} {:>14}  misfits\n",
        "dataset",
        "method",
        "nodes",
        "misclustered",
        format!("nmi {}", variant.name())
    );
    for r in rows {
        let misfits = if r.misfits.len() <= 10 {
            r.misfits.join(" ")
        } else {
            format!("({} nodes)", r.misfits.len())
        };
        out.push_str(&format!(
            "{:<10} {:<14} {:>6} {:>12} {:>14.4}  {}\n",
            r.dataset.name(),
            r.method.title(),
            r.evaluation.evaluated,
            r.evaluation.misclustered,
            r.evaluation.nmi(variant),
            misfits
        ));
    }
    out
}

#[derive(Serialize)]
struct CsvRow<'a> {
    dataset: &'a str,
    method: Method,
    seed: u64,
    nodes: usize,
    misclustered: usize,
    misclustering_rate: f64,
    nmi_arithmetic: f64,
    nmi_geometric: f64,
    nmi_max: f64,
    nmi_min: f64,
    misfits: String,
}

pub fn write_csv<W: Write>(rows: &[RealDataRow], out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        let e = &r.evaluation;
        w.serialize(CsvRow {
            dataset: r.dataset.name(),
            method: r.method,
            seed: r.seed,
            nodes: e.evaluated,
            misclustered: e.misclustered,
            misclustering_rate: e.rate,
            nmi_arithmetic: e.nmi(NmiVariant::Arithmetic),
            nmi_geometric: e.nmi(NmiVariant::Geometric),
            nmi_max: e.nmi(NmiVariant::Max),
            nmi_min: e.nmi(NmiVariant::Min),
            misfits: r.misfits.join(" "),
        })?;
    }
    w.flush().map_err(|e| HarnessError::Io {
        path: "<csv output>".into(),
        source: e,
    })?;
    Ok(())
}
