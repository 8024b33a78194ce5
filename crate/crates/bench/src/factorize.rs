//! Community detection on one graph file.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use blockfactor::graph::{largest_connected_component, Graph};
use blockfactor::io::{load_graph, parse_labels, GraphFormat};
use blockfactor::metrics::NmiVariant;

use crate::evaluate::{evaluate, Evaluation};
use crate::methods::{Method, MethodOptions, MethodOutcome, MethodRunner};
use crate::HarnessError;

#[derive(Debug, Clone)]
pub struct FactorizeRequest<'a> {
    pub input: &'a Path,
    pub k: usize,
    pub method: Method,
    /// Restrict to the largest connected component first.
    pub lcc: bool,
    /// `name<TAB>label` or `index label` lines; overrides labels in the graph
    /// file.
    pub truth_file: Option<&'a Path>,
    pub options: MethodOptions,
}

#[derive(Debug, Clone)]
pub struct FactorizeReport {
    pub graph: Graph,
    pub outcome: MethodOutcome,
    pub evaluation: Option<Evaluation>,
}

pub fn factorize_file(req: &FactorizeRequest<'_>) -> Result<FactorizeReport, HarnessError> {
    let loaded = load_graph(req.input, GraphFormat::from_path(req.input))?;
    let mut graph = loaded.graph;
    let mut truth = match req.truth_file {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
            Some(parse_labels(&text, &graph)?)
        }
        None => loaded.labels,
    };
    if req.lcc {
        let (sub, map) = largest_connected_component(&graph)?;
        truth = truth.map(|labels| {
            let mut kept = vec![None; sub.n()];
            for (old, new) in map.iter().enumerate() {
                if let Some(new) = new {
                    kept[*new] = labels[old];
                }
            }
            kept
        });
        graph = sub;
    }
    let outcome = MethodRunner::new(&graph, req.k, &req.options).run(req.method)?;
    let evaluation = match &truth {
        Some(t) if t.iter().any(Option::is_some) => Some(evaluate(t, &outcome.partition)?),
        _ => None,
    };
    Ok(FactorizeReport {
        graph,
        outcome,
        evaluation,
    })
}

/// `name<TAB>label` lines when the graph has node names, else one label per
/// line in node order.
pub fn format_labels(graph: &Graph, outcome: &MethodOutcome) -> String {
    let mut out = String::new();
    for (i, label) in outcome.partition.labels().iter().enumerate() {
        match graph.node_name(i) {
            Some(name) => writeln!(out, "{name}\t{label}").unwrap(),
            None => writeln!(out, "{label}").unwrap(),
        }
    }
    out
}

pub fn format_summary(report: &FactorizeReport, method: Method, variant: NmiVariant) -> String {
    let mut out = String::new();
    let g = &report.graph;
    let o = &report.outcome;
    writeln!(out, "graph: {} nodes, {} edges", g.n(), g.edge_count()).unwrap();
    writeln!(out, "method: {}", method.title()).unwrap();
    writeln!(out, "community sizes: {:?}", o.partition.community_sizes()).unwrap();
    if let Some(it) = o.iterations {
        let converged = if o.converged == Some(true) { "converged" } else { "iteration cap" };
        writeln!(out, "iterations: {it} ({converged})").unwrap();
    }
    if let Some(r) = o.relative_residual {
        writeln!(out, "relative residual: {r:.6e}").unwrap();
    }
    if let Some(d) = o.orthogonality_drift {
        writeln!(out, "orthogonality drift: {d:.6e}").unwrap();
    }
    if let Some(s) = o.row_sparsity {
        writeln!(out, "row sparsity: {s:.4}").unwrap();
    }
    if let Some(e) = &report.evaluation {
        writeln!(
            out,
            "against ground truth ({} labelled nodes): {} misclustered, rate {:.4}, NMI ({}) {:.4}",
            e.evaluated,
            e.misclustered,
            e.rate,
            variant.name(),
            e.nmi(variant)
        )
        .unwrap();
    }
    out
}
