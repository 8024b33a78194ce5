//! Best-method tallies over simulation results.
//!
//! Every (experiment, sweep value, replicate) cell awards a win to the
//! method with the highest NMI; methods tied at the maximum all get a win,
//! so per-experiment win counts can add up to more than the cell count.

use std::collections::BTreeMap;
use std::io::Read;

use serde::Deserialize;

use crate::methods::Method;
use crate::HarnessError;

#[derive(Debug, Clone, Deserialize)]
struct Record {
    experiment: String,
    sweep_value: f64,
    replicate: usize,
    method: Method,
    nmi: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentWins {
    pub experiment: String,
    /// Methods present in the experiment, with their win counts.
    pub wins: BTreeMap<Method, usize>,
    pub cells: usize,
}

#[derive(Debug, Default)]
pub struct WinnerTally {
    records: Vec<Record>,
}

impl WinnerTally {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_csv<R: Read>(&mut self, input: R) -> Result<(), HarnessError> {
        let mut reader = csv::Reader::from_reader(input);
        for record in reader.deserialize() {
            let record: Record = record?;
            if !record.nmi.is_finite() {
                return Err(HarnessError::Invalid(format!(
                    "non-finite NMI in experiment {}",
                    record.experiment
                )));
            }
            self.records.push(record);
        }
        Ok(())
    }

    /// Experiments in order of first appearance.
    pub fn tally(&self) -> Vec<ExperimentWins> {
        let mut out: Vec<ExperimentWins> = Vec::new();
        let mut cells: BTreeMap<(usize, u64, usize), Vec<&Record>> = BTreeMap::new();
        for r in &self.records {
            let exp = match out.iter().position(|e| e.experiment == r.experiment) {
                Some(i) => i,
                None => {
                    out.push(ExperimentWins {
                        experiment: r.experiment.clone(),
                        ..Default::default()
                    });
                    out.len() - 1
                }
            };
            out[exp].wins.entry(r.method).or_insert(0);
            cells.entry((exp, r.sweep_value.to_bits(), r.replicate)).or_default().push(r);
        }
        for ((exp, _, _), records) in cells {
            let best = records.iter().map(|r| r.nmi).fold(f64::NEG_INFINITY, f64::max);
            let mut winners: Vec<Method> = records.iter().filter(|r| r.nmi == best).map(|r| r.method).collect();
            winners.sort();
            winners.dedup();
            for m in winners {
                *out[exp].wins.get_mut(&m).unwrap() += 1;
            }
            out[exp].cells += 1;
        }
        out
    }
}

/// One row per experiment, one column per method, `-` for methods an
/// experiment did not run, and the cell count.
pub fn format_table(tally: &[ExperimentWins]) -> String {
    let width = tally.iter().map(|e| e.experiment.len()).max().unwrap_or(0).max(10);
    let mut out = format!("{:<width$}", "Simulation");
    for m in Method::ALL {
        out.push_str(&format!(" | {:>13}", m.title()));
    }
    out.push_str(" | Total\n");
    for e in tally {
        out.push_str(&format!("{:<width$}", e.experiment));
        for m in Method::ALL {
            match e.wins.get(&m) {
                Some(w) => out.push_str(&format!(" | {w:>13}")),
                None => out.push_str(&format!(" | {:>13}", "-")),
            }
        }
        out.push_str(&format!(" | {}\n", e.cells));
    }
    out
}
