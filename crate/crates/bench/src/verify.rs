//! Spot-check of simulation CSVs: recompute the metrics of a sample of rows
//! from their stored `truth` and `labels` columns.

use blockfactor::metrics::NmiVariant;

use crate::evaluate::{evaluate, full_truth, parse_label_string};
use crate::simulate::ResultRow;
use crate::HarnessError;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SpotCheck {
    pub checked: usize,
    /// Row indices (0-based, header excluded) whose stored metrics disagree
    /// with the recomputed ones.
    pub mismatches: Vec<usize>,
}

/// Checks every `stride`-th row, starting at the first; `stride = 20` covers
/// 5% of the rows.
pub fn spot_check(rows: &[ResultRow], stride: usize) -> Result<SpotCheck, HarnessError> {
    let mut report = SpotCheck::default();
    for (i, row) in rows.iter().enumerate().step_by(stride.max(1)) {
        let truth = parse_label_string(&row.truth)?;
        let labels = parse_label_string(&row.labels)?;
        if truth.len() != row.n || labels.len() != row.n {
            report.mismatches.push(i);
            report.checked += 1;
            continue;
        }
        let eval = evaluate(&full_truth(truth.labels()), &labels)?;
        let agrees = eval.misclustered == row.misclustered
            && (eval.rate - row.misclustering_rate).abs() <= 1e-12
            && (eval.nmi(NmiVariant::Arithmetic) - row.nmi).abs() <= 1e-12;
        if !agrees {
            report.mismatches.push(i);
        }
        report.checked += 1;
    }
    Ok(report)
}
