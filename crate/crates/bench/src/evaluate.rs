use blockfactor::metrics::{misclustering_rate, nmi_with, NmiVariant};
use blockfactor::partition::Partition;

use crate::HarnessError;

/// Agreement of a candidate with a possibly partial ground truth; nodes
/// without a truth label are left out.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub evaluated: usize,
    pub misclustered: usize,
    pub rate: f64,
    /// Indexed like [`NmiVariant::ALL`].
    pub nmi: [f64; 4],
    /// Original node indices of the misclustered nodes.
    pub misfits: Vec<usize>,
}

impl Evaluation {
    pub fn nmi(&self, variant: NmiVariant) -> f64 {
        let idx = NmiVariant::ALL.iter().position(|&v| v == variant).unwrap();
        self.nmi[idx]
    }
}

pub fn evaluate(truth: &[Option<usize>], cand: &Partition) -> Result<Evaluation, HarnessError> {
    if truth.len() != cand.len() {
        return Err(HarnessError::Invalid(format!(
            "truth has {} nodes, candidate {}",
            truth.len(),
            cand.len()
        )));
    }
    let nodes: Vec<usize> = (0..truth.len()).filter(|&i| truth[i].is_some()).collect();
    let t = Partition::new(nodes.iter().map(|&i| truth[i].unwrap()).collect());
    let c = cand.restrict(&nodes);
    let m = misclustering_rate(&t, &c)?;
    let mut nmi = [0.0; 4];
    for (slot, variant) in nmi.iter_mut().zip(NmiVariant::ALL) {
        *slot = nmi_with(&t, &c, variant)?;
    }
    let misfits = m.misfits(&t, &c).into_iter().map(|i| nodes[i]).collect();
    Ok(Evaluation {
        evaluated: nodes.len(),
        misclustered: m.count,
        rate: m.rate,
        nmi,
        misfits,
    })
}

pub fn full_truth(labels: &[usize]) -> Vec<Option<usize>> {
    labels.iter().copied().map(Some).collect()
}

/// Space-separated labels, as stored in result CSVs.
pub fn parse_label_string(s: &str) -> Result<Partition, HarnessError> {
    s.split_whitespace()
        .map(|w| w.parse::<usize>().map_err(|_| HarnessError::Invalid(format!("bad label {w:?}"))))
        .collect::<Result<Vec<_>, _>>()
        .map(Partition::new)
}
