//! Agreement between two partitions of the same nodes: normalized mutual
//! information and the permutation-minimized misclustering rate.

use std::str::FromStr;

use crate::partition::Partition;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricError {
    #[error("partitions have different lengths ({0} and {1})")]
    LengthMismatch(usize, usize),
    #[error("{0} labels are too many for exhaustive permutation search (limit 8)")]
    TooManyLabels(usize),
}

/// `counts[a][b]` is the number of nodes labelled `a` in the first partition
/// and `b` in the second.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionTable {
    pub counts: Vec<Vec<usize>>,
    pub n: usize,
}

impl ConfusionTable {
    pub fn new(a: &Partition, b: &Partition) -> Result<Self, MetricError> {
        if a.len() != b.len() {
            return Err(MetricError::LengthMismatch(a.len(), b.len()));
        }
        let mut counts = vec![vec![0; b.num_communities()]; a.num_communities()];
        for (&x, &y) in a.labels().iter().zip(b.labels()) {
            counts[x][y] += 1;
        }
        Ok(Self { counts, n: a.len() })
    }

    fn row_sums(&self) -> Vec<usize> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    fn col_sums(&self) -> Vec<usize> {
        let cols = self.counts.first().map_or(0, Vec::len);
        (0..cols).map(|j| self.counts.iter().map(|r| r[j]).sum()).collect()
    }
}

fn entropy(sizes: &[usize], n: f64) -> f64 {
    sizes
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// How mutual information is normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NmiVariant {
    /// `2 I / (H(a) + H(b))`, i.e. `I` over the arithmetic mean of the
    /// entropies.
    #[default]
    Arithmetic,
    /// `I / sqrt(H(a) H(b))`.
    Geometric,
    /// `I / max(H(a), H(b))`.
    Max,
    /// `I / min(H(a), H(b))`.
    Min,
}

impl NmiVariant {
    pub const ALL: [NmiVariant; 4] = [NmiVariant::Arithmetic, NmiVariant::Geometric, NmiVariant::Max, NmiVariant::Min];

    pub fn name(self) -> &'static str {
        match self {
            NmiVariant::Arithmetic => "arithmetic",
            NmiVariant::Geometric => "geometric",
            NmiVariant::Max => "max",
            NmiVariant::Min => "min",
        }
    }
}

impl FromStr for NmiVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "arithmetic" | "average" | "sum" => Ok(NmiVariant::Arithmetic),
            "geometric" | "sqrt" => Ok(NmiVariant::Geometric),
            "max" => Ok(NmiVariant::Max),
            "min" => Ok(NmiVariant::Min),
            other => Err(format!("unknown NMI variant {other:?} (arithmetic, geometric, max, min)")),
        }
    }
}

/// Arithmetic-normalized NMI with natural logarithms.
pub fn nmi(a: &Partition, b: &Partition) -> Result<f64, MetricError> {
    nmi_with(a, b, NmiVariant::Arithmetic)
}

/// NMI under the given normalization. Two single-class partitions score 1;
/// a single-class partition against anything else scores 0.
pub fn nmi_with(a: &Partition, b: &Partition, variant: NmiVariant) -> Result<f64, MetricError> {
    let table = ConfusionTable::new(a, b)?;
    if table.n == 0 {
        return Ok(1.0);
    }
    let n = table.n as f64;
    let rows = table.row_sums();
    let cols = table.col_sums();
    let (ha, hb) = (entropy(&rows, n), entropy(&cols, n));
    if ha == 0.0 && hb == 0.0 {
        return Ok(1.0);
    }
    let mut mi = 0.0;
    for (i, row) in table.counts.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c > 0 {
                let c = c as f64;
                mi += c / n * (c * n / (rows[i] as f64 * cols[j] as f64)).ln();
            }
        }
    }
    let denom = match variant {
        NmiVariant::Arithmetic => 0.5 * (ha + hb),
        NmiVariant::Geometric => (ha * hb).sqrt(),
        NmiVariant::Max => ha.max(hb),
        NmiVariant::Min => ha.min(hb),
    };
    if denom <= 0.0 {
        return Ok(0.0);
    }
    Ok((mi / denom).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Misclustering {
    pub rate: f64,
    pub count: usize,
    /// `permutation[c]` is the truth label matched to candidate label `c`.
    pub permutation: Vec<usize>,
}

impl Misclustering {
    /// Nodes whose relabelled candidate label differs from the truth.
    pub fn misfits(&self, truth: &Partition, cand: &Partition) -> Vec<usize> {
        truth
            .labels()
            .iter()
            .zip(cand.labels())
            .enumerate()
            .filter(|(_, (&t, &c))| self.permutation[c] != t)
            .map(|(i, _)| i)
            .collect()
    }
}

pub const MAX_PERMUTATION_LABELS: usize = 8;

/// Smallest fraction of disagreeing nodes over all relabellings of `cand`.
/// Among optimal relabellings the lexicographically first is returned.
pub fn misclustering_rate(truth: &Partition, cand: &Partition) -> Result<Misclustering, MetricError> {
    let table = ConfusionTable::new(truth, cand)?;
    let m = truth.num_communities().max(cand.num_communities());
    if m > MAX_PERMUTATION_LABELS {
        return Err(MetricError::TooManyLabels(m));
    }
    let agree = |perm: &[usize]| -> usize {
        perm.iter()
            .enumerate()
            .filter(|&(c, &t)| t < table.counts.len() && c < table.counts[t].len())
            .map(|(c, &t)| table.counts[t][c])
            .sum()
    };
    let mut perm: Vec<usize> = (0..m).collect();
    let mut best = (agree(&perm), perm.clone());
    while next_permutation(&mut perm) {
        let score = agree(&perm);
        if score > best.0 {
            best = (score, perm.clone());
        }
    }
    let count = table.n - best.0;
    Ok(Misclustering {
        rate: if table.n == 0 { 0.0 } else { count as f64 / table.n as f64 },
        count,
        permutation: best.1,
    })
}

pub fn misclustered_count(truth: &Partition, cand: &Partition) -> Result<usize, MetricError> {
    Ok(misclustering_rate(truth, cand)?.count)
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).unwrap();
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}
