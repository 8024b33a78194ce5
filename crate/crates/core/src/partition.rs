use std::fmt;

/// Assignment of `n` nodes to communities labelled `0..k`.
///
/// `k` is always `1 + max label`; a label below the maximum may be unused
/// when the producing operation allows empty communities (k-means on
/// degenerate points, argmax assignment where a column never wins).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    labels: Vec<usize>,
}

impl Partition {
    pub fn new(labels: Vec<usize>) -> Self {
        Self { labels }
    }

    /// Relabels arbitrary labels to `0..k` in order of first appearance.
    pub fn from_raw<T: PartialEq + Clone>(raw: &[T]) -> Self {
        let mut seen: Vec<T> = Vec::new();
        let labels = raw
            .iter()
            .map(|v| match seen.iter().position(|s| s == v) {
                Some(p) => p,
                None => {
                    seen.push(v.clone());
                    seen.len() - 1
                }
            })
            .collect();
        Self { labels }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn into_labels(self) -> Vec<usize> {
        self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_communities(&self) -> usize {
        self.labels.iter().max().map_or(0, |m| m + 1)
    }

    pub fn community_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.num_communities()];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    /// Restriction to the given node indices, in that order.
    pub fn restrict(&self, nodes: &[usize]) -> Partition {
        Partition::new(nodes.iter().map(|&i| self.labels[i]).collect())
    }
}

impl From<Vec<usize>> for Partition {
    fn from(labels: Vec<usize>) -> Self {
        Self::new(labels)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.labels.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}
