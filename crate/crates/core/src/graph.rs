//! Undirected simple graphs, degrees, normalized Laplacians and connected
//! components.

use std::collections::VecDeque;

use crate::matrix::DenseSymMatrix;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("node {node} is out of range for a graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("self loop on node {0}")]
    SelfLoop(usize),
    #[error("node {0} is isolated (degree 0); restrict to the largest connected component first")]
    IsolatedNode(usize),
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("{names} node names given for {n} nodes")]
    NameCountMismatch { names: usize, n: usize },
}

/// Undirected graph without self loops or multi-edges.
///
/// Edges are stored once as `(u, v)` with `u < v`, sorted. Node names are
/// optional per-node strings carried through from fixture files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
    node_names: Option<Vec<String>>,
}

impl Graph {
    /// Duplicate edges (in either orientation) collapse to one; self loops
    /// and out-of-range endpoints are errors.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, GraphError> {
        let mut normalized = Vec::new();
        for (u, v) in edges {
            for node in [u, v] {
                if node >= n {
                    return Err(GraphError::NodeOutOfRange { node, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            normalized.push((u.min(v), u.max(v)));
        }
        normalized.sort_unstable();
        normalized.dedup();
        let mut neighbors = vec![Vec::new(); n];
        for &(u, v) in &normalized {
            neighbors[u].push(v);
            neighbors[v].push(u);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        Ok(Self {
            n,
            edges: normalized,
            neighbors,
            node_names: None,
        })
    }

    pub fn empty(n: usize) -> Self {
        Self {
            n,
            edges: Vec::new(),
            neighbors: vec![Vec::new(); n],
            node_names: None,
        }
    }

    pub fn with_node_names(mut self, names: Vec<String>) -> Result<Self, GraphError> {
        if names.len() != self.n {
            return Err(GraphError::NameCountMismatch {
                names: names.len(),
                n: self.n,
            });
        }
        self.node_names = Some(names);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors[u].binary_search(&v).is_ok()
    }

    pub fn node_names(&self) -> Option<&[String]> {
        self.node_names.as_deref()
    }

    pub fn node_name(&self, i: usize) -> Option<&str> {
        self.node_names.as_ref().map(|names| names[i].as_str())
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.neighbors.iter().map(Vec::len).collect()
    }

    pub fn average_degree(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            2.0 * self.edges.len() as f64 / self.n as f64
        }
    }

    pub fn adjacency_matrix(&self) -> DenseSymMatrix {
        let mut m = nalgebra::DMatrix::zeros(self.n, self.n);
        for &(u, v) in &self.edges {
            m[(u, v)] = 1.0;
            m[(v, u)] = 1.0;
        }
        DenseSymMatrix::from_matrix(m, 0.0).expect("adjacency built symmetric")
    }

    /// Subgraph induced on `nodes`; node `nodes[t]` becomes node `t`.
    pub fn induced_subgraph(&self, nodes: &[usize]) -> Graph {
        let mut index = vec![usize::MAX; self.n];
        for (new, &old) in nodes.iter().enumerate() {
            index[old] = new;
        }
        let edges = self
            .edges
            .iter()
            .filter(|&&(u, v)| index[u] != usize::MAX && index[v] != usize::MAX)
            .map(|&(u, v)| (index[u], index[v]));
        let mut g = Graph::new(nodes.len(), edges).expect("induced edges are valid");
        if let Some(names) = &self.node_names {
            g.node_names = Some(nodes.iter().map(|&i| names[i].clone()).collect());
        }
        g
    }

    /// Connected components as sorted node lists, ordered by their smallest
    /// node index.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut components = Vec::new();
        let mut queue = VecDeque::new();
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            queue.push_back(start);
            let mut comp = Vec::new();
            while let Some(u) = queue.pop_front() {
                comp.push(u);
                for &v in &self.neighbors[u] {
                    if !seen[v] {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                }
            }
            comp.sort_unstable();
            components.push(comp);
        }
        components
    }

    pub fn is_connected(&self) -> bool {
        self.n > 0 && self.connected_components().len() == 1
    }

    /// Per-node component index, following [`Graph::connected_components`]
    /// ordering.
    pub fn component_labels(&self) -> Vec<usize> {
        let mut labels = vec![0; self.n];
        for (c, comp) in self.connected_components().iter().enumerate() {
            for &i in comp {
                labels[i] = c;
            }
        }
        labels
    }
}

pub fn degrees(g: &Graph) -> Vec<usize> {
    g.degrees()
}

/// `L = D^{-1/2} A D^{-1/2}`.
pub fn normalized_laplacian(g: &Graph) -> Result<DenseSymMatrix, GraphError> {
    let d = g.degrees();
    if let Some(i) = d.iter().position(|&x| x == 0) {
        return Err(GraphError::IsolatedNode(i));
    }
    let d: Vec<f64> = d.into_iter().map(|x| x as f64).collect();
    Ok(scaled_adjacency(g, &d))
}

/// Normalized Laplacian with the rows and columns of isolated nodes set to
/// zero. Used by the simulation harness, where sparse replicates can contain
/// isolated nodes that no method can place.
pub fn normalized_laplacian_zeroing_isolated(g: &Graph) -> DenseSymMatrix {
    let d: Vec<f64> = g.degrees().into_iter().map(|x| x as f64).collect();
    scaled_adjacency(g, &d)
}

/// `L_τ = D_τ^{-1/2} A D_τ^{-1/2}` with `D_τ = D + τ I`.
pub fn regularized_laplacian(g: &Graph, tau: f64) -> DenseSymMatrix {
    let d: Vec<f64> = g.degrees().into_iter().map(|x| x as f64 + tau).collect();
    scaled_adjacency(g, &d)
}

// A_ij / sqrt(s_i s_j) on edges; non-edges stay exactly zero.
fn scaled_adjacency(g: &Graph, s: &[f64]) -> DenseSymMatrix {
    let n = g.n();
    let inv_sqrt: Vec<f64> = s.iter().map(|&x| if x > 0.0 { 1.0 / x.sqrt() } else { 0.0 }).collect();
    let mut m = nalgebra::DMatrix::zeros(n, n);
    for &(u, v) in g.edges() {
        let w = inv_sqrt[u] * inv_sqrt[v];
        m[(u, v)] = w;
        m[(v, u)] = w;
    }
    DenseSymMatrix::from_matrix(m, 0.0).expect("scaled adjacency built symmetric")
}

/// Induced subgraph on the largest connected component, plus the map from
/// old node index to new index (`None` for dropped nodes). Ties between
/// equally large components go to the one with the smallest node index.
pub fn largest_connected_component(g: &Graph) -> Result<(Graph, Vec<Option<usize>>), GraphError> {
    if g.n() == 0 {
        return Err(GraphError::EmptyGraph);
    }
    let components = g.connected_components();
    // components are ordered by minimum index, so the first maximum wins ties
    let best = components
        .iter()
        .enumerate()
        .fold(0, |best, (c, comp)| if comp.len() > components[best].len() { c } else { best });
    let nodes = &components[best];
    let mut map = vec![None; g.n()];
    for (new, &old) in nodes.iter().enumerate() {
        map[old] = Some(new);
    }
    Ok((g.induced_subgraph(nodes), map))
}

/// Undirected simple graph with an edge wherever an arc exists in either
/// direction. Self loops are dropped and reciprocal or repeated arcs
/// collapse.
pub fn symmetrize_directed(n: usize, arcs: &[(usize, usize)]) -> Result<Graph, GraphError> {
    for &(u, v) in arcs {
        for node in [u, v] {
            if node >= n {
                return Err(GraphError::NodeOutOfRange { node, n });
            }
        }
    }
    Graph::new(n, arcs.iter().copied().filter(|&(u, v)| u != v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Graph {
        Graph::new(3, [(0, 1), (1, 2), (2, 0)]).unwrap()
    }

    #[test]
    fn degrees_of_small_graphs() {
        assert_eq!(degrees(&triangle()), vec![2, 2, 2]);
        assert_eq!(degrees(&Graph::new(2, [(0, 1)]).unwrap()), vec![1, 1]);
    }

    #[test]
    fn degree_sum_is_twice_edge_count() {
        let g = Graph::new(5, [(0, 1), (1, 2), (3, 4), (0, 4)]).unwrap();
        assert_eq!(g.degrees().iter().sum::<usize>(), 2 * g.edge_count());
    }

    #[test]
    fn duplicate_edges_collapse() {
        let g = Graph::new(2, [(0, 1), (1, 0), (0, 1)]).unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn constructor_rejects_bad_edges() {
        assert_eq!(Graph::new(2, [(0, 2)]), Err(GraphError::NodeOutOfRange { node: 2, n: 2 }));
        assert_eq!(Graph::new(2, [(1, 1)]), Err(GraphError::SelfLoop(1)));
    }

    #[test]
    fn laplacian_single_edge() {
        let l = normalized_laplacian(&Graph::new(2, [(0, 1)]).unwrap()).unwrap();
        assert_eq!(l.as_matrix().as_slice(), &[0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn laplacian_triangle() {
        let l = normalized_laplacian(&triangle()).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 0.0 } else { 0.5 };
                assert!((l.get(i, j) - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn laplacian_path() {
        // degrees 1, 2, 1: L_01 = L_12 = 1/sqrt(2)
        let l = normalized_laplacian(&Graph::new(3, [(0, 1), (1, 2)]).unwrap()).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((l.get(0, 1) - r).abs() < 1e-15);
        assert!((l.get(1, 2) - r).abs() < 1e-15);
        assert_eq!(l.get(0, 2), 0.0);
        assert_eq!(l.get(1, 1), 0.0);
    }

    #[test]
    fn laplacian_rejects_isolated_node() {
        let g = Graph::new(3, [(0, 1)]).unwrap();
        assert_eq!(normalized_laplacian(&g), Err(GraphError::IsolatedNode(2)));
        let l = normalized_laplacian_zeroing_isolated(&g);
        assert_eq!(l.get(0, 1), 1.0);
        assert_eq!(l.as_matrix().row(2).sum(), 0.0);
    }

    #[test]
    fn regularized_laplacian_entries() {
        let l = regularized_laplacian(&Graph::new(3, [(0, 1)]).unwrap(), 1.0);
        assert!((l.get(0, 1) - 0.5).abs() < 1e-15);
        assert_eq!(l.get(2, 2), 0.0);
    }

    #[test]
    fn lcc_picks_component_containing_node_zero_on_ties() {
        let g = Graph::new(7, [(1, 2), (2, 3), (3, 1), (4, 5), (5, 6), (6, 4), (0, 1)]).unwrap();
        // component {0,1,2,3} is strictly largest here
        let (sub, map) = largest_connected_component(&g).unwrap();
        assert_eq!(sub.n(), 4);
        assert_eq!(map[0], Some(0));

        // two disjoint triangles plus an isolated node: first triangle wins
        let g = Graph::new(7, [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]).unwrap();
        let (sub, map) = largest_connected_component(&g).unwrap();
        assert_eq!(sub.n(), 3);
        assert_eq!(sub.edge_count(), 3);
        assert_eq!(&map[..4], &[Some(0), Some(1), Some(2), None]);
        assert_eq!(map[6], None);
    }

    #[test]
    fn lcc_of_connected_graph_is_identity() {
        let g = triangle();
        let (sub, map) = largest_connected_component(&g).unwrap();
        assert_eq!(sub, g);
        assert_eq!(map, vec![Some(0), Some(1), Some(2)]);
        assert_eq!(largest_connected_component(&Graph::empty(0)).unwrap_err(), GraphError::EmptyGraph);
    }

    #[test]
    fn symmetrize_examples() {
        let g = symmetrize_directed(2, &[(0, 1), (1, 0)]).unwrap();
        assert_eq!(g.edges(), &[(0, 1)]);
        let g = symmetrize_directed(1, &[(0, 0)]).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert_eq!(
            symmetrize_directed(2, &[(0, 5)]).unwrap_err(),
            GraphError::NodeOutOfRange { node: 5, n: 2 }
        );
    }

    #[test]
    fn induced_subgraph_keeps_names() {
        let g = triangle().with_node_names(vec!["a".into(), "b".into(), "c".into()]).unwrap();
        let sub = g.induced_subgraph(&[2, 0]);
        assert_eq!(sub.node_names().unwrap(), &["c".to_string(), "a".to_string()]);
        assert!(sub.has_edge(0, 1));
    }
}
