//! Undirected graphs with positive edge lengths, optional discrete node
//! labels and optional real-valued node attributes.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Dense node index, `0..node_count`.
pub type NodeId = usize;

/// Discrete node label.
pub type Label = i64;

/// The first invariant violation found in a graph.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GraphError {
    #[error("edge ({from}, {to}) with length {length} has no matching reverse edge")]
    AsymmetricEdge { from: NodeId, to: NodeId, length: f64 },
    #[error("edge ({from}, {to}) has non-positive length {length}")]
    NonPositiveLength { from: NodeId, to: NodeId, length: f64 },
    #[error("self-loop on node {node}")]
    SelfLoop { node: NodeId },
    #[error("parallel edge ({from}, {to})")]
    ParallelEdge { from: NodeId, to: NodeId },
    #[error("edge ({from}, {to}) references a node outside 0..{node_count}")]
    NodeOutOfRange { from: NodeId, to: NodeId, node_count: usize },
    #[error("node {node} has {found} labels/attributes entries, expected {expected}")]
    AttributeDimMismatch { node: NodeId, expected: usize, found: usize },
    #[error("{what} has {found} entries for {node_count} nodes")]
    LengthMismatch { what: &'static str, found: usize, node_count: usize },
    #[error("node id {node} out of range for graph with {node_count} nodes")]
    OutOfRange { node: NodeId, node_count: usize },
}

/// An immutable, validated, undirected graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Graph {
    adjacency: Vec<Vec<(NodeId, f64)>>,
    labels: Option<Vec<Label>>,
    attributes: Option<Vec<Vec<f64>>>,
}

impl Graph {
    /// Builds a graph from raw per-node adjacency lists and validates it.
    pub fn from_adjacency(
        adjacency: Vec<Vec<(NodeId, f64)>>,
        labels: Option<Vec<Label>>,
        attributes: Option<Vec<Vec<f64>>>,
    ) -> Result<Self, GraphError> {
        let g = Graph { adjacency, labels, attributes };
        g.validate()?;
        Ok(g)
    }

    /// Builds a graph from an undirected edge list; each edge is listed once.
    pub fn from_edges(
        node_count: usize,
        edges: &[(NodeId, NodeId, f64)],
        labels: Option<Vec<Label>>,
        attributes: Option<Vec<Vec<f64>>>,
    ) -> Result<Self, GraphError> {
        let mut adjacency = vec![Vec::new(); node_count];
        for &(u, v, l) in edges {
            if u >= node_count || v >= node_count {
                return Err(GraphError::NodeOutOfRange { from: u, to: v, node_count });
            }
            adjacency[u].push((v, l));
            if u != v {
                adjacency[v].push((u, l));
            }
        }
        Self::from_adjacency(adjacency, labels, attributes)
    }

    /// Unit-length edges, no labels or attributes.
    pub fn unlabeled(node_count: usize, edges: &[(NodeId, NodeId)]) -> Result<Self, GraphError> {
        let edges: Vec<_> = edges.iter().map(|&(u, v)| (u, v, 1.0)).collect();
        Self::from_edges(node_count, &edges, None, None)
    }

    /// Checks every structural invariant and reports the first violation.
    pub fn validate(&self) -> Result<(), GraphError> {
        let n = self.adjacency.len();
        for (u, nbrs) in self.adjacency.iter().enumerate() {
            let mut seen = BTreeSet::new();
            for &(v, l) in nbrs {
                if v >= n {
                    return Err(GraphError::NodeOutOfRange { from: u, to: v, node_count: n });
                }
                if u == v {
                    return Err(GraphError::SelfLoop { node: u });
                }
                if !l.is_finite() || l <= 0.0 {
                    return Err(GraphError::NonPositiveLength { from: u, to: v, length: l });
                }
                if !seen.insert(v) {
                    return Err(GraphError::ParallelEdge { from: u, to: v });
                }
                if !self.adjacency[v].iter().any(|&(w, l2)| w == u && l2 == l) {
                    return Err(GraphError::AsymmetricEdge { from: u, to: v, length: l });
                }
            }
        }
        if let Some(labels) = &self.labels {
            if labels.len() != n {
                return Err(GraphError::LengthMismatch { what: "label vector", found: labels.len(), node_count: n });
            }
        }
        if let Some(attrs) = &self.attributes {
            if attrs.len() != n {
                return Err(GraphError::LengthMismatch { what: "attribute table", found: attrs.len(), node_count: n });
            }
            if let Some(first) = attrs.first() {
                let d = first.len();
                if let Some((node, a)) = attrs.iter().enumerate().find(|(_, a)| a.len() != d) {
                    return Err(GraphError::AttributeDimMismatch { node, expected: d, found: a.len() });
                }
            }
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, v: NodeId) -> &[(NodeId, f64)] {
        &self.adjacency[v]
    }

    pub fn adjacency(&self) -> &[Vec<(NodeId, f64)>] {
        &self.adjacency
    }

    /// Number of edges adjacent to `v`.
    pub fn degree(&self, v: NodeId) -> Result<usize, GraphError> {
        self.adjacency.get(v).map(Vec::len).ok_or(GraphError::OutOfRange { node: v, node_count: self.node_count() })
    }

    /// Maximum degree, 0 for an empty graph.
    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn labels(&self) -> Option<&[Label]> {
        self.labels.as_deref()
    }

    pub fn label(&self, v: NodeId) -> Option<Label> {
        self.labels.as_ref().map(|l| l[v])
    }

    pub fn attributes(&self) -> Option<&[Vec<f64>]> {
        self.attributes.as_deref()
    }

    pub fn attribute(&self, v: NodeId) -> Option<&[f64]> {
        self.attributes.as_ref().map(|a| a[v].as_slice())
    }

    /// Attribute dimension, `None` when the graph has no attributes or no nodes.
    pub fn attribute_dim(&self) -> Option<usize> {
        self.attributes.as_ref().and_then(|a| a.first()).map(Vec::len)
    }

    /// True when every edge length is an integer, so distances can be compared exactly.
    pub fn has_integral_lengths(&self) -> bool {
        self.adjacency.iter().flatten().all(|&(_, l)| l.fract() == 0.0)
    }

    /// Copy of the graph whose discrete labels are the node degrees.
    pub fn with_degree_labels(&self) -> Graph {
        let labels = self.adjacency.iter().map(|n| n.len() as Label).collect();
        Graph { labels: Some(labels), ..self.clone() }
    }

    /// Replaces the label vector.
    pub fn with_labels(&self, labels: Vec<Label>) -> Result<Graph, GraphError> {
        let g = Graph { labels: Some(labels), ..self.clone() };
        g.validate()?;
        Ok(g)
    }

    /// Relabels nodes so that old node `v` becomes `perm[v]`.
    pub fn permuted(&self, perm: &[NodeId]) -> Graph {
        let n = self.node_count();
        assert_eq!(perm.len(), n, "permutation length");
        let mut adjacency = vec![Vec::new(); n];
        for (u, nbrs) in self.adjacency.iter().enumerate() {
            adjacency[perm[u]] = nbrs.iter().map(|&(v, l)| (perm[v], l)).collect();
        }
        fn remap<T: Clone>(xs: &[T], perm: &[NodeId]) -> Vec<T> {
            let mut out = xs.to_vec();
            for (v, x) in xs.iter().enumerate() {
                out[perm[v]] = x.clone();
            }
            out
        }
        Graph {
            adjacency,
            labels: self.labels.as_ref().map(|l| remap(l, perm)),
            attributes: self.attributes.as_ref().map(|a| remap(a, perm)),
        }
    }
}

/// Provenance carried alongside a dataset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub source: String,
    pub noise_x: f64,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DatasetError {
    #[error("{graphs} graphs but {labels} class labels")]
    CountMismatch { graphs: usize, labels: usize },
    #[error("graph {index}: {source}")]
    Graph { index: usize, source: GraphError },
    #[error("attribute dimension differs across graphs: graph {index} has {found}, expected {expected}")]
    AttributeDim { index: usize, expected: usize, found: usize },
    #[error("some graphs carry discrete labels and others do not (graph {index})")]
    MixedLabels { index: usize },
}

/// Graphs with per-graph class labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    graphs: Vec<Graph>,
    class_labels: Vec<i64>,
    pub meta: DatasetMeta,
}

impl Dataset {
    pub fn new(graphs: Vec<Graph>, class_labels: Vec<i64>, meta: DatasetMeta) -> Result<Self, DatasetError> {
        if graphs.len() != class_labels.len() {
            return Err(DatasetError::CountMismatch { graphs: graphs.len(), labels: class_labels.len() });
        }
        let mut dim = None;
        let labeled = graphs.first().map(|g| g.labels().is_some());
        for (index, g) in graphs.iter().enumerate() {
            g.validate().map_err(|source| DatasetError::Graph { index, source })?;
            if Some(g.labels().is_some()) != labeled {
                return Err(DatasetError::MixedLabels { index });
            }
            if let Some(d) = g.attribute_dim() {
                match dim {
                    None => dim = Some(d),
                    Some(expected) if expected != d => {
                        return Err(DatasetError::AttributeDim { index, expected, found: d })
                    }
                    _ => {}
                }
            }
        }
        Ok(Dataset { graphs, class_labels, meta })
    }

    pub fn graphs(&self) -> &[Graph] {
        &self.graphs
    }

    pub fn class_labels(&self) -> &[i64] {
        &self.class_labels
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    /// True when every graph carries discrete node labels.
    pub fn has_labels(&self) -> bool {
        !self.graphs.is_empty() && self.graphs.iter().all(|g| g.labels().is_some())
    }

    /// Shared attribute dimension, if the dataset carries attributes.
    pub fn attribute_dim(&self) -> Option<usize> {
        self.graphs.iter().find_map(Graph::attribute_dim)
    }

    /// Number of distinct class labels.
    pub fn class_count(&self) -> usize {
        self.class_labels.iter().collect::<BTreeSet<_>>().len()
    }

    /// Sorted distinct node labels across all graphs.
    pub fn label_alphabet(&self) -> Vec<Label> {
        let set: BTreeSet<Label> = self.graphs.iter().filter_map(Graph::labels).flatten().copied().collect();
        set.into_iter().collect()
    }

    /// Replaces node labels with node degrees in every graph.
    pub fn with_degree_labels(&self) -> Dataset {
        Dataset {
            graphs: self.graphs.iter().map(Graph::with_degree_labels).collect(),
            class_labels: self.class_labels.clone(),
            meta: self.meta.clone(),
        }
    }

    /// Subset in the given order.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        Dataset {
            graphs: indices.iter().map(|&i| self.graphs[i].clone()).collect(),
            class_labels: indices.iter().map(|&i| self.class_labels[i]).collect(),
            meta: self.meta.clone(),
        }
    }

    pub fn into_parts(self) -> (Vec<Graph>, Vec<i64>, DatasetMeta) {
        (self.graphs, self.class_labels, self.meta)
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph(n={}, m={})", self.node_count(), self.edge_count())
    }
}
