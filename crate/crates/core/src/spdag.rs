//! Rooted shortest-path DAGs, their gap-extended variants and the path-count
//! vectors obtained by message passing over them.
//!
//! For a root `a`, the base DAG keeps every edge `(u, v)` that lies on some
//! shortest path from `a`. Extending with gap size `s` adds an edge `u -> v`
//! for every pair joined by a directed base path of `2..=s+1` edges, i.e. a
//! jump that skips at most `s` intermediate nodes. Multiple skipped routes
//! between the same pair collapse into a single edge, so each node sequence
//! is one path.
//!
//! Paths are measured in nodes ("discrete length"): `[a]` has length 1.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap};
use std::fmt::Write as _;

use crate::graph::{Graph, NodeId};

pub const DEFAULT_MAX_PATHS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpDagError {
    #[error("root {root} out of range for graph with {node_count} nodes")]
    RootOutOfRange { root: NodeId, node_count: usize },
    #[error("path enumeration exceeded the cap of {cap} paths")]
    TooManyPaths { cap: usize },
    #[error("path count overflowed 64 bits at node {node}")]
    CountOverflow { node: NodeId },
    #[error("gap extension expects a base DAG, got gap size {0}")]
    AlreadyExtended(usize),
}

/// Shortest-path DAG rooted at one node, optionally gap-extended.
#[derive(Debug, Clone, PartialEq)]
pub struct SpDag {
    root: NodeId,
    dist: Vec<f64>,
    /// Nodes reachable from the root, in topological (distance) order.
    order: Vec<NodeId>,
    /// Base edges first, then gap edges; each part sorted.
    children: Vec<Vec<NodeId>>,
    base_out: Vec<usize>,
    parents: Vec<Vec<NodeId>>,
    gap_size: usize,
    max_len: usize,
}

#[derive(Copy, Clone, PartialEq)]
struct HeapItem(f64, NodeId);

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance, ties on node id
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source Dijkstra with a binary heap.
pub fn dijkstra(g: &Graph, root: NodeId) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; g.node_count()];
    let mut heap = BinaryHeap::new();
    dist[root] = 0.0;
    heap.push(HeapItem(0.0, root));
    while let Some(HeapItem(d, u)) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, l) in g.neighbors(u) {
            let nd = d + l;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(HeapItem(nd, v));
            }
        }
    }
    dist
}

fn on_shortest_path(du: f64, l: f64, dv: f64, exact: bool) -> bool {
    if du.partial_cmp(&dv) != Some(std::cmp::Ordering::Less) {
        return false;
    }
    if exact {
        du + l == dv
    } else {
        (du + l - dv).abs() <= 1e-9 * dv.max(1.0)
    }
}

/// Builds the base shortest-path DAG rooted at `root`.
pub fn build_spdag(g: &Graph, root: NodeId) -> Result<SpDag, SpDagError> {
    let n = g.node_count();
    if root >= n {
        return Err(SpDagError::RootOutOfRange { root, node_count: n });
    }
    let dist = dijkstra(g, root);
    let exact = g.has_integral_lengths();

    let mut order: Vec<NodeId> = (0..n).filter(|&v| dist[v].is_finite()).collect();
    order.sort_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)));

    let mut children = vec![Vec::new(); n];
    let mut parents = vec![Vec::new(); n];
    for &u in &order {
        for &(v, l) in g.neighbors(u) {
            if on_shortest_path(dist[u], l, dist[v], exact) {
                children[u].push(v);
                parents[v].push(u);
            }
        }
    }
    for list in children.iter_mut().chain(parents.iter_mut()) {
        list.sort_unstable();
    }
    let base_out = children.iter().map(Vec::len).collect();

    let mut dag = SpDag { root, dist, order, children, base_out, parents, gap_size: 0, max_len: 0 };
    dag.max_len = dag.longest_path();
    Ok(dag)
}

/// Adds gap edges spanning `2..=s+1` base edges. `s = 0` returns the DAG unchanged.
pub fn extend_gappy(dag: &SpDag, s: usize) -> Result<SpDag, SpDagError> {
    if dag.gap_size != 0 {
        return Err(SpDagError::AlreadyExtended(dag.gap_size));
    }
    let mut out = dag.clone();
    if s == 0 {
        return Ok(out);
    }
    let n = dag.node_count();
    let mut stamp = vec![usize::MAX; n];
    let mut frontier = Vec::new();
    let mut next = Vec::new();
    let mut gaps: Vec<NodeId> = Vec::new();

    for &u in &dag.order {
        gaps.clear();
        frontier.clear();
        frontier.extend_from_slice(dag.base_children(u));
        // level k holds the distinct endpoints of base paths with k edges
        for depth in 2..=s + 1 {
            next.clear();
            for &w in &frontier {
                for &x in dag.base_children(w) {
                    if stamp[x] != depth {
                        stamp[x] = depth;
                        next.push(x);
                    }
                }
            }
            // stamps are per depth and get reused for the next source node
            for &x in &next {
                stamp[x] = usize::MAX;
            }
            gaps.extend_from_slice(&next);
            std::mem::swap(&mut frontier, &mut next);
            if frontier.is_empty() {
                break;
            }
        }
        gaps.sort_unstable();
        gaps.dedup();
        let base = dag.base_children(u);
        for &v in gaps.iter().filter(|v| base.binary_search(v).is_err()) {
            out.children[u].push(v);
            out.parents[v].push(u);
        }
    }
    for p in out.parents.iter_mut() {
        p.sort_unstable();
    }
    out.gap_size = s;
    Ok(out)
}

impl SpDag {
    fn longest_path(&self) -> usize {
        let mut best = vec![0usize; self.node_count()];
        let mut max = 0;
        for &v in &self.order {
            let len = self.parents[v].iter().map(|&p| best[p] + 1).max().unwrap_or(1);
            best[v] = len;
            max = max.max(len);
        }
        max
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node_count(&self) -> usize {
        self.dist.len()
    }

    pub fn dist(&self) -> &[f64] {
        &self.dist
    }

    pub fn gap_size(&self) -> usize {
        self.gap_size
    }

    /// Longest directed path from the root, counted in nodes.
    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.dist[v].is_finite()
    }

    /// Reachable nodes in topological order.
    pub fn topological_order(&self) -> &[NodeId] {
        &self.order
    }

    pub fn children(&self, v: NodeId) -> &[NodeId] {
        &self.children[v]
    }

    pub fn base_children(&self, v: NodeId) -> &[NodeId] {
        &self.children[v][..self.base_out[v]]
    }

    pub fn gap_children(&self, v: NodeId) -> &[NodeId] {
        &self.children[v][self.base_out[v]..]
    }

    pub fn parents(&self, v: NodeId) -> &[NodeId] {
        &self.parents[v]
    }

    /// All edges as `(from, to, is_gap)`, sorted.
    pub fn edges(&self) -> Vec<(NodeId, NodeId, bool)> {
        let mut out: Vec<_> = (0..self.node_count())
            .flat_map(|u| {
                let base = self.base_children(u).iter().map(move |&v| (u, v, false));
                let gap = self.gap_children(u).iter().map(move |&v| (u, v, true));
                base.chain(gap)
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// One `u -> v` line per edge, suffixed with ` [gap]` for gap edges.
    pub fn to_debug_text(&self, names: Option<&[String]>) -> String {
        let name = |v: NodeId| names.map_or_else(|| v.to_string(), |n| n[v].clone());
        let mut out = String::new();
        for (u, v, gap) in self.edges() {
            let _ = writeln!(out, "{} -> {}{}", name(u), name(v), if gap { " [gap]" } else { "" });
        }
        out
    }

    /// Every directed path from the root, including `[root]`, in lexicographic order.
    pub fn enumerate_paths(&self, cap: usize) -> Result<Vec<Vec<NodeId>>, SpDagError> {
        let mut out = Vec::new();
        let mut stack = vec![self.root];
        self.enumerate_from(&mut stack, &mut out, cap)?;
        out.sort();
        Ok(out)
    }

    fn enumerate_from(
        &self,
        stack: &mut Vec<NodeId>,
        out: &mut Vec<Vec<NodeId>>,
        cap: usize,
    ) -> Result<(), SpDagError> {
        if out.len() >= cap {
            return Err(SpDagError::TooManyPaths { cap });
        }
        out.push(stack.clone());
        let u = *stack.last().expect("non-empty path");
        for &v in &self.children[u] {
            stack.push(v);
            self.enumerate_from(stack, out, cap)?;
            stack.pop();
        }
        Ok(())
    }

    /// Path-count vectors by a forward and a backward pass in topological order.
    pub fn count_vectors(&self) -> Result<CountVectors, SpDagError> {
        let n = self.node_count();
        let len = self.max_len;
        let mut desc = vec![0u64; n * len];
        let mut occ = vec![0u64; n * len];
        if len == 0 {
            return Ok(CountVectors { len, desc, occ });
        }

        desc[self.root * len] = 1;
        for &v in &self.order {
            for &p in &self.parents[v] {
                for i in 1..len {
                    let add = desc[p * len + i - 1];
                    if add != 0 {
                        let slot = &mut desc[v * len + i];
                        *slot = slot.checked_add(add).ok_or(SpDagError::CountOverflow { node: v })?;
                    }
                }
            }
        }

        for &v in self.order.iter().rev() {
            occ[v * len] = 1;
            for &c in &self.children[v] {
                for i in 1..len {
                    let add = occ[c * len + i - 1];
                    if add != 0 {
                        let slot = &mut occ[v * len + i];
                        *slot = slot.checked_add(add).ok_or(SpDagError::CountOverflow { node: v })?;
                    }
                }
            }
        }
        Ok(CountVectors { len, desc, occ })
    }
}

/// Per-node path counts for one rooted DAG.
///
/// `desc(v)[i - 1]` counts DAG paths from the root ending at `v` with `i`
/// nodes; `occ(v)[i - 1]` counts DAG paths starting at `v` with `i` nodes.
/// Nodes outside the DAG have all-zero vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct CountVectors {
    len: usize,
    desc: Vec<u64>,
    occ: Vec<u64>,
}

impl CountVectors {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn desc(&self, v: NodeId) -> &[u64] {
        &self.desc[v * self.len..(v + 1) * self.len]
    }

    pub fn occ(&self, v: NodeId) -> &[u64] {
        &self.occ[v * self.len..(v + 1) * self.len]
    }
}

/// Convenience: the set of rooted paths `P_root^s` for a graph.
pub fn rooted_paths(g: &Graph, root: NodeId, s: usize, cap: usize) -> Result<Vec<Vec<NodeId>>, SpDagError> {
    extend_gappy(&build_spdag(g, root)?, s)?.enumerate_paths(cap)
}

/// Distinct node sequences; used where set semantics must be explicit.
pub fn path_set(paths: &[Vec<NodeId>]) -> BTreeSet<Vec<NodeId>> {
    paths.iter().cloned().collect()
}
