use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{KernelError, NodeKernel};
use crate::graph::{Graph, Label, NodeId};
use crate::spdag::{build_spdag, extend_gappy, CountVectors, SpDag};

/// Roots processed per parallel batch while accumulating hop counts.
const ROOT_BATCH: usize = 64;
/// Below this many node pairs the pairwise stage runs sequentially.
const PAR_PAIRS: usize = 4096;

/// Per-node hop-count matrices of one graph.
///
/// `matrix(v)[i * delta + k]` sums, over all roots `a`, the number of rooted
/// paths that reach `v` in `i + 1` nodes times the number that leave `v`
/// with `k + 1` nodes. The pair `(i, k)` places `v` at position `i + 1` of a
/// path with `i + k + 1` nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct HopCounts {
    node_count: usize,
    delta: usize,
    data: Vec<u64>,
}

impl HopCounts {
    fn empty(node_count: usize) -> Self {
        HopCounts { node_count, delta: 0, data: Vec::new() }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    /// Longest discrete path length over all rooted DAGs of the graph.
    pub fn delta(&self) -> usize {
        self.delta
    }

    /// Row-major `delta x delta` matrix of node `v`.
    pub fn matrix(&self, v: NodeId) -> &[u64] {
        let sz = self.delta * self.delta;
        &self.data[v * sz..(v + 1) * sz]
    }

    pub fn entry(&self, v: NodeId, i: usize, k: usize) -> u64 {
        self.matrix(v)[i * self.delta + k]
    }

    fn grow(&mut self, delta: usize) {
        if delta <= self.delta {
            return;
        }
        let mut data = vec![0u64; self.node_count * delta * delta];
        for v in 0..self.node_count {
            for i in 0..self.delta {
                for k in 0..self.delta {
                    data[(v * delta + i) * delta + k] = self.data[(v * self.delta + i) * self.delta + k];
                }
            }
        }
        self.data = data;
        self.delta = delta;
    }

    /// Adds the outer products `first(v) x second(v)` for every node.
    fn accumulate<'a>(
        &mut self,
        len: usize,
        first: impl Fn(NodeId) -> &'a [u64],
        second: impl Fn(NodeId) -> &'a [u64],
    ) -> Result<(), KernelError> {
        self.grow(len);
        let delta = self.delta;
        for v in 0..self.node_count {
            let (a, b) = (first(v), second(v));
            let base = v * delta * delta;
            for (i, &x) in a.iter().enumerate().filter(|(_, &x)| x != 0) {
                // a path has at most `len` nodes, so i + k + 1 <= len
                for (k, &y) in b[..len - i].iter().enumerate().filter(|(_, &y)| y != 0) {
                    let prod = x.checked_mul(y).ok_or(KernelError::Overflow)?;
                    let slot = &mut self.data[base + i * delta + k];
                    *slot = slot.checked_add(prod).ok_or(KernelError::Overflow)?;
                }
            }
        }
        Ok(())
    }
}

fn accumulate_roots<F>(g: &Graph, transposed: bool, per_root: F) -> Result<HopCounts, KernelError>
where
    F: Fn(NodeId) -> Result<CountVectors, KernelError> + Sync,
{
    let n = g.node_count();
    let mut counts = HopCounts::empty(n);
    let roots: Vec<NodeId> = (0..n).collect();
    for batch in roots.chunks(ROOT_BATCH) {
        let vectors = batch.par_iter().map(|&a| per_root(a)).collect::<Result<Vec<_>, _>>()?;
        for cv in &vectors {
            if transposed {
                counts.accumulate(cv.len(), |v| cv.occ(v), |v| cv.desc(v))?;
            } else {
                counts.accumulate(cv.len(), |v| cv.desc(v), |v| cv.occ(v))?;
            }
        }
    }
    Ok(counts)
}

/// Hop-count matrices over all roots with gap size `s`.
pub fn hop_count_matrices(g: &Graph, s: usize) -> Result<HopCounts, KernelError> {
    hop_counts_oriented(g, s, false)
}

fn hop_counts_oriented(g: &Graph, s: usize, transposed: bool) -> Result<HopCounts, KernelError> {
    accumulate_roots(g, transposed, |a| {
        let dag = extend_gappy(&build_spdag(g, a)?, s)?;
        Ok(dag.count_vectors()?)
    })
}

/// Hop counts of the gap-free kernel, computed directly on base DAGs
/// without going through gap extension or [`SpDag::count_vectors`].
pub fn gapfree_hop_counts(g: &Graph) -> Result<HopCounts, KernelError> {
    let n = g.node_count();
    let mut counts = HopCounts::empty(n);
    for a in 0..n {
        let dag = build_spdag(g, a)?;
        let (len, desc, occ) = base_dag_counts(&dag);
        counts.accumulate(len, |v| &desc[v * len..(v + 1) * len], |v| &occ[v * len..(v + 1) * len])?;
    }
    Ok(counts)
}

fn base_dag_counts(dag: &SpDag) -> (usize, Vec<u64>, Vec<u64>) {
    let n = dag.node_count();
    let order = dag.topological_order();
    // hop depth of every node along base edges
    let mut depth = vec![0usize; n];
    for &u in order {
        for &v in dag.base_children(u) {
            depth[v] = depth[v].max(depth[u] + 1);
        }
    }
    let len = order.iter().map(|&v| depth[v] + 1).max().unwrap_or(0);
    let mut desc = vec![0u64; n * len];
    let mut occ = vec![0u64; n * len];
    if len == 0 {
        return (0, desc, occ);
    }
    desc[dag.root() * len] = 1;
    for &u in order {
        for &v in dag.base_children(u) {
            for i in 1..len {
                desc[v * len + i] += desc[u * len + i - 1];
            }
        }
    }
    for &u in order.iter().rev() {
        occ[u * len] = 1;
        for &v in dag.base_children(u) {
            for i in 1..len {
                occ[u * len + i] += occ[v * len + i - 1];
            }
        }
    }
    (len, desc, occ)
}

/// Per-graph precomputation for repeated kernel evaluations.
#[derive(Debug, Clone)]
pub struct GhFeatures {
    counts: HopCounts,
    labels: Option<Vec<Label>>,
    attributes: Option<Vec<Vec<f64>>>,
    /// Hop-count matrices summed over nodes sharing a label.
    by_label: BTreeMap<Label, Vec<u128>>,
}

impl GhFeatures {
    pub fn new(g: &Graph, s: usize) -> Result<Self, KernelError> {
        Self::from_counts(g, hop_count_matrices(g, s)?)
    }

    pub fn from_counts(g: &Graph, counts: HopCounts) -> Result<Self, KernelError> {
        let mut by_label: BTreeMap<Label, Vec<u128>> = BTreeMap::new();
        if let Some(labels) = g.labels() {
            let sz = counts.delta * counts.delta;
            for (v, &l) in labels.iter().enumerate() {
                let acc = by_label.entry(l).or_insert_with(|| vec![0; sz]);
                for (slot, &x) in acc.iter_mut().zip(counts.matrix(v)) {
                    *slot = slot.checked_add(x as u128).ok_or(KernelError::Overflow)?;
                }
            }
        }
        Ok(GhFeatures {
            counts,
            labels: g.labels().map(<[_]>::to_vec),
            attributes: g.attributes().map(<[_]>::to_vec),
            by_label,
        })
    }

    pub fn counts(&self) -> &HopCounts {
        &self.counts
    }

    fn check(&self, nk: &NodeKernel) -> Result<(), KernelError> {
        if self.counts.node_count == 0 {
            return Ok(());
        }
        if nk.needs_labels() && self.labels.is_none() {
            return Err(KernelError::MissingLabels { node: 0 });
        }
        if nk.needs_attributes() && self.attributes.is_none() {
            return Err(KernelError::MissingAttributes { node: 0 });
        }
        Ok(())
    }

    /// `w(v, v2)`: number of aligned occurrences of the node pair over all
    /// equal-length path pairs.
    fn weight(&self, v: NodeId, other: &GhFeatures, v2: NodeId) -> Result<u128, KernelError> {
        inner(self.counts.matrix(v), self.counts.delta, other.counts.matrix(v2), other.counts.delta, |x| x as u128)
    }

    /// Kernel value between two prepared graphs.
    pub fn kernel(&self, other: &GhFeatures, nk: &NodeKernel) -> Result<f64, KernelError> {
        self.check(nk)?;
        other.check(nk)?;
        if let Some(lambda) = nk.lambda() {
            if !(lambda > 0.0 && lambda.is_finite()) {
                return Err(KernelError::BadBandwidth(lambda));
            }
        }
        if self.counts.node_count == 0 || other.counts.node_count == 0 {
            return Ok(0.0);
        }
        match *nk {
            NodeKernel::Dirac => {
                let mut total: u128 = 0;
                for (label, a) in &self.by_label {
                    if let Some(b) = other.by_label.get(label) {
                        let w = inner(a, self.counts.delta, b, other.counts.delta, |x| x)?;
                        total = total.checked_add(w).ok_or(KernelError::Overflow)?;
                    }
                }
                Ok(total as f64)
            }
            NodeKernel::Gaussian { lambda } => self.weighted_sum(other, lambda, false),
            NodeKernel::Product { lambda } => self.weighted_sum(other, lambda, true),
        }
    }

    fn weighted_sum(&self, other: &GhFeatures, lambda: f64, same_label: bool) -> Result<f64, KernelError> {
        let xa = self.attributes.as_ref().expect("checked");
        let xb = other.attributes.as_ref().expect("checked");
        let (da, db) = (xa[0].len(), xb[0].len());
        if da != db {
            return Err(KernelError::AttributeDim(da, db));
        }
        let row = |v: NodeId| -> Result<f64, KernelError> {
            let mut acc = 0.0;
            for v2 in 0..other.counts.node_count {
                if same_label && self.labels.as_ref().unwrap()[v] != other.labels.as_ref().unwrap()[v2] {
                    continue;
                }
                let w = self.weight(v, other, v2)?;
                if w == 0 {
                    continue;
                }
                let sq: f64 = xa[v].iter().zip(&xb[v2]).map(|(x, y)| (x - y) * (x - y)).sum();
                acc += w as f64 * (-lambda * sq).exp();
            }
            Ok(acc)
        };
        let n = self.counts.node_count;
        let rows: Vec<f64> = if n * other.counts.node_count >= PAR_PAIRS {
            (0..n).into_par_iter().map(row).collect::<Result<_, _>>()?
        } else {
            (0..n).map(row).collect::<Result<_, _>>()?
        };
        // fixed summation order keeps the value independent of the thread count
        Ok(rows.iter().sum())
    }
}

/// Frobenius inner product over the overlapping index range.
fn inner<T: Copy>(
    a: &[T],
    delta_a: usize,
    b: &[T],
    delta_b: usize,
    widen: impl Fn(T) -> u128,
) -> Result<u128, KernelError> {
    let d = delta_a.min(delta_b);
    let mut acc: u128 = 0;
    for i in 0..d {
        for k in 0..d - i {
            let x = widen(a[i * delta_a + k]);
            if x == 0 {
                continue;
            }
            let y = widen(b[i * delta_b + k]);
            let p = x.checked_mul(y).ok_or(KernelError::Overflow)?;
            acc = acc.checked_add(p).ok_or(KernelError::Overflow)?;
        }
    }
    Ok(acc)
}

/// Gappy GraphHopper kernel between two graphs with gap size `s`.
pub fn graphhopper_kernel(g: &Graph, g2: &Graph, s: usize, nk: &NodeKernel) -> Result<f64, KernelError> {
    nk.check(g)?;
    nk.check(g2)?;
    GhFeatures::new(g, s)?.kernel(&GhFeatures::new(g2, s)?, nk)
}

/// Same kernel with the roles of the two count vectors swapped in every
/// per-root outer product. Only the orientation of the matrices changes.
pub fn graphhopper_kernel_transposed(g: &Graph, g2: &Graph, s: usize, nk: &NodeKernel) -> Result<f64, KernelError> {
    nk.check(g)?;
    nk.check(g2)?;
    let a = GhFeatures::from_counts(g, hop_counts_oriented(g, s, true)?)?;
    let b = GhFeatures::from_counts(g2, hop_counts_oriented(g2, s, true)?)?;
    a.kernel(&b, nk)
}

/// Original, gap-free GraphHopper kernel.
pub fn graphhopper_gapfree(g: &Graph, g2: &Graph, nk: &NodeKernel) -> Result<f64, KernelError> {
    nk.check(g)?;
    nk.check(g2)?;
    let a = GhFeatures::from_counts(g, gapfree_hop_counts(g)?)?;
    let b = GhFeatures::from_counts(g2, gapfree_hop_counts(g2)?)?;
    a.kernel(&b, nk)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labeled(n: usize, edges: &[(usize, usize)]) -> Graph {
        Graph::unlabeled(n, edges).unwrap().with_labels(vec![0; n]).unwrap()
    }

    #[test]
    fn single_node_counts() {
        let g = labeled(1, &[]);
        let h = hop_count_matrices(&g, 0).unwrap();
        assert_eq!(h.delta(), 1);
        assert_eq!(h.matrix(0), &[1]);
        assert_eq!(graphhopper_kernel(&g, &g, 0, &NodeKernel::Dirac).unwrap(), 1.0);
    }

    #[test]
    fn chain_incidences_of_endpoint() {
        let g = labeled(4, &[(0, 1), (1, 2), (2, 3)]);
        let h = hop_count_matrices(&g, 0).unwrap();
        assert_eq!(h.delta(), 4);
        // 4 paths rooted at the endpoint, plus one path ending there from each other root
        assert_eq!(h.matrix(0).iter().sum::<u64>(), 7);
    }

    #[test]
    fn triangle_has_no_room_for_gaps() {
        let g = labeled(3, &[(0, 1), (1, 2), (2, 0)]);
        assert_eq!(hop_count_matrices(&g, 0).unwrap(), hop_count_matrices(&g, 1).unwrap());
    }

    #[test]
    fn edge_self_kernel() {
        let g = labeled(2, &[(0, 1)]);
        assert_eq!(graphhopper_kernel(&g, &g, 0, &NodeKernel::Dirac).unwrap(), 12.0);
    }

    #[test]
    fn gaps_add_path_pairs() {
        let g = labeled(4, &[(0, 1), (1, 2), (2, 3)]);
        let k0 = graphhopper_kernel(&g, &g, 0, &NodeKernel::Dirac).unwrap();
        let k2 = graphhopper_kernel(&g, &g, 2, &NodeKernel::Dirac).unwrap();
        assert!(k2 > k0);
    }

    #[test]
    fn empty_graph_kernel_is_zero() {
        let e = Graph::unlabeled(0, &[]).unwrap();
        let g = labeled(2, &[(0, 1)]);
        assert_eq!(graphhopper_kernel(&e, &g, 1, &NodeKernel::Dirac).unwrap(), 0.0);
        assert_eq!(graphhopper_kernel(&e, &e, 0, &NodeKernel::Dirac).unwrap(), 0.0);
    }

    #[test]
    fn gapfree_route_matches() {
        let g = labeled(5, &[(0, 1), (1, 2), (2, 3), (3, 0), (3, 4)]);
        assert_eq!(gapfree_hop_counts(&g).unwrap(), hop_count_matrices(&g, 0).unwrap());
    }
}
