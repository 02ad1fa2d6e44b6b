//! Weisfeiler-Lehman subtree features and kernel.
//!
//! Iteration 0 counts the raw node labels. Each further iteration replaces a
//! node's label by a compressed id for the signature
//! `(own label, sorted neighbor labels)`. The compression dictionary is shared
//! across all graphs passed to [`wl_relabel`]: ids are assigned in sorted
//! signature order, so results do not depend on graph order or thread count.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;

use crate::graph::{Graph, Label};

pub const DEFAULT_ITERATIONS: usize = 5;

static NEXT_DICTIONARY: AtomicU64 = AtomicU64::new(1);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WlError {
    #[error("graph {graph} has no discrete node labels")]
    MissingLabels { graph: usize },
    #[error("features come from different compression dictionaries ({0} vs {1})")]
    DictionaryMismatch(u64, u64),
    #[error("iteration count must be positive")]
    ZeroIterations,
}

/// Label histograms of one graph for iterations `0..=h`.
#[derive(Debug, Clone, PartialEq)]
pub struct WlFeatures {
    dictionary: u64,
    iterations: Vec<BTreeMap<Label, u64>>,
}

impl WlFeatures {
    /// Token of the dictionary that produced these features.
    pub fn dictionary(&self) -> u64 {
        self.dictionary
    }

    pub fn iterations(&self) -> &[BTreeMap<Label, u64>] {
        &self.iterations
    }

    /// Structural equality ignoring the dictionary token.
    pub fn same_counts(&self, other: &WlFeatures) -> bool {
        self.iterations == other.iterations
    }
}

type Signature = (Label, Vec<Label>);

fn signatures(g: &Graph, labels: &[Label]) -> Vec<Signature> {
    (0..g.node_count())
        .map(|v| {
            let mut nbrs: Vec<Label> = g.neighbors(v).iter().map(|&(u, _)| labels[u]).collect();
            nbrs.sort_unstable();
            (labels[v], nbrs)
        })
        .collect()
}

fn histogram(labels: &[Label]) -> BTreeMap<Label, u64> {
    let mut h = BTreeMap::new();
    for &l in labels {
        *h.entry(l).or_insert(0) += 1;
    }
    h
}

/// Runs `h` refinement rounds over all graphs with one shared dictionary.
pub fn wl_relabel(graphs: &[Graph], h: usize) -> Result<Vec<WlFeatures>, WlError> {
    if h == 0 {
        return Err(WlError::ZeroIterations);
    }
    let mut labels: Vec<Vec<Label>> = graphs
        .iter()
        .enumerate()
        .map(|(i, g)| {
            g.labels()
                .map(<[_]>::to_vec)
                .or_else(|| (g.node_count() == 0).then(Vec::new))
                .ok_or(WlError::MissingLabels { graph: i })
        })
        .collect::<Result<_, _>>()?;

    let dictionary = NEXT_DICTIONARY.fetch_add(1, Ordering::Relaxed);
    let mut per_graph: Vec<Vec<BTreeMap<Label, u64>>> = labels.iter().map(|l| vec![histogram(l)]).collect();

    for _ in 0..h {
        let sigs: Vec<Vec<Signature>> =
            graphs.par_iter().zip(labels.par_iter()).map(|(g, l)| signatures(g, l)).collect();
        let distinct: BTreeSet<&Signature> = sigs.iter().flatten().collect();
        let ids: BTreeMap<&Signature, Label> = distinct.into_iter().enumerate().map(|(i, s)| (s, i as Label)).collect();
        labels = sigs.iter().map(|gs| gs.iter().map(|s| ids[s]).collect()).collect();
        for (hist, l) in per_graph.iter_mut().zip(&labels) {
            hist.push(histogram(l));
        }
    }

    Ok(per_graph.into_iter().map(|iterations| WlFeatures { dictionary, iterations }).collect())
}

/// Sum over iterations of histogram dot products.
pub fn wl_kernel(a: &WlFeatures, b: &WlFeatures) -> Result<f64, WlError> {
    if a.dictionary != b.dictionary {
        return Err(WlError::DictionaryMismatch(a.dictionary, b.dictionary));
    }
    let mut total: u128 = 0;
    for (ha, hb) in a.iterations.iter().zip(&b.iterations) {
        let (small, large) = if ha.len() <= hb.len() { (ha, hb) } else { (hb, ha) };
        for (label, &x) in small {
            if let Some(&y) = large.get(label) {
                total += x as u128 * y as u128;
            }
        }
    }
    Ok(total as f64)
}
