#![allow(dead_code)]

use std::path::PathBuf;

use graphkern::data::load_tu_dataset;
use graphkern::{Dataset, Graph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

pub fn mutag() -> Dataset {
    load_tu_dataset(&data_dir(), "MUTAG").expect("vendored MUTAG loads")
}

/// The first `n` MUTAG graphs.
pub fn mutag_head(n: usize) -> Dataset {
    let ds = mutag();
    ds.select(&(0..n.min(ds.len())).collect::<Vec<_>>())
}

/// The 4-node chain a-b-c-d.
pub fn chain() -> Graph {
    Graph::unlabeled(4, &[(0, 1), (1, 2), (2, 3)]).unwrap()
}

#[derive(Debug, Clone, Copy)]
pub struct RandomGraphs {
    pub max_nodes: usize,
    pub edge_prob: f64,
    pub alphabet: i64,
    pub attribute_dim: usize,
    pub unit_lengths: bool,
}

impl Default for RandomGraphs {
    fn default() -> Self {
        RandomGraphs { max_nodes: 8, edge_prob: 0.35, alphabet: 3, attribute_dim: 2, unit_lengths: true }
    }
}

impl RandomGraphs {
    /// Erdos-Renyi graph with 1..=max_nodes nodes, labels in `0..alphabet`
    /// (constant when `alphabet == 1`) and uniform attributes in `[0, 1)`.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Graph {
        let n = rng.gen_range(1..=self.max_nodes);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen_bool(self.edge_prob) {
                    let len = if self.unit_lengths { 1.0 } else { rng.gen_range(1..=3) as f64 };
                    edges.push((u, v, len));
                }
            }
        }
        let labels = (0..n).map(|_| rng.gen_range(0..self.alphabet)).collect();
        let attrs = (self.attribute_dim > 0)
            .then(|| (0..n).map(|_| (0..self.attribute_dim).map(|_| rng.gen::<f64>()).collect()).collect());
        Graph::from_edges(n, &edges, Some(labels), attrs).unwrap()
    }

    pub fn many(&self, count: usize, seed: u64) -> Vec<Graph> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| self.sample(&mut rng)).collect()
    }
}

/// Uniformly random permutation of `0..n`.
pub fn permutation(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}
