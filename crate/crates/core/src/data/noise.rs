//! Structural noise: every graph gains `round(x * |V|)` extra nodes, each
//! attached to existing nodes by unit-length edges.
//!
//! Randomness comes from ChaCha8 seeded with the configured seed; graph `i`
//! draws from stream `i`, so a graph's noise does not depend on the other
//! graphs or their order.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::DataError;
use crate::graph::{Dataset, DatasetMeta, Graph, Label};

/// How added nodes get a discrete label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabelPolicy {
    /// Uniform draw from the dataset's label alphabet.
    #[default]
    UniformAlphabet,
    /// Copy the label of the first node the new node attaches to.
    CopyAttached,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    /// Nodes added per graph, as a fraction of its node count.
    pub x: f64,
    pub seed: u64,
    /// Edges per added node, to distinct existing nodes.
    pub attach_edges: usize,
    pub label_policy: LabelPolicy,
}

impl NoiseConfig {
    pub fn new(x: f64, seed: u64) -> Self {
        NoiseConfig { x, seed, attach_edges: 1, label_policy: LabelPolicy::default() }
    }
}

/// `round(x * n)` with halves rounded up.
pub fn added_node_count(x: f64, n: usize) -> usize {
    (x * n as f64 + 0.5).floor() as usize
}

fn rng_for(seed: u64, graph: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(graph as u64);
    rng
}

pub fn inject_noise(dataset: &Dataset, cfg: &NoiseConfig) -> Result<Dataset, DataError> {
    if !cfg.x.is_finite() || cfg.x < 0.0 {
        return Err(DataError::InvalidNoise(format!("x must be a non-negative real, got {}", cfg.x)));
    }
    if cfg.x > 0.5 {
        log::warn!("noise fraction {} is outside the usual range [0, 0.5]", cfg.x);
    }
    if cfg.attach_edges == 0 {
        return Err(DataError::InvalidNoise("attach_edges must be at least 1".into()));
    }
    let alphabet = dataset.label_alphabet();
    let attribute_pool: Vec<&Vec<f64>> = dataset.graphs().iter().filter_map(Graph::attributes).flatten().collect();

    let graphs = dataset
        .graphs()
        .par_iter()
        .enumerate()
        .map(|(i, g)| {
            let added = added_node_count(cfg.x, g.node_count());
            if cfg.x > 0.0 && g.node_count() == 0 {
                return Err(DataError::EmptyGraph { graph: i });
            }
            if added == 0 {
                return Ok(g.clone());
            }
            noisy_graph(g, added, cfg, &alphabet, &attribute_pool, &mut rng_for(cfg.seed, i))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let meta = DatasetMeta { noise_x: cfg.x, seed: Some(cfg.seed), ..dataset.meta.clone() };
    Ok(Dataset::new(graphs, dataset.class_labels().to_vec(), meta)?)
}

fn noisy_graph(
    g: &Graph,
    added: usize,
    cfg: &NoiseConfig,
    alphabet: &[Label],
    attribute_pool: &[&Vec<f64>],
    rng: &mut ChaCha8Rng,
) -> Result<Graph, DataError> {
    let mut adjacency = g.adjacency().to_vec();
    let mut labels = g.labels().map(<[_]>::to_vec);
    let mut attributes = g.attributes().map(<[_]>::to_vec);

    for _ in 0..added {
        let existing = adjacency.len();
        let new = existing;
        let mut targets = sample(rng, existing, cfg.attach_edges.min(existing)).into_vec();
        targets.sort_unstable();
        adjacency.push(Vec::new());
        for &t in &targets {
            adjacency[t].push((new, 1.0));
            adjacency[new].push((t, 1.0));
        }
        if let Some(labels) = labels.as_mut() {
            let label = match cfg.label_policy {
                LabelPolicy::UniformAlphabet => alphabet[rng.gen_range(0..alphabet.len())],
                LabelPolicy::CopyAttached => labels[targets[0]],
            };
            labels.push(label);
        }
        if let Some(attributes) = attributes.as_mut() {
            attributes.push(attribute_pool[rng.gen_range(0..attribute_pool.len())].clone());
        }
    }
    Graph::from_adjacency(adjacency, labels, attributes)
        .map_err(|e| DataError::Inconsistent(format!("noise produced an invalid graph: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dataset() -> Dataset {
        let ring = |n: usize| {
            let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
            Graph::unlabeled(n, &edges).unwrap().with_labels((0..n as i64).map(|i| i % 3).collect()).unwrap()
        };
        Dataset::new(vec![ring(20), ring(7), ring(3)], vec![0, 1, 0], DatasetMeta::default()).unwrap()
    }

    #[test]
    fn rounding() {
        assert_eq!(added_node_count(0.5, 20), 10);
        assert_eq!(added_node_count(0.1, 5), 1);
        assert_eq!(added_node_count(0.1, 4), 0);
        assert_eq!(added_node_count(0.0, 100), 0);
    }

    #[test]
    fn zero_noise_is_identity() {
        let ds = dataset();
        let out = inject_noise(&ds, &NoiseConfig::new(0.0, 9)).unwrap();
        assert_eq!(out.graphs(), ds.graphs());
        assert_eq!(out.class_labels(), ds.class_labels());
    }

    #[test]
    fn half_noise_adds_half_the_nodes() {
        let ds = dataset();
        let out = inject_noise(&ds, &NoiseConfig::new(0.5, 1)).unwrap();
        assert_eq!(out.graphs()[0].node_count(), 30);
        assert_eq!(out.graphs()[0].edge_count(), 30);
        assert!(out.graphs()[0].labels().unwrap()[20..].iter().all(|l| (0..3).contains(l)));
    }

    #[test]
    fn deterministic_per_seed() {
        let ds = dataset();
        let a = inject_noise(&ds, &NoiseConfig::new(0.3, 42)).unwrap();
        let b = inject_noise(&ds, &NoiseConfig::new(0.3, 42)).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let c = inject_noise(&ds, &NoiseConfig::new(0.3, 43)).unwrap();
        assert_ne!(a.graphs(), c.graphs());
    }

    #[test]
    fn per_graph_streams_ignore_order() {
        let ds = dataset();
        let cfg = NoiseConfig::new(0.4, 5);
        let a = inject_noise(&ds, &cfg).unwrap();
        let b = inject_noise(&ds.select(&[0]), &cfg).unwrap();
        assert_eq!(a.graphs()[0], b.graphs()[0]);
    }

    #[test]
    fn invalid_configs() {
        let ds = dataset();
        assert!(inject_noise(&ds, &NoiseConfig::new(-0.1, 0)).is_err());
        let mut cfg = NoiseConfig::new(0.1, 0);
        cfg.attach_edges = 0;
        assert!(inject_noise(&ds, &cfg).is_err());
        let empty = Dataset::new(vec![Graph::unlabeled(0, &[]).unwrap()], vec![0], DatasetMeta::default()).unwrap();
        assert!(matches!(inject_noise(&empty, &NoiseConfig::new(0.2, 0)), Err(DataError::EmptyGraph { graph: 0 })));
    }

    #[test]
    fn copy_attached_policy() {
        let ds = dataset();
        let mut cfg = NoiseConfig::new(0.5, 3);
        cfg.label_policy = LabelPolicy::CopyAttached;
        let out = inject_noise(&ds, &cfg).unwrap();
        let g = &out.graphs()[0];
        for v in 20..30 {
            let (t, _) = g.neighbors(v)[0];
            assert_eq!(g.label(v), g.label(t));
        }
    }
}
