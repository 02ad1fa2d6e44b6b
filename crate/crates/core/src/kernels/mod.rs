//! Node kernels and the (gappy) GraphHopper graph kernel.

mod bruteforce;
mod hopper;

use serde::{Deserialize, Serialize};

use crate::graph::{Graph, NodeId};
use crate::spdag::SpDagError;

pub use bruteforce::kernel_bruteforce;
pub use hopper::{
    gapfree_hop_counts, graphhopper_gapfree, graphhopper_kernel, graphhopper_kernel_transposed, hop_count_matrices,
    GhFeatures, HopCounts,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KernelError {
    #[error("dirac node kernel needs discrete labels on node {node}")]
    MissingLabels { node: NodeId },
    #[error("gaussian node kernel needs attributes on node {node}")]
    MissingAttributes { node: NodeId },
    #[error("attribute dimensions differ: {0} vs {1}")]
    AttributeDim(usize, usize),
    #[error("gaussian bandwidth must be positive and finite, got {0}")]
    BadBandwidth(f64),
    #[error("path-count weight overflow")]
    Overflow,
    #[error(transparent)]
    SpDag(#[from] SpDagError),
}

/// Which node kernel compares two nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum NodeKernel {
    /// 1 when discrete labels match, 0 otherwise.
    Dirac,
    /// `exp(-lambda * |x - x'|^2)` on attribute vectors.
    Gaussian { lambda: f64 },
    /// Dirac times Gaussian.
    Product { lambda: f64 },
}

impl NodeKernel {
    /// Dirac for label-only data, product when attributes are present too,
    /// Gaussian for attribute-only data; bandwidth `1/d`.
    pub fn auto(has_labels: bool, attribute_dim: Option<usize>) -> Option<NodeKernel> {
        match (has_labels, attribute_dim) {
            (true, None) | (true, Some(0)) => Some(NodeKernel::Dirac),
            (true, Some(d)) => Some(NodeKernel::Product { lambda: default_lambda(d) }),
            (false, Some(d)) if d > 0 => Some(NodeKernel::Gaussian { lambda: default_lambda(d) }),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            NodeKernel::Dirac => "dirac",
            NodeKernel::Gaussian { .. } => "gaussian",
            NodeKernel::Product { .. } => "product",
        }
    }

    pub fn lambda(&self) -> Option<f64> {
        match *self {
            NodeKernel::Dirac => None,
            NodeKernel::Gaussian { lambda } | NodeKernel::Product { lambda } => Some(lambda),
        }
    }

    pub fn needs_labels(&self) -> bool {
        matches!(self, NodeKernel::Dirac | NodeKernel::Product { .. })
    }

    pub fn needs_attributes(&self) -> bool {
        matches!(self, NodeKernel::Gaussian { .. } | NodeKernel::Product { .. })
    }

    /// Checks that `g` carries what this kernel reads.
    pub fn check(&self, g: &Graph) -> Result<(), KernelError> {
        if let Some(lambda) = self.lambda() {
            if !(lambda > 0.0 && lambda.is_finite()) {
                return Err(KernelError::BadBandwidth(lambda));
            }
        }
        if g.node_count() == 0 {
            return Ok(());
        }
        if self.needs_labels() && g.labels().is_none() {
            return Err(KernelError::MissingLabels { node: 0 });
        }
        if self.needs_attributes() && g.attributes().is_none() {
            return Err(KernelError::MissingAttributes { node: 0 });
        }
        Ok(())
    }

    /// Evaluates the node kernel between `v` in `g` and `v2` in `g2`.
    pub fn eval(&self, g: &Graph, v: NodeId, g2: &Graph, v2: NodeId) -> Result<f64, KernelError> {
        let labels = || -> Result<(i64, i64), KernelError> {
            let a = g.label(v).ok_or(KernelError::MissingLabels { node: v })?;
            let b = g2.label(v2).ok_or(KernelError::MissingLabels { node: v2 })?;
            Ok((a, b))
        };
        let attrs = || -> Result<(&[f64], &[f64]), KernelError> {
            let a = g.attribute(v).ok_or(KernelError::MissingAttributes { node: v })?;
            let b = g2.attribute(v2).ok_or(KernelError::MissingAttributes { node: v2 })?;
            Ok((a, b))
        };
        match *self {
            NodeKernel::Dirac => {
                let (a, b) = labels()?;
                Ok(dirac(a, b))
            }
            NodeKernel::Gaussian { lambda } => {
                let (a, b) = attrs()?;
                gaussian(lambda, a, b)
            }
            NodeKernel::Product { lambda } => {
                let (la, lb) = labels()?;
                if la != lb {
                    return Ok(0.0);
                }
                let (a, b) = attrs()?;
                gaussian(lambda, a, b)
            }
        }
    }
}

/// Bandwidth heuristic `1/d` for `d`-dimensional attributes.
pub fn default_lambda(dim: usize) -> f64 {
    1.0 / dim.max(1) as f64
}

fn dirac(a: i64, b: i64) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

fn gaussian(lambda: f64, a: &[f64], b: &[f64]) -> Result<f64, KernelError> {
    if a.len() != b.len() {
        return Err(KernelError::AttributeDim(a.len(), b.len()));
    }
    let sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok((-lambda * sq).exp())
}
