use std::collections::BTreeMap;

use super::{KernelError, NodeKernel};
use crate::graph::{Graph, NodeId};
use crate::spdag::{rooted_paths, SpDagError};

/// All rooted gappy shortest paths of `g`, grouped by discrete length.
fn paths_by_length(g: &Graph, s: usize, cap: usize) -> Result<BTreeMap<usize, Vec<Vec<NodeId>>>, KernelError> {
    let mut out: BTreeMap<usize, Vec<Vec<NodeId>>> = BTreeMap::new();
    let mut total = 0usize;
    for a in 0..g.node_count() {
        let paths = rooted_paths(g, a, s, cap.saturating_sub(total).max(1))?;
        total += paths.len();
        if total > cap {
            return Err(SpDagError::TooManyPaths { cap }.into());
        }
        for p in paths {
            out.entry(p.len()).or_default().push(p);
        }
    }
    Ok(out)
}

/// GraphHopper kernel by explicit enumeration of both path families.
///
/// Sums the path kernel over every pair of equal-length paths; the path
/// kernel adds node kernels position by position. Exponential in general,
/// `cap` bounds the number of enumerated paths per graph.
pub fn kernel_bruteforce(g: &Graph, g2: &Graph, s: usize, nk: &NodeKernel, cap: usize) -> Result<f64, KernelError> {
    nk.check(g)?;
    nk.check(g2)?;
    let left = paths_by_length(g, s, cap)?;
    let right = paths_by_length(g2, s, cap)?;

    if let NodeKernel::Dirac = nk {
        let mut count: u128 = 0;
        for (len, ps) in &left {
            let Some(qs) = right.get(len) else { continue };
            for p in ps {
                for q in qs {
                    count += p.iter().zip(q).filter(|(&u, &v)| g.label(u) == g2.label(v)).count() as u128;
                }
            }
        }
        return Ok(count as f64);
    }

    let mut total = 0.0;
    for (len, ps) in &left {
        let Some(qs) = right.get(len) else { continue };
        for p in ps {
            for q in qs {
                for (&u, &v) in p.iter().zip(q) {
                    total += nk.eval(g, u, g2, v)?;
                }
            }
        }
    }
    Ok(total)
}
