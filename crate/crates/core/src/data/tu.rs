//! Reader for the TU Dortmund text format.
//!
//! `{name}_A.txt` holds one `i, j` edge per line with 1-based global node
//! ids, `{name}_graph_indicator.txt` the 1-based graph id of every node and
//! `{name}_graph_labels.txt` one class label per graph. Node labels and
//! attributes are optional. Edges may be listed in one or both directions.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use super::DataError;
use crate::graph::{Dataset, DatasetMeta, Graph, Label};

/// Environment variable naming the dataset cache directory.
pub const DATA_DIR_ENV: &str = "GRAPHKERN_DATA_DIR";

/// Explicit directory if given, otherwise `$GRAPHKERN_DATA_DIR`.
pub fn resolve_dataset_dir(explicit: Option<&Path>) -> Result<PathBuf, DataError> {
    match explicit {
        Some(p) => Ok(p.to_path_buf()),
        None => std::env::var_os(DATA_DIR_ENV).map(PathBuf::from).ok_or(DataError::NoDataDir),
    }
}

struct Lines {
    path: PathBuf,
    lines: Vec<String>,
}

impl Lines {
    fn read(path: PathBuf) -> Result<Self, DataError> {
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(DataError::MissingFile(path)),
            Err(source) => return Err(DataError::Io { path, source }),
        };
        let mut lines: Vec<String> = text.lines().map(|l| l.trim().to_string()).collect();
        while lines.last().is_some_and(|l| l.is_empty()) {
            lines.pop();
        }
        if lines.is_empty() {
            return Err(DataError::Malformed { path, line: 1, msg: "file is empty".into() });
        }
        if let Some(i) = lines.iter().position(String::is_empty) {
            return Err(DataError::Malformed { path, line: i + 1, msg: "blank line".into() });
        }
        Ok(Lines { path, lines })
    }

    fn err(&self, line: usize, msg: impl Into<String>) -> DataError {
        DataError::Malformed { path: self.path.clone(), line: line + 1, msg: msg.into() }
    }

    fn fields<'a>(&self, line: &'a str) -> impl Iterator<Item = &'a str> {
        line.split(|c: char| c == ',' || c.is_whitespace()).filter(|f| !f.is_empty())
    }

    fn integers(&self) -> Result<Vec<i64>, DataError> {
        self.lines
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let first = self.fields(l).next().ok_or_else(|| self.err(i, "expected an integer"))?;
                first.parse().map_err(|_| self.err(i, format!("not an integer: {first:?}")))
            })
            .collect()
    }

    fn pairs(&self) -> Result<Vec<(usize, usize)>, DataError> {
        self.lines
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let f: Vec<&str> = self.fields(l).collect();
                if f.len() != 2 {
                    return Err(self.err(i, format!("expected \"i, j\", got {l:?}")));
                }
                let parse = |s: &str| -> Result<usize, DataError> {
                    match s.parse::<usize>() {
                        Ok(v) if v >= 1 => Ok(v - 1),
                        _ => Err(self.err(i, format!("invalid node id {s:?}"))),
                    }
                };
                Ok((parse(f[0])?, parse(f[1])?))
            })
            .collect()
    }

    fn reals(&self) -> Result<Vec<Vec<f64>>, DataError> {
        self.lines
            .iter()
            .enumerate()
            .map(|(i, l)| {
                self.fields(l)
                    .map(|f| f.parse::<f64>().map_err(|_| self.err(i, format!("not a real number: {f:?}"))))
                    .collect()
            })
            .collect()
    }
}

fn locate(dir: &Path, name: &str) -> PathBuf {
    let nested = dir.join(name);
    if !dir.join(format!("{name}_A.txt")).exists() && nested.join(format!("{name}_A.txt")).exists() {
        nested
    } else {
        dir.to_path_buf()
    }
}

fn optional(path: PathBuf) -> Result<Option<Lines>, DataError> {
    if path.exists() {
        Lines::read(path).map(Some)
    } else {
        Ok(None)
    }
}

/// Loads `name` from `dir` (or from `dir/name`), shifting ids to 0-based
/// and giving every edge unit length.
pub fn load_tu_dataset(dir: &Path, name: &str) -> Result<Dataset, DataError> {
    let dir = locate(dir, name);
    let file = |suffix: &str| dir.join(format!("{name}_{suffix}.txt"));

    let indicator_lines = Lines::read(file("graph_indicator"))?;
    let indicator = indicator_lines.integers()?;
    let class_lines = Lines::read(file("graph_labels"))?;
    let class_labels = class_lines.integers()?;
    let edge_lines = Lines::read(file("A"))?;
    let edges = edge_lines.pairs()?;
    let node_labels = optional(file("node_labels"))?.map(|l| l.integers()).transpose()?;
    let attributes = optional(file("node_attributes"))?.map(|l| l.reals()).transpose()?;

    let graph_count = class_labels.len();
    let total_nodes = indicator.len();
    let mut graph_of = Vec::with_capacity(total_nodes);
    let mut offsets = vec![usize::MAX; graph_count];
    let mut sizes = vec![0usize; graph_count];
    let mut last = 0usize;
    for (i, &gid) in indicator.iter().enumerate() {
        if gid < 1 || gid as usize > graph_count {
            return Err(indicator_lines.err(i, format!("graph id {gid} outside 1..={graph_count}")));
        }
        let gi = gid as usize - 1;
        if gi < last {
            return Err(indicator_lines.err(i, "graph ids must be non-decreasing"));
        }
        last = gi;
        if offsets[gi] == usize::MAX {
            offsets[gi] = i;
        }
        sizes[gi] += 1;
        graph_of.push(gi);
    }
    if let Some(l) = &node_labels {
        if l.len() != total_nodes {
            return Err(DataError::Inconsistent(format!("{} node labels for {total_nodes} nodes", l.len())));
        }
    }
    if let Some(a) = &attributes {
        if a.len() != total_nodes {
            return Err(DataError::Inconsistent(format!("{} attribute rows for {total_nodes} nodes", a.len())));
        }
    }

    let mut edge_sets: Vec<BTreeSet<(usize, usize)>> = vec![BTreeSet::new(); graph_count];
    for (line, &(u, v)) in edges.iter().enumerate() {
        if u >= total_nodes || v >= total_nodes {
            return Err(edge_lines.err(line, format!("node id beyond the {total_nodes} indicator entries")));
        }
        let (gu, gv) = (graph_of[u], graph_of[v]);
        if gu != gv {
            return Err(DataError::Inconsistent(format!(
                "edge on line {} joins graph {} and graph {}",
                line + 1,
                gu + 1,
                gv + 1
            )));
        }
        let (a, b) = (u - offsets[gu], v - offsets[gu]);
        edge_sets[gu].insert((a.min(b), a.max(b)));
    }

    let mut graphs = Vec::with_capacity(graph_count);
    for gi in 0..graph_count {
        let n = sizes[gi];
        let range = if n == 0 { 0..0 } else { offsets[gi]..offsets[gi] + n };
        let edges: Vec<_> = edge_sets[gi].iter().map(|&(u, v)| (u, v, 1.0)).collect();
        let labels: Option<Vec<Label>> = node_labels.as_ref().map(|l| l[range.clone()].to_vec());
        let attrs = attributes.as_ref().map(|a| a[range.clone()].to_vec());
        let g = Graph::from_edges(n, &edges, labels, attrs)
            .map_err(|source| DataError::Dataset(crate::graph::DatasetError::Graph { index: gi, source }))?;
        graphs.push(g);
    }
    let meta = DatasetMeta { source: name.to_string(), noise_x: 0.0, seed: None };
    Ok(Dataset::new(graphs, class_labels, meta)?)
}
