//! Plain edge-list files for single graphs.
//!
//! One edge per line as `u v` or `u v length`, separated by whitespace or
//! commas. Node names are arbitrary tokens, numbered in order of first
//! appearance. A line with a single token declares an isolated node. `#`
//! starts a comment.

use std::collections::HashMap;
use std::path::Path;

use super::DataError;
use crate::graph::{Graph, NodeId};

#[derive(Debug, Clone)]
pub struct NamedGraph {
    pub graph: Graph,
    pub names: Vec<String>,
}

impl NamedGraph {
    pub fn node(&self, name: &str) -> Option<NodeId> {
        self.names.iter().position(|n| n == name)
    }
}

pub fn read_edge_list(path: &Path) -> Result<NamedGraph, DataError> {
    let text = std::fs::read_to_string(path).map_err(|source| match source.kind() {
        std::io::ErrorKind::NotFound => DataError::MissingFile(path.to_path_buf()),
        _ => DataError::Io { path: path.to_path_buf(), source },
    })?;
    parse_edge_list(&text, path)
}

pub fn parse_edge_list(text: &str, origin: &Path) -> Result<NamedGraph, DataError> {
    let mut ids: HashMap<String, NodeId> = HashMap::new();
    let mut names = Vec::new();
    let mut edges = Vec::new();
    let malformed = |line: usize, msg: String| DataError::Malformed { path: origin.to_path_buf(), line, msg };

    let mut intern = |name: &str, names: &mut Vec<String>| {
        *ids.entry(name.to_string()).or_insert_with(|| {
            names.push(name.to_string());
            names.len() - 1
        })
    };

    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
        match f.as_slice() {
            [one] => {
                intern(one, &mut names);
            }
            [u, v] | [u, v, _] => {
                let length = match f.get(2) {
                    Some(l) => l.parse::<f64>().map_err(|_| malformed(i + 1, format!("bad edge length {l:?}")))?,
                    None => 1.0,
                };
                let a = intern(u, &mut names);
                let b = intern(v, &mut names);
                edges.push((a, b, length));
            }
            _ => return Err(malformed(i + 1, format!("expected \"u v [length]\", got {line:?}"))),
        }
    }
    let graph = Graph::from_edges(names.len(), &edges, None, None)
        .map_err(|e| DataError::Inconsistent(format!("{}: {e}", origin.display())))?;
    Ok(NamedGraph { graph, names })
}
