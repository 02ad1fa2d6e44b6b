//! Dataset loading and synthetic structural noise.

mod edgelist;
mod noise;
mod tu;

use std::path::PathBuf;

use crate::graph::DatasetError;

pub use edgelist::{parse_edge_list, read_edge_list, NamedGraph};
pub use noise::{added_node_count, inject_noise, LabelPolicy, NoiseConfig};
pub use tu::{load_tu_dataset, resolve_dataset_dir, DATA_DIR_ENV};

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("missing file {}", .0.display())]
    MissingFile(PathBuf),
    #[error("{}:{line}: {msg}", path.display())]
    Malformed { path: PathBuf, line: usize, msg: String },
    #[error("inconsistent dataset: {0}")]
    Inconsistent(String),
    #[error("cannot attach noise nodes to empty graph {graph}")]
    EmptyGraph { graph: usize },
    #[error("invalid noise configuration: {0}")]
    InvalidNoise(String),
    #[error("no dataset directory given and {DATA_DIR_ENV} is not set")]
    NoDataDir,
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}
