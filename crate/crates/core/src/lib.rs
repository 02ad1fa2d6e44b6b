//! Graph kernels on shortest-path DAGs.
//!
//! The gappy GraphHopper kernel compares two graphs through all pairs of
//! equal-length shortest paths, where a path may skip up to `s` nodes at a
//! time. It is evaluated without enumerating paths: per-root shortest-path
//! DAGs are extended with gap edges, path counts are propagated over them,
//! and the counts are folded into per-node hop-count matrices whose inner
//! products weight a node kernel. A Weisfeiler-Lehman subtree kernel, a TU
//! format loader, structural noise injection, an SMO-based SVM and a nested
//! cross-validation harness complete the toolkit.

pub mod cli;
pub mod cv;
pub mod data;
pub mod error;
pub mod experiment;
pub mod gram;
pub mod graph;
pub mod kernels;
pub mod spdag;
pub mod svm;
pub mod wl;

pub use error::{Error, ExitCode};

pub use gram::{check_psd, gram, normalize, GramMatrix, KernelChoice};
pub use graph::{Dataset, DatasetMeta, Graph, GraphError, Label, NodeId};
pub use kernels::{graphhopper_kernel, kernel_bruteforce, NodeKernel};
pub use spdag::{build_spdag, extend_gappy, SpDag};
