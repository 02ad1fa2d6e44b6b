//! Kernel (Gram) matrices over a dataset.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::graph::{Dataset, DatasetMeta};
use crate::kernels::{GhFeatures, KernelError, NodeKernel};
use crate::wl::{wl_kernel, wl_relabel, WlError};

/// Symmetry tolerance for stored Gram matrices.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Relative floor for the smallest eigenvalue of a valid kernel matrix.
pub const PSD_TOL: f64 = 1e-8;

#[derive(Debug, thiserror::Error)]
pub enum GramError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Wl(#[from] WlError),
    #[error("diagonal entry {index} is {value}; cannot normalize (graph without features?)")]
    ZeroDiagonal { index: usize, value: f64 },
    #[error("matrix is not symmetric: |K[{i}][{j}] - K[{j}][{i}]| = {diff:e}")]
    Asymmetric { i: usize, j: usize, diff: f64 },
    #[error("{}:{line}: {msg}", path.display())]
    Parse { path: PathBuf, line: usize, msg: String },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Json { path: PathBuf, source: serde_json::Error },
}

/// Graph kernel used to fill a Gram matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kernel", rename_all = "lowercase")]
pub enum KernelChoice {
    /// Gappy GraphHopper with gap size `s`.
    Gh { s: usize, node_kernel: NodeKernel },
    /// Weisfeiler-Lehman subtree kernel with `h` iterations.
    Wl { h: usize },
}

impl KernelChoice {
    pub fn name(&self) -> &'static str {
        match self {
            KernelChoice::Gh { .. } => "gh",
            KernelChoice::Wl { .. } => "wl",
        }
    }

    /// The swept parameter: `s` for GraphHopper, `h` for WL.
    pub fn param(&self) -> usize {
        match *self {
            KernelChoice::Gh { s, .. } => s,
            KernelChoice::Wl { h } => h,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub kernel: KernelChoice,
    pub dataset: DatasetMeta,
}

/// Dense symmetric kernel matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramMatrix {
    size: usize,
    #[serde(skip)]
    data: Vec<f64>,
    normalized: bool,
    provenance: Option<Provenance>,
}

impl GramMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, GramError> {
        let size = rows.len();
        let mut data = Vec::with_capacity(size * size);
        for (i, r) in rows.into_iter().enumerate() {
            if r.len() != size {
                return Err(GramError::Parse {
                    path: PathBuf::new(),
                    line: i + 1,
                    msg: format!("row has {} entries, expected {size}", r.len()),
                });
            }
            data.extend(r);
        }
        Ok(GramMatrix { size, data, normalized: false, provenance: None })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.size + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.size..(i + 1) * self.size]
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    pub fn with_provenance(mut self, p: Provenance) -> Self {
        self.provenance = Some(p);
        self
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Simultaneous row/column selection.
    pub fn select(&self, idx: &[usize]) -> GramMatrix {
        let data = idx.iter().flat_map(|&i| idx.iter().map(move |&j| (i, j))).map(|(i, j)| self.get(i, j)).collect();
        GramMatrix { size: idx.len(), data, normalized: self.normalized, provenance: self.provenance.clone() }
    }

    /// Largest `|K[i][j] - K[j][i]|` and where it occurs.
    pub fn asymmetry(&self) -> (usize, usize, f64) {
        let mut worst = (0, 0, 0.0);
        for i in 0..self.size {
            for j in i + 1..self.size {
                let d = (self.get(i, j) - self.get(j, i)).abs();
                if d > worst.2 {
                    worst = (i, j, d);
                }
            }
        }
        worst
    }

    /// Headerless CSV, one row per line.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.size {
            for (j, x) in self.row(i).iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{x}");
            }
            out.push('\n');
        }
        out
    }

    pub fn parse_csv(text: &str, origin: &Path) -> Result<GramMatrix, GramError> {
        let rows = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                l.split(',')
                    .map(|f| {
                        f.trim().parse::<f64>().map_err(|_| GramError::Parse {
                            path: origin.to_path_buf(),
                            line: i + 1,
                            msg: format!("not a real number: {f:?}"),
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        GramMatrix::from_rows(rows).map_err(|e| match e {
            GramError::Parse { line, msg, .. } => GramError::Parse { path: origin.to_path_buf(), line, msg },
            e => e,
        })
    }

    /// Writes `path` as CSV and a JSON sidecar with the same stem.
    pub fn write(&self, path: &Path) -> Result<(), GramError> {
        fn io(path: &Path) -> impl FnOnce(std::io::Error) -> GramError + '_ {
            move |source| GramError::Io { path: path.to_path_buf(), source }
        }
        fs::write(path, self.to_csv()).map_err(io(path))?;
        let sidecar = path.with_extension("json");
        let json =
            serde_json::to_string_pretty(self).map_err(|source| GramError::Json { path: sidecar.clone(), source })?;
        fs::write(&sidecar, json + "\n").map_err(io(&sidecar))
    }

    /// Reads a CSV written by [`GramMatrix::write`], with its sidecar when present.
    pub fn read(path: &Path) -> Result<GramMatrix, GramError> {
        let text = fs::read_to_string(path).map_err(|source| GramError::Io { path: path.to_path_buf(), source })?;
        let mut m = GramMatrix::parse_csv(&text, path)?;
        let sidecar = path.with_extension("json");
        if let Ok(json) = fs::read_to_string(&sidecar) {
            let meta: GramMatrix =
                serde_json::from_str(&json).map_err(|source| GramError::Json { path: sidecar.clone(), source })?;
            m.normalized = meta.normalized;
            m.provenance = meta.provenance;
        }
        Ok(m)
    }
}

/// Computes the Gram matrix of `dataset` under `kernel`.
///
/// Per-graph features are computed once; entries of the upper triangle are
/// evaluated independently and mirrored, so the result does not depend on
/// the number of worker threads.
pub fn gram(dataset: &Dataset, kernel: &KernelChoice) -> Result<GramMatrix, GramError> {
    let n = dataset.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let values: Vec<f64> = match kernel {
        KernelChoice::Gh { s, node_kernel } => {
            for g in dataset.graphs() {
                node_kernel.check(g)?;
            }
            let feats = dataset.graphs().par_iter().map(|g| GhFeatures::new(g, *s)).collect::<Result<Vec<_>, _>>()?;
            pairs.par_iter().map(|&(i, j)| feats[i].kernel(&feats[j], node_kernel)).collect::<Result<_, _>>()?
        }
        KernelChoice::Wl { h } => {
            let feats = wl_relabel(dataset.graphs(), *h)?;
            pairs.par_iter().map(|&(i, j)| wl_kernel(&feats[i], &feats[j])).collect::<Result<_, _>>()?
        }
    };
    let mut data = vec![0.0; n * n];
    for (&(i, j), &v) in pairs.iter().zip(&values) {
        data[i * n + j] = v;
        data[j * n + i] = v;
    }
    Ok(GramMatrix {
        size: n,
        data,
        normalized: false,
        provenance: Some(Provenance { kernel: *kernel, dataset: dataset.meta.clone() }),
    })
}

/// `K[i][j] / sqrt(K[i][i] * K[j][j])`, with an exact unit diagonal.
pub fn normalize(m: &GramMatrix) -> Result<GramMatrix, GramError> {
    let n = m.size;
    let diag: Vec<f64> = (0..n).map(|i| m.get(i, i)).collect();
    if let Some((index, &value)) =
        diag.iter().enumerate().find(|(_, &d)| d.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater))
    {
        return Err(GramError::ZeroDiagonal { index, value });
    }
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            data[i * n + j] = if i == j { 1.0 } else { m.get(i, j) / (diag[i] * diag[j]).sqrt() };
        }
    }
    Ok(GramMatrix { size: n, data, normalized: true, provenance: m.provenance.clone() })
}

/// Smallest eigenvalue of the matrix, via a dense symmetric eigensolve.
///
/// Fails when the matrix is asymmetric beyond [`SYMMETRY_TOL`]. A kernel
/// matrix is accepted as positive semidefinite when the result is at least
/// `-PSD_TOL * max|K|`, see [`is_psd`].
pub fn check_psd(m: &GramMatrix) -> Result<f64, GramError> {
    let (i, j, diff) = m.asymmetry();
    if diff > SYMMETRY_TOL {
        return Err(GramError::Asymmetric { i, j, diff });
    }
    if m.size == 0 {
        return Ok(0.0);
    }
    let mat = DMatrix::from_row_slice(m.size, m.size, &m.data);
    let eig = mat.symmetric_eigen();
    Ok(eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
}

pub fn is_psd(m: &GramMatrix, min_eigenvalue: f64) -> bool {
    min_eigenvalue >= -PSD_TOL * m.max_abs().max(f64::MIN_POSITIVE)
}
