//! C ABI for graphkern.
//!
//! All objects are opaque heap handles created by a `*_new`/`*_finish`/
//! `*_compute` function and released with the matching `*_free`. Every
//! fallible function returns a [`GkStatus`]; on failure a description is
//! available from [`gk_last_error_message`] on the same thread. Panics never
//! cross the boundary, they are reported as `GK_STATUS_PANIC`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use graphkern::data::load_tu_dataset;
use graphkern::gram::{check_psd, gram, normalize, GramMatrix, KernelChoice};
use graphkern::kernels::{graphhopper_kernel, NodeKernel};
use graphkern::{Dataset, DatasetMeta, Graph};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GkStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// The graph is malformed (asymmetric, self loop, bad length, ...).
    InvalidGraph = 3,
    /// Dataset files are missing or malformed.
    Data = 4,
    /// Kernel or matrix computation failed.
    Compute = 5,
    Panic = 6,
}

/// Node kernel used by the GraphHopper kernel.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GkNodeKernel {
    Dirac = 0,
    Gaussian = 1,
    Product = 2,
}

/// Graph under construction.
pub struct GkGraphBuilder {
    node_count: usize,
    edges: Vec<(usize, usize, f64)>,
    labels: Option<Vec<i64>>,
    attributes: Option<Vec<Vec<f64>>>,
}

/// Validated, immutable graph.
pub struct GkGraph(Graph);

/// Graphs with class labels.
pub struct GkDataset {
    graphs: Vec<Graph>,
    classes: Vec<i64>,
    meta: DatasetMeta,
}

/// Dense symmetric Gram matrix.
pub struct GkGram(GramMatrix);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl std::fmt::Display) {
    let msg = CString::new(msg.to_string().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

struct Failure(GkStatus, String);

impl Failure {
    fn null(what: &str) -> Self {
        Failure(GkStatus::NullPointer, format!("{what} is null"))
    }
    fn arg(msg: impl Into<String>) -> Self {
        Failure(GkStatus::InvalidArgument, msg.into())
    }
}

impl From<graphkern::GraphError> for Failure {
    fn from(e: graphkern::GraphError) -> Self {
        Failure(GkStatus::InvalidGraph, e.to_string())
    }
}

impl From<graphkern::graph::DatasetError> for Failure {
    fn from(e: graphkern::graph::DatasetError) -> Self {
        Failure(GkStatus::InvalidGraph, e.to_string())
    }
}

impl From<graphkern::data::DataError> for Failure {
    fn from(e: graphkern::data::DataError) -> Self {
        Failure(GkStatus::Data, e.to_string())
    }
}

impl From<graphkern::kernels::KernelError> for Failure {
    fn from(e: graphkern::kernels::KernelError) -> Self {
        Failure(GkStatus::Compute, e.to_string())
    }
}

impl From<graphkern::gram::GramError> for Failure {
    fn from(e: graphkern::gram::GramError) -> Self {
        Failure(GkStatus::Compute, e.to_string())
    }
}

/// Runs `f`, recording its error message and converting panics.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> GkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            GkStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            GkStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure::null(what))
}

unsafe fn deref_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| Failure::null(what))
}

unsafe fn out<T>(p: *mut T, value: T) -> Result<(), Failure> {
    if p.is_null() {
        return Err(Failure::null("output pointer"));
    }
    p.write(value);
    Ok(())
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn string<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure::arg(format!("{what} is not UTF-8")))
}

fn node_kernel(kind: GkNodeKernel, lambda: f64) -> NodeKernel {
    match kind {
        GkNodeKernel::Dirac => NodeKernel::Dirac,
        GkNodeKernel::Gaussian => NodeKernel::Gaussian { lambda },
        GkNodeKernel::Product => NodeKernel::Product { lambda },
    }
}

fn free<T>(p: *mut T) {
    if !p.is_null() {
        // SAFETY: non-null handles only ever come from Box::into_raw in this crate.
        drop(unsafe { Box::from_raw(p) });
    }
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn gk_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// New builder for a graph with `node_count` nodes and no edges.
#[no_mangle]
pub extern "C" fn gk_graph_builder_new(node_count: usize) -> *mut GkGraphBuilder {
    Box::into_raw(Box::new(GkGraphBuilder { node_count, edges: Vec::new(), labels: None, attributes: None }))
}

/// Adds the undirected edge `{u, v}` with the given positive length.
#[no_mangle]
pub unsafe extern "C" fn gk_graph_builder_add_edge(
    builder: *mut GkGraphBuilder,
    u: usize,
    v: usize,
    length: f64,
) -> GkStatus {
    guard(|| {
        let b = deref_mut(builder, "builder")?;
        if u >= b.node_count || v >= b.node_count {
            return Err(Failure::arg(format!("edge ({u}, {v}) out of range for {} nodes", b.node_count)));
        }
        b.edges.push((u, v, length));
        Ok(())
    })
}

/// Sets one discrete label per node; `len` must equal the node count.
#[no_mangle]
pub unsafe extern "C" fn gk_graph_builder_set_labels(
    builder: *mut GkGraphBuilder,
    labels: *const i64,
    len: usize,
) -> GkStatus {
    guard(|| {
        let b = deref_mut(builder, "builder")?;
        if len != b.node_count {
            return Err(Failure::arg(format!("{len} labels for {} nodes", b.node_count)));
        }
        b.labels = Some(slice(labels, len, "labels")?.to_vec());
        Ok(())
    })
}

/// Sets attribute vectors from a row-major `node_count x dim` array.
#[no_mangle]
pub unsafe extern "C" fn gk_graph_builder_set_attributes(
    builder: *mut GkGraphBuilder,
    data: *const f64,
    node_count: usize,
    dim: usize,
) -> GkStatus {
    guard(|| {
        let b = deref_mut(builder, "builder")?;
        if node_count != b.node_count {
            return Err(Failure::arg(format!("{node_count} attribute rows for {} nodes", b.node_count)));
        }
        let len = node_count.checked_mul(dim).ok_or_else(|| Failure::arg("attribute array too large"))?;
        let values = slice(data, len, "attributes")?;
        b.attributes = Some(if dim == 0 {
            vec![Vec::new(); node_count]
        } else {
            values.chunks(dim).map(<[f64]>::to_vec).collect()
        });
        Ok(())
    })
}

/// Validates the graph and consumes the builder. The builder is freed even
/// on failure; on success `*out` receives a graph handle.
#[no_mangle]
pub unsafe extern "C" fn gk_graph_builder_finish(
    builder: *mut GkGraphBuilder,
    out_graph: *mut *mut GkGraph,
) -> GkStatus {
    guard(|| {
        if builder.is_null() {
            return Err(Failure::null("builder"));
        }
        let b = Box::from_raw(builder);
        if out_graph.is_null() {
            return Err(Failure::null("output pointer"));
        }
        let g = Graph::from_edges(b.node_count, &b.edges, b.labels, b.attributes)?;
        out(out_graph, Box::into_raw(Box::new(GkGraph(g))))
    })
}

#[no_mangle]
pub extern "C" fn gk_graph_builder_free(builder: *mut GkGraphBuilder) {
    free(builder);
}

#[no_mangle]
pub unsafe extern "C" fn gk_graph_node_count(graph: *const GkGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.node_count())
}

#[no_mangle]
pub unsafe extern "C" fn gk_graph_edge_count(graph: *const GkGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.edge_count())
}

#[no_mangle]
pub extern "C" fn gk_graph_free(graph: *mut GkGraph) {
    free(graph);
}

/// GraphHopper kernel value with gap size `s`; `lambda` is ignored for Dirac.
#[no_mangle]
pub unsafe extern "C" fn gk_graphhopper_kernel(
    a: *const GkGraph,
    b: *const GkGraph,
    s: usize,
    kind: GkNodeKernel,
    lambda: f64,
    out_value: *mut f64,
) -> GkStatus {
    guard(|| {
        let (a, b) = (deref(a, "first graph")?, deref(b, "second graph")?);
        let k = graphhopper_kernel(&a.0, &b.0, s, &node_kernel(kind, lambda))?;
        out(out_value, k)
    })
}

/// Empty dataset.
#[no_mangle]
pub extern "C" fn gk_dataset_new() -> *mut GkDataset {
    Box::into_raw(Box::new(GkDataset { graphs: Vec::new(), classes: Vec::new(), meta: DatasetMeta::default() }))
}

/// Appends a copy of `graph` with class label `class_label`.
#[no_mangle]
pub unsafe extern "C" fn gk_dataset_push(dataset: *mut GkDataset, graph: *const GkGraph, class_label: i64) -> GkStatus {
    guard(|| {
        let ds = deref_mut(dataset, "dataset")?;
        let g = deref(graph, "graph")?;
        ds.graphs.push(g.0.clone());
        ds.classes.push(class_label);
        Ok(())
    })
}

/// Loads the TU-format dataset `name` from `dir` (or `dir/name`).
#[no_mangle]
pub unsafe extern "C" fn gk_dataset_load_tu(
    dir: *const c_char,
    name: *const c_char,
    out_dataset: *mut *mut GkDataset,
) -> GkStatus {
    guard(|| {
        let dir = string(dir, "dir")?;
        let name = string(name, "name")?;
        if out_dataset.is_null() {
            return Err(Failure::null("output pointer"));
        }
        let (graphs, classes, meta) = load_tu_dataset(Path::new(dir), name)?.into_parts();
        out(out_dataset, Box::into_raw(Box::new(GkDataset { graphs, classes, meta })))
    })
}

#[no_mangle]
pub unsafe extern "C" fn gk_dataset_len(dataset: *const GkDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.graphs.len())
}

/// Copies the class label of graph `index`.
#[no_mangle]
pub unsafe extern "C" fn gk_dataset_class_label(
    dataset: *const GkDataset,
    index: usize,
    out_label: *mut i64,
) -> GkStatus {
    guard(|| {
        let ds = deref(dataset, "dataset")?;
        let c = *ds.classes.get(index).ok_or_else(|| Failure::arg(format!("index {index} out of range")))?;
        out(out_label, c)
    })
}

#[no_mangle]
pub extern "C" fn gk_dataset_free(dataset: *mut GkDataset) {
    free(dataset);
}

unsafe fn compute(dataset: *const GkDataset, choice: KernelChoice, out_gram: *mut *mut GkGram) -> GkStatus {
    guard(|| {
        let ds = deref(dataset, "dataset")?;
        if out_gram.is_null() {
            return Err(Failure::null("output pointer"));
        }
        let ds = Dataset::new(ds.graphs.clone(), ds.classes.clone(), ds.meta.clone())?;
        let m = gram(&ds, &choice)?;
        out(out_gram, Box::into_raw(Box::new(GkGram(m))))
    })
}

/// Unnormalized GraphHopper Gram matrix of the dataset.
#[no_mangle]
pub unsafe extern "C" fn gk_gram_compute_graphhopper(
    dataset: *const GkDataset,
    s: usize,
    kind: GkNodeKernel,
    lambda: f64,
    out_gram: *mut *mut GkGram,
) -> GkStatus {
    compute(dataset, KernelChoice::Gh { s, node_kernel: node_kernel(kind, lambda) }, out_gram)
}

/// Unnormalized Weisfeiler-Lehman subtree Gram matrix with `h` iterations.
#[no_mangle]
pub unsafe extern "C" fn gk_gram_compute_wl(
    dataset: *const GkDataset,
    h: usize,
    out_gram: *mut *mut GkGram,
) -> GkStatus {
    compute(dataset, KernelChoice::Wl { h }, out_gram)
}

/// New cosine-normalized matrix with a unit diagonal.
#[no_mangle]
pub unsafe extern "C" fn gk_gram_normalize(gram: *const GkGram, out_gram: *mut *mut GkGram) -> GkStatus {
    guard(|| {
        let m = normalize(&deref(gram, "gram")?.0)?;
        out(out_gram, Box::into_raw(Box::new(GkGram(m))))
    })
}

#[no_mangle]
pub unsafe extern "C" fn gk_gram_size(gram: *const GkGram) -> usize {
    gram.as_ref().map_or(0, |m| m.0.size())
}

#[no_mangle]
pub unsafe extern "C" fn gk_gram_get(gram: *const GkGram, i: usize, j: usize, out_value: *mut f64) -> GkStatus {
    guard(|| {
        let m = &deref(gram, "gram")?.0;
        if i >= m.size() || j >= m.size() {
            return Err(Failure::arg(format!("entry ({i}, {j}) out of range for size {}", m.size())));
        }
        out(out_value, m.get(i, j))
    })
}

/// Copies the matrix row-major into `buffer`, which must hold `size * size` values.
#[no_mangle]
pub unsafe extern "C" fn gk_gram_copy(gram: *const GkGram, buffer: *mut f64, len: usize) -> GkStatus {
    guard(|| {
        let m = &deref(gram, "gram")?.0;
        let n = m.size();
        if len != n * n {
            return Err(Failure::arg(format!("buffer holds {len} values, need {}", n * n)));
        }
        if n == 0 {
            return Ok(());
        }
        if buffer.is_null() {
            return Err(Failure::null("buffer"));
        }
        let dst = std::slice::from_raw_parts_mut(buffer, len);
        for i in 0..n {
            dst[i * n..(i + 1) * n].copy_from_slice(m.row(i));
        }
        Ok(())
    })
}

/// Smallest eigenvalue, for positive-semidefiniteness checks.
#[no_mangle]
pub unsafe extern "C" fn gk_gram_min_eigenvalue(gram: *const GkGram, out_value: *mut f64) -> GkStatus {
    guard(|| {
        let ev = check_psd(&deref(gram, "gram")?.0)?;
        out(out_value, ev)
    })
}

#[no_mangle]
pub extern "C" fn gk_gram_free(gram: *mut GkGram) {
    free(gram);
}
