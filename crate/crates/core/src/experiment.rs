//! Classification and noise-robustness experiments, and their reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cv::{mean_std, nested_cv, run_repetition, CvProtocol, CvReport};
use crate::data::{inject_noise, LabelPolicy, NoiseConfig};
use crate::error::Error;
use crate::gram::{gram, normalize, GramMatrix, KernelChoice};
use crate::graph::{Dataset, Graph};
use crate::kernels::{default_lambda, NodeKernel};

/// Node-kernel selection; `Auto` picks from what the dataset carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKernelKind {
    #[default]
    Auto,
    Dirac,
    Gaussian,
    Product,
}

impl NodeKernelKind {
    /// Resolves against a (labelled) dataset; `lambda` defaults to `1/d`.
    pub fn resolve(self, ds: &Dataset, lambda: Option<f64>) -> Result<NodeKernel, Error> {
        let dim = ds.attribute_dim();
        let lambda = lambda.unwrap_or_else(|| default_lambda(dim.unwrap_or(1)));
        let kernel = match self {
            NodeKernelKind::Auto => {
                let k = NodeKernel::auto(ds.has_labels(), dim)
                    .ok_or_else(|| Error::config("dataset has neither node labels nor attributes"))?;
                match k {
                    NodeKernel::Dirac => NodeKernel::Dirac,
                    NodeKernel::Gaussian { .. } => NodeKernel::Gaussian { lambda },
                    NodeKernel::Product { .. } => NodeKernel::Product { lambda },
                }
            }
            NodeKernelKind::Dirac => NodeKernel::Dirac,
            NodeKernelKind::Gaussian => NodeKernel::Gaussian { lambda },
            NodeKernelKind::Product => NodeKernel::Product { lambda },
        };
        if kernel.needs_attributes() && dim.is_none() {
            return Err(Error::config(format!("{} node kernel needs node attributes", kernel.name())));
        }
        Ok(kernel)
    }
}

/// A graph kernel with the grid of its swept parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kernel", rename_all = "lowercase")]
pub enum KernelRequest {
    Gh { s_grid: Vec<usize>, node_kernel: NodeKernelKind, lambda: Option<f64> },
    Wl { h: usize },
}

impl KernelRequest {
    pub fn name(&self) -> &'static str {
        match self {
            KernelRequest::Gh { .. } => "gh",
            KernelRequest::Wl { .. } => "wl",
        }
    }

    /// `s=0;1;2` or `h=5`.
    pub fn param_label(&self) -> String {
        match self {
            KernelRequest::Gh { s_grid, .. } => {
                format!("s={}", s_grid.iter().map(ToString::to_string).collect::<Vec<_>>().join(";"))
            }
            KernelRequest::Wl { h } => format!("h={h}"),
        }
    }

    /// Concrete kernels for every grid point.
    pub fn choices(&self, ds: &Dataset) -> Result<Vec<KernelChoice>, Error> {
        match self {
            KernelRequest::Gh { s_grid, node_kernel, lambda } => {
                if s_grid.is_empty() {
                    return Err(Error::config("empty s grid"));
                }
                let nk = node_kernel.resolve(ds, *lambda)?;
                Ok(s_grid.iter().map(|&s| KernelChoice::Gh { s, node_kernel: nk }).collect())
            }
            KernelRequest::Wl { h } => Ok(vec![KernelChoice::Wl { h: *h }]),
        }
    }
}

/// When degree labels are attached to unlabelled datasets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DegreeLabelOrder {
    #[default]
    AfterNoise,
    BeforeNoise,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kernels: Vec<KernelRequest>,
    pub protocol: CvProtocol,
    pub degree_labels: DegreeLabelOrder,
    pub attach_edges: usize,
    pub label_policy: LabelPolicy,
    /// Draw fresh noise for every repetition (seed `seed + rep`) instead of one noisy dataset.
    pub redraw_noise: bool,
}

impl ExperimentConfig {
    pub fn new(kernels: Vec<KernelRequest>, protocol: CvProtocol) -> Self {
        ExperimentConfig {
            kernels,
            protocol,
            degree_labels: DegreeLabelOrder::default(),
            attach_edges: 1,
            label_policy: LabelPolicy::default(),
            redraw_noise: true,
        }
    }
}

/// Applies noise and, for unlabelled data, degree labels in the configured order.
pub fn prepare_dataset(raw: &Dataset, x: f64, noise_seed: u64, cfg: &ExperimentConfig) -> Result<Dataset, Error> {
    let unlabeled = !raw.has_labels();
    let mut ds = if unlabeled && cfg.degree_labels == DegreeLabelOrder::BeforeNoise {
        raw.with_degree_labels()
    } else {
        raw.clone()
    };
    if x != 0.0 {
        let noise = NoiseConfig { x, seed: noise_seed, attach_edges: cfg.attach_edges, label_policy: cfg.label_policy };
        ds = inject_noise(&ds, &noise)?;
    }
    if unlabeled && cfg.degree_labels == DegreeLabelOrder::AfterNoise {
        ds = ds.with_degree_labels();
    }
    Ok(ds)
}

/// Normalized Gram matrices keyed by the swept parameter.
pub fn normalized_grams(ds: &Dataset, request: &KernelRequest) -> Result<BTreeMap<usize, GramMatrix>, Error> {
    request.choices(ds)?.iter().map(|choice| Ok((choice.param(), normalize(&gram(ds, choice)?)?))).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelResult {
    pub kernel: String,
    pub param: String,
    pub node_kernel: Option<NodeKernel>,
    pub x: f64,
    pub report: CvReport,
    #[serde(skip)]
    pub runtime_seconds: f64,
}

/// Everything one `classify` or `noise-sweep` run produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub dataset: String,
    pub config: ExperimentConfig,
    pub results: Vec<KernelResult>,
}

fn node_kernel_of(request: &KernelRequest, ds: &Dataset) -> Result<Option<NodeKernel>, Error> {
    Ok(match request.choices(ds)?.first() {
        Some(KernelChoice::Gh { node_kernel, .. }) => Some(*node_kernel),
        _ => None,
    })
}

fn run_point(raw: &Dataset, request: &KernelRequest, x: f64, cfg: &ExperimentConfig) -> Result<KernelResult, Error> {
    let start = Instant::now();
    let seed = cfg.protocol.seed;
    let (report, node_kernel) = if x == 0.0 || !cfg.redraw_noise {
        let ds = prepare_dataset(raw, x, seed, cfg)?;
        let grams = normalized_grams(&ds, request)?;
        (nested_cv(&grams, ds.class_labels(), &cfg.protocol)?, node_kernel_of(request, &ds)?)
    } else {
        let mut reps = Vec::with_capacity(cfg.protocol.repetitions);
        let mut node_kernel = None;
        for rep in 0..cfg.protocol.repetitions {
            let ds = prepare_dataset(raw, x, seed.wrapping_add(rep as u64), cfg)?;
            let grams = normalized_grams(&ds, request)?;
            node_kernel = node_kernel_of(request, &ds)?;
            reps.push(run_repetition(&grams, ds.class_labels(), &cfg.protocol, rep)?);
        }
        (CvReport::from_repetitions(reps), node_kernel)
    };
    Ok(KernelResult {
        kernel: request.name().to_string(),
        param: request.param_label(),
        node_kernel,
        x,
        report,
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Nested cross-validation of every requested kernel on the noise-free data.
pub fn classify(raw: &Dataset, cfg: &ExperimentConfig) -> Result<ExperimentReport, Error> {
    noise_sweep(raw, cfg, &[0.0])
}

/// Nested cross-validation for every kernel and noise level.
pub fn noise_sweep(raw: &Dataset, cfg: &ExperimentConfig, xs: &[f64]) -> Result<ExperimentReport, Error> {
    if cfg.kernels.is_empty() {
        return Err(Error::config("no kernel requested"));
    }
    let mut results = Vec::new();
    for request in &cfg.kernels {
        for &x in xs {
            let r = run_point(raw, request, x, cfg)?;
            log::info!("{} {} x={} accuracy {:.4} +- {:.4}", r.kernel, r.param, x, r.report.mean, r.report.std);
            results.push(r);
        }
    }
    Ok(ExperimentReport { dataset: raw.meta.source.clone(), config: cfg.clone(), results })
}

impl ExperimentReport {
    pub const CSV_HEADER: &'static str = "dataset,kernel,param,x,repetition,mean,std";

    /// One row per (kernel, x, repetition) with the fold mean and spread,
    /// then one `all` row per (kernel, x) with the mean and spread over repetitions.
    pub fn rows(&self) -> Vec<String> {
        let mut rows = Vec::new();
        for r in &self.results {
            for rep in &r.report.repetitions {
                rows.push(format!(
                    "{},{},{},{},{},{},{}",
                    self.dataset, r.kernel, r.param, r.x, rep.repetition, rep.accuracy, rep.fold_std
                ));
            }
            rows.push(format!(
                "{},{},{},{},all,{},{}",
                self.dataset, r.kernel, r.param, r.x, r.report.mean, r.report.std
            ));
        }
        rows
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for row in self.rows() {
            out.push_str(&row);
            out.push('\n');
        }
        out
    }

    pub fn timing_csv(&self) -> String {
        let mut out = String::from("dataset,kernel,param,x,runtime_seconds\n");
        for r in &self.results {
            let _ = writeln!(out, "{},{},{},{},{:.3}", self.dataset, r.kernel, r.param, r.x, r.runtime_seconds);
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

/// Summary statistics of a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub name: String,
    pub graphs: usize,
    pub classes: usize,
    pub mean_nodes: f64,
    pub mean_edges: f64,
    /// Mean over graphs with at least two nodes of `2|E| / (|V| (|V| - 1))`.
    pub density: f64,
    pub discrete_labels: bool,
    pub attribute_dim: Option<usize>,
}

impl DatasetInfo {
    pub fn of(ds: &Dataset) -> DatasetInfo {
        let n = ds.len().max(1) as f64;
        let densities: Vec<f64> = ds
            .graphs()
            .iter()
            .filter(|g| g.node_count() >= 2)
            .map(|g| 2.0 * g.edge_count() as f64 / (g.node_count() * (g.node_count() - 1)) as f64)
            .collect();
        DatasetInfo {
            name: ds.meta.source.clone(),
            graphs: ds.len(),
            classes: ds.class_count(),
            mean_nodes: ds.graphs().iter().map(Graph::node_count).sum::<usize>() as f64 / n,
            mean_edges: ds.graphs().iter().map(Graph::edge_count).sum::<usize>() as f64 / n,
            density: mean_std(&densities).0,
            discrete_labels: ds.has_labels(),
            attribute_dim: ds.attribute_dim(),
        }
    }

    pub fn table(&self) -> String {
        let yes_no = |b: bool| if b { "yes" } else { "no" };
        let mut out = String::new();
        let _ = writeln!(out, "dataset            {}", self.name);
        let _ = writeln!(out, "graphs             {}", self.graphs);
        let _ = writeln!(out, "classes            {}", self.classes);
        let _ = writeln!(out, "mean |V|           {:.1}", self.mean_nodes);
        let _ = writeln!(out, "mean |E|           {:.1}", self.mean_edges);
        let _ = writeln!(out, "density            {:.2}", self.density);
        let _ = writeln!(out, "discrete labels    {}", yes_no(self.discrete_labels));
        let _ = writeln!(
            out,
            "vector attributes  {}",
            self.attribute_dim.map_or_else(|| "no".to_string(), |d| d.to_string())
        );
        out
    }
}
