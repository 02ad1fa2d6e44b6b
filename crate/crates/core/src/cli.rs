//! The `graphkern` command-line tool.

use std::ffi::OsString;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::cv::{default_c_grid, CvProtocol};
use crate::data::{load_tu_dataset, read_edge_list, resolve_dataset_dir, LabelPolicy};
use crate::error::{Error, ExitCode};
use crate::experiment::{
    noise_sweep, normalized_grams, prepare_dataset, DatasetInfo, DegreeLabelOrder, ExperimentConfig, ExperimentReport,
    KernelRequest, NodeKernelKind,
};
use crate::gram::gram;
use crate::graph::Dataset;
use crate::spdag::{build_spdag, extend_gappy, DEFAULT_MAX_PATHS};
use crate::wl::DEFAULT_ITERATIONS;

#[derive(Debug, Parser)]
#[command(name = "graphkern", version, about = "Gappy GraphHopper and WL graph kernels")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// More log output; repeat for more.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Dataset statistics.
    Info(InfoArgs),
    /// Compute Gram matrices.
    Gram(GramArgs),
    /// Nested cross-validated SVM accuracy.
    Classify(ClassifyArgs),
    /// Accuracy as a function of added-node noise.
    NoiseSweep(SweepArgs),
    /// List the rooted (gappy) shortest paths of a small graph.
    Paths(PathsArgs),
}

#[derive(Debug, Args)]
struct DatasetArgs {
    /// Directory holding the dataset files (default: $GRAPHKERN_DATA_DIR).
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// TU dataset name, e.g. MUTAG.
    #[arg(long)]
    name: String,
}

impl DatasetArgs {
    fn load(&self) -> Result<Dataset, Error> {
        let dir = resolve_dataset_dir(self.dataset.as_deref())?;
        Ok(load_tu_dataset(&dir, &self.name)?)
    }
}

#[derive(Debug, Args)]
struct InfoArgs {
    #[command(flatten)]
    data: DatasetArgs,
    /// Also write the statistics as JSON to this directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KernelName {
    Gh,
    Wl,
}

#[derive(Debug, Args)]
struct KernelArgs {
    /// Graph kernels to evaluate.
    #[arg(long, value_enum, value_delimiter = ',', default_values = ["gh"])]
    kernel: Vec<KernelName>,
    /// Gap sizes for the GraphHopper kernel.
    #[arg(long, value_delimiter = ',', default_values = ["0", "1", "2"])]
    s: Vec<usize>,
    #[arg(long, value_enum, default_value = "auto")]
    node_kernel: NodeKernelArg,
    /// Gaussian bandwidth (default: 1 / attribute dimension).
    #[arg(long)]
    lambda: Option<f64>,
    /// Weisfeiler-Lehman iterations.
    #[arg(long, default_value_t = DEFAULT_ITERATIONS)]
    h: usize,
    /// Attach degree labels before rather than after noise (unlabelled data only).
    #[arg(long)]
    degree_labels_before_noise: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NodeKernelArg {
    Auto,
    Dirac,
    Gaussian,
    Product,
}

impl From<NodeKernelArg> for NodeKernelKind {
    fn from(k: NodeKernelArg) -> Self {
        match k {
            NodeKernelArg::Auto => NodeKernelKind::Auto,
            NodeKernelArg::Dirac => NodeKernelKind::Dirac,
            NodeKernelArg::Gaussian => NodeKernelKind::Gaussian,
            NodeKernelArg::Product => NodeKernelKind::Product,
        }
    }
}

impl KernelArgs {
    fn requests(&self) -> Result<Vec<KernelRequest>, Error> {
        if let Some(l) = self.lambda {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::config(format!("--lambda must be positive, got {l}")));
            }
            if self.node_kernel == NodeKernelArg::Dirac || !self.kernel.contains(&KernelName::Gh) {
                return Err(Error::config("--lambda only applies to the gaussian and product node kernels"));
            }
        }
        if self.kernel.is_empty() {
            return Err(Error::config("no kernel given"));
        }
        let mut out = Vec::new();
        for k in &self.kernel {
            out.push(match k {
                KernelName::Gh => {
                    if self.s.is_empty() {
                        return Err(Error::config("empty --s list"));
                    }
                    KernelRequest::Gh {
                        s_grid: self.s.clone(),
                        node_kernel: self.node_kernel.into(),
                        lambda: self.lambda,
                    }
                }
                KernelName::Wl => {
                    if self.h == 0 {
                        return Err(Error::config("--h must be at least 1"));
                    }
                    KernelRequest::Wl { h: self.h }
                }
            });
        }
        Ok(out)
    }

    fn degree_order(&self) -> DegreeLabelOrder {
        if self.degree_labels_before_noise {
            DegreeLabelOrder::BeforeNoise
        } else {
            DegreeLabelOrder::AfterNoise
        }
    }
}

#[derive(Debug, Args)]
struct GramArgs {
    #[command(flatten)]
    data: DatasetArgs,
    #[command(flatten)]
    kernel: KernelArgs,
    /// Write unnormalized matrices.
    #[arg(long)]
    raw: bool,
    /// Fraction of added noise nodes.
    #[arg(long, default_value_t = 0.0)]
    noise_x: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct CvArgs {
    /// Repetitions of the outer cross-validation.
    #[arg(long, default_value_t = 10)]
    reps: usize,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long, default_value_t = 10)]
    inner_folds: usize,
    /// SVM c values (default: 1e-9, 1e-7, ..., 1e9).
    #[arg(long, value_delimiter = ',')]
    c_grid: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write wall-clock runtimes to timing.csv (not reproducible across runs).
    #[arg(long)]
    timing: bool,
}

impl CvArgs {
    fn protocol(&self) -> Result<CvProtocol, Error> {
        let c_grid = self.c_grid.clone().unwrap_or_else(default_c_grid);
        if c_grid.is_empty() || c_grid.iter().any(|c| !(*c > 0.0 && c.is_finite())) {
            return Err(Error::config("--c-grid values must be positive"));
        }
        if self.folds < 2 || self.inner_folds < 2 || self.reps == 0 {
            return Err(Error::config("need --folds, --inner-folds >= 2 and --reps >= 1"));
        }
        Ok(CvProtocol {
            outer_folds: self.folds,
            inner_folds: self.inner_folds,
            repetitions: self.reps,
            c_grid,
            seed: self.seed,
            ..CvProtocol::default()
        })
    }
}

#[derive(Debug, Args)]
struct ClassifyArgs {
    #[command(flatten)]
    data: DatasetArgs,
    #[command(flatten)]
    kernel: KernelArgs,
    #[command(flatten)]
    cv: CvArgs,
    /// Output directory for report.csv and report.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LabelPolicyArg {
    Uniform,
    CopyAttached,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    data: DatasetArgs,
    #[command(flatten)]
    kernel: KernelArgs,
    #[command(flatten)]
    cv: CvArgs,
    /// Noise levels.
    #[arg(long, value_delimiter = ',', default_values = ["0", "0.1", "0.2", "0.3", "0.4", "0.5"])]
    noise_x: Vec<f64>,
    /// Draw the noise once instead of once per repetition.
    #[arg(long)]
    fixed_noise: bool,
    /// Edges from each added node.
    #[arg(long, default_value_t = 1)]
    attach_edges: usize,
    #[arg(long, value_enum, default_value = "uniform")]
    label_policy: LabelPolicyArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct PathsArgs {
    /// Edge list: `u v [length]` per line.
    graph: PathBuf,
    /// Name of the root node.
    #[arg(long)]
    root: String,
    #[arg(long, default_value_t = 0)]
    s: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_PATHS)]
    max_paths: usize,
    /// Print the DAG edges instead of the paths.
    #[arg(long)]
    dag: bool,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn create_dir(dir: &Path) -> Result<(), Error> {
    fs::create_dir_all(dir).map_err(Error::io(dir))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Error> {
    fs::write(path, contents).map_err(Error::io(path))
}

fn run_info(args: &InfoArgs) -> Result<(), Error> {
    let info = DatasetInfo::of(&args.data.load()?);
    print!("{}", info.table());
    if let Some(dir) = &args.out {
        create_dir(dir)?;
        write_file(&dir.join("info.json"), &(serde_json::to_string_pretty(&info).expect("serializes") + "\n"))?;
    }
    Ok(())
}

fn run_gram(args: &GramArgs) -> Result<(), Error> {
    let raw = args.data.load()?;
    let mut cfg = ExperimentConfig::new(args.kernel.requests()?, CvProtocol::default());
    cfg.degree_labels = args.kernel.degree_order();
    let ds = prepare_dataset(&raw, args.noise_x, args.seed, &cfg)?;
    create_dir(&args.out)?;
    for request in &cfg.kernels {
        let grams = if args.raw {
            request.choices(&ds)?.iter().map(|c| Ok((c.param(), gram(&ds, c)?))).collect::<Result<Vec<_>, Error>>()?
        } else {
            normalized_grams(&ds, request)?.into_iter().collect()
        };
        for (param, m) in grams {
            let file = match request {
                KernelRequest::Gh { .. } => format!("gram_gh_s{param}.csv"),
                KernelRequest::Wl { .. } => format!("gram_wl_h{param}.csv"),
            };
            let path = args.out.join(file);
            m.write(&path)?;
            log::info!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn write_report(report: &ExperimentReport, out: &Path, timing: bool) -> Result<(), Error> {
    create_dir(out)?;
    write_file(&out.join("report.csv"), &report.to_csv())?;
    write_file(&out.join("report.json"), &report.to_json())?;
    if timing {
        write_file(&out.join("timing.csv"), &report.timing_csv())?;
    }
    for r in &report.results {
        println!("{} {} x={}: {:.4} +- {:.4}", r.kernel, r.param, r.x, r.report.mean, r.report.std);
        log::info!("{} {} x={}: {:.1} s", r.kernel, r.param, r.x, r.runtime_seconds);
        if r.report.nonconverged_fits > 0 {
            log::warn!("{} {}: {} SVM fits hit the iteration cap", r.kernel, r.param, r.report.nonconverged_fits);
        }
    }
    Ok(())
}

fn run_classify(args: &ClassifyArgs) -> Result<(), Error> {
    let raw = args.data.load()?;
    let mut cfg = ExperimentConfig::new(args.kernel.requests()?, args.cv.protocol()?);
    cfg.degree_labels = args.kernel.degree_order();
    write_report(&noise_sweep(&raw, &cfg, &[0.0])?, &args.out, args.cv.timing)
}

fn run_sweep(args: &SweepArgs) -> Result<(), Error> {
    if args.noise_x.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::config("noise levels must be finite and non-negative"));
    }
    if args.attach_edges == 0 {
        return Err(Error::config("--attach-edges must be at least 1"));
    }
    let raw = args.data.load()?;
    let mut cfg = ExperimentConfig::new(args.kernel.requests()?, args.cv.protocol()?);
    cfg.degree_labels = args.kernel.degree_order();
    cfg.attach_edges = args.attach_edges;
    cfg.redraw_noise = !args.fixed_noise;
    cfg.label_policy = match args.label_policy {
        LabelPolicyArg::Uniform => LabelPolicy::UniformAlphabet,
        LabelPolicyArg::CopyAttached => LabelPolicy::CopyAttached,
    };
    write_report(&noise_sweep(&raw, &cfg, &args.noise_x)?, &args.out, args.cv.timing)
}

fn run_paths(args: &PathsArgs) -> Result<(), Error> {
    let named = read_edge_list(&args.graph)?;
    let root = named.node(&args.root).ok_or_else(|| Error::config(format!("unknown root node {:?}", args.root)))?;
    let dag = extend_gappy(&build_spdag(&named.graph, root)?, args.s)?;
    let text = if args.dag {
        dag.to_debug_text(Some(&named.names))
    } else {
        let mut lines: Vec<String> = dag
            .enumerate_paths(args.max_paths)?
            .iter()
            .map(|p| format!("[{}]", p.iter().map(|&v| named.names[v].as_str()).collect::<Vec<_>>().join(",")))
            .collect();
        lines.sort();
        lines.into_iter().map(|l| l + "\n").collect()
    };
    match &args.out {
        Some(path) => write_file(path, &text),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(Error::io(Path::new("<stdout>"))),
    }
}

fn dispatch(cli: &Cli) -> Result<(), Error> {
    match &cli.command {
        Command::Info(a) => run_info(a),
        Command::Gram(a) => run_gram(a),
        Command::Classify(a) => run_classify(a),
        Command::NoiseSweep(a) => run_sweep(a),
        Command::Paths(a) => run_paths(a),
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::Config as i32 } else { ExitCode::Ok as i32 };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();

    let result = match cli.threads {
        Some(0) => Err(Error::config("--threads must be at least 1")),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(&cli)),
            Err(e) => Err(Error::config(format!("cannot start thread pool: {e}"))),
        },
        None => dispatch(&cli),
    };
    match result {
        Ok(()) => ExitCode::Ok as i32,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code() as i32
        }
    }
}

pub fn main() -> i32 {
    run_with_args(std::env::args_os())
}
