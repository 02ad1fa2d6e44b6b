//! Acceptance suite: one PASS / FAIL / BLOCKED line per criterion.
//!
//! BLOCKED means the criterion could not be evaluated in this environment
//! (input data absent); it is never counted as a pass.

mod common;

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use common::{rel_diff, RandomGraphs};
use graphkern::cv::{nested_cv, CvProtocol};
use graphkern::data::{load_tu_dataset, DATA_DIR_ENV};
use graphkern::experiment::{normalized_grams, DatasetInfo, KernelRequest, NodeKernelKind};
use graphkern::gram::{check_psd, gram, normalize, KernelChoice};
use graphkern::kernels::{gapfree_hop_counts, graphhopper_gapfree, hop_count_matrices};
use graphkern::spdag::{build_spdag, extend_gappy, DEFAULT_MAX_PATHS};
use graphkern::{graphhopper_kernel, kernel_bruteforce, Graph, NodeKernel};

const PATHS_TIME: Duration = Duration::from_millis(1);
const ORACLE_GRAPHS: usize = 200;
const ORACLE_REL_TOL: f64 = 1e-9;
const ORACLE_TIME: Duration = Duration::from_secs(60);
const REDUCTION_GRAPHS: usize = 50;
const GRAM_GRAPHS: usize = 50;
const SYMMETRY_TOL: f64 = 1e-12;
const DIAGONAL_TOL: f64 = 1e-12;
const PSD_REL_TOL: f64 = 1e-8;
const GRAM_TIME: Duration = Duration::from_secs(120);
const MUTAG_NODES: f64 = 17.9;
const MUTAG_EDGES: f64 = 19.8;
const LETTER_LOW_EDGES: f64 = 3.1;
const STATS_TOL: f64 = 0.05;
const MAJORITY_BASELINE: f64 = 0.665;
const MARGIN: f64 = 0.10;
const CLASSIFY_REPS: usize = 3;
const CLASSIFY_TIME: Duration = Duration::from_secs(15 * 60);
const MONOTONE_GRAPHS: usize = 50;
const OVERHEAD_GRAPHS: usize = 50;
const OVERHEAD_RATIO: f64 = 25.0;

enum Outcome {
    Pass(String),
    Fail(String),
    Blocked(String),
}

use Outcome::{Blocked, Fail, Pass};

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Pass(detail)
    } else {
        Fail(detail)
    }
}

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_graphkern"));
    c.env("GRAPHKERN_DATA_DIR", common::data_dir());
    c
}

fn run(mut c: Command) -> Result<Output, String> {
    let out = c.output().map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(out)
    } else {
        Err(format!("exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)))
    }
}

fn names(paths: &[Vec<usize>]) -> BTreeSet<String> {
    paths.iter().map(|p| p.iter().map(|&v| (b'a' + v as u8) as char).collect()).collect()
}

fn c1_chain_paths() -> Outcome {
    let g = common::chain();
    let expected: [&[&str]; 3] = [
        &["a", "ab", "abc", "abcd"],
        &["a", "ab", "abc", "abcd", "ac", "abd", "acd"],
        &["a", "ab", "abc", "abcd", "ac", "abd", "acd", "ad"],
    ];
    let mut details = Vec::new();
    let mut ok = true;
    for (s, want) in expected.iter().enumerate() {
        let start = Instant::now();
        let paths = extend_gappy(&build_spdag(&g, 0).unwrap(), s).unwrap().enumerate_paths(DEFAULT_MAX_PATHS).unwrap();
        let took = start.elapsed();
        let got = names(&paths);
        let want: BTreeSet<String> = want.iter().map(|s| s.to_string()).collect();
        ok &= got == want && paths.len() == want.len() && took < PATHS_TIME;
        details.push(format!("s={s}: {} paths in {:.1?}", paths.len(), took));
    }
    check(ok, details.join(", "))
}

fn c2_oracle() -> Outcome {
    let start = Instant::now();
    let graphs = RandomGraphs::default().many(ORACLE_GRAPHS, 2024);
    let kernels = [NodeKernel::Dirac, NodeKernel::Gaussian { lambda: 0.5 }, NodeKernel::Product { lambda: 0.5 }];
    let (mut checks, mut worst, mut dirac_mismatch) = (0usize, 0.0f64, 0usize);
    for i in 0..graphs.len() {
        let (a, b) = (&graphs[i], &graphs[(i + 1) % graphs.len()]);
        for s in 0..=3 {
            for nk in &kernels {
                let fast = graphhopper_kernel(a, b, s, nk).unwrap();
                let slow = kernel_bruteforce(a, b, s, nk, DEFAULT_MAX_PATHS).unwrap();
                checks += 1;
                if matches!(nk, NodeKernel::Dirac) {
                    dirac_mismatch += usize::from(fast != slow);
                } else {
                    worst = worst.max(rel_diff(fast, slow));
                }
            }
        }
    }
    let took = start.elapsed();
    check(
        dirac_mismatch == 0 && worst <= ORACLE_REL_TOL && took < ORACLE_TIME,
        format!(
            "{} graphs, {checks} comparisons, dirac mismatches {dirac_mismatch}, max rel err {worst:.1e}, {took:.1?}",
            graphs.len()
        ),
    )
}

fn c3_gapfree_reduction() -> Outcome {
    let graphs = RandomGraphs { unit_lengths: false, ..Default::default() }.many(REDUCTION_GRAPHS, 77);
    let kernels = [NodeKernel::Dirac, NodeKernel::Gaussian { lambda: 0.5 }, NodeKernel::Product { lambda: 0.5 }];
    let mut differing = 0;
    let mut checks = 0;
    for (i, a) in graphs.iter().enumerate() {
        let (m, f) = (hop_count_matrices(a, 0).unwrap(), gapfree_hop_counts(a).unwrap());
        differing += usize::from(m != f);
        for b in &graphs[i..] {
            for nk in &kernels {
                let x = graphhopper_kernel(a, b, 0, nk).unwrap();
                let y = graphhopper_gapfree(a, b, nk).unwrap();
                differing += usize::from(x.to_bits() != y.to_bits());
                checks += 1;
            }
        }
    }
    check(
        differing == 0,
        format!("{} graphs, {checks} kernel values + hop-count matrices, {differing} differ", graphs.len()),
    )
}

fn c4_gram_validity() -> Outcome {
    let start = Instant::now();
    let ds = common::mutag_head(GRAM_GRAPHS);
    let mut choices: Vec<KernelChoice> =
        (0..=2).map(|s| KernelChoice::Gh { s, node_kernel: NodeKernel::Dirac }).collect();
    choices.push(KernelChoice::Wl { h: 5 });
    let mut ok = true;
    let mut details = Vec::new();
    for choice in &choices {
        let k = match gram(&ds, choice).and_then(|m| normalize(&m)) {
            Ok(k) => k,
            Err(e) => return Fail(format!("{choice:?}: {e}")),
        };
        let (_, _, asym) = k.asymmetry();
        let diag = (0..k.size()).map(|i| (k.get(i, i) - 1.0).abs()).fold(0.0, f64::max);
        let ev = check_psd(&k).unwrap();
        let floor = -PSD_REL_TOL * k.max_abs();
        ok &= asym <= SYMMETRY_TOL && diag <= DIAGONAL_TOL && ev >= floor;
        details.push(format!("{}{}: asym {asym:.0e} diag {diag:.0e} min-ev {ev:.2e}", choice.name(), choice.param()));
    }
    let took = start.elapsed();
    ok &= took < GRAM_TIME;
    details.push(format!("{took:.1?}"));
    check(ok, details.join("; "))
}

fn c5_dataset_stats() -> Vec<(String, Outcome)> {
    let mut out = Vec::new();
    let dir = tempfile::tempdir().unwrap();
    let mutag = run({
        let mut c = bin();
        c.args(["info", "--dataset"]).arg(common::data_dir()).args(["--name", "MUTAG", "--out"]).arg(dir.path());
        c
    })
    .and_then(|_| fs::read_to_string(dir.path().join("info.json")).map_err(|e| e.to_string()))
    .and_then(|json| serde_json::from_str::<DatasetInfo>(&json).map_err(|e| e.to_string()));
    out.push((
        "MUTAG".to_string(),
        match mutag {
            Ok(info) => check(
                (info.mean_nodes - MUTAG_NODES).abs() <= STATS_TOL
                    && (info.mean_edges - MUTAG_EDGES).abs() <= STATS_TOL,
                format!("mean |V| {:.3}, mean |E| {:.3}", info.mean_nodes, info.mean_edges),
            ),
            Err(e) => Fail(e),
        },
    ));
    let letter = match std::env::var_os(DATA_DIR_ENV) {
        None => Blocked(format!("Letter-low is not vendored; set {DATA_DIR_ENV} to a directory containing it")),
        Some(dir) => match load_tu_dataset(Path::new(&dir), "Letter-low") {
            Ok(ds) => {
                let info = DatasetInfo::of(&ds);
                check(
                    (info.mean_edges - LETTER_LOW_EDGES).abs() <= STATS_TOL,
                    format!("mean |E| {:.3}", info.mean_edges),
                )
            }
            Err(e) => Blocked(format!("Letter-low not loadable from {}: {e}", Path::new(&dir).display())),
        },
    };
    out.push(("Letter-low".to_string(), letter));
    out
}

const SMALL_CV: [&str; 10] =
    ["--reps", "2", "--folds", "3", "--inner-folds", "3", "--c-grid", "0.01,1,100", "--seed", "3"];

fn c6_noise_identity() -> Outcome {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let classify = run({
        let mut c = bin();
        c.args(["classify", "--name", "MUTAG", "--kernel", "gh,wl", "--s", "0,1"])
            .args(SMALL_CV)
            .arg("--out")
            .arg(a.path());
        c
    });
    let sweep = run({
        let mut c = bin();
        c.args(["noise-sweep", "--name", "MUTAG", "--kernel", "gh,wl", "--s", "0,1", "--noise-x", "0"])
            .args(SMALL_CV)
            .arg("--out")
            .arg(b.path());
        c
    });
    if let Err(e) = classify.and(sweep) {
        return Fail(e);
    }
    let same = ["report.csv", "report.json"]
        .iter()
        .all(|f| fs::read(a.path().join(f)).ok() == fs::read(b.path().join(f)).ok());
    let rows = fs::read_to_string(a.path().join("report.csv")).unwrap_or_default().lines().count() - 1;
    check(same, format!("report.csv and report.json byte-identical ({rows} rows)"))
}

fn c7_mutag_accuracy() -> Outcome {
    let start = Instant::now();
    let ds = common::mutag();
    let request = KernelRequest::Gh { s_grid: vec![0, 1, 2], node_kernel: NodeKernelKind::Auto, lambda: None };
    let grams = match normalized_grams(&ds, &request) {
        Ok(g) => g,
        Err(e) => return Fail(e.to_string()),
    };
    let protocol = CvProtocol { repetitions: CLASSIFY_REPS, ..CvProtocol::default() };
    let report = match nested_cv(&grams, ds.class_labels(), &protocol) {
        Ok(r) => r,
        Err(e) => return Fail(e.to_string()),
    };
    let took = start.elapsed();
    let majority = {
        let pos = ds.class_labels().iter().filter(|&&c| c == 1).count() as f64 / ds.len() as f64;
        pos.max(1.0 - pos)
    };
    let threshold = MAJORITY_BASELINE + MARGIN;
    check(
        report.mean >= threshold && took < CLASSIFY_TIME,
        format!(
            "mean accuracy {:.4} +- {:.4} over {} reps (threshold {threshold:.3}, majority class {majority:.3}), {} capped fits, {took:.0?}",
            report.mean,
            report.std,
            report.repetitions.len(),
            report.nonconverged_fits
        ),
    )
}

fn c8_monotone_in_s() -> Outcome {
    let gen = RandomGraphs { max_nodes: 9, alphabet: 1, attribute_dim: 0, ..Default::default() };
    let graphs: Vec<Graph> = gen.many(MONOTONE_GRAPHS, 8);
    let mut violations = 0;
    let mut pairs = 0;
    for (i, a) in graphs.iter().enumerate() {
        for b in &graphs[i..] {
            let ks: Vec<f64> = (0..=3).map(|s| graphhopper_kernel(a, b, s, &NodeKernel::Dirac).unwrap()).collect();
            violations += ks.windows(2).filter(|w| w[1] < w[0]).count();
            pairs += 1;
        }
    }
    check(violations == 0, format!("{} graphs, {pairs} pairs, {violations} decreases", graphs.len()))
}

fn dir_contents(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn c9_determinism() -> Outcome {
    let edges = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/chain.edges");
    let commands: Vec<(&str, Vec<String>)> = vec![
        ("info", vec!["info".into(), "--name".into(), "MUTAG".into()]),
        ("gram", ["gram", "--name", "MUTAG", "--kernel", "gh,wl", "--s", "0,1,2"].map(String::from).to_vec()),
        (
            "classify",
            ["classify", "--name", "MUTAG", "--kernel", "gh,wl", "--s", "0,1"]
                .iter()
                .chain(SMALL_CV.iter())
                .map(|s| s.to_string())
                .collect(),
        ),
        (
            "noise-sweep",
            ["noise-sweep", "--name", "MUTAG", "--kernel", "wl", "--noise-x", "0,0.2,0.4"]
                .iter()
                .chain(SMALL_CV.iter())
                .map(|s| s.to_string())
                .collect(),
        ),
        (
            "paths",
            vec!["paths".into(), edges.display().to_string(), "--root".into(), "a".into(), "--s".into(), "2".into()],
        ),
    ];
    let mut details = Vec::new();
    let mut ok = true;
    for (name, args) in commands {
        let mut outputs = Vec::new();
        for threads in ["1", "4"] {
            let dir = tempfile::tempdir().unwrap();
            let file = dir.path().join("stdout.txt");
            let mut c = bin();
            c.args(&args).args(["--threads", threads]);
            match name {
                "paths" => c.arg("--out").arg(&file),
                _ => c.arg("--out").arg(dir.path()),
            };
            match run(c) {
                Ok(o) => outputs.push((dir_contents(dir.path()), o.stdout)),
                Err(e) => return Fail(format!("{name}: {e}")),
            }
        }
        let same = outputs[0] == outputs[1];
        ok &= same;
        details.push(format!("{name} {} ({} files)", if same { "identical" } else { "DIFFERS" }, outputs[0].0.len()));
    }
    check(ok, details.join(", "))
}

fn min_time(mut f: impl FnMut(), runs: usize) -> Duration {
    (0..runs)
        .map(|_| {
            let t = Instant::now();
            f();
            t.elapsed()
        })
        .min()
        .unwrap()
}

fn c10_gap_overhead() -> Outcome {
    let ds = common::mutag_head(OVERHEAD_GRAPHS);
    let time = |s| {
        min_time(
            || {
                gram(&ds, &KernelChoice::Gh { s, node_kernel: NodeKernel::Dirac }).unwrap();
            },
            5,
        )
    };
    let (t0, t2) = (time(0), time(2));
    let ratio = t2.as_secs_f64() / t0.as_secs_f64();
    check(ratio <= OVERHEAD_RATIO, format!("s=0 {t0:.2?}, s=2 {t2:.2?}, ratio {ratio:.2}"))
}

fn main() {
    let filter: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let mut results: Vec<(String, Outcome)> = Vec::new();
    let mut section = |id: &str, title: &str, f: &dyn Fn() -> Vec<(String, Outcome)>| {
        if filter.as_deref().is_some_and(|p| !id.contains(p) && !title.contains(p)) {
            return;
        }
        for (sub, outcome) in f() {
            let label = if sub.is_empty() { format!("{id} {title}") } else { format!("{id} {title} [{sub}]") };
            results.push((label, outcome));
        }
    };
    let one = |f: fn() -> Outcome| move || vec![(String::new(), f())];
    section("c01", "rooted paths of the chain example", &one(c1_chain_paths));
    section("c02", "graphhopper_kernel equals the brute-force oracle", &one(c2_oracle));
    section("c03", "s=0 equals the gap-free kernel bit for bit", &one(c3_gapfree_reduction));
    section("c04", "normalized Gram validity on MUTAG", &one(c4_gram_validity));
    section("c05", "dataset statistics", &c5_dataset_stats);
    section("c06", "noise sweep at x=0 reproduces classify", &one(c6_noise_identity));
    section("c07", "MUTAG accuracy beats majority baseline", &one(c7_mutag_accuracy));
    section("c08", "kernel non-decreasing in s", &one(c8_monotone_in_s));
    section("c09", "CLI outputs independent of thread count", &one(c9_determinism));
    section("c10", "gappy Gram overhead", &one(c10_gap_overhead));

    let (mut failed, mut blocked) = (0, 0);
    for (label, outcome) in &results {
        let (tag, detail) = match outcome {
            Pass(d) => ("PASS", d),
            Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Blocked(d) => {
                blocked += 1;
                ("BLOCKED", d)
            }
        };
        println!("{tag:<7} {label}: {detail}");
    }
    println!(
        "\n{} checks: {} passed, {failed} failed, {blocked} blocked",
        results.len(),
        results.len() - failed - blocked
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
