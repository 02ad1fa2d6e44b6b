mod common;

use graphkern::gram::{check_psd, gram, is_psd, normalize, GramMatrix, KernelChoice};
use graphkern::svm::{solve_binary, SvmParams};
use graphkern::NodeKernel;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn dual_objective(q: &[f64], alpha: &[f64]) -> f64 {
    let l = alpha.len();
    let mut quad = 0.0;
    for i in 0..l {
        for j in 0..l {
            quad += alpha[i] * q[i * l + j] * alpha[j];
        }
    }
    0.5 * quad - alpha.iter().sum::<f64>()
}

/// Euclidean projection onto `{0 <= a <= c, y'a = 0}` by bisection on the multiplier.
fn project(v: &[f64], y: &[f64], c: f64) -> Vec<f64> {
    let at = |mu: f64| -> Vec<f64> { v.iter().zip(y).map(|(&vi, &yi)| (vi - mu * yi).clamp(0.0, c)).collect() };
    let balance = |a: &[f64]| a.iter().zip(y).map(|(ai, yi)| ai * yi).sum::<f64>();
    let (mut lo, mut hi) = (-1e6, 1e6);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        // balance is non-increasing in mu
        if balance(&at(mid)) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi))
}

/// Accelerated projected gradient on the SVM dual.
fn dual_by_projected_gradient(q: &[f64], y: &[f64], c: f64) -> f64 {
    let l = y.len();
    let lipschitz = (0..l).map(|i| (0..l).map(|j| q[i * l + j].abs()).sum::<f64>()).fold(0.0, f64::max);
    let step = 1.0 / lipschitz;
    let mut a = vec![0.0; l];
    let mut z = a.clone();
    let mut t = 1.0f64;
    for _ in 0..20_000 {
        let grad: Vec<f64> = (0..l).map(|i| (0..l).map(|j| q[i * l + j] * z[j]).sum::<f64>() - 1.0).collect();
        let next = project(&z.iter().zip(&grad).map(|(zi, gi)| zi - step * gi).collect::<Vec<_>>(), y, c);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        z = next.iter().zip(&a).map(|(n, o)| n + (t - 1.0) / t_next * (n - o)).collect();
        a = next;
        t = t_next;
    }
    dual_objective(q, &a)
}

#[test]
fn smo_reaches_the_dual_optimum_on_mutag() {
    let ds = common::mutag_head(50);
    let k = normalize(&gram(&ds, &KernelChoice::Gh { s: 1, node_kernel: NodeKernel::Dirac }).unwrap()).unwrap();
    let y: Vec<f64> = ds.class_labels().iter().map(|&c| if c > 0 { 1.0 } else { -1.0 }).collect();
    let l = y.len();
    let kernel: Vec<f64> = (0..l).flat_map(|i| k.row(i).to_vec()).collect();
    for c in [0.1, 1.0, 10.0] {
        let params = SvmParams::with_c(c);
        let sol = solve_binary(&kernel, &y, &params);
        assert!(sol.converged);
        let q: Vec<f64> = (0..l * l)
            .map(|ij| {
                let (i, j) = (ij / l, ij % l);
                y[i] * y[j] * (kernel[ij] + if i == j { params.jitter } else { 0.0 })
            })
            .collect();
        let smo = dual_objective(&q, &sol.alpha);
        let oracle = dual_by_projected_gradient(&q, &y, c);
        assert!((smo - oracle).abs() <= 1e-3 * oracle.abs(), "c={c}: smo {smo} vs oracle {oracle}");
        assert!((smo - sol.objective).abs() <= 1e-9 * smo.abs().max(1.0));
    }
}

#[test]
fn gram_follows_dataset_permutation() {
    let ds = common::mutag_head(30);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let perm = common::permutation(ds.len(), &mut rng);
    let shuffled = ds.select(&perm);
    for choice in [KernelChoice::Gh { s: 2, node_kernel: NodeKernel::Dirac }, KernelChoice::Wl { h: 3 }] {
        let a = gram(&ds, &choice).unwrap();
        let b = gram(&shuffled, &choice).unwrap();
        for i in 0..ds.len() {
            for j in 0..ds.len() {
                assert_eq!(b.get(i, j), a.get(perm[i], perm[j]));
            }
        }
    }
}

#[test]
fn csv_round_trip_is_exact() {
    let ds = common::mutag_head(12);
    let k = normalize(&gram(&ds, &KernelChoice::Gh { s: 1, node_kernel: NodeKernel::Dirac }).unwrap()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k.csv");
    k.write(&path).unwrap();
    let back = GramMatrix::read(&path).unwrap();
    assert_eq!(back, k);
    assert!(back.is_normalized());
    assert_eq!(back.provenance().unwrap().dataset.source, "MUTAG");
}

#[test]
fn wl_gram_is_psd() {
    let ds = common::mutag_head(40);
    for h in [1, 3, 5] {
        let k = gram(&ds, &KernelChoice::Wl { h }).unwrap();
        let ev = check_psd(&k).unwrap();
        assert!(is_psd(&k, ev), "h={h}: {ev}");
    }
}
