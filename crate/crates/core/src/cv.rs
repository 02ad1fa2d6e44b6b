//! Stratified, repeated, nested cross-validation over precomputed Grams.
//!
//! Every repetition splits the data into stratified outer folds. For each
//! outer fold, an inner stratified split of the training part scores every
//! `(param, c)` pair; the best pair (highest mean inner accuracy, ties to the
//! smaller param and then the smaller c) is refit on the whole training part
//! and scored on the held-out fold.
//!
//! Shuffles use ChaCha8 seeded by [`derive_seed`] from the protocol seed and
//! the repetition / fold indices, so each repetition can be run alone and
//! reproduces the same folds.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::gram::GramMatrix;
use crate::svm::{svm_predict, svm_train, SvmError, SvmParams};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CvError {
    #[error("no Gram matrices given")]
    NoGrams,
    #[error("Gram for param {param} has size {size}, expected {expected}")]
    SizeMismatch { param: usize, size: usize, expected: usize },
    #[error("c grid is empty")]
    EmptyGrid,
    #[error("fold counts must be at least 2")]
    BadFolds,
    #[error("{samples} samples cannot be split into {folds} folds")]
    TooFewSamples { samples: usize, folds: usize },
    #[error("repetition {rep}, outer fold {fold}: class {class} is absent from the training part")]
    DegenerateFold { rep: usize, fold: usize, class: i64 },
    #[error(transparent)]
    Svm(#[from] SvmError),
}

/// The c values `10^-9, 10^-7, ..., 10^9`.
pub fn default_c_grid() -> Vec<f64> {
    (-9..=9).step_by(2).map(|e| 10f64.powi(e)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvProtocol {
    pub outer_folds: usize,
    pub inner_folds: usize,
    pub repetitions: usize,
    pub c_grid: Vec<f64>,
    pub seed: u64,
    pub svm: SvmParams,
}

impl Default for CvProtocol {
    fn default() -> Self {
        CvProtocol {
            outer_folds: 10,
            inner_folds: 10,
            repetitions: 10,
            c_grid: default_c_grid(),
            seed: 0,
            svm: SvmParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub param: usize,
    pub c: f64,
    pub inner_accuracy: f64,
    pub accuracy: f64,
    pub test_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepetitionResult {
    pub repetition: usize,
    /// Mean of the outer-fold accuracies.
    pub accuracy: f64,
    /// Population standard deviation of the outer-fold accuracies.
    pub fold_std: f64,
    pub folds: Vec<FoldResult>,
    pub nonconverged_fits: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    /// Mean over repetitions of the repetition accuracies.
    pub mean: f64,
    /// Population standard deviation of the repetition accuracies.
    pub std: f64,
    pub repetitions: Vec<RepetitionResult>,
    pub nonconverged_fits: usize,
}

impl CvReport {
    pub fn from_repetitions(repetitions: Vec<RepetitionResult>) -> CvReport {
        let accs: Vec<f64> = repetitions.iter().map(|r| r.accuracy).collect();
        let (mean, std) = mean_std(&accs);
        let nonconverged_fits = repetitions.iter().map(|r| r.nonconverged_fits).sum();
        CvReport { mean, std, repetitions, nonconverged_fits }
    }
}

pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// SplitMix64 chain over `parts`, mixed into `seed`.
pub fn derive_seed(seed: u64, parts: &[u64]) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    parts.iter().fold(mix(seed), |acc, &p| mix(acc ^ mix(p)))
}

/// Splits `items` into `k` folds, dealing each class's shuffled members
/// round-robin so class proportions stay balanced. Folds are sorted.
pub fn stratified_folds(items: &[usize], labels: &[i64], k: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut by_class: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for &i in items {
        by_class.entry(labels[i]).or_default().push(i);
    }
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for members in by_class.values_mut() {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            folds[next % k].push(i);
            next += 1;
        }
    }
    for f in folds.iter_mut() {
        f.sort_unstable();
    }
    folds
}

fn complement(items: &[usize], fold: &[usize]) -> Vec<usize> {
    items.iter().copied().filter(|i| fold.binary_search(i).is_err()).collect()
}

fn accuracy(
    gram: &GramMatrix,
    labels: &[i64],
    train: &[usize],
    test: &[usize],
    svm: &SvmParams,
) -> Result<(f64, usize), CvError> {
    let y: Vec<i64> = train.iter().map(|&i| labels[i]).collect();
    let model = svm_train(gram, train, &y, svm)?;
    let pred = svm_predict(&model, gram, test);
    let hits = pred.iter().zip(test).filter(|(p, &t)| **p == labels[t]).count();
    Ok((hits as f64 / test.len() as f64, model.nonconverged))
}

fn validate(grams: &BTreeMap<usize, GramMatrix>, labels: &[i64], protocol: &CvProtocol) -> Result<(), CvError> {
    if grams.is_empty() {
        return Err(CvError::NoGrams);
    }
    for (&param, g) in grams {
        if g.size() != labels.len() {
            return Err(CvError::SizeMismatch { param, size: g.size(), expected: labels.len() });
        }
    }
    if protocol.c_grid.is_empty() {
        return Err(CvError::EmptyGrid);
    }
    if protocol.outer_folds < 2 || protocol.inner_folds < 2 {
        return Err(CvError::BadFolds);
    }
    if labels.len() < protocol.outer_folds {
        return Err(CvError::TooFewSamples { samples: labels.len(), folds: protocol.outer_folds });
    }
    Ok(())
}

/// Runs one repetition of the protocol. `nested_cv` is the sum of these.
pub fn run_repetition(
    grams: &BTreeMap<usize, GramMatrix>,
    labels: &[i64],
    protocol: &CvProtocol,
    rep: usize,
) -> Result<RepetitionResult, CvError> {
    validate(grams, labels, protocol)?;
    let all: Vec<usize> = (0..labels.len()).collect();
    let classes: BTreeSet<i64> = labels.iter().copied().collect();
    let outer = stratified_folds(&all, labels, protocol.outer_folds, derive_seed(protocol.seed, &[rep as u64]));

    let folds = outer
        .par_iter()
        .enumerate()
        .filter(|(_, test)| !test.is_empty())
        .map(|(f, test)| {
            let train = complement(&all, test);
            let present: BTreeSet<i64> = train.iter().map(|&i| labels[i]).collect();
            if let Some(&class) = classes.difference(&present).next() {
                return Err(CvError::DegenerateFold { rep, fold: f, class });
            }
            let inner_seed = derive_seed(protocol.seed, &[rep as u64, f as u64]);
            let inner = stratified_folds(&train, labels, protocol.inner_folds, inner_seed);

            let combos: Vec<(usize, f64)> =
                grams.keys().flat_map(|&p| protocol.c_grid.iter().map(move |&c| (p, c))).collect();
            let scored = combos
                .par_iter()
                .map(|&(p, c)| {
                    let svm = SvmParams { c, ..protocol.svm };
                    let mut accs = Vec::new();
                    let mut nonconverged = 0;
                    for itest in inner.iter().filter(|t| !t.is_empty()) {
                        let itrain = complement(&train, itest);
                        let (a, nc) = accuracy(&grams[&p], labels, &itrain, itest, &svm)?;
                        accs.push(a);
                        nonconverged += nc;
                    }
                    Ok((mean_std(&accs).0, nonconverged))
                })
                .collect::<Result<Vec<_>, CvError>>()?;

            // combos are ordered by (param, c) ascending; strict > keeps the simplest on ties
            let mut best = 0;
            for (i, (acc, _)) in scored.iter().enumerate() {
                if *acc > scored[best].0 {
                    best = i;
                }
            }
            let (param, c) = combos[best];
            let svm = SvmParams { c, ..protocol.svm };
            let (acc, nc) = accuracy(&grams[&param], labels, &train, test, &svm)?;
            let nonconverged = nc + scored.iter().map(|s| s.1).sum::<usize>();
            Ok((
                FoldResult { fold: f, param, c, inner_accuracy: scored[best].0, accuracy: acc, test_size: test.len() },
                nonconverged,
            ))
        })
        .collect::<Result<Vec<_>, CvError>>()?;

    let accs: Vec<f64> = folds.iter().map(|(f, _)| f.accuracy).collect();
    let (accuracy, fold_std) = mean_std(&accs);
    let nonconverged_fits = folds.iter().map(|(_, n)| n).sum();
    Ok(RepetitionResult {
        repetition: rep,
        accuracy,
        fold_std,
        folds: folds.into_iter().map(|(f, _)| f).collect(),
        nonconverged_fits,
    })
}

/// Repeated nested cross-validation; Grams are keyed by the swept parameter.
pub fn nested_cv(
    grams: &BTreeMap<usize, GramMatrix>,
    labels: &[i64],
    protocol: &CvProtocol,
) -> Result<CvReport, CvError> {
    validate(grams, labels, protocol)?;
    let reps = (0..protocol.repetitions)
        .into_par_iter()
        .map(|rep| run_repetition(grams, labels, protocol, rep))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CvReport::from_repetitions(reps))
}
