//! C-SVC on a precomputed kernel.
//!
//! Binary problems are solved with SMO using second-order working-set
//! selection; multiclass problems are split one-vs-one and decided by
//! majority vote, ties going to the smaller class label.

use serde::{Deserialize, Serialize};

use crate::gram::GramMatrix;

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SvmError {
    #[error("no training samples")]
    EmptyTraining,
    #[error("c must be positive and finite, got {0}")]
    InvalidC(f64),
    #[error("{labels} labels for {samples} training samples")]
    LabelCount { samples: usize, labels: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    /// Stop once the maximal KKT violation drops below this.
    pub eps: f64,
    /// Added to the kernel diagonal of the training block.
    pub jitter: f64,
    /// Iteration cap per binary problem; `None` means `max(100_000, 100 * l)`.
    pub max_iter: Option<usize>,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams { c: 1.0, eps: 1e-3, jitter: 1e-8, max_iter: None }
    }
}

impl SvmParams {
    pub fn with_c(c: f64) -> Self {
        SvmParams { c, ..Self::default() }
    }
}

/// Solution of one binary dual problem.
#[derive(Debug, Clone)]
pub struct BinarySolution {
    pub alpha: Vec<f64>,
    pub rho: f64,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Solves `min 1/2 a'Qa - e'a` s.t. `0 <= a <= c`, `y'a = 0`, with
/// `Q[i][j] = y[i] y[j] K[i][j]`. `kernel` is row-major `l x l`.
pub fn solve_binary(kernel: &[f64], y: &[f64], params: &SvmParams) -> BinarySolution {
    let l = y.len();
    let c = params.c;
    let k = |i: usize, j: usize| kernel[i * l + j] + if i == j { params.jitter } else { 0.0 };
    let max_iter = params.max_iter.unwrap_or_else(|| (100 * l).max(100_000));

    let mut alpha = vec![0.0; l];
    let mut grad = vec![-1.0; l];
    let mut iterations = 0;
    let mut converged = false;

    let is_up = |a: f64, yt: f64| (yt > 0.0 && a < c) || (yt < 0.0 && a > 0.0);
    let is_low = |a: f64, yt: f64| (yt > 0.0 && a > 0.0) || (yt < 0.0 && a < c);

    while iterations < max_iter {
        // i maximises -y G over I_up
        let mut gmax = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..l {
            if is_up(alpha[t], y[t]) {
                let v = -y[t] * grad[t];
                if v > gmax {
                    gmax = v;
                    i = t;
                }
            }
        }
        // j minimises the second-order decrease over I_low
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut best = f64::INFINITY;
        for t in 0..l {
            if !is_low(alpha[t], y[t]) {
                continue;
            }
            let v = y[t] * grad[t];
            gmax2 = gmax2.max(v);
            if i == usize::MAX {
                continue;
            }
            let b = gmax + v;
            if b > 0.0 {
                let mut quad = k(i, i) + k(t, t) - 2.0 * k(i, t);
                if quad <= 0.0 {
                    quad = TAU;
                }
                let obj = -(b * b) / quad;
                if obj < best {
                    best = obj;
                    j = t;
                }
            }
        }
        if i == usize::MAX || j == usize::MAX || gmax + gmax2 < params.eps {
            converged = true;
            break;
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let mut quad = k(i, i) + k(j, j) - 2.0 * k(i, j);
        if quad <= 0.0 {
            quad = TAU;
        }
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..l {
            grad[t] += y[t] * (y[i] * k(t, i) * di + y[j] * k(t, j) * dj);
        }
    }

    // bias from free variables, or the midpoint of the feasible interval
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free, mut sum_free) = (0usize, 0.0);
    for t in 0..l {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            sum_free += yg;
        }
    }
    let rho = if free > 0 { sum_free / free as f64 } else { (ub + lb) / 2.0 };
    let objective = alpha.iter().zip(&grad).map(|(a, g)| a * (g - 1.0)).sum::<f64>() / 2.0;

    BinarySolution { alpha, rho, objective, iterations, converged }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PairModel {
    positive: i64,
    negative: i64,
    /// Gram indices of support vectors with coefficients `y * alpha`.
    support: Vec<usize>,
    coef: Vec<f64>,
    rho: f64,
}

/// Trained one-vs-one classifier referring to rows of a Gram matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SvmModel {
    classes: Vec<i64>,
    pairs: Vec<PairModel>,
    /// Binary problems that hit the iteration cap.
    pub nonconverged: usize,
}

impl SvmModel {
    pub fn classes(&self) -> &[i64] {
        &self.classes
    }
}

/// Trains on the Gram rows `train` with class labels `labels` (parallel to `train`).
pub fn svm_train(gram: &GramMatrix, train: &[usize], labels: &[i64], params: &SvmParams) -> Result<SvmModel, SvmError> {
    if train.is_empty() {
        return Err(SvmError::EmptyTraining);
    }
    if labels.len() != train.len() {
        return Err(SvmError::LabelCount { samples: train.len(), labels: labels.len() });
    }
    if !(params.c > 0.0 && params.c.is_finite()) {
        return Err(SvmError::InvalidC(params.c));
    }
    let mut classes = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();

    let mut pairs = Vec::new();
    let mut nonconverged = 0;
    for (a, &pos) in classes.iter().enumerate() {
        for &neg in &classes[a + 1..] {
            let idx: Vec<usize> = (0..train.len()).filter(|&t| labels[t] == pos || labels[t] == neg).collect();
            let rows: Vec<usize> = idx.iter().map(|&t| train[t]).collect();
            let y: Vec<f64> = idx.iter().map(|&t| if labels[t] == pos { 1.0 } else { -1.0 }).collect();
            let l = rows.len();
            let mut kernel = Vec::with_capacity(l * l);
            for &r in &rows {
                kernel.extend(rows.iter().map(|&s| gram.get(r, s)));
            }
            let sol = solve_binary(&kernel, &y, params);
            if !sol.converged {
                nonconverged += 1;
                log::debug!(
                    "SMO hit the iteration cap ({} iterations) for classes {pos} vs {neg} with c = {}",
                    sol.iterations,
                    params.c
                );
            }
            let (support, coef) = rows
                .iter()
                .zip(y.iter().zip(&sol.alpha))
                .filter(|(_, (_, &a))| a > 0.0)
                .map(|(&r, (&yt, &a))| (r, yt * a))
                .unzip();
            pairs.push(PairModel { positive: pos, negative: neg, support, coef, rho: sol.rho });
        }
    }
    Ok(SvmModel { classes, pairs, nonconverged })
}

/// Predicts the class of every Gram row in `test`.
pub fn svm_predict(model: &SvmModel, gram: &GramMatrix, test: &[usize]) -> Vec<i64> {
    test.iter()
        .map(|&t| {
            if model.classes.len() == 1 {
                return model.classes[0];
            }
            let mut votes = vec![0usize; model.classes.len()];
            for p in &model.pairs {
                let f: f64 = p.support.iter().zip(&p.coef).map(|(&s, &c)| c * gram.get(s, t)).sum::<f64>() - p.rho;
                let winner = if f > 0.0 { p.positive } else { p.negative };
                votes[model.classes.binary_search(&winner).expect("known class")] += 1;
            }
            let best = votes.iter().enumerate().fold(0, |b, (i, &v)| if v > votes[b] { i } else { b });
            model.classes[best]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gram(rows: &[&[f64]]) -> GramMatrix {
        GramMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn two_orthogonal_points() {
        let k = gram(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let m = svm_train(&k, &[0, 1], &[3, 7], &SvmParams::with_c(1.0)).unwrap();
        assert_eq!(svm_predict(&m, &k, &[0, 1]), vec![3, 7]);
        assert_eq!(m.nonconverged, 0);
    }

    #[test]
    fn single_class_predicts_it() {
        let k = gram(&[&[1.0, 0.5], &[0.5, 1.0]]);
        let m = svm_train(&k, &[0], &[4], &SvmParams::default()).unwrap();
        assert_eq!(svm_predict(&m, &k, &[0, 1]), vec![4, 4]);
    }

    #[test]
    fn three_class_blocks() {
        let mut rows = vec![vec![0.0; 6]; 6];
        for i in 0..6 {
            for j in 0..6 {
                rows[i][j] = if i / 2 == j / 2 { 1.0 } else { 0.1 };
            }
        }
        let k = GramMatrix::from_rows(rows).unwrap();
        let train = [0, 2, 4];
        let m = svm_train(&k, &train, &[0, 1, 2], &SvmParams::with_c(10.0)).unwrap();
        assert_eq!(svm_predict(&m, &k, &[1, 3, 5]), vec![0, 1, 2]);
    }

    #[test]
    fn kkt_conditions_hold() {
        // linear kernel on points of the line
        let xs = [-2.0, -1.0, -0.5, 0.4, 1.0, 2.5];
        let y = [-1.0, -1.0, 1.0, -1.0, 1.0, 1.0];
        let kernel: Vec<f64> = xs.iter().flat_map(|a| xs.iter().map(move |b| a * b + 1.0)).collect();
        let p = SvmParams { c: 2.0, ..SvmParams::default() };
        let sol = solve_binary(&kernel, &y, &p);
        assert!(sol.converged);
        let eq: f64 = sol.alpha.iter().zip(&y).map(|(a, y)| a * y).sum();
        assert!(eq.abs() < 1e-9);
        assert!(sol.alpha.iter().all(|&a| (0.0..=p.c).contains(&a)));
        assert!(sol.objective < 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        let k = gram(&[&[1.0]]);
        assert_eq!(svm_train(&k, &[], &[], &SvmParams::default()).unwrap_err(), SvmError::EmptyTraining);
        assert!(matches!(svm_train(&k, &[0], &[1], &SvmParams::with_c(0.0)), Err(SvmError::InvalidC(_))));
    }
}
