//! Soft-margin RBF support vector machine trained with SMO.
//!
//! The solver works on the dual
//!
//! ```text
//! max  W(a) = sum a_i - 1/2 sum_ij a_i a_j y_i y_j K(x_i, x_j)
//! s.t. 0 <= a_i <= C,  sum a_i y_i = 0
//! ```
//!
//! and at each step updates the maximal violating pair: `i` maximizes
//! `-y_t G_t` over the variables that may move up, `j` minimizes it over
//! those that may move down (`G` is the gradient of `-W`). It stops once the
//! gap between the two is below `tol`, which bounds every KKT violation by
//! `tol`. Kernel rows are computed on demand and kept in a bounded cache.

use std::collections::HashMap;

use super::{ClassifierSpec, Matrix};
use crate::error::{Error, Result};
use crate::ingestion::Label;

const TAU: f64 = 1e-12;
const CACHE_BYTES: usize = 1 << 30;

#[derive(Debug, Clone, PartialEq)]
pub struct SvmParams {
    pub c: f64,
    pub gamma: f64,
    pub tol: f64,
    /// Pair-update cap.
    pub max_iter: usize,
}

impl SvmParams {
    pub fn new(c: f64, gamma: f64, n: usize) -> Self {
        Self {
            c,
            gamma,
            tol: 1e-3,
            max_iter: default_max_iter(n),
        }
    }

    pub fn from_spec(spec: &ClassifierSpec, x: &Matrix) -> Self {
        Self {
            c: spec.c,
            gamma: spec.gamma.unwrap_or_else(|| default_gamma(x)),
            tol: spec.tol,
            max_iter: spec.max_iter.unwrap_or_else(|| default_max_iter(x.rows())),
        }
    }
}

fn default_max_iter(n: usize) -> usize {
    10_000_000usize.max(n.saturating_mul(100))
}

/// `1 / (F * var(X))` over every entry of `x`; `1 / F` when `x` is constant.
pub fn default_gamma(x: &Matrix) -> f64 {
    let f = x.cols().max(1) as f64;
    let n = x.data().len();
    if n == 0 {
        return 1.0 / f;
    }
    let mean = x.data().iter().sum::<f64>() / n as f64;
    let var = x.data().iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    if var > 0.0 {
        1.0 / (f * var)
    } else {
        1.0 / f
    }
}

#[inline]
fn rbf(gamma: f64, a: &[f64], b: &[f64]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum();
    (-gamma * d).exp()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    support: Matrix,
    /// `alpha_i * y_i` per support vector.
    coef: Vec<f64>,
    /// Row of each support vector in the training matrix.
    support_indices: Vec<usize>,
    pub bias: f64,
    pub gamma: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl SvmModel {
    pub(crate) fn from_parts(
        support: Matrix,
        coef: Vec<f64>,
        support_indices: Vec<usize>,
        bias: f64,
        gamma: f64,
        converged: bool,
    ) -> Result<Self> {
        if coef.len() != support.rows() || support_indices.len() != support.rows() {
            return Err(Error::Model("support vector counts disagree".into()));
        }
        Ok(Self {
            support,
            coef,
            support_indices,
            bias,
            gamma,
            converged,
            iterations: 0,
        })
    }

    pub fn n_features(&self) -> usize {
        self.support.cols()
    }

    pub fn support_vectors(&self) -> &Matrix {
        &self.support
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coef
    }

    pub fn support_indices(&self) -> &[usize] {
        &self.support_indices
    }

    /// Dual variables over all `n` training rows (zero off the support set).
    pub fn alphas(&self, n: usize) -> Vec<f64> {
        let mut a = vec![0.0; n];
        for (&i, &c) in self.support_indices.iter().zip(&self.coef) {
            a[i] = c.abs();
        }
        a
    }

    /// `f(q) = sum alpha_i y_i K(x_i, q) + b`.
    pub fn decision(&self, q: &[f64]) -> f64 {
        let s: f64 = (0..self.support.rows())
            .map(|i| self.coef[i] * rbf(self.gamma, self.support.row(i), q))
            .sum();
        s + self.bias
    }

    /// Non-negative decision values map to Normal.
    pub fn predict_row(&self, q: &[f64]) -> Label {
        if self.decision(q) >= 0.0 {
            Label::Normal
        } else {
            Label::Abnormal
        }
    }

    /// Largest KKT violation over the training set, measured on `y_i f(x_i)`.
    pub fn kkt_violation(&self, x: &Matrix, y: &[f64], c: f64) -> f64 {
        let alphas = self.alphas(x.rows());
        let mut worst: f64 = 0.0;
        for i in 0..x.rows() {
            let m = y[i] * self.decision(x.row(i));
            let a = alphas[i];
            let v = if a <= 0.0 {
                (1.0 - m).max(0.0)
            } else if a >= c {
                (m - 1.0).max(0.0)
            } else {
                (m - 1.0).abs()
            };
            worst = worst.max(v);
        }
        worst
    }
}

/// `W(a)` for the RBF kernel.
pub fn dual_objective(x: &Matrix, y: &[f64], alpha: &[f64], gamma: f64) -> f64 {
    let n = x.rows();
    let mut quad = 0.0;
    for i in 0..n {
        if alpha[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            if alpha[j] == 0.0 {
                continue;
            }
            quad += alpha[i] * alpha[j] * y[i] * y[j] * rbf(gamma, x.row(i), x.row(j));
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

/// Kernel rows `K(x_i, ·)` with least-recently-used eviction.
struct KernelCache<'a> {
    x: &'a Matrix,
    gamma: f64,
    capacity: usize,
    rows: HashMap<usize, (Vec<f64>, u64)>,
    clock: u64,
}

impl<'a> KernelCache<'a> {
    fn new(x: &'a Matrix, gamma: f64) -> Self {
        let row_bytes = x.rows().max(1) * std::mem::size_of::<f64>();
        Self {
            x,
            gamma,
            capacity: (CACHE_BYTES / row_bytes).max(2),
            rows: HashMap::new(),
            clock: 0,
        }
    }

    fn ensure(&mut self, i: usize) {
        self.clock += 1;
        if let Some(entry) = self.rows.get_mut(&i) {
            entry.1 = self.clock;
            return;
        }
        if self.rows.len() >= self.capacity {
            let oldest = self
                .rows
                .iter()
                .min_by_key(|(_, (_, t))| *t)
                .map(|(&k, _)| k);
            if let Some(k) = oldest {
                self.rows.remove(&k);
            }
        }
        let xi = self.x.row(i);
        let row = (0..self.x.rows())
            .map(|j| rbf(self.gamma, xi, self.x.row(j)))
            .collect();
        self.rows.insert(i, (row, self.clock));
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.rows[&i].0
    }
}

/// Trains on labels `y ∈ {+1, −1}`.
///
/// Hitting `max_iter` is not an error: the last iterate is returned with
/// `converged == false`.
pub fn train_svm_smo(x: &Matrix, y: &[f64], params: &SvmParams) -> Result<SvmModel> {
    let n = x.rows();
    if n != y.len() {
        return Err(Error::Shape(format!("{n} rows but {} labels", y.len())));
    }
    if y.iter().any(|&v| v != 1.0 && v != -1.0) {
        return Err(Error::Training("SVM labels must be +1 or -1".into()));
    }
    if !y.contains(&1.0) || !y.contains(&-1.0) {
        return Err(Error::Training("SVM training needs both classes".into()));
    }
    if !(params.c > 0.0 && params.gamma > 0.0 && params.tol > 0.0) {
        return Err(Error::Config("SVM needs C, gamma and tol > 0".into()));
    }
    let c = params.c;
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let mut cache = KernelCache::new(x, params.gamma);
    let mut converged = false;
    let mut iterations = 0;

    let up = |a: f64, yt: f64| (yt > 0.0 && a < c) || (yt < 0.0 && a > 0.0);
    let low = |a: f64, yt: f64| (yt > 0.0 && a > 0.0) || (yt < 0.0 && a < c);

    while iterations < params.max_iter {
        let mut i = usize::MAX;
        let mut g_max = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut g_min = f64::INFINITY;
        for t in 0..n {
            let v = -y[t] * grad[t];
            if up(alpha[t], y[t]) && v > g_max {
                g_max = v;
                i = t;
            }
            if low(alpha[t], y[t]) && v < g_min {
                g_min = v;
                j = t;
            }
        }
        if i == usize::MAX || j == usize::MAX || g_max - g_min < params.tol {
            converged = true;
            break;
        }
        iterations += 1;

        cache.ensure(i);
        cache.ensure(j);
        let k_ij = cache.row(i)[j];
        let (k_ii, k_jj) = (cache.row(i)[i], cache.row(j)[j]);
        let q_ij = y[i] * y[j] * k_ij;
        let (old_i, old_j) = (alpha[i], alpha[j]);

        if y[i] != y[j] {
            let mut quad = k_ii + k_jj + 2.0 * q_ij;
            if quad <= 0.0 {
                quad = TAU;
            }
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
            let mut quad = k_ii + k_jj - 2.0 * q_ij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = sum;
                }
                if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = sum;
                }
            }
        }

        let (d_i, d_j) = (alpha[i] - old_i, alpha[j] - old_j);
        let (row_i, row_j) = (cache.row(i), cache.row(j));
        for t in 0..n {
            grad[t] += y[t] * (y[i] * row_i[t] * d_i + y[j] * row_j[t] * d_j);
        }
    }

    // rho: mean of y_t G_t over free variables, else the midpoint of the bounds
    let mut free_sum = 0.0;
    let mut free_n = 0usize;
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    for t in 0..n {
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
            free_sum += yg;
            free_n += 1;
        }
    }
    let rho = if free_n > 0 {
        free_sum / free_n as f64
    } else {
        (ub + lb) / 2.0
    };

    let support_indices: Vec<usize> = (0..n).filter(|&t| alpha[t] > 0.0).collect();
    let support = x.select_rows(&support_indices);
    let coef = support_indices.iter().map(|&t| alpha[t] * y[t]).collect();
    Ok(SvmModel {
        support,
        coef,
        support_indices,
        bias: -rho,
        gamma: params.gamma,
        converged,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_points() {
        let x = Matrix::from_rows(&[[0.0, 0.0], [1.0, 1.0]]).unwrap();
        let y = [1.0, -1.0];
        let m = train_svm_smo(&x, &y, &SvmParams::new(1.0, 0.5, 2)).unwrap();
        assert!(m.converged);
        assert!(m.decision(x.row(0)) > 0.0);
        assert!(m.decision(x.row(1)) < 0.0);
        let a = m.alphas(2);
        assert!((a[0] * y[0] + a[1] * y[1]).abs() < 1e-12);
    }

    #[test]
    fn xor_is_separable_with_rbf() {
        let x = Matrix::from_rows(&[[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]]).unwrap();
        let y = [1.0, -1.0, -1.0, 1.0];
        let m = train_svm_smo(&x, &y, &SvmParams::new(10.0, 1.0, 4)).unwrap();
        for i in 0..4 {
            assert_eq!(m.decision(x.row(i)).signum(), y[i]);
        }
        assert!(m.kkt_violation(&x, &y, 10.0) <= 1e-3);
    }

    #[test]
    fn single_class_rejected() {
        let x = Matrix::from_rows(&[[0.0], [1.0]]).unwrap();
        assert!(matches!(
            train_svm_smo(&x, &[1.0, 1.0], &SvmParams::new(1.0, 1.0, 2)),
            Err(Error::Training(_))
        ));
        assert!(train_svm_smo(&x, &[1.0, 0.0], &SvmParams::new(1.0, 1.0, 2)).is_err());
    }

    #[test]
    fn iteration_cap_flags_non_convergence() {
        let x = Matrix::from_rows(&[[0.0], [0.3], [0.6], [1.0], [1.3], [2.0]]).unwrap();
        let y = [1.0, -1.0, 1.0, -1.0, 1.0, -1.0];
        let mut p = SvmParams::new(100.0, 5.0, 6);
        p.max_iter = 1;
        let m = train_svm_smo(&x, &y, &p).unwrap();
        assert!(!m.converged);
        assert_eq!(m.iterations, 1);
    }

    #[test]
    fn gamma_default() {
        let x = Matrix::from_rows(&[[1.0, -1.0], [1.0, -1.0]]).unwrap();
        // entries 1, -1, 1, -1: variance 1, two features
        assert_eq!(default_gamma(&x), 0.5);
        let c = Matrix::from_rows(&[[2.0, 2.0, 2.0]]).unwrap();
        assert_eq!(default_gamma(&c), 1.0 / 3.0);
    }

    #[test]
    fn label_negation_negates_decisions() {
        let x = Matrix::from_rows(&[[0.0, 0.1], [0.5, 0.9], [1.0, 0.2], [0.3, 0.3], [0.8, 0.7]]).unwrap();
        let y = [1.0, -1.0, 1.0, 1.0, -1.0];
        let neg: Vec<f64> = y.iter().map(|v| -v).collect();
        let p = SvmParams::new(1.0, 2.0, 5);
        let a = train_svm_smo(&x, &y, &p).unwrap();
        let b = train_svm_smo(&x, &neg, &p).unwrap();
        for q in [[0.1, 0.1], [0.9, 0.9], [0.5, 0.5]] {
            assert!((a.decision(&q) + b.decision(&q)).abs() < 1e-9);
        }
    }
}
