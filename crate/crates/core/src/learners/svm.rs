use serde::{Deserialize, Serialize};

use super::kernel::{rbf_kernel, DistanceMatrix, KernelCache};
use super::{require_both_classes, LearnError, SvmParams};
use crate::corpus::GenderLabel;
use crate::features::{FeatureMatrix, SparseVector};

/// Curvature floor for non-positive-definite pairs.
const TAU: f64 = 1e-12;

/// Dual solution of the soft-margin problem over every training row.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoSolution {
    pub alpha: Vec<f64>,
    pub bias: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Sequential minimal optimization on
/// max Σαᵢ − ½ΣΣ αᵢαⱼyᵢyⱼK(xᵢ,xⱼ)  s.t. 0 ≤ αᵢ ≤ C, Σαᵢyᵢ = 0.
///
/// Each step updates the pair chosen by second-order working-set
/// selection: i is the maximal KKT violator, j maximizes the objective gain.
/// Stops once the violation gap falls below `tol` or after `max_iter` pair
/// updates.
pub fn solve_smo(kernel: &mut KernelCache<'_>, y: &[f64], c: f64, tol: f64, max_iter: usize) -> SmoSolution {
    let n = y.len();
    assert_eq!(kernel.len(), n, "kernel and labels disagree on size");
    let mut alpha = vec![0.0; n];
    // gradient of ½αᵀQα − eᵀα
    let mut grad = vec![-1.0; n];
    let upper = |a: f64| a >= c;
    let lower = |a: f64| a <= 0.0;
    let in_up = |t: usize, a: &[f64]| if y[t] > 0.0 { !upper(a[t]) } else { !lower(a[t]) };
    let in_low = |t: usize, a: &[f64]| if y[t] > 0.0 { !lower(a[t]) } else { !upper(a[t]) };

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        let mut gmax = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..n {
            if in_up(t, &alpha) && -y[t] * grad[t] > gmax {
                gmax = -y[t] * grad[t];
                i = t;
            }
        }
        if i == usize::MAX {
            converged = true;
            break;
        }
        let ki = kernel.row(i);
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut best = f64::INFINITY;
        for t in 0..n {
            if !in_low(t, &alpha) {
                continue;
            }
            let yg = y[t] * grad[t];
            gmax2 = gmax2.max(yg);
            let diff = gmax + yg;
            if diff > 0.0 {
                let quad = (2.0 - 2.0 * ki[t]).max(TAU);
                let gain = -diff * diff / quad;
                if gain < best {
                    best = gain;
                    j = t;
                }
            }
        }
        if gmax + gmax2 < tol || j == usize::MAX {
            converged = true;
            break;
        }
        iterations += 1;

        let kj = kernel.row(j);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let quad = (2.0 + 2.0 * y[i] * y[j] * ki[j]).max(TAU);
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
            let quad = (2.0 - 2.0 * ki[j]).max(TAU);
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
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += y[t] * (y[i] * ki[t] * di + y[j] * kj[t] * dj);
        }
    }

    SmoSolution { bias: -rho(&alpha, &grad, y, c), alpha, converged, iterations }
}

/// Threshold from the free multipliers, or the midpoint of the feasible
/// interval when every multiplier sits at a bound.
fn rho(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> f64 {
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free, mut sum) = (0usize, 0.0);
    for t in 0..alpha.len() {
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
            sum += yg;
        }
    }
    if free > 0 {
        sum / free as f64
    } else {
        (ub + lb) / 2.0
    }
}

/// Dual objective Σαᵢ − ½ΣΣ αᵢαⱼyᵢyⱼK(xᵢ,xⱼ).
pub fn dual_objective(alpha: &[f64], y: &[f64], kernel: &mut KernelCache<'_>) -> f64 {
    let mut quad = 0.0;
    for i in 0..alpha.len() {
        if alpha[i] == 0.0 {
            continue;
        }
        let row = kernel.row(i);
        for j in 0..alpha.len() {
            quad += alpha[i] * alpha[j] * y[i] * y[j] * row[j];
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub dim: usize,
    pub c: f64,
    pub gamma: f64,
    pub support_vectors: Vec<SparseVector>,
    /// αᵢyᵢ for each support vector.
    pub coef: Vec<f64>,
    pub bias: f64,
    pub converged: bool,
    pub iterations: usize,
}

fn labels_to_signs(labels: &[GenderLabel]) -> Vec<f64> {
    labels.iter().map(|l| l.sign()).collect()
}

fn max_iter(params: &SvmParams, n: usize) -> usize {
    params.max_passes.unwrap_or(10 * n).saturating_mul(n.max(1))
}

pub fn train_svm_rbf(m: &FeatureMatrix, params: &SvmParams) -> Result<SvmModel, LearnError> {
    require_both_classes(m)?;
    let gamma = params.gamma.resolve(m.dim());
    let y = labels_to_signs(&m.labels);
    let mut cache = KernelCache::from_vectors(&m.rows, gamma);
    let sol = solve_smo(&mut cache, &y, params.c, params.tol, max_iter(params, m.len()));
    Ok(SvmModel::from_solution(m, &sol, params.c, gamma))
}

/// As [`train_svm_rbf`] on `m`, whose rows are rows `rows` of the matrix
/// behind `distances`.
pub fn train_svm_with_distances(
    m: &FeatureMatrix,
    distances: &DistanceMatrix,
    rows: &[usize],
    params: &SvmParams,
) -> Result<SvmModel, LearnError> {
    require_both_classes(m)?;
    assert_eq!(m.len(), rows.len(), "matrix and row list disagree");
    let gamma = params.gamma.resolve(m.dim());
    let y = labels_to_signs(&m.labels);
    let mut cache = KernelCache::from_distances(distances, rows, gamma);
    let sol = solve_smo(&mut cache, &y, params.c, params.tol, max_iter(params, m.len()));
    Ok(SvmModel::from_solution(m, &sol, params.c, gamma))
}

/// Trains on rows `train` of the matrix behind `distances` and returns the
/// decision values of rows `test`, without materializing a model.
/// `labels` is indexed like the distance matrix.
pub fn decisions_with_distances(
    labels: &[GenderLabel],
    dim: usize,
    distances: &DistanceMatrix,
    train: &[usize],
    test: &[usize],
    params: &SvmParams,
) -> Result<Vec<f64>, LearnError> {
    let y: Vec<f64> = train.iter().map(|&r| labels[r].sign()).collect();
    if !(y.contains(&1.0) && y.contains(&-1.0)) {
        return Err(if y.is_empty() { LearnError::Empty } else { LearnError::SingleClass });
    }
    let gamma = params.gamma.resolve(dim);
    let mut cache = KernelCache::from_distances(distances, train, gamma);
    let sol = solve_smo(&mut cache, &y, params.c, params.tol, max_iter(params, train.len()));
    let support: Vec<(usize, f64)> =
        (0..train.len()).filter(|&i| sol.alpha[i] > 0.0).map(|i| (train[i], sol.alpha[i] * y[i])).collect();
    Ok(test
        .iter()
        .map(|&t| sol.bias + support.iter().map(|&(r, coef)| coef * (-gamma * distances.get(r, t)).exp()).sum::<f64>())
        .collect())
}

impl SvmModel {
    pub fn from_solution(m: &FeatureMatrix, sol: &SmoSolution, c: f64, gamma: f64) -> SvmModel {
        let (mut support_vectors, mut coef) = (Vec::new(), Vec::new());
        for (i, &a) in sol.alpha.iter().enumerate() {
            if a > 0.0 {
                support_vectors.push(m.rows[i].clone());
                coef.push(a * m.labels[i].sign());
            }
        }
        SvmModel {
            dim: m.dim(),
            c,
            gamma,
            support_vectors,
            coef,
            bias: sol.bias,
            converged: sol.converged,
            iterations: sol.iterations,
        }
    }

    /// f(x) = Σ αᵢyᵢK(xᵢ,x) + b
    pub fn decision(&self, x: &SparseVector) -> Result<f64, LearnError> {
        if x.dim() != self.dim {
            return Err(LearnError::DimensionMismatch { expected: self.dim, found: x.dim() });
        }
        let mut f = self.bias;
        for (sv, coef) in self.support_vectors.iter().zip(&self.coef) {
            f += coef * rbf_kernel(sv, x, self.gamma)?;
        }
        Ok(f)
    }

    /// f(x) = 0 predicts male.
    pub fn predict(&self, x: &SparseVector) -> Result<GenderLabel, LearnError> {
        Ok(if self.decision(x)? >= 0.0 { GenderLabel::Male } else { GenderLabel::Female })
    }
}
