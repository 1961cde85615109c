//! Exact (O(n²)) t-SNE.

use ndarray::{Array2, ArrayView2, Axis};
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TsneParams {
    pub perplexity: f64,
    pub early_exaggeration: f64,
    pub exaggeration_iters: usize,
    pub n_iter: usize,
    /// `None` uses `n / 12`.
    pub learning_rate: Option<f64>,
    pub initial_std: f64,
    pub seed: u64,
}

impl Default for TsneParams {
    fn default() -> Self {
        Self {
            perplexity: 30.0,
            early_exaggeration: 12.0,
            exaggeration_iters: 250,
            n_iter: 1000,
            learning_rate: None,
            initial_std: 1e-4,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TsneOutput {
    pub points: Array2<f64>,
    /// KL(P‖Q) at the random initialization.
    pub kl_initial: f64,
    pub kl_final: f64,
    pub learning_rate: f64,
}

fn squared_distances(x: ArrayView2<f64>) -> Array2<f64> {
    let n = x.nrows();
    let mut d = Array2::zeros((n, n));
    d.axis_iter_mut(Axis(0)).into_par_iter().enumerate().for_each(|(i, mut row)| {
        let xi = x.row(i);
        for j in 0..n {
            row[j] = xi.iter().zip(x.row(j)).map(|(a, b)| (a - b).powi(2)).sum();
        }
    });
    d
}

/// Conditional affinities `p_{j|i}` with per-row Gaussian precisions found by
/// bisection so that each row's entropy equals `ln(perplexity)`.
fn conditional_affinities(d2: &Array2<f64>, perplexity: f64) -> Array2<f64> {
    let n = d2.nrows();
    let target = perplexity.ln();
    let mut p = Array2::zeros((n, n));
    p.axis_iter_mut(Axis(0)).into_par_iter().enumerate().for_each(|(i, mut row)| {
        let di = d2.row(i);
        let (mut beta, mut lo, mut hi) = (1.0f64, 0.0f64, f64::INFINITY);
        let min_d = (0..n).filter(|&j| j != i).map(|j| di[j]).fold(f64::INFINITY, f64::min);
        for _ in 0..200 {
            // shift by the nearest distance for numerical stability
            let mut sum = 0.0;
            let mut weighted = 0.0;
            for j in 0..n {
                if j == i {
                    row[j] = 0.0;
                    continue;
                }
                let w = (-(di[j] - min_d) * beta).exp();
                row[j] = w;
                sum += w;
                weighted += w * (di[j] - min_d);
            }
            let entropy = sum.ln() + beta * weighted / sum;
            let diff = entropy - target;
            if diff.abs() < 1e-10 {
                break;
            }
            if diff > 0.0 {
                lo = beta;
                beta = if hi.is_finite() { (beta + hi) / 2.0 } else { beta * 2.0 };
            } else {
                hi = beta;
                beta = (beta + lo) / 2.0;
            }
        }
        let sum: f64 = row.sum();
        row /= sum;
    });
    p
}

fn kl(p: &Array2<f64>, q_num: &Array2<f64>, q_sum: f64) -> f64 {
    p.iter()
        .zip(q_num)
        .filter(|(&pij, _)| pij > 0.0)
        .map(|(&pij, &num)| pij * (pij / (num / q_sum).max(1e-300)).ln())
        .sum()
}

/// Student-t kernel `1 / (1 + |yᵢ - yⱼ|²)` with a zero diagonal.
fn student_kernel(y: &Array2<f64>) -> (Array2<f64>, f64) {
    let n = y.nrows();
    let mut num = Array2::zeros((n, n));
    num.axis_iter_mut(Axis(0)).into_par_iter().enumerate().for_each(|(i, mut row)| {
        for j in 0..n {
            if i != j {
                let dx = y[[i, 0]] - y[[j, 0]];
                let dy = y[[i, 1]] - y[[j, 1]];
                row[j] = 1.0 / (1.0 + dx * dx + dy * dy);
            }
        }
    });
    // row sums in a fixed order keep the total deterministic
    let sum = num.rows().into_iter().map(|r| r.sum()).sum();
    (num, sum)
}

/// Embeds the rows of `x` in two dimensions.
pub fn tsne(x: ArrayView2<f64>, params: &TsneParams) -> Result<TsneOutput> {
    let n = x.nrows();
    if !(params.perplexity > 0.0) {
        return Err(Error::InvalidParameter("perplexity must be positive".into()));
    }
    if (n as f64) <= 3.0 * params.perplexity {
        return Err(Error::InvalidParameter(format!(
            "perplexity {} needs more than {} points, got {n}",
            params.perplexity,
            3.0 * params.perplexity
        )));
    }
    if params.n_iter == 0 || params.early_exaggeration < 1.0 || !(params.initial_std > 0.0) {
        return Err(Error::InvalidParameter("t-SNE schedule".into()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("t-SNE input".into()));
    }
    let lr = params.learning_rate.unwrap_or(n as f64 / 12.0);
    if !(lr > 0.0) {
        return Err(Error::InvalidParameter("learning rate must be positive".into()));
    }

    let cond = conditional_affinities(&squared_distances(x), params.perplexity);
    let p = (&cond + &cond.t()).mapv(|v| (v / (2.0 * n as f64)).max(1e-12));
    let p_total = p.sum();
    let p = p / p_total;

    let mut rng = crate::rng::seeded(params.seed, 0x75e);
    let init = Normal::new(0.0, params.initial_std).expect("positive std");
    let mut y = Array2::from_shape_fn((n, 2), |_| init.sample(&mut rng));
    let mut update = Array2::<f64>::zeros((n, 2));
    let mut gains = Array2::<f64>::ones((n, 2));

    let (num, sum) = student_kernel(&y);
    let kl_initial = kl(&p, &num, sum);

    for iter in 0..params.n_iter {
        let exaggeration = if iter < params.exaggeration_iters { params.early_exaggeration } else { 1.0 };
        let momentum = if iter < params.exaggeration_iters { 0.5 } else { 0.8 };
        let (num, sum) = student_kernel(&y);
        let mut grad = Array2::<f64>::zeros((n, 2));
        grad.axis_iter_mut(Axis(0)).into_par_iter().enumerate().for_each(|(i, mut g)| {
            let (mut gx, mut gy) = (0.0, 0.0);
            for j in 0..n {
                if i == j {
                    continue;
                }
                let w = (exaggeration * p[[i, j]] - num[[i, j]] / sum) * num[[i, j]];
                gx += w * (y[[i, 0]] - y[[j, 0]]);
                gy += w * (y[[i, 1]] - y[[j, 1]]);
            }
            g[0] = 4.0 * gx;
            g[1] = 4.0 * gy;
        });
        ndarray::Zip::from(&mut gains)
            .and(&grad)
            .and(&update)
            .for_each(|gain, &g, &u| {
                *gain = if (g > 0.0) != (u > 0.0) { *gain + 0.2 } else { (*gain * 0.8).max(0.01) };
            });
        ndarray::Zip::from(&mut update)
            .and(&gains)
            .and(&grad)
            .for_each(|u, &gain, &g| *u = momentum * *u - lr * gain * g);
        y += &update;
        let mean = y.mean_axis(Axis(0)).expect("n > 0");
        y -= &mean;
    }

    let (num, sum) = student_kernel(&y);
    let kl_final = kl(&p, &num, sum);
    if !kl_final.is_finite() || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Diverged {
            epoch: params.n_iter,
            loss: kl_final,
        });
    }
    Ok(TsneOutput {
        points: y,
        kl_initial,
        kl_final,
        learning_rate: lr,
    })
}

/// Mean silhouette coefficient of `labels` over Euclidean distances between
/// rows. Singleton clusters contribute 0.
pub fn silhouette_score(points: ArrayView2<f64>, labels: &[usize]) -> Result<f64> {
    let n = points.nrows();
    if labels.len() != n {
        return Err(Error::LengthMismatch { left: n, right: labels.len() });
    }
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0usize; k];
    for &l in labels {
        sizes[l] += 1;
    }
    if sizes.iter().filter(|&&s| s > 0).count() < 2 {
        return Err(Error::InvalidParameter("silhouette needs at least two clusters".into()));
    }
    let total: f64 = (0..n)
        .into_par_iter()
        .map(|i| {
            if sizes[labels[i]] == 1 {
                return 0.0;
            }
            let mut sums = vec![0.0; k];
            for j in 0..n {
                if i != j {
                    let d = points.row(i).iter().zip(points.row(j)).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                    sums[labels[j]] += d;
                }
            }
            let a = sums[labels[i]] / (sizes[labels[i]] - 1) as f64;
            let b = (0..k)
                .filter(|&c| c != labels[i] && sizes[c] > 0)
                .map(|c| sums[c] / sizes[c] as f64)
                .fold(f64::INFINITY, f64::min);
            if a.max(b) == 0.0 {
                0.0
            } else {
                (b - a) / a.max(b)
            }
        })
        .collect::<Vec<_>>()
        .iter()
        .sum();
    Ok(total / n as f64)
}
