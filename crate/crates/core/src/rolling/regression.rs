//! Multi-response linear regression of target scores on auxiliary scores.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{col_means, Mat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "UPPERCASE")]
pub enum Estimator {
    #[default]
    Ols,
    Ridge,
    Lasso,
}

impl Estimator {
    pub fn default_penalty(self) -> f64 {
        match self {
            Estimator::Ols => 0.0,
            Estimator::Ridge => 1e-2,
            Estimator::Lasso => 1e-3,
        }
    }
}

impl std::str::FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ols" => Ok(Estimator::Ols),
            "ridge" => Ok(Estimator::Ridge),
            "lasso" => Ok(Estimator::Lasso),
            other => Err(Error::Config(format!("unknown estimator {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossRegressionFit {
    /// `P x Q`; column `j` regresses response `j` on the `P` predictors.
    pub coefs: Mat,
    /// Unpenalized intercept per response.
    pub intercepts: Vec<f64>,
    pub estimator: Estimator,
    pub penalty: f64,
    /// In-sample R-squared per response.
    pub r2: Vec<f64>,
}

impl CrossRegressionFit {
    pub fn predict(&self, x: &[f64]) -> Vec<f64> {
        (0..self.coefs.ncols())
            .map(|j| self.intercepts[j] + x.iter().enumerate().map(|(p, v)| v * self.coefs[(p, j)]).sum::<f64>())
            .collect()
    }

    pub fn mean_r2(&self) -> f64 {
        self.r2.iter().sum::<f64>() / self.r2.len().max(1) as f64
    }
}

fn center(m: &Mat) -> (Mat, Vec<f64>) {
    let means = col_means(m);
    (Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] - means[j]), means)
}

fn solve_spd(a: &Mat, b: &Mat) -> Option<Mat> {
    let (vals, _) = crate::linalg::sym_eigen_desc(a);
    let max = vals.first().copied().unwrap_or(0.0);
    if !(max > 0.0) || *vals.last()? <= 1e-12 * max {
        return None;
    }
    a.clone().cholesky().map(|c| c.solve(b))
}

fn lasso_column(x: &Mat, y: &[f64], lambda: f64, scale: &[f64]) -> Vec<f64> {
    let (n, p) = (x.nrows(), x.ncols());
    let norms: Vec<f64> = (0..p).map(|k| x.column(k).norm_squared()).collect();
    let mut b = vec![0.0; p];
    let mut r = y.to_vec();
    let y_scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    for _ in 0..100_000 {
        let mut max_step = 0.0f64;
        for k in 0..p {
            if norms[k] == 0.0 {
                continue;
            }
            let col = x.column(k);
            let rho: f64 = col.iter().zip(&r).map(|(a, e)| a * e).sum::<f64>() + norms[k] * b[k];
            let thr = n as f64 * lambda * scale[k];
            let new = if rho > thr {
                (rho - thr) / norms[k]
            } else if rho < -thr {
                (rho + thr) / norms[k]
            } else {
                0.0
            };
            let d = new - b[k];
            if d != 0.0 {
                for (e, a) in r.iter_mut().zip(col.iter()) {
                    *e -= a * d;
                }
                max_step = max_step.max(d.abs() * norms[k].sqrt());
                b[k] = new;
            }
        }
        if max_step <= 1e-13 * y_scale * (n as f64).sqrt() {
            break;
        }
    }
    b
}

/// Regress every column of `beta` on all columns of `alpha`, with intercept.
///
/// Ridge minimizes `|y - a - X b|^2 / n + penalty * |b|^2`. Lasso minimizes
/// `|y - a - X b|^2 / (2n) + penalty * sum_k s_k |b_k|`, with `s_k` the
/// standard deviation of predictor `k`, i.e. the usual lasso on standardized
/// predictors. The intercept is never penalized.
pub fn fit_cross_regression(alpha: &Mat, beta: &Mat, estimator: Estimator, penalty: f64) -> Result<CrossRegressionFit> {
    let n = alpha.nrows();
    if beta.nrows() != n {
        return Err(Error::LengthMismatch(n, beta.nrows()));
    }
    if alpha.ncols() == 0 || beta.ncols() == 0 || n < 2 {
        return Err(Error::Precondition("cross regression needs at least one column and two rows".into()));
    }
    if !(penalty >= 0.0) {
        return Err(Error::Config(format!("penalty must be nonnegative, got {penalty}")));
    }
    let (xc, xm) = center(alpha);
    let (yc, ym) = center(beta);
    let p = alpha.ncols();
    let q = beta.ncols();
    let gram = xc.transpose() * &xc;
    let xty = xc.transpose() * &yc;
    let coefs = match estimator {
        Estimator::Ols => solve_spd(&gram, &xty).ok_or(Error::SingularDesign)?,
        Estimator::Ridge => {
            let a = &gram + Mat::identity(p, p) * (n as f64 * penalty);
            solve_spd(&a, &xty).ok_or(Error::SingularDesign)?
        }
        Estimator::Lasso => {
            let scale: Vec<f64> = (0..p).map(|k| (xc.column(k).norm_squared() / n as f64).sqrt()).collect();
            let mut b = Mat::zeros(p, q);
            for j in 0..q {
                let y: Vec<f64> = yc.column(j).iter().copied().collect();
                for (k, v) in lasso_column(&xc, &y, penalty, &scale).into_iter().enumerate() {
                    b[(k, j)] = v;
                }
            }
            b
        }
    };
    let intercepts: Vec<f64> = (0..q).map(|j| ym[j] - (0..p).map(|k| xm[k] * coefs[(k, j)]).sum::<f64>()).collect();
    let resid = &yc - &xc * &coefs;
    let r2 = (0..q)
        .map(|j| {
            let sst = yc.column(j).norm_squared();
            let sse = resid.column(j).norm_squared();
            if sst > 0.0 {
                1.0 - sse / sst
            } else if sse == 0.0 {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    Ok(CrossRegressionFit { coefs, intercepts, estimator, penalty, r2 })
}

/// Default log-spaced penalty grid `1e-5 ..= 10`.
pub fn penalty_grid() -> Vec<f64> {
    (0..=18).map(|i| 10f64.powf(-5.0 + i as f64 / 3.0)).collect()
}

/// Penalty minimizing mean squared prediction error over contiguous folds.
pub fn select_penalty(alpha: &Mat, beta: &Mat, estimator: Estimator, grid: &[f64], folds: usize) -> Result<f64> {
    let n = alpha.nrows();
    if folds < 2 || n < 2 * folds {
        return Err(Error::InsufficientData { need: 2 * folds.max(2), have: n });
    }
    if estimator == Estimator::Ols || grid.is_empty() {
        return Ok(estimator.default_penalty());
    }
    let mut best = (f64::INFINITY, grid[0]);
    for &lam in grid {
        let mut sse = 0.0;
        for f in 0..folds {
            let (lo, hi) = (f * n / folds, (f + 1) * n / folds);
            let keep: Vec<usize> = (0..n).filter(|i| *i < lo || *i >= hi).collect();
            let xa = alpha.select_rows(&keep);
            let yb = beta.select_rows(&keep);
            let fit = match fit_cross_regression(&xa, &yb, estimator, lam) {
                Ok(f) => f,
                Err(_) => {
                    sse = f64::INFINITY;
                    break;
                }
            };
            for i in lo..hi {
                let x: Vec<f64> = alpha.row(i).iter().copied().collect();
                let pred = fit.predict(&x);
                sse += pred.iter().enumerate().map(|(j, v)| (v - beta[(i, j)]).powi(2)).sum::<f64>();
            }
        }
        if sse < best.0 {
            best = (sse, lam);
        }
    }
    Ok(best.1)
}
