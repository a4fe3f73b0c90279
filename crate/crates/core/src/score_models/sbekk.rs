//! Scalar BEKK(1,1) on VAR residuals:
//!
//! ```text
//! H_i = C C' + a eps_{i-1} eps_{i-1}' + g H_{i-1},   H_1 = sample covariance
//! ```
//!
//! With variance targeting (the default) `C C' = (1 - a - g) * Sigma_hat`
//! and only `(a, g)` are estimated.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{to_rows, Mat};
use crate::optim::{self, Convergence, Options};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SbekkOptions {
    pub variance_targeting: bool,
}

impl Default for SbekkOptions {
    fn default() -> Self {
        SbekkOptions { variance_targeting: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SbekkFit {
    /// Lower-triangular intercept factor.
    pub c: Mat,
    pub a: f64,
    pub g: f64,
    /// Conditional covariances `H_1..H_M`.
    pub h_path: Vec<Mat>,
    pub loglik: f64,
    pub sigma_hat: Mat,
    pub variance_targeting: bool,
    pub last_resid: Vec<f64>,
    pub convergence: Convergence,
}

impl SbekkFit {
    pub fn cct(&self) -> Mat {
        &self.c * self.c.transpose()
    }

    pub fn dim(&self) -> usize {
        self.c.nrows()
    }

    /// `H_{M+1}` from the end of the sample.
    pub fn forecast_next(&self) -> Mat {
        let last_h = self.h_path.last().cloned().unwrap_or_else(|| self.sigma_hat.clone());
        forecast_sbekk(self, &self.last_resid, &last_h)
    }
}

/// `C C' + a eps eps' + g H`.
pub fn forecast_sbekk(fit: &SbekkFit, last_resid: &[f64], last_h: &Mat) -> Mat {
    let j = fit.dim();
    let cct = fit.cct();
    let h = Mat::from_fn(j, j, |r, c| cct[(r, c)] + fit.a * last_resid[r] * last_resid[c] + fit.g * last_h[(r, c)]);
    // exact symmetry
    Mat::from_fn(j, j, |r, c| if r <= c { h[(r, c)] } else { h[(c, r)] })
}

/// In-place Cholesky of a row-major `j x j` SPD matrix; returns `log det` or
/// `None` when a pivot is not positive.
fn chol_logdet(a: &mut [f64], j: usize) -> Option<f64> {
    let mut logdet = 0.0;
    for c in 0..j {
        let mut d = a[c * j + c];
        for k in 0..c {
            d -= a[c * j + k] * a[c * j + k];
        }
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        let d = d.sqrt();
        a[c * j + c] = d;
        logdet += 2.0 * d.ln();
        for r in c + 1..j {
            let mut s = a[r * j + c];
            for k in 0..c {
                s -= a[r * j + k] * a[c * j + k];
            }
            a[r * j + c] = s / d;
        }
    }
    Some(logdet)
}

/// `x' A^{-1} x` given the Cholesky factor stored in the lower triangle.
fn chol_quad(l: &[f64], j: usize, x: &[f64], work: &mut [f64]) -> f64 {
    for r in 0..j {
        let mut s = x[r];
        for k in 0..r {
            s -= l[r * j + k] * work[k];
        }
        work[r] = s / l[r * j + r];
    }
    work[..j].iter().map(|v| v * v).sum()
}

/// Gaussian log-likelihood of the recursion; `None` if some `H_i` is not SPD.
pub fn sbekk_loglik(eps: &Mat, cct: &Mat, a: f64, g: f64, h1: &Mat) -> Option<f64> {
    let m = eps.nrows();
    let j = eps.ncols();
    let ln2pi = (2.0 * std::f64::consts::PI).ln();
    let mut h: Vec<f64> = (0..j * j).map(|k| h1[(k / j, k % j)]).collect();
    let cc: Vec<f64> = (0..j * j).map(|k| cct[(k / j, k % j)]).collect();
    let mut fac = vec![0.0; j * j];
    let mut work = vec![0.0; j];
    let mut e = vec![0.0; j];
    let mut prev = vec![0.0; j];
    let mut ll = 0.0;
    for i in 0..m {
        for c in 0..j {
            e[c] = eps[(i, c)];
        }
        if i > 0 {
            for r in 0..j {
                for c in 0..j {
                    h[r * j + c] = cc[r * j + c] + a * prev[r] * prev[c] + g * h[r * j + c];
                }
            }
        }
        fac.copy_from_slice(&h);
        let logdet = chol_logdet(&mut fac, j)?;
        let q = chol_quad(&fac, j, &e, &mut work);
        ll += -0.5 * (j as f64 * ln2pi + logdet + q);
        prev.copy_from_slice(&e);
    }
    Some(ll)
}

/// `H_1..H_M` for given parameters.
pub fn sbekk_path(eps: &Mat, cct: &Mat, a: f64, g: f64, h1: &Mat) -> Vec<Mat> {
    let m = eps.nrows();
    let mut out = Vec::with_capacity(m);
    let mut h = h1.clone();
    for i in 0..m {
        if i > 0 {
            let e = eps.row(i - 1).transpose();
            h = cct + &e * e.transpose() * a + &h * g;
        }
        out.push(h.clone());
    }
    out
}

fn simplex(p: f64, q: f64) -> (f64, f64) {
    let (ep, eq) = (p.exp(), q.exp());
    let d = 1.0 + ep + eq;
    (ep / d, eq / d)
}

fn simplex_inv(a: f64, g: f64) -> (f64, f64) {
    let rest = 1.0 - a - g;
    ((a / rest).ln(), (g / rest).ln())
}

fn lower_from(u: &[f64], j: usize) -> Mat {
    let mut c = Mat::zeros(j, j);
    let mut k = 0;
    for r in 0..j {
        for col in 0..=r {
            c[(r, col)] = if r == col { u[k].exp() } else { u[k] };
            k += 1;
        }
    }
    c
}

fn lower_to(c: &Mat) -> Vec<f64> {
    let j = c.nrows();
    let mut u = Vec::with_capacity(j * (j + 1) / 2);
    for r in 0..j {
        for col in 0..=r {
            u.push(if r == col { c[(r, col)].max(1e-12).ln() } else { c[(r, col)] });
        }
    }
    u
}

pub fn fit_sbekk(residuals: &Mat, opts: &SbekkOptions) -> Result<SbekkFit> {
    let m = residuals.nrows();
    let j = residuals.ncols();
    if j == 0 || m < 3 {
        return Err(Error::Precondition(format!("sBEKK needs residuals, got {m}x{j}")));
    }
    if m < 10 * j {
        log::warn!("sBEKK with only {m} observations for dimension {j}");
    }
    let means: Vec<f64> = (0..j).map(|c| residuals.column(c).mean()).collect();
    let col_scale = residuals.amax().max(1e-300);
    if means.iter().any(|mu| mu.abs() > 1e-6 * col_scale) {
        log::warn!("sBEKK residuals are not column-centered");
    }
    let sigma_hat = residuals.transpose() * residuals / m as f64;
    let chol_sigma = sigma_hat.clone().cholesky().ok_or(Error::NonPsdH)?;
    let l_sigma = chol_sigma.l();

    let starts_ag = [(0.05, 0.90), (0.10, 0.80), (0.03, 0.95)];
    let nobs = m as f64;
    let opts_bfgs = Options { max_iter: 300, grad_tol: 1e-7, f_tol: 1e-13 };

    let (c, a, g, best, used) = if opts.variance_targeting {
        let obj = |u: &[f64]| {
            let (a, g) = simplex(u[0], u[1]);
            let cct = &sigma_hat * (1.0 - a - g);
            sbekk_loglik(residuals, &cct, a, g, &sigma_hat).map_or(f64::INFINITY, |ll| -ll / nobs)
        };
        let starts: Vec<Vec<f64>> = starts_ag
            .iter()
            .map(|&(a, g)| {
                let (p, q) = simplex_inv(a, g);
                vec![p, q]
            })
            .collect();
        let (best, used) =
            optim::multi_start(optim::with_numeric_gradient(obj), &starts, opts_bfgs).ok_or(Error::NonPsdH)?;
        let (a, g) = simplex(best.x[0], best.x[1]);
        let c = &l_sigma * (1.0 - a - g).sqrt();
        (c, a, g, best, used)
    } else {
        let obj = |u: &[f64]| {
            let (a, g) = simplex(u[0], u[1]);
            let c = lower_from(&u[2..], j);
            let cct = &c * c.transpose();
            sbekk_loglik(residuals, &cct, a, g, &sigma_hat).map_or(f64::INFINITY, |ll| -ll / nobs)
        };
        let starts: Vec<Vec<f64>> = starts_ag
            .iter()
            .map(|&(a, g)| {
                let (p, q) = simplex_inv(a, g);
                let mut u = vec![p, q];
                u.extend(lower_to(&(&l_sigma * (1.0 - a - g).sqrt())));
                u
            })
            .collect();
        let (best, used) =
            optim::multi_start(optim::with_numeric_gradient(obj), &starts, opts_bfgs).ok_or(Error::NonPsdH)?;
        let (a, g) = simplex(best.x[0], best.x[1]);
        (lower_from(&best.x[2..], j), a, g, best, used)
    };
    if !best.converged && best.grad_norm > 1e-3 {
        return Err(Error::NonConvergence(format!(
            "sBEKK: {} iterations, gradient norm {:.3e}",
            best.iterations, best.grad_norm
        )));
    }
    let cct = &c * c.transpose();
    let h_path = sbekk_path(residuals, &cct, a, g, &sigma_hat);
    Ok(SbekkFit {
        c,
        a,
        g,
        h_path,
        loglik: -best.f * nobs,
        sigma_hat,
        variance_targeting: opts.variance_targeting,
        last_resid: residuals.row(m - 1).iter().copied().collect(),
        convergence: Convergence {
            iterations: best.iterations,
            grad_norm: best.grad_norm,
            converged: best.converged,
            restarts_used: used,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SbekkParams {
    pub c: Vec<Vec<f64>>,
    pub a: f64,
    pub g: f64,
    pub loglik: f64,
    pub variance_targeting: bool,
}

impl From<&SbekkFit> for SbekkParams {
    fn from(f: &SbekkFit) -> Self {
        SbekkParams { c: to_rows(&f.c), a: f.a, g: f.g, loglik: f.loglik, variance_targeting: f.variance_targeting }
    }
}
