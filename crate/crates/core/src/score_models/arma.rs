//! ARMA(p, q) with automatic order selection by AICc.
//!
//! Each candidate is fitted by conditional Gaussian likelihood in mean form
//!
//! ```text
//! y_t - m = sum_i phi_i (y_{t-i} - m) + e_t + sum_j theta_j e_{t-j}
//! ```
//!
//! conditioning on the first `p_max` observations for every candidate so
//! that AICc values are comparable. Stationarity and invertibility hold by
//! construction: coefficients are generated from partial autocorrelations
//! in (-1, 1).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::{self, Options};

pub const MIN_LEN: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmaFit {
    pub p: usize,
    pub q: usize,
    pub ar_coefs: Vec<f64>,
    pub ma_coefs: Vec<f64>,
    /// `c` in `y_t = c + sum phi y + e + sum theta e`.
    pub intercept: f64,
    pub mean: f64,
    pub innov_var: f64,
    pub residuals: Vec<f64>,
    pub loglik: f64,
    pub aicc: f64,
    /// True when every candidate failed and AR(1) least squares was used.
    pub fallback: bool,
    #[serde(skip)]
    tail: Vec<f64>,
}

impl ArmaFit {
    /// One-step-ahead conditional mean after the end of the sample.
    pub fn forecast_next(&self) -> f64 {
        let mut f = self.mean;
        let n = self.tail.len();
        for (i, phi) in self.ar_coefs.iter().enumerate() {
            f += phi * (self.tail[n - 1 - i] - self.mean);
        }
        let r = self.residuals.len();
        for (j, th) in self.ma_coefs.iter().enumerate() {
            if j < r {
                f += th * self.residuals[r - 1 - j];
            }
        }
        f
    }
}

/// Map partial autocorrelations in (-1, 1) to coefficients of a stationary
/// AR polynomial `1 - sum phi_i z^i` (Durbin-Levinson).
pub fn pacf_to_coefs(r: &[f64]) -> Vec<f64> {
    let mut phi: Vec<f64> = Vec::with_capacity(r.len());
    for (k, &rk) in r.iter().enumerate() {
        let prev = phi.clone();
        for i in 0..k {
            phi[i] = prev[i] - rk * prev[k - 1 - i];
        }
        phi.push(rk);
    }
    phi
}

struct Candidate {
    p: usize,
}

impl Candidate {
    fn unpack(&self, u: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
        let m = u[0];
        let ar = pacf_to_coefs(&u[1..1 + self.p].iter().map(|v| v.tanh()).collect::<Vec<_>>());
        let ma: Vec<f64> = pacf_to_coefs(&u[1 + self.p..].iter().map(|v| v.tanh()).collect::<Vec<_>>())
            .into_iter()
            .map(|v| -v)
            .collect();
        (m, ar, ma)
    }
}

/// Conditional residuals for `t >= start`.
fn css_residuals(y: &[f64], start: usize, m: f64, ar: &[f64], ma: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; y.len()];
    for t in start..y.len() {
        let mut pred = m;
        for (i, phi) in ar.iter().enumerate() {
            pred += phi * (y[t - 1 - i] - m);
        }
        for (j, th) in ma.iter().enumerate() {
            if t > j {
                pred += th * e[t - 1 - j];
            }
        }
        e[t] = y[t] - pred;
    }
    e[start..].to_vec()
}

fn aicc(loglik: f64, k: usize, n: usize) -> f64 {
    let k = k as f64;
    let n = n as f64;
    let denom = n - k - 1.0;
    let corr = if denom > 0.0 { 2.0 * k * (k + 1.0) / denom } else { f64::INFINITY };
    -2.0 * loglik + 2.0 * k + corr
}

fn gaussian_loglik(sse: f64, n: usize) -> f64 {
    let nf = n as f64;
    -0.5 * nf * ((2.0 * std::f64::consts::PI * sse / nf).ln() + 1.0)
}

fn fit_candidate(y: &[f64], start: usize, p: usize, q: usize) -> Option<ArmaFit> {
    let n_eff = y.len() - start;
    let mean = y[start..].iter().sum::<f64>() / n_eff as f64;
    let cand = Candidate { p };
    let (m, ar, ma) = if p + q == 0 {
        (mean, vec![], vec![])
    } else {
        let obj = |u: &[f64]| {
            let (m, ar, ma) = cand.unpack(u);
            let e = css_residuals(y, start, m, &ar, &ma);
            let sse: f64 = e.iter().map(|v| v * v).sum();
            0.5 * (sse / n_eff as f64).ln()
        };
        let dim = 1 + p + q;
        let starts: Vec<Vec<f64>> = [0.0, 0.5, -0.5]
            .iter()
            .map(|&s| {
                let mut u = vec![0.0; dim];
                u[0] = mean;
                for v in u.iter_mut().skip(1) {
                    *v = s;
                }
                u
            })
            .collect();
        let opts = Options { max_iter: 300, grad_tol: 1e-7, f_tol: 1e-12 };
        let (best, _) = optim::multi_start(optim::with_numeric_gradient(obj), &starts, opts)?;
        if !best.converged && best.grad_norm > 1e-4 {
            return None;
        }
        cand.unpack(&best.x)
    };
    let residuals = css_residuals(y, start, m, &ar, &ma);
    let sse: f64 = residuals.iter().map(|v| v * v).sum();
    if !sse.is_finite() {
        return None;
    }
    let loglik = gaussian_loglik(sse, n_eff);
    let k = p + q + 2;
    Some(ArmaFit {
        p,
        q,
        intercept: m * (1.0 - ar.iter().sum::<f64>()),
        ar_coefs: ar,
        ma_coefs: ma,
        mean: m,
        innov_var: sse / n_eff as f64,
        residuals,
        loglik,
        aicc: aicc(loglik, k, n_eff),
        fallback: false,
        tail: y[y.len().saturating_sub(p.max(1))..].to_vec(),
    })
}

/// AR(1) by least squares, flagged as a fallback.
pub fn ar1_fallback(y: &[f64]) -> ArmaFit {
    let (c, a, var) = super::garch::ar1_ols(y);
    let residuals: Vec<f64> = y.windows(2).map(|w| w[1] - c - a * w[0]).collect();
    let n = residuals.len();
    let loglik = gaussian_loglik(var * n as f64, n);
    let mean = if (1.0 - a).abs() > 1e-12 { c / (1.0 - a) } else { c };
    ArmaFit {
        p: 1,
        q: 0,
        ar_coefs: vec![a],
        ma_coefs: vec![],
        intercept: c,
        mean,
        innov_var: var,
        residuals,
        loglik,
        aicc: aicc(loglik, 3, n),
        fallback: true,
        tail: y[y.len() - 1..].to_vec(),
    }
}

/// Fit all `p <= p_max`, `q <= q_max` and keep the AICc minimizer.
pub fn fit_arma_auto(series: &[f64], p_max: usize, q_max: usize) -> Result<ArmaFit> {
    let n = series.len();
    if n < MIN_LEN {
        return Err(Error::Precondition(format!("ARMA needs at least {MIN_LEN} observations, got {n}")));
    }
    if super::garch::sample_var(series) == 0.0 {
        return Err(Error::DegenerateSeries);
    }
    let start = p_max;
    let mut best: Option<ArmaFit> = None;
    for p in 0..=p_max {
        for q in 0..=q_max {
            if let Some(f) = fit_candidate(series, start, p, q) {
                if best.as_ref().is_none_or(|b| f.aicc < b.aicc) {
                    best = Some(f);
                }
            }
        }
    }
    Ok(best.unwrap_or_else(|| {
        log::warn!("no ARMA candidate converged; using AR(1) least squares");
        ar1_fallback(series)
    }))
}
