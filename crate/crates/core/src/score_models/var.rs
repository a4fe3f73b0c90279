use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ols, to_rows, Mat};

/// VAR(1) with intercept, fitted equation by equation by least squares.
#[derive(Debug, Clone, PartialEq)]
pub struct VarFit {
    /// `J x J`; row `r` holds the lag coefficients of equation `r`.
    pub pi1: Mat,
    pub intercept: Vec<f64>,
    /// `(N-1) x J`.
    pub residuals: Mat,
    /// Residual covariance `E'E / (N-1)`.
    pub sigma_resid: Mat,
    /// Sample covariance of the fitted scores.
    pub marginal_cov: Mat,
    pub spectral_radius: f64,
    pub last_obs: Vec<f64>,
}

impl VarFit {
    pub fn dim(&self) -> usize {
        self.intercept.len()
    }

    /// `c + Pi1 * last`.
    pub fn forecast_mean(&self, last: &[f64]) -> Vec<f64> {
        (0..self.dim())
            .map(|r| self.intercept[r] + (0..self.dim()).map(|c| self.pi1[(r, c)] * last[c]).sum::<f64>())
            .collect()
    }

    pub fn forecast_next(&self) -> Vec<f64> {
        self.forecast_mean(&self.last_obs)
    }

    /// Iterated point forecasts for horizons `1..=h`.
    pub fn forecast_path(&self, h: usize) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(h);
        let mut cur = self.last_obs.clone();
        for _ in 0..h {
            cur = self.forecast_mean(&cur);
            out.push(cur.clone());
        }
        out
    }
}

pub fn spectral_radius(m: &Mat) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let ev = m.clone().complex_eigenvalues();
    ev.iter().map(|c: &Complex<f64>| c.norm()).fold(0.0, f64::max)
}

pub fn fit_var1(scores: &Mat) -> Result<VarFit> {
    let n = scores.nrows();
    let j = scores.ncols();
    if j == 0 || n < j + 2 {
        return Err(Error::Precondition(format!("VAR(1) needs N >= J + 2 rows, got N={n}, J={j}")));
    }
    let m = n - 1;
    let z = Mat::from_fn(m, j + 1, |i, c| if c == 0 { 1.0 } else { scores[(i, c - 1)] });
    let y = scores.rows(1, m).into_owned();
    let b = ols(&z, &y).ok_or(Error::SingularRegressor)?;
    let intercept: Vec<f64> = (0..j).map(|r| b[(0, r)]).collect();
    let pi1 = Mat::from_fn(j, j, |r, c| b[(c + 1, r)]);
    let residuals = &y - &z * &b;
    let sigma_resid = residuals.transpose() * &residuals / m as f64;
    let means: Vec<f64> = (0..j).map(|c| scores.column(c).mean()).collect();
    let centered = Mat::from_fn(n, j, |i, c| scores[(i, c)] - means[c]);
    let marginal_cov = centered.transpose() * &centered / n as f64;
    let rho = spectral_radius(&pi1);
    if rho >= 1.0 {
        log::warn!("VAR(1) spectral radius {rho:.4} >= 1");
    }
    Ok(VarFit {
        pi1,
        intercept,
        residuals,
        sigma_resid,
        marginal_cov,
        spectral_radius: rho,
        last_obs: scores.row(n - 1).iter().copied().collect(),
    })
}

/// Serializable parameter block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarParams {
    pub pi1: Vec<Vec<f64>>,
    pub intercept: Vec<f64>,
    pub sigma_resid: Vec<Vec<f64>>,
    pub spectral_radius: f64,
}

impl From<&VarFit> for VarParams {
    fn from(f: &VarFit) -> Self {
        VarParams {
            pi1: to_rows(&f.pi1),
            intercept: f.intercept.clone(),
            sigma_resid: to_rows(&f.sigma_resid),
            spectral_radius: f.spectral_radius,
        }
    }
}
