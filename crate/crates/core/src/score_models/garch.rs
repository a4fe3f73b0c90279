//! AR(1)-GARCH(1,1) estimated jointly by Gaussian quasi-maximum likelihood.
//!
//! Model, for `i >= 2`:
//!
//! ```text
//! y_i = mu + a y_{i-1} + eps_i,      eps_i = sqrt(h_i) z_i
//! h_i = varsigma0 + zeta eps_{i-1}^2 + varsigma h_{i-1}
//! ```
//!
//! The first conditional variance is fixed at the sample variance of the
//! least-squares AR(1) residuals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::{self, Convergence, Options};

pub const MIN_LEN: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArGarchFit {
    pub mu: f64,
    pub a: f64,
    pub varsigma0: f64,
    pub zeta: f64,
    pub varsigma: f64,
    /// Conditional variances `h_2..h_N`.
    pub cond_var_path: Vec<f64>,
    /// Residuals `eps_2..eps_N`.
    pub residuals: Vec<f64>,
    pub loglik: f64,
    /// Initial conditional variance used by the recursion.
    pub h0: f64,
    /// Sample variance of the fitted series.
    pub sample_var: f64,
    pub last_obs: f64,
    pub convergence: Convergence,
}

impl ArGarchFit {
    /// One-step-ahead mean and variance from the end of the sample.
    pub fn forecast_next(&self) -> (f64, f64) {
        let last_var = *self.cond_var_path.last().unwrap_or(&self.h0);
        let last_resid = *self.residuals.last().unwrap_or(&0.0);
        forecast_ar_garch(self, self.last_obs, last_var, last_resid)
    }

    pub fn params(&self) -> [f64; 5] {
        [self.mu, self.a, self.varsigma0, self.zeta, self.varsigma]
    }

    pub fn is_valid(&self) -> bool {
        self.a.abs() < 1.0
            && self.varsigma0 > 0.0
            && self.zeta >= 0.0
            && self.varsigma >= 0.0
            && self.zeta + self.varsigma < 1.0
            && self.cond_var_path.iter().all(|&h| h > 0.0)
    }
}

/// `mean = mu + a*last_obs`, `variance = varsigma0 + zeta*last_resid^2 + varsigma*last_var`.
pub fn forecast_ar_garch(fit: &ArGarchFit, last_obs: f64, last_var: f64, last_resid: f64) -> (f64, f64) {
    (fit.mu + fit.a * last_obs, fit.varsigma0 + fit.zeta * last_resid * last_resid + fit.varsigma * last_var)
}

/// GARCH(1,1) variance recursion over residuals `eps`, starting from `h0`.
pub fn garch_recursion(varsigma0: f64, zeta: f64, varsigma: f64, eps: &[f64], h0: f64) -> Vec<f64> {
    let mut h = Vec::with_capacity(eps.len());
    if eps.is_empty() {
        return h;
    }
    h.push(h0);
    for i in 1..eps.len() {
        h.push(varsigma0 + zeta * eps[i - 1] * eps[i - 1] + varsigma * h[i - 1]);
    }
    h
}

/// Gaussian log-likelihood of the AR(1)-GARCH(1,1) model and its gradient with
/// respect to `theta = [mu, a, varsigma0, zeta, varsigma]`.
///
/// Returns `NaN` when the parameters make a conditional variance non-positive.
pub fn loglik_with_grad(y: &[f64], h0: f64, theta: &[f64; 5]) -> (f64, [f64; 5]) {
    let [mu, a, w, alpha, beta] = *theta;
    let ln2pi = (2.0 * std::f64::consts::PI).ln();
    let mut ll = 0.0;
    let mut grad = [0.0; 5];
    // state at i-1
    let mut eps_prev = 0.0;
    let mut deps_prev = [0.0; 5];
    let mut h_prev = 0.0;
    let mut dh_prev = [0.0; 5];
    for i in 1..y.len() {
        let eps = y[i] - mu - a * y[i - 1];
        let deps = [-1.0, -y[i - 1], 0.0, 0.0, 0.0];
        let (h, dh) = if i == 1 {
            (h0, [0.0; 5])
        } else {
            let h = w + alpha * eps_prev * eps_prev + beta * h_prev;
            let mut dh = [0.0; 5];
            for k in 0..5 {
                dh[k] = 2.0 * alpha * eps_prev * deps_prev[k] + beta * dh_prev[k];
            }
            dh[2] += 1.0;
            dh[3] += eps_prev * eps_prev;
            dh[4] += h_prev;
            (h, dh)
        };
        if !(h > 0.0) || !h.is_finite() {
            return (f64::NAN, [f64::NAN; 5]);
        }
        let e2h = eps * eps / h;
        ll += -0.5 * (ln2pi + h.ln() + e2h);
        let coef_h = -0.5 * (1.0 / h - e2h / h);
        let coef_e = -eps / h;
        for k in 0..5 {
            grad[k] += coef_h * dh[k] + coef_e * deps[k];
        }
        eps_prev = eps;
        deps_prev = deps;
        h_prev = h;
        dh_prev = dh;
    }
    (ll, grad)
}

/// Least-squares AR(1) with intercept: `(mu, a, residual variance)`.
pub fn ar1_ols(y: &[f64]) -> (f64, f64, f64) {
    let n = y.len() - 1;
    let x = &y[..n];
    let z = &y[1..];
    let mx = x.iter().sum::<f64>() / n as f64;
    let mz = z.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxz: f64 = x.iter().zip(z).map(|(a, b)| (a - mx) * (b - mz)).sum();
    let a = if sxx > 0.0 { sxz / sxx } else { 0.0 };
    let mu = mz - a * mx;
    let var = x.iter().zip(z).map(|(a_, b)| (b - mu - a * a_).powi(2)).sum::<f64>() / n as f64;
    (mu, a, var)
}

// unconstrained u = [mu, atanh(a), ln varsigma0, p, q] with
// zeta = e^p / (1 + e^p + e^q), varsigma = e^q / (1 + e^p + e^q)
fn to_natural(u: &[f64]) -> [f64; 5] {
    let (ep, eq) = (u[3].exp(), u[4].exp());
    let d = 1.0 + ep + eq;
    [u[0], u[1].tanh(), u[2].exp(), ep / d, eq / d]
}

fn to_unconstrained(theta: &[f64; 5]) -> Vec<f64> {
    let rest = 1.0 - theta[3] - theta[4];
    vec![theta[0], theta[1].atanh(), theta[2].ln(), (theta[3] / rest).ln(), (theta[4] / rest).ln()]
}

fn chain_rule(theta: &[f64; 5], g: &[f64; 5]) -> Vec<f64> {
    let [_, a, w, z, s] = *theta;
    vec![
        g[0],
        g[1] * (1.0 - a * a),
        g[2] * w,
        g[3] * z * (1.0 - z) - g[4] * z * s,
        -g[3] * z * s + g[4] * s * (1.0 - s),
    ]
}

pub fn sample_var(y: &[f64]) -> f64 {
    let n = y.len() as f64;
    let m = y.iter().sum::<f64>() / n;
    y.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)
}

pub fn fit_ar_garch(series: &[f64]) -> Result<ArGarchFit> {
    let n = series.len();
    if n < MIN_LEN {
        return Err(Error::Precondition(format!("AR-GARCH needs at least {MIN_LEN} observations, got {n}")));
    }
    let svar = sample_var(series);
    let scale = series.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if !(svar > 1e-24 * scale.max(1e-300).powi(2)) || svar == 0.0 {
        return Err(Error::DegenerateSeries);
    }
    let (mu0, a0, rvar) = ar1_ols(series);
    let h0 = rvar.max(1e-12 * svar);
    let a0 = a0.clamp(-0.95, 0.95);

    let nobs = (n - 1) as f64;
    let objective = |u: &[f64]| {
        let theta = to_natural(u);
        let (ll, g) = loglik_with_grad(series, h0, &theta);
        if !ll.is_finite() {
            return (f64::INFINITY, vec![0.0; 5]);
        }
        let gu = chain_rule(&theta, &g);
        (-ll / nobs, gu.iter().map(|v| -v / nobs).collect())
    };
    let starts: Vec<Vec<f64>> = [(0.05, 0.90), (0.10, 0.80), (0.20, 0.50)]
        .iter()
        .map(|&(z, s)| to_unconstrained(&[mu0, a0, h0 * (1.0 - z - s), z, s]))
        .collect();
    let opts = Options { max_iter: 400, grad_tol: 1e-7, f_tol: 1e-13 };
    let (best, used) = optim::multi_start(objective, &starts, opts)
        .ok_or_else(|| Error::NonConvergence("no start produced a finite likelihood".into()))?;
    if !best.converged {
        return Err(Error::NonConvergence(format!(
            "AR-GARCH: {} iterations, gradient norm {:.3e}",
            best.iterations, best.grad_norm
        )));
    }
    let theta = to_natural(&best.x);
    Ok(assemble(
        series,
        h0,
        svar,
        theta,
        Convergence {
            iterations: best.iterations,
            grad_norm: best.grad_norm,
            converged: best.converged,
            restarts_used: used,
        },
    ))
}

/// Fitted-model object at given parameters (no estimation).
pub fn ar_garch_at(series: &[f64], theta: [f64; 5], h0: f64) -> ArGarchFit {
    assemble(series, h0, sample_var(series), theta, Convergence::default())
}

fn assemble(series: &[f64], h0: f64, svar: f64, theta: [f64; 5], convergence: Convergence) -> ArGarchFit {
    let [mu, a, w, z, s] = theta;
    let residuals: Vec<f64> = series.windows(2).map(|p| p[1] - mu - a * p[0]).collect();
    let cond_var_path = garch_recursion(w, z, s, &residuals, h0);
    let (loglik, _) = loglik_with_grad(series, h0, &theta);
    ArGarchFit {
        mu,
        a,
        varsigma0: w,
        zeta: z,
        varsigma: s,
        cond_var_path,
        residuals,
        loglik,
        h0,
        sample_var: svar,
        last_obs: *series.last().unwrap_or(&0.0),
        convergence,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{simulate_ar_garch, GarchParams};

    fn fit_with(a: f64, w: f64, z: f64, s: f64, mu: f64) -> ArGarchFit {
        ArGarchFit {
            mu,
            a,
            varsigma0: w,
            zeta: z,
            varsigma: s,
            cond_var_path: vec![1.0],
            residuals: vec![1.0],
            loglik: 0.0,
            h0: 1.0,
            sample_var: 1.0,
            last_obs: 0.0,
            convergence: Convergence::default(),
        }
    }

    #[test]
    fn forecast_examples() {
        let f = fit_with(0.5, 0.05, 0.1, 0.8, 0.0);
        assert_eq!(forecast_ar_garch(&f, 1.0, 1.0, 1.0).0, 0.5);
        assert!((forecast_ar_garch(&f, 1.0, 1.0, 1.0).1 - 0.95).abs() < 1e-15);
        let f = fit_with(0.5, 0.3, 0.0, 0.0, 0.0);
        for (v, r) in [(1.0, 2.0), (5.0, -3.0), (0.1, 0.0)] {
            assert_eq!(forecast_ar_garch(&f, 0.0, v, r).1, 0.3);
        }
    }

    #[test]
    fn constant_series_is_degenerate() {
        assert_eq!(fit_ar_garch(&[2.0; 50]), Err(Error::DegenerateSeries));
        assert!(matches!(fit_ar_garch(&[1.0, 2.0, 3.0]), Err(Error::Precondition(_))));
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        let p = GarchParams { a: 0.4, varsigma0: 0.1, zeta: 0.15, varsigma: 0.7 };
        let y = simulate_ar_garch(&p, 400, 200, 11);
        let h0 = 0.5;
        let theta = [0.05, 0.3, 0.2, 0.1, 0.6];
        let (_, g) = loglik_with_grad(&y, h0, &theta);
        let mut f = |x: &[f64]| loglik_with_grad(&y, h0, &[x[0], x[1], x[2], x[3], x[4]]).0;
        let num = optim::numeric_gradient(&mut f, &theta);
        for k in 0..5 {
            let rel = (g[k] - num[k]).abs() / num[k].abs().max(1.0);
            assert!(rel < 1e-5, "component {k}: {} vs {}", g[k], num[k]);
        }
    }

    #[test]
    fn recursion_stays_positive() {
        let p = GarchParams { a: 0.5, varsigma0: 0.05, zeta: 0.1, varsigma: 0.8 };
        let y = simulate_ar_garch(&p, 500, 200, 3);
        let fit = fit_ar_garch(&y).unwrap();
        assert!(fit.is_valid());
        assert!(fit.cond_var_path.iter().all(|&h| h > 0.0));
        assert_eq!(fit.cond_var_path.len(), y.len() - 1);
    }

    #[test]
    fn recovers_parameters_on_long_sample() {
        let p = GarchParams { a: 0.5, varsigma0: 0.05, zeta: 0.1, varsigma: 0.8 };
        let y = simulate_ar_garch(&p, 5000, 500, 42);
        let fit = fit_ar_garch(&y).unwrap();
        assert!((fit.a - 0.5).abs() < 0.1);
        assert!((fit.varsigma0 - 0.05).abs() < 0.1);
        assert!((fit.zeta - 0.1).abs() < 0.1);
        assert!((fit.varsigma - 0.8).abs() < 0.1);
        let (m, v) = fit.forecast_next();
        assert!(m.is_finite() && v > 0.0);
    }

    #[test]
    fn white_noise_fit_close_to_homoscedastic_ar() {
        use rand::SeedableRng;
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let y: Vec<f64> = (0..2000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let fit = fit_ar_garch(&y).unwrap();
        let (_, _, var) = ar1_ols(&y);
        let n = (y.len() - 1) as f64;
        let ll_ar = -0.5 * n * ((2.0 * std::f64::consts::PI * var).ln() + 1.0);
        assert!(fit.loglik - ll_ar < 2.0 + 1e-9, "{} vs {}", fit.loglik, ll_ar);
        assert!(fit.loglik >= ll_ar - 2.0);
    }
}
