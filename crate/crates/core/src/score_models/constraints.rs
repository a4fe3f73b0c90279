//! Diagnostics for the parameter restrictions implied by unit marginal
//! variance of the eigenscores. Reported only; never imposed in estimation.

use serde::{Deserialize, Serialize};

use super::garch::ArGarchFit;
use super::sbekk::SbekkFit;
use super::var::VarFit;
use crate::linalg::Mat;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnivariateConstraintReport {
    /// `1 - a^2`.
    pub ar_side: f64,
    /// `varsigma0 / (s^2 (1 - zeta - varsigma))` with `s^2` the series variance.
    pub garch_side: f64,
    pub residual: f64,
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultivariateConstraintReport {
    /// Frobenius norm of `(S - Pi S Pi') - CC'/(1 - a - g)` on standardized scores.
    pub residual_norm: f64,
    /// `residual_norm / ||S - Pi S Pi'||`.
    pub relative: f64,
}

/// Univariate check of `1 - a^2 = varsigma0 / (1 - (zeta + varsigma))` after
/// standardizing the series by `scale` (its marginal variance).
pub fn check_univariate(fit: &ArGarchFit, scale: f64) -> UnivariateConstraintReport {
    let ar_side = 1.0 - fit.a * fit.a;
    let garch_side = fit.varsigma0 / scale / (1.0 - (fit.zeta + fit.varsigma));
    UnivariateConstraintReport { ar_side, garch_side, residual: (ar_side - garch_side).abs(), scale }
}

pub fn check_ar_garch(fit: &ArGarchFit) -> UnivariateConstraintReport {
    check_univariate(fit, fit.sample_var)
}

/// Multivariate check of `S - Pi S Pi' = CC' / (1 - (a + g))`, evaluated after
/// rescaling every score to unit marginal variance.
pub fn check_var_sbekk(var: &VarFit, bekk: &SbekkFit) -> MultivariateConstraintReport {
    let j = var.dim();
    let sd: Vec<f64> = (0..j).map(|k| var.marginal_cov[(k, k)].max(1e-300).sqrt()).collect();
    let d = Mat::from_fn(j, j, |r, c| if r == c { 1.0 / sd[r] } else { 0.0 });
    let dinv = Mat::from_fn(j, j, |r, c| if r == c { sd[r] } else { 0.0 });
    let s = &d * &var.marginal_cov * &d;
    let pi = &d * &var.pi1 * &dinv;
    let cct = &d * bekk.cct() * &d;
    let lhs = &s - &pi * &s * pi.transpose();
    let rhs = cct / (1.0 - (bekk.a + bekk.g));
    let residual_norm = (&lhs - rhs).norm();
    let denom = lhs.norm();
    MultivariateConstraintReport {
        residual_norm,
        relative: if denom > 0.0 { residual_norm / denom } else { residual_norm },
    }
}
